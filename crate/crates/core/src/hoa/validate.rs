use super::{HoaError, RawAutomaton};
use crate::automaton::{Dba, StateId, MAX_PROPS};

/// Checks that `raw` is a deterministic state-based Büchi automaton and
/// expands its labels into an explicit transition table.
///
/// Determinism is decided by enumerating every assignment, whatever the
/// `properties:` header claims. The result may be partial.
pub fn validate_dba(raw: &RawAutomaton) -> Result<Dba, HoaError> {
    let n_props = raw.ap_names.len();
    if n_props > MAX_PROPS {
        return Err(HoaError::TooManyProps(n_props));
    }
    let spec: String = raw.acceptance_spec.split_whitespace().collect();
    if spec != "1Inf(0)" {
        return Err(HoaError::NotBuchi(raw.acceptance_spec.clone()));
    }
    let initial = raw.start.ok_or(HoaError::NoInitial)?;
    if raw.state_blocks.is_empty() {
        return Err(HoaError::NoInitial);
    }

    let width = 1usize << n_props;
    let n = raw.state_blocks.len();
    let mut table: Vec<Option<StateId>> = vec![None; n * width];
    let mut accepting = Vec::new();
    for block in &raw.state_blocks {
        match block.marks.as_slice() {
            [] => {}
            [0] => accepting.push(block.id),
            other => {
                return Err(HoaError::NotBuchi(format!(
                    "state {} carries marks {other:?}",
                    block.id
                )))
            }
        }
        let row = &mut table[block.id as usize * width..(block.id as usize + 1) * width];
        for edge in &block.edges {
            if !edge.marks.is_empty() {
                return Err(HoaError::TransitionAcceptance { state: block.id });
            }
            for bits in edge.label.satisfying(n_props) {
                let slot = &mut row[bits as usize];
                if slot.is_some() {
                    return Err(HoaError::Nondeterministic {
                        state: block.id,
                        assignment: describe_assignment(&raw.ap_names, bits),
                    });
                }
                *slot = Some(edge.dest);
            }
        }
    }
    Ok(Dba::from_partial(
        raw.ap_names.clone(),
        n,
        initial,
        &accepting,
        &table,
    ))
}

/// Routes every missing transition to a fresh non-accepting trap state.
/// A complete automaton is returned unchanged.
pub fn complete(dba: &Dba) -> Dba {
    if dba.is_complete() {
        dba.clone()
    } else {
        dba.with_trap_state()
    }
}

fn describe_assignment(names: &[String], bits: u32) -> String {
    let parts: Vec<String> = names
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{n}={}", bits >> i & 1))
        .collect();
    format!("{{{}}}", parts.join(", "))
}
