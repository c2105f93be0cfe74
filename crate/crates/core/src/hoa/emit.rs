use std::fmt::Write;

use super::LabelFormula;
use crate::automaton::Dba;

/// Renders `dba` as normalized HOA v1 text.
///
/// Edges are grouped by destination in ascending order and each group's
/// label is the Shannon-expanded formula of its assignment set, so the same
/// automaton always yields the same bytes.
pub fn emit_hoa(dba: &Dba) -> String {
    let width = dba.n_symbols();
    let mut out = String::new();
    writeln!(out, "HOA: v1").unwrap();
    writeln!(out, "States: {}", dba.n_states()).unwrap();
    writeln!(out, "Start: {}", dba.initial()).unwrap();
    write!(out, "AP: {}", dba.prop_count()).unwrap();
    for name in dba.ap_names() {
        write!(out, " {}", quote(name)).unwrap();
    }
    out.push('\n');
    writeln!(out, "acc-name: Buchi").unwrap();
    writeln!(out, "Acceptance: 1 Inf(0)").unwrap();
    let complete = if dba.is_complete() { " complete" } else { "" };
    writeln!(out, "properties: trans-labels explicit-labels state-acc deterministic{complete}").unwrap();
    writeln!(out, "--BODY--").unwrap();

    let table: Vec<Option<u32>> = dba.raw_table().collect();
    for q in 0..dba.n_states() {
        if dba.is_accepting(q as u32) {
            writeln!(out, "State: {q} {{0}}").unwrap();
        } else {
            writeln!(out, "State: {q}").unwrap();
        }
        let row = &table[q * width..(q + 1) * width];
        let mut dests: Vec<u32> = row.iter().flatten().copied().collect();
        dests.sort_unstable();
        dests.dedup();
        for dest in dests {
            let member: Vec<bool> = row.iter().map(|t| *t == Some(dest)).collect();
            let label = LabelFormula::from_assignments(&member, dba.prop_count());
            writeln!(out, "[{label}] {dest}").unwrap();
        }
    }
    writeln!(out, "--END--").unwrap();
    out
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('"');
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::hoa::{parse_hoa, validate_dba};

    #[test]
    fn trivial_automaton_text() {
        let text = emit_hoa(&fixtures::universal());
        assert!(text.contains("Acceptance: 1 Inf(0)"));
        assert!(text.contains("[t] 0"));
        assert_eq!(text, emit_hoa(&fixtures::universal()));
    }

    #[test]
    fn fixtures_round_trip() {
        for (name, d) in fixtures::fixtures() {
            let text = emit_hoa(&d);
            let back = validate_dba(&parse_hoa(&text).unwrap()).unwrap();
            assert_eq!(back, d, "{name}");
            assert_eq!(emit_hoa(&back), text, "{name}");
        }
    }

    #[test]
    fn names_with_quotes_survive() {
        let d = Dba::from_fn(vec!["x\"y".into()], 1, 0, &[0], |_, _| 0);
        let back = validate_dba(&parse_hoa(&emit_hoa(&d)).unwrap()).unwrap();
        assert_eq!(back.ap_names(), d.ap_names());
    }
}
