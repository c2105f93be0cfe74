use std::path::Path;

use omega_lab::hoa::{complete, parse_hoa, validate_dba};
use omega_lab::{fixtures, Dba};

use crate::error::CliError;

/// An automaton loaded from `fixture:NAME` or a HOA file, completed if it
/// was partial.
pub struct Loaded {
    pub name: String,
    pub dba: Dba,
    pub completion_added_state: bool,
}

pub fn load(source: &str) -> Result<Loaded, CliError> {
    if let Some(name) = source.strip_prefix("fixture:") {
        let dba = fixtures::fixture(name).ok_or_else(|| {
            let known: Vec<String> = fixtures::fixtures().into_iter().map(|(n, _)| n).collect();
            CliError::config(format!("unknown fixture {name:?}; known: {} (cycle_K takes any K >= 1)", known.join(", ")))
        })?;
        return Ok(Loaded {
            name: name.to_string(),
            dba,
            completion_added_state: false,
        });
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{source}: {e}")))?;
    let partial = parse_hoa(&text)
        .and_then(|raw| validate_dba(&raw))
        .map_err(|e| match e.position() {
            Some(_) => CliError::config(format!("{source}:{e}")),
            None => CliError::config(format!("{source}: {e}")),
        })?;
    let dba = complete(&partial);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "automaton".into());
    Ok(Loaded {
        name,
        completion_added_state: dba.n_states() != partial.n_states(),
        dba,
    })
}
