//! Import and export of deterministic state-based Büchi automata in the
//! Hanoi Omega-Automata (HOA v1) format.
//!
//! Only the subset needed for explicit-label deterministic Büchi automata is
//! accepted. Anything else fails with [`HoaError::Unsupported`] naming the
//! feature, rather than being silently reinterpreted.

mod emit;
mod label;
mod lexer;
mod parse;
mod validate;

pub use emit::emit_hoa;
pub use label::LabelFormula;
pub use parse::parse_hoa;
pub use validate::{complete, validate_dba};

use thiserror::Error;

/// One outgoing edge of a state block.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEdge {
    pub label: LabelFormula,
    pub dest: u32,
    /// Transition-level acceptance marks (rejected by validation).
    pub marks: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateBlock {
    pub id: u32,
    pub name: Option<String>,
    pub marks: Vec<u32>,
    pub edges: Vec<RawEdge>,
}

/// A parsed but not yet validated HOA document.
#[derive(Debug, Clone, PartialEq)]
pub struct RawAutomaton {
    /// Header items in document order, values re-rendered as text.
    pub header_fields: Vec<(String, String)>,
    pub ap_names: Vec<String>,
    pub start: Option<u32>,
    /// One block per state id `0..n`, in id order.
    pub state_blocks: Vec<StateBlock>,
    /// The `Acceptance:` value, e.g. `1 Inf(0)`.
    pub acceptance_spec: String,
}

impl RawAutomaton {
    pub fn n_states(&self) -> usize {
        self.state_blocks.len()
    }

    pub fn header(&self, key: &str) -> Option<&str> {
        self.header_fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HoaError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: unsupported feature: {feature}")]
    Unsupported {
        line: usize,
        col: usize,
        feature: String,
    },
    #[error("{line}:{col}: destination state {dest} does not exist ({n_states} states)")]
    MissingDestination {
        line: usize,
        col: usize,
        dest: u32,
        n_states: usize,
    },
    #[error("{line}:{col}: proposition index {index} out of range ({n_aps} APs declared)")]
    ApOutOfRange {
        line: usize,
        col: usize,
        index: u32,
        n_aps: usize,
    },
    #[error("acceptance condition is not state-based Büchi: {0}")]
    NotBuchi(String),
    #[error("transition-based acceptance marks on an edge of state {state}")]
    TransitionAcceptance { state: u32 },
    #[error("no initial state")]
    NoInitial,
    #[error("too many atomic propositions: {0} (at most {max})", max = crate::automaton::MAX_PROPS)]
    TooManyProps(usize),
    #[error("nondeterministic: state {state} has two edges enabled by assignment {assignment}")]
    Nondeterministic { state: u32, assignment: String },
}

impl HoaError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        Self::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(line: usize, col: usize, feature: impl Into<String>) -> Self {
        Self::Unsupported {
            line,
            col,
            feature: feature.into(),
        }
    }

    /// Source position for errors raised while parsing.
    pub fn position(&self) -> Option<(usize, usize)> {
        match *self {
            Self::Syntax { line, col, .. }
            | Self::Unsupported { line, col, .. }
            | Self::MissingDestination { line, col, .. }
            | Self::ApOutOfRange { line, col, .. } => Some((line, col)),
            _ => None,
        }
    }
}
