//! Recurrent-network recognition of ω-regular languages.
//!
//! The crate covers the whole pipeline: importing deterministic Büchi
//! automata ([`hoa`]), deciding membership of lasso words `u v^ω`
//! ([`acceptance`]), generating balanced `u $ v` datasets ([`sampling`]),
//! training an Elman network from scratch ([`neural`]), and measuring
//! length generalization with summary statistics ([`experiment`]).

pub mod acceptance;
pub mod automaton;
pub mod experiment;
pub mod fixtures;
pub mod hoa;
pub mod neural;
pub mod rng;
pub mod sampling;

pub use acceptance::{accept_up, accept_up_bruteforce, accept_up_matexp, Label, Method, SuffixProfile, UpWord};
pub use automaton::{Alphabet, AssignmentSymbol, Dba, SinkClass, StateId};
pub use experiment::{EvalConfig, RunRecord};
pub use neural::{RnnParams, TrainConfig};
pub use sampling::{SampleMode, SamplerConfig, SequenceRecord};
