//! Executable deterministic Büchi automata over assignment alphabets.
//!
//! Symbols are truth assignments to the atomic propositions, indexed by the
//! integer whose bit `i` is the value of proposition `i`. The separator `$`
//! takes the index right after the last assignment, so an automaton over
//! `|P|` propositions has an alphabet of `2^|P| + 1` symbols.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Upper bound on the number of atomic propositions.
pub const MAX_PROPS: usize = 16;

pub type StateId = u32;

/// Marker for an undefined transition in a partial automaton.
const MISSING: StateId = StateId::MAX;

/// One truth assignment to all propositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AssignmentSymbol {
    bits: u32,
    width: u8,
}

impl AssignmentSymbol {
    /// Returns `None` when `bits` does not fit in `width` propositions.
    pub fn new(bits: u32, width: usize) -> Option<Self> {
        if width > MAX_PROPS || (bits as u64) >= (1u64 << width) {
            return None;
        }
        Some(Self {
            bits,
            width: width as u8,
        })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn width(self) -> usize {
        self.width as usize
    }

    /// Truth value of proposition `prop`.
    pub fn holds(self, prop: usize) -> bool {
        self.bits >> prop & 1 == 1
    }

    pub fn index(self) -> usize {
        self.bits as usize
    }
}

/// The input alphabet of an automaton: all assignments plus the separator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    pub prop_count: usize,
}

impl Alphabet {
    pub fn new(prop_count: usize) -> Self {
        assert!(prop_count <= MAX_PROPS, "at most {MAX_PROPS} propositions");
        Self { prop_count }
    }

    /// Number of assignment symbols, `2^|P|`.
    pub fn assignments(self) -> usize {
        1 << self.prop_count
    }

    /// Total alphabet size including the separator.
    pub fn size(self) -> usize {
        self.assignments() + 1
    }

    pub fn separator_index(self) -> usize {
        self.assignments()
    }

    pub fn is_assignment(self, index: usize) -> bool {
        index < self.assignments()
    }
}

/// Sink classification of a single state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SinkClass {
    AcceptingSink,
    RejectingSink,
    NotSink,
}

/// A deterministic Büchi automaton with a dense transition table.
///
/// The table is `n_states × 2^|P|`. An automaton produced by
/// [`crate::hoa::validate_dba`] may be partial; every other entry point
/// expects a complete one (see [`crate::hoa::complete`]).
#[derive(Clone, PartialEq, Eq)]
pub struct Dba {
    n_states: usize,
    initial: StateId,
    delta: Vec<StateId>,
    accepting: Vec<bool>,
    ap_names: Vec<String>,
}

impl fmt::Debug for Dba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dba")
            .field("n_states", &self.n_states)
            .field("initial", &self.initial)
            .field("accepting", &self.accepting_states())
            .field("ap_names", &self.ap_names)
            .finish()
    }
}

impl Dba {
    /// Builds a complete automaton from a transition function.
    pub fn from_fn<F>(
        ap_names: Vec<String>,
        n_states: usize,
        initial: StateId,
        accepting: &[StateId],
        mut next: F,
    ) -> Self
    where
        F: FnMut(StateId, u32) -> StateId,
    {
        let width = 1usize << ap_names.len();
        let mut delta = Vec::with_capacity(n_states * width);
        for q in 0..n_states as StateId {
            for bits in 0..width as u32 {
                let target = next(q, bits);
                assert!((target as usize) < n_states, "target {target} out of range");
                delta.push(target);
            }
        }
        Self::from_parts(ap_names, n_states, initial, accepting, delta)
    }

    /// Builds a possibly partial automaton. `None` entries mark missing transitions.
    pub fn from_partial(
        ap_names: Vec<String>,
        n_states: usize,
        initial: StateId,
        accepting: &[StateId],
        table: &[Option<StateId>],
    ) -> Self {
        let delta = table.iter().map(|t| t.unwrap_or(MISSING)).collect();
        Self::from_parts(ap_names, n_states, initial, accepting, delta)
    }

    fn from_parts(
        ap_names: Vec<String>,
        n_states: usize,
        initial: StateId,
        accepting: &[StateId],
        delta: Vec<StateId>,
    ) -> Self {
        assert!(ap_names.len() <= MAX_PROPS, "at most {MAX_PROPS} propositions");
        assert!(n_states >= 1, "automaton needs at least one state");
        assert!((initial as usize) < n_states, "initial state out of range");
        assert_eq!(delta.len(), n_states << ap_names.len());
        let mut acc = vec![false; n_states];
        for &q in accepting {
            acc[q as usize] = true;
        }
        Self {
            n_states,
            initial,
            delta,
            accepting: acc,
            ap_names,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn ap_names(&self) -> &[String] {
        &self.ap_names
    }

    pub fn prop_count(&self) -> usize {
        self.ap_names.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.prop_count())
    }

    /// Number of assignment symbols, `2^|P|`.
    pub fn n_symbols(&self) -> usize {
        1 << self.prop_count()
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting[q as usize]
    }

    pub fn accepting_states(&self) -> BTreeSet<StateId> {
        (0..self.n_states as StateId)
            .filter(|&q| self.accepting[q as usize])
            .collect()
    }

    /// Transition lookup that tolerates partial automata.
    pub fn try_step(&self, q: StateId, sym: u32) -> Option<StateId> {
        let t = self.delta[q as usize * self.n_symbols() + sym as usize];
        (t != MISSING).then_some(t)
    }

    /// `δ(q, sym)`. Panics on an undefined transition.
    #[inline]
    pub fn step(&self, q: StateId, sym: u32) -> StateId {
        debug_assert!((sym as usize) < self.n_symbols(), "symbol {sym} out of range");
        let t = self.delta[q as usize * self.n_symbols() + sym as usize];
        assert!(t != MISSING, "undefined transition from state {q} on symbol {sym}");
        t
    }

    /// Row of successors for `q`, indexed by assignment bits.
    pub fn successors(&self, q: StateId) -> &[StateId] {
        let w = self.n_symbols();
        &self.delta[q as usize * w..(q as usize + 1) * w]
    }

    /// Whether every `(state, assignment)` pair has a successor.
    pub fn is_complete(&self) -> bool {
        !self.delta.contains(&MISSING)
    }

    /// State reached after reading `u` from the initial state.
    pub fn run_prefix(&self, u: &[u32]) -> StateId {
        self.run_from(self.initial, u)
    }

    pub fn run_from(&self, start: StateId, word: &[u32]) -> StateId {
        word.iter().fold(start, |q, &s| self.step(q, s))
    }

    /// Per-state sink tags. A state is a sink iff all its defined transitions
    /// loop back and none are missing.
    pub fn classify_sinks(&self) -> Vec<SinkClass> {
        (0..self.n_states as StateId)
            .map(|q| {
                let row = self.successors(q);
                if row.iter().all(|&t| t == q) {
                    if self.is_accepting(q) {
                        SinkClass::AcceptingSink
                    } else {
                        SinkClass::RejectingSink
                    }
                } else {
                    SinkClass::NotSink
                }
            })
            .collect()
    }

    pub(crate) fn raw_table(&self) -> impl Iterator<Item = Option<StateId>> + '_ {
        self.delta.iter().map(|&t| (t != MISSING).then_some(t))
    }

    /// Copy of this automaton with one extra state appended.
    pub(crate) fn with_trap_state(&self) -> Self {
        let w = self.n_symbols();
        let trap = self.n_states as StateId;
        let mut delta = Vec::with_capacity((self.n_states + 1) * w);
        for &t in &self.delta {
            delta.push(if t == MISSING { trap } else { t });
        }
        delta.extend(std::iter::repeat(trap).take(w));
        let mut accepting = self.accepting.clone();
        accepting.push(false);
        Self {
            n_states: self.n_states + 1,
            initial: self.initial,
            delta,
            accepting,
            ap_names: self.ap_names.clone(),
        }
    }
}

/// Renders an assignment as a conjunction of literals, e.g. `a&!b`.
pub fn describe_symbol(ap_names: &[String], bits: u32) -> String {
    if ap_names.is_empty() {
        return "t".to_string();
    }
    ap_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            if bits >> i & 1 == 1 {
                name.clone()
            } else {
                format!("!{name}")
            }
        })
        .collect::<Vec<_>>()
        .join("&")
}
