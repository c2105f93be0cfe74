//! Membership of ultimately periodic words `u v^ω` in the language of a DBA.
//!
//! Three deciders are provided and must always agree:
//!
//! * [`accept_up`] iterates the function `q ↦ δ*(q, v)` from the end of `u`
//!   until it revisits a state. This is the production path.
//! * [`accept_up_matexp`] finds the same cycle with boolean matrix powers.
//! * [`accept_up_bruteforce`] unrolls enough copies of `v` to be inside the
//!   cycle and looks for accepting visits directly.

use serde::{Deserialize, Serialize};

use crate::automaton::{Dba, StateId};

/// An ultimately periodic word `u v^ω` over assignment indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UpWord {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
}

impl UpWord {
    /// Panics if `v` is empty.
    pub fn new(u: Vec<u32>, v: Vec<u32>) -> Self {
        assert!(!v.is_empty(), "period of an ultimately periodic word must be nonempty");
        Self { u, v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Reject,
    Accept,
}

impl Label {
    pub fn from_bool(accept: bool) -> Self {
        if accept {
            Label::Accept
        } else {
            Label::Reject
        }
    }

    pub fn is_accept(self) -> bool {
        self == Label::Accept
    }

    /// 1 for accept, 0 for reject.
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn negate(self) -> Self {
        Self::from_bool(!self.is_accept())
    }
}

/// What reading `v` once does from every state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixProfile {
    /// `end_state[q] = δ*(q, v)`.
    pub end_state: Vec<StateId>,
    /// Whether the segment from `q` over `v` touches an accepting state,
    /// counting `q` itself.
    pub visits_accepting: Vec<bool>,
}

/// Runs `v` once from every state. Costs exactly `n_states · |v|` steps.
pub fn suffix_profile(dba: &Dba, v: &[u32]) -> SuffixProfile {
    assert!(!v.is_empty(), "suffix must be nonempty");
    let n = dba.n_states();
    let mut end_state = Vec::with_capacity(n);
    let mut visits_accepting = Vec::with_capacity(n);
    for q0 in 0..n as StateId {
        let mut q = q0;
        let mut seen = dba.is_accepting(q);
        for &s in v {
            q = dba.step(q, s);
            seen |= dba.is_accepting(q);
        }
        end_state.push(q);
        visits_accepting.push(seen);
    }
    SuffixProfile {
        end_state,
        visits_accepting,
    }
}

/// Decides `u v^ω ∈ L(dba)` by iterating the suffix map to its cycle.
pub fn accept_up(dba: &Dba, w: &UpWord) -> Label {
    let profile = suffix_profile(dba, &w.v);
    Label::from_bool(cycle_from(&profile, dba.run_prefix(&w.u)).accepting)
}

/// Cycle reached by iterating `end_state` from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleInfo {
    /// Iterations before the first cycle state is reached.
    pub entry: usize,
    pub period: usize,
    pub accepting: bool,
}

pub fn cycle_from(profile: &SuffixProfile, start: StateId) -> CycleInfo {
    let n = profile.end_state.len();
    // first_seen[q] = iteration index at which q was first produced
    let mut first_seen = vec![usize::MAX; n];
    let mut q = start;
    let mut i = 0;
    while first_seen[q as usize] == usize::MAX {
        first_seen[q as usize] = i;
        q = profile.end_state[q as usize];
        i += 1;
    }
    let entry = first_seen[q as usize];
    debug_assert!(entry < n && i <= n);
    let period = i - entry;
    let mut accepting = false;
    let mut c = q;
    for _ in 0..period {
        accepting |= profile.visits_accepting[c as usize];
        c = profile.end_state[c as usize];
    }
    CycleInfo {
        entry,
        period,
        accepting,
    }
}

/// Square boolean matrix stored as bit rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BoolMatrix {
    pub fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i);
        }
        m
    }

    /// Adjacency matrix of a function `i ↦ f[i]`.
    pub fn from_function(f: &[StateId]) -> Self {
        let mut m = Self::zeros(f.len());
        for (i, &j) in f.iter().enumerate() {
            m.set(i, j as usize);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    /// Boolean product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n);
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            let base = i * out.words;
            for k in 0..self.n {
                if self.get(i, k) {
                    for (o, r) in out.bits[base..base + out.words].iter_mut().zip(rhs.row(k)) {
                        *o |= r;
                    }
                }
            }
        }
        out
    }

    pub fn or(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (o, r) in out.bits.iter_mut().zip(&rhs.bits) {
            *o |= r;
        }
        out
    }

    /// Reflexive-transitive closure `(M ∨ I)^m` with `m ≥ n - 1`, by repeated squaring.
    pub fn reflexive_closure(&self) -> Self {
        let mut r = self.or(&Self::identity(self.n));
        let mut reach = 1usize;
        while reach + 1 < self.n {
            r = r.mul(&r);
            reach *= 2;
        }
        r
    }
}

/// Decides acceptance via boolean matrix exponentiation on the suffix map.
///
/// With `R = (M ∨ I)^n` the reachability relation (zero or more steps), a
/// state `q` lies on a cycle iff `(M · R)[q][q]`, i.e. `M^k[q][q]` for some
/// `1 ≤ k ≤ n`. The word is accepted iff a cycle state reachable from the
/// end of `u` has an accepting segment.
pub fn accept_up_matexp(dba: &Dba, w: &UpWord) -> Label {
    let profile = suffix_profile(dba, &w.v);
    let start = dba.run_prefix(&w.u) as usize;
    let m = BoolMatrix::from_function(&profile.end_state);
    let reach = m.reflexive_closure();
    let returns = m.mul(&reach);
    let accept = (0..dba.n_states())
        .any(|c| reach.get(start, c) && returns.get(c, c) && profile.visits_accepting[c]);
    Label::from_bool(accept)
}

/// Independent oracle: simulate `u` then `2n + 2` copies of `v` and accept iff
/// one of the last `n + 1` copies visits an accepting state (its start state
/// included).
pub fn accept_up_bruteforce(dba: &Dba, w: &UpWord) -> Label {
    assert!(!w.v.is_empty(), "suffix must be nonempty");
    let n = dba.n_states();
    let copies = 2 * n + 2;
    let mut q = dba.initial();
    for &s in &w.u {
        q = dba.step(q, s);
    }
    let mut accept = false;
    for copy in 0..copies {
        let mut visited = dba.is_accepting(q);
        for &s in &w.v {
            q = dba.step(q, s);
            visited |= dba.is_accepting(q);
        }
        if copy >= copies - (n + 1) {
            accept |= visited;
        }
    }
    Label::from_bool(accept)
}

/// Which decider to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Iterate,
    Matexp,
    Brute,
}

impl Method {
    pub fn decide(self, dba: &Dba, w: &UpWord) -> Label {
        match self {
            Method::Iterate => accept_up(dba, w),
            Method::Matexp => accept_up_matexp(dba, w),
            Method::Brute => accept_up_bruteforce(dba, w),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iterate" => Ok(Method::Iterate),
            "matexp" => Ok(Method::Matexp),
            "brute" => Ok(Method::Brute),
            other => Err(format!("unknown method {other:?} (iterate, matexp, brute)")),
        }
    }
}
