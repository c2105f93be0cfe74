//! Built-in handcrafted automata.
//!
//! | name         | language                         | props | states |
//! |--------------|----------------------------------|-------|--------|
//! | `fig1`       | `G(a -> F b) & a`                | a, b  | 4      |
//! | `gf_a`       | `GF a` (infinitely often a)      | a     | 2      |
//! | `always_a`   | `G a`                            | a     | 2      |
//! | `universal`  | every word                       | a     | 1      |
//! | `cycle_K`    | counter mod K on `a`, K in {3, 8, 16, 32} | a | K |

use crate::automaton::{Dba, StateId};

/// Cycle lengths available as `cycle_K` fixtures.
pub const CYCLE_SIZES: [usize; 4] = [3, 8, 16, 32];

const A: u32 = 0b01;
const B: u32 = 0b10;

/// `G(a -> F b) & a` over `{a, b}`.
///
/// State 0 is the initial state, 1 means no pending obligation (accepting),
/// 2 means an `a` is waiting for a `b`, and 3 is the rejecting sink reached
/// when the first symbol lacks `a`.
pub fn fig1() -> Dba {
    Dba::from_fn(names(&["a", "b"]), 4, 0, &[1], |q, s| {
        let (a, b) = (s & A != 0, s & B != 0);
        match q {
            0 if !a => 3,
            0 | 1 | 2 if b => 1,
            0 | 2 => 2,
            1 if a => 2,
            1 => 1,
            _ => 3,
        }
    })
}

/// `GF a`: state 1 is entered exactly on `a`.
pub fn gf_a() -> Dba {
    Dba::from_fn(names(&["a"]), 2, 0, &[1], |_, s| if s & A != 0 { 1 } else { 0 })
}

/// `G a`: any `!a` falls into the rejecting sink 1.
pub fn always_a() -> Dba {
    Dba::from_fn(names(&["a"]), 2, 0, &[0], |q, s| if q == 0 && s & A != 0 { 0 } else { 1 })
}

/// One accepting state looping on everything.
pub fn universal() -> Dba {
    Dba::from_fn(names(&["a"]), 1, 0, &[0], |_, _| 0)
}

/// `k` states in a directed cycle advanced by `a`; `!a` stays put. Only
/// state 0 accepts, so a lasso is accepted iff its period reads `a` at least
/// once or it parks in state 0.
pub fn cycle(k: usize) -> Dba {
    assert!(k >= 1);
    Dba::from_fn(names(&["a"]), k, 0, &[0], |q, s| {
        if s & A != 0 {
            (q + 1) % k as StateId
        } else {
            q
        }
    })
}

/// All fixtures with their addressable names.
pub fn fixtures() -> Vec<(String, Dba)> {
    let mut out = vec![
        ("fig1".to_string(), fig1()),
        ("gf_a".to_string(), gf_a()),
        ("always_a".to_string(), always_a()),
        ("universal".to_string(), universal()),
    ];
    for k in CYCLE_SIZES {
        out.push((format!("cycle_{k}"), cycle(k)));
    }
    out
}

/// Looks up a fixture by name. `cycle_K` accepts any `K >= 1`.
pub fn fixture(name: &str) -> Option<Dba> {
    match name {
        "fig1" => Some(fig1()),
        "gf_a" => Some(gf_a()),
        "always_a" => Some(always_a()),
        "universal" => Some(universal()),
        _ => {
            let k: usize = name.strip_prefix("cycle_")?.parse().ok()?;
            (k >= 1).then(|| cycle(k))
        }
    }
}

fn names(n: &[&str]) -> Vec<String> {
    n.iter().map(|s| s.to_string()).collect()
}
