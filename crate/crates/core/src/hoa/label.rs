use std::fmt;

/// Boolean formula over atomic-proposition indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelFormula {
    True,
    False,
    Ap(u32),
    Not(Box<LabelFormula>),
    And(Vec<LabelFormula>),
    Or(Vec<LabelFormula>),
}

impl LabelFormula {
    /// Evaluates under the assignment whose bit `i` is proposition `i`.
    pub fn eval(&self, bits: u32) -> bool {
        match self {
            Self::True => true,
            Self::False => false,
            Self::Ap(i) => bits >> i & 1 == 1,
            Self::Not(f) => !f.eval(bits),
            Self::And(fs) => fs.iter().all(|f| f.eval(bits)),
            Self::Or(fs) => fs.iter().any(|f| f.eval(bits)),
        }
    }

    /// Largest proposition index referenced.
    pub fn max_ap(&self) -> Option<u32> {
        match self {
            Self::True | Self::False => None,
            Self::Ap(i) => Some(*i),
            Self::Not(f) => f.max_ap(),
            Self::And(fs) | Self::Or(fs) => fs.iter().filter_map(|f| f.max_ap()).max(),
        }
    }

    /// Satisfying assignments among `0..2^width`, ascending.
    pub fn satisfying(&self, width: usize) -> Vec<u32> {
        (0..1u32 << width).filter(|&b| self.eval(b)).collect()
    }

    /// Compact formula for a set of assignments by Shannon expansion on the
    /// highest proposition first. `member` has length `2^width`.
    pub fn from_assignments(member: &[bool], width: usize) -> Self {
        debug_assert_eq!(member.len(), 1 << width);
        shannon(member, width)
    }
}

fn shannon(member: &[bool], width: usize) -> LabelFormula {
    if member.iter().all(|&m| m) {
        return LabelFormula::True;
    }
    if !member.iter().any(|&m| m) {
        return LabelFormula::False;
    }
    // member.len() == 2^width; split on the top proposition
    let var = width - 1;
    let half = member.len() / 2;
    let lo = shannon(&member[..half], var);
    let hi = shannon(&member[half..], var);
    let p = LabelFormula::Ap(var as u32);
    if lo == hi {
        return lo;
    }
    let pos = conj(p.clone(), hi);
    let neg = conj(LabelFormula::Not(Box::new(p)), lo);
    disj(pos, neg)
}

fn conj(lit: LabelFormula, rest: LabelFormula) -> LabelFormula {
    match rest {
        LabelFormula::True => lit,
        LabelFormula::False => LabelFormula::False,
        LabelFormula::And(mut fs) => {
            fs.insert(0, lit);
            LabelFormula::And(fs)
        }
        other => LabelFormula::And(vec![lit, other]),
    }
}

fn disj(a: LabelFormula, b: LabelFormula) -> LabelFormula {
    let mut parts = Vec::new();
    for f in [a, b] {
        match f {
            LabelFormula::False => {}
            LabelFormula::Or(fs) => parts.extend(fs),
            other => parts.push(other),
        }
    }
    match parts.len() {
        0 => LabelFormula::False,
        1 => parts.pop().unwrap(),
        _ => LabelFormula::Or(parts),
    }
}

impl fmt::Display for LabelFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::True => write!(f, "t"),
            Self::False => write!(f, "f"),
            Self::Ap(i) => write!(f, "{i}"),
            Self::Not(inner) => match **inner {
                Self::And(_) | Self::Or(_) => write!(f, "!({inner})"),
                _ => write!(f, "!{inner}"),
            },
            Self::And(fs) => {
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " & ")?;
                    }
                    match g {
                        Self::Or(_) => write!(f, "({g})")?,
                        _ => write!(f, "{g}")?,
                    }
                }
                Ok(())
            }
            Self::Or(fs) => {
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{g}")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_basics() {
        let f = LabelFormula::And(vec![
            LabelFormula::Ap(0),
            LabelFormula::Not(Box::new(LabelFormula::Ap(1))),
        ]);
        assert_eq!(f.satisfying(2), vec![1]);
        assert_eq!(f.to_string(), "0 & !1");
        assert_eq!(f.max_ap(), Some(1));
        assert_eq!(LabelFormula::True.satisfying(1), vec![0, 1]);
    }

    proptest! {
        #[test]
        fn shannon_form_is_exact(width in 0usize..5, seed in any::<u64>()) {
            let n = 1usize << width;
            let member: Vec<bool> = (0..n).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let f = LabelFormula::from_assignments(&member, width);
            for (b, &m) in member.iter().enumerate() {
                prop_assert_eq!(f.eval(b as u32), m);
            }
        }
    }
}
