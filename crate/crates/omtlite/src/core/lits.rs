//! Boolean variables, literals, and three-valued truth.
//!
//! A literal packs its variable and sign into a single `u32`: variable `v`
//! with positive polarity is `2v`, negated is `2v + 1`.  This makes literal
//! negation an XOR and gives literals a dense index for watch lists.

use std::fmt;
use std::ops::Not;

/// A Boolean variable, numbered from 0.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// A literal: a variable with a polarity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive as u32))
    }

    pub fn positive(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn negative(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for per-literal arrays.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> Lit {
        Lit(index as u32)
    }

    /// The literal's truth value when its variable is assigned `value`.
    pub fn apply(self, value: LBool) -> LBool {
        if self.is_positive() {
            value
        } else {
            !value
        }
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_positive() {
            write!(f, "{}", self.var())
        } else {
            write!(f, "!{}", self.var())
        }
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Three-valued truth: true, false, or unassigned.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum LBool {
    True,
    False,
    #[default]
    Undef,
}

impl LBool {
    pub fn from_bool(b: bool) -> LBool {
        if b {
            LBool::True
        } else {
            LBool::False
        }
    }

    pub fn is_true(self) -> bool {
        self == LBool::True
    }

    pub fn is_false(self) -> bool {
        self == LBool::False
    }

    pub fn is_undef(self) -> bool {
        self == LBool::Undef
    }
}

impl Not for LBool {
    type Output = LBool;
    fn not(self) -> LBool {
        match self {
            LBool::True => LBool::False,
            LBool::False => LBool::True,
            LBool::Undef => LBool::Undef,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_packing_round_trips() {
        let v = Var(7);
        let p = Lit::positive(v);
        let n = Lit::negative(v);
        assert_eq!(p.var(), v);
        assert_eq!(n.var(), v);
        assert!(p.is_positive());
        assert!(!n.is_positive());
        assert_eq!(p.index(), 14);
        assert_eq!(n.index(), 15);
        assert_eq!(Lit::from_index(15), n);
    }

    #[test]
    fn negation_is_involutive() {
        let l = Lit::negative(Var(3));
        assert_eq!(!!l, l);
        assert_ne!(!l, l);
        assert_eq!((!l).var(), l.var());
    }

    #[test]
    fn apply_respects_polarity() {
        let v = Var(0);
        assert_eq!(Lit::positive(v).apply(LBool::True), LBool::True);
        assert_eq!(Lit::negative(v).apply(LBool::True), LBool::False);
        assert_eq!(Lit::negative(v).apply(LBool::Undef), LBool::Undef);
    }
}
