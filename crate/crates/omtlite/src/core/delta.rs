//! Rationals extended with an infinitesimal component.
//!
//! Strict inequalities over the rationals are handled by introducing a
//! symbolic infinitesimal delta: the bound `x < c` becomes `x <= c - delta`
//! and `x > c` becomes `x >= c + delta`.  Values of the form `r + k * delta`
//! are ordered lexicographically on `(r, k)`, which is the standard total
//! order for any sufficiently small positive delta.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::rational::Rational;

/// A value `real + coeff * delta` for an infinitesimal `delta > 0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DeltaRational {
    real: Rational,
    coeff: Rational,
}

impl DeltaRational {
    pub fn new(real: Rational, coeff: Rational) -> Self {
        DeltaRational { real, coeff }
    }

    /// A plain rational value (zero delta component).
    pub fn from_rational(real: Rational) -> Self {
        DeltaRational { real, coeff: Rational::zero() }
    }

    pub fn zero() -> Self {
        DeltaRational::from_rational(Rational::zero())
    }

    /// `real + delta`, the least representable value above `real`.
    pub fn just_above(real: Rational) -> Self {
        DeltaRational { real, coeff: Rational::one() }
    }

    /// `real - delta`, the greatest representable value below `real`.
    pub fn just_below(real: Rational) -> Self {
        DeltaRational { real, coeff: -Rational::one() }
    }

    pub fn real(&self) -> &Rational {
        &self.real
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    /// True when the value has no infinitesimal component.
    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    /// Substitutes a concrete positive rational for delta.
    pub fn evaluate(&self, delta: &Rational) -> Rational {
        &self.real + &(&self.coeff * delta)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        DeltaRational { real: &self.real * k, coeff: &self.coeff * k }
    }
}

impl From<Rational> for DeltaRational {
    fn from(r: Rational) -> Self {
        DeltaRational::from_rational(r)
    }
}

impl Add for DeltaRational {
    type Output = DeltaRational;
    fn add(self, rhs: DeltaRational) -> DeltaRational {
        DeltaRational { real: self.real + rhs.real, coeff: self.coeff + rhs.coeff }
    }
}

impl Add<&DeltaRational> for &DeltaRational {
    type Output = DeltaRational;
    fn add(self, rhs: &DeltaRational) -> DeltaRational {
        DeltaRational { real: &self.real + &rhs.real, coeff: &self.coeff + &rhs.coeff }
    }
}

impl Sub for DeltaRational {
    type Output = DeltaRational;
    fn sub(self, rhs: DeltaRational) -> DeltaRational {
        DeltaRational { real: self.real - rhs.real, coeff: self.coeff - rhs.coeff }
    }
}

impl Sub<&DeltaRational> for &DeltaRational {
    type Output = DeltaRational;
    fn sub(self, rhs: &DeltaRational) -> DeltaRational {
        DeltaRational { real: &self.real - &rhs.real, coeff: &self.coeff - &rhs.coeff }
    }
}

impl AddAssign<&DeltaRational> for DeltaRational {
    fn add_assign(&mut self, rhs: &DeltaRational) {
        self.real += &rhs.real;
        self.coeff += &rhs.coeff;
    }
}

impl SubAssign<&DeltaRational> for DeltaRational {
    fn sub_assign(&mut self, rhs: &DeltaRational) {
        self.real -= &rhs.real;
        self.coeff -= &rhs.coeff;
    }
}

impl Mul<&Rational> for &DeltaRational {
    type Output = DeltaRational;
    fn mul(self, k: &Rational) -> DeltaRational {
        self.scale(k)
    }
}

impl Neg for DeltaRational {
    type Output = DeltaRational;
    fn neg(self) -> DeltaRational {
        DeltaRational { real: -self.real, coeff: -self.coeff }
    }
}

impl fmt::Display for DeltaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff.is_zero() {
            write!(f, "{}", self.real)
        } else if self.coeff == Rational::one() {
            write!(f, "{} + delta", self.real)
        } else if self.coeff == -Rational::one() {
            write!(f, "{} - delta", self.real)
        } else {
            write!(f, "{} + {}*delta", self.real, self.coeff)
        }
    }
}

impl fmt::Debug for DeltaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
