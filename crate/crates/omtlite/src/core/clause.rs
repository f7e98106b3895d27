//! Clauses over Boolean literals.

use std::fmt;
use std::ops::Deref;

use super::lits::Lit;

/// A disjunction of literals, stored sorted by literal index with duplicates
/// removed.  The empty clause is valid and denotes unsatisfiability.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Clause(Vec<Lit>);

/// Result of normalizing a literal list into a clause.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum NormalizedClause {
    Clause(Clause),
    /// The list contained some literal together with its negation.
    Tautology,
}

impl Clause {
    /// Sorts, deduplicates, and checks for complementary literals.
    pub fn normalize(mut lits: Vec<Lit>) -> NormalizedClause {
        lits.sort_unstable();
        lits.dedup();
        for pair in lits.windows(2) {
            if pair[0].var() == pair[1].var() {
                return NormalizedClause::Tautology;
            }
        }
        NormalizedClause::Clause(Clause(lits))
    }

    /// Wraps literals already known to be sorted, distinct, and
    /// non-complementary.
    pub fn from_normalized(lits: Vec<Lit>) -> Clause {
        debug_assert!(matches!(
            Clause::normalize(lits.clone()),
            NormalizedClause::Clause(ref c) if c.0 == lits
        ));
        Clause(lits)
    }

    pub fn lits(&self) -> &[Lit] {
        &self.0
    }

    pub fn into_lits(self) -> Vec<Lit> {
        self.0
    }
}

impl Deref for Clause {
    type Target = [Lit];
    fn deref(&self) -> &[Lit] {
        &self.0
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
