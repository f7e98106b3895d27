//! Exhaustive optimization over small Boolean + linear-arithmetic instances.
//!
//! The oracle enumerates every polarity vector over the distinct arithmetic
//! atoms, checks each conjunction for rational feasibility with
//! Fourier-Motzkin elimination, and inside every feasible arithmetic region
//! enumerates all Boolean assignments.  A weighted soft constraint
//! contributes its weight to an objective exactly when it evaluates to
//! false.  This is exponential and proudly so; instance sizes in the test
//! suites keep it fast enough.

use crate::core::Rational;
use crate::oracle::fm::{satisfiable, LinearConstraint};

/// Formula over Boolean variable indices and atom table indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleFormula {
    True,
    False,
    Bool(usize),
    Atom(usize),
    Not(Box<OracleFormula>),
    And(Vec<OracleFormula>),
    Or(Vec<OracleFormula>),
}

impl OracleFormula {
    fn evaluate(&self, bools: u64, atoms: u64) -> bool {
        match self {
            OracleFormula::True => true,
            OracleFormula::False => false,
            OracleFormula::Bool(i) => bools >> i & 1 == 1,
            OracleFormula::Atom(i) => atoms >> i & 1 == 1,
            OracleFormula::Not(f) => !f.evaluate(bools, atoms),
            OracleFormula::And(fs) => fs.iter().all(|f| f.evaluate(bools, atoms)),
            OracleFormula::Or(fs) => fs.iter().any(|f| f.evaluate(bools, atoms)),
        }
    }
}

/// One minimization objective: the weights of violated softs are summed.
#[derive(Clone, Debug, Default)]
pub struct OracleObjective {
    pub softs: Vec<(OracleFormula, Rational)>,
}

impl OracleObjective {
    /// The largest value the objective can take.
    pub fn range(&self) -> Rational {
        self.softs.iter().map(|(_, w)| w.clone()).sum()
    }
}

/// A complete instance for the oracle.
#[derive(Clone, Debug, Default)]
pub struct OracleInstance {
    pub num_bools: usize,
    /// Atom table; `OracleFormula::Atom(i)` is true when `atoms[i]` holds.
    pub atoms: Vec<LinearConstraint>,
    pub hard: Vec<OracleFormula>,
    pub objectives: Vec<OracleObjective>,
}

const MAX_ENUMERATED_BITS: usize = 28;

impl OracleInstance {
    /// Calls `visit` with the per-objective cost vector of every model.
    fn for_each_model(&self, visit: &mut impl FnMut(&[Rational])) {
        assert!(
            self.num_bools + self.atoms.len() <= MAX_ENUMERATED_BITS,
            "instance too large for exhaustive oracle"
        );
        let mut region = Vec::with_capacity(self.atoms.len());
        for atom_bits in 0u64..1 << self.atoms.len() {
            region.clear();
            for (i, atom) in self.atoms.iter().enumerate() {
                if atom_bits >> i & 1 == 1 {
                    region.push(atom.clone());
                } else {
                    region.push(atom.negated());
                }
            }
            if !satisfiable(&region) {
                continue;
            }
            'bools: for bool_bits in 0u64..1 << self.num_bools {
                for h in &self.hard {
                    if !h.evaluate(bool_bits, atom_bits) {
                        continue 'bools;
                    }
                }
                let costs: Vec<Rational> = self
                    .objectives
                    .iter()
                    .map(|obj| {
                        obj.softs
                            .iter()
                            .filter(|(f, _)| !f.evaluate(bool_bits, atom_bits))
                            .map(|(_, w)| w.clone())
                            .sum()
                    })
                    .collect();
                visit(&costs);
            }
        }
    }

    /// Whether any model exists at all.
    pub fn is_satisfiable(&self) -> bool {
        let mut found = false;
        self.for_each_model(&mut |_| found = true);
        found
    }

    /// Minimum cost of the single objective; `None` when the hard part is
    /// unsatisfiable.
    pub fn minimize_single(&self) -> Option<Rational> {
        assert_eq!(self.objectives.len(), 1);
        let mut best: Option<Rational> = None;
        self.for_each_model(&mut |costs| {
            if best.as_ref().is_none_or(|b| costs[0] < *b) {
                best = Some(costs[0].clone());
            }
        });
        best
    }

    /// Lexicographically minimal cost vector, objective order significant.
    pub fn minimize_lex(&self) -> Option<Vec<Rational>> {
        let mut best: Option<Vec<Rational>> = None;
        self.for_each_model(&mut |costs| {
            if best.as_deref().is_none_or(|b| costs < b) {
                best = Some(costs.to_vec());
            }
        });
        best
    }

    /// Minimal value of `max_j cost_j / range_j`, skipping objectives with
    /// zero range.
    pub fn minimize_maxmin(&self) -> Option<Rational> {
        let ranges: Vec<Rational> = self.objectives.iter().map(|o| o.range()).collect();
        let mut best: Option<Rational> = None;
        self.for_each_model(&mut |costs| {
            let value = costs
                .iter()
                .zip(&ranges)
                .filter(|(_, r)| !r.is_zero())
                .map(|(c, r)| c / r)
                .max()
                .unwrap_or_else(Rational::zero);
            if best.as_ref().is_none_or(|b| value < *b) {
                best = Some(value);
            }
        });
        best
    }
}
