//! Fourier-Motzkin elimination over conjunctions of linear constraints.
//!
//! Constraints are of the form `sum(coeff * x) <= rhs` or `< rhs`; a negated
//! constraint is expressed by flipping signs.  Variables are eliminated one
//! at a time by combining every lower bound with every upper bound, which is
//! exponential in general but entirely adequate for the small systems the
//! test suites produce, and trivially correct.

use crate::core::Rational;

/// `sum of coeffs . x (<= | <) rhs`.  Coefficient lists are sorted by
/// variable index and contain no zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub strict: bool,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn new(mut coeffs: Vec<(usize, Rational)>, strict: bool, rhs: Rational) -> Self {
        coeffs.retain(|(_, c)| !c.is_zero());
        coeffs.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
        for (v, c) in coeffs {
            match merged.last_mut() {
                Some((lv, lc)) if *lv == v => *lc += &c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        LinearConstraint { coeffs: merged, strict, rhs }
    }

    /// The negation: `not (e <= r)` is `-e < -r`, `not (e < r)` is `-e <= -r`.
    pub fn negated(&self) -> Self {
        LinearConstraint {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, -c)).collect(),
            strict: !self.strict,
            rhs: -&self.rhs,
        }
    }

    fn coeff_of(&self, var: usize) -> Option<&Rational> {
        self.coeffs
            .binary_search_by_key(&var, |&(v, _)| v)
            .ok()
            .map(|i| &self.coeffs[i].1)
    }

    /// For a constant constraint (no variables), whether `0 (<=|<) rhs` holds.
    fn constant_holds(&self) -> bool {
        debug_assert!(self.coeffs.is_empty());
        if self.strict {
            self.rhs.is_positive()
        } else {
            !self.rhs.is_negative()
        }
    }

    pub fn evaluate(&self, assignment: &[Rational]) -> bool {
        let lhs: Rational =
            self.coeffs.iter().map(|(v, c)| c * &assignment[*v]).sum();
        if self.strict {
            lhs < self.rhs
        } else {
            lhs <= self.rhs
        }
    }
}

/// Result of minimizing a linear objective over a constraint conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FmMinimum {
    Infeasible,
    Unbounded,
    /// The infimum, and whether some feasible point attains it.
    Bounded { infimum: Rational, attained: bool },
}

/// Eliminates `var`, returning an equisatisfiable system over the rest.
fn eliminate(constraints: &[LinearConstraint], var: usize) -> Vec<LinearConstraint> {
    let mut uppers: Vec<&LinearConstraint> = Vec::new();
    let mut lowers: Vec<&LinearConstraint> = Vec::new();
    let mut rest: Vec<LinearConstraint> = Vec::new();
    for c in constraints {
        match c.coeff_of(var) {
            None => rest.push(c.clone()),
            Some(a) if a.is_positive() => uppers.push(c),
            Some(_) => lowers.push(c),
        }
    }
    for up in &uppers {
        let a_up = up.coeff_of(var).unwrap().clone();
        for lo in &lowers {
            let a_lo = lo.coeff_of(var).unwrap().clone();
            // Scale so the var coefficients cancel: |a_lo| * up + a_up * lo.
            let k_up = -&a_lo;
            let k_lo = a_up.clone();
            let mut coeffs: Vec<(usize, Rational)> = Vec::new();
            for (v, c) in &up.coeffs {
                if *v != var {
                    coeffs.push((*v, c * &k_up));
                }
            }
            for (v, c) in &lo.coeffs {
                if *v != var {
                    coeffs.push((*v, c * &k_lo));
                }
            }
            let rhs = &up.rhs * &k_up + &lo.rhs * &k_lo;
            let combined =
                LinearConstraint::new(coeffs, up.strict || lo.strict, rhs);
            rest.push(combined);
        }
    }
    // Drop trivially true rows and duplicates to curb growth.
    rest.retain(|c| !c.coeffs.is_empty() || !c.constant_holds());
    let mut seen: Vec<LinearConstraint> = Vec::new();
    for c in rest {
        if !seen.contains(&c) {
            seen.push(c);
        }
    }
    seen
}

fn variables_of(constraints: &[LinearConstraint]) -> Vec<usize> {
    let mut vars: Vec<usize> =
        constraints.iter().flat_map(|c| c.coeffs.iter().map(|&(v, _)| v)).collect();
    vars.sort_unstable();
    vars.dedup();
    vars
}

/// Whether the conjunction has a rational solution.
pub fn satisfiable(constraints: &[LinearConstraint]) -> bool {
    let mut system = constraints.to_vec();
    loop {
        if system.iter().any(|c| c.coeffs.is_empty() && !c.constant_holds()) {
            return false;
        }
        let vars = variables_of(&system);
        match vars.first() {
            None => return true,
            Some(&v) => system = eliminate(&system, v),
        }
    }
}

/// Minimizes `objective . x` subject to the constraints.
pub fn minimize(
    objective: &[(usize, Rational)],
    constraints: &[LinearConstraint],
) -> FmMinimum {
    if !satisfiable(constraints) {
        return FmMinimum::Infeasible;
    }
    // Introduce z with objective <= z, then project everything onto z; the
    // infimum of the objective is the infimum of the feasible z values.
    let z = variables_of(constraints)
        .last()
        .copied()
        .max(objective.iter().map(|&(v, _)| v).max())
        .map_or(0, |v| v + 1);
    let mut system = constraints.to_vec();
    let mut obj_coeffs: Vec<(usize, Rational)> =
        objective.iter().map(|(v, c)| (*v, c.clone())).collect();
    obj_coeffs.push((z, -Rational::one()));
    system.push(LinearConstraint::new(obj_coeffs, false, Rational::zero()));
    for v in variables_of(&system) {
        if v != z {
            system = eliminate(&system, v);
        }
    }
    // Remaining constraints mention z alone (or are constants, necessarily
    // consistent because the original system is satisfiable).
    let mut best: Option<(Rational, bool)> = None;
    for c in &system {
        match c.coeffs.as_slice() {
            [] => debug_assert!(c.constant_holds()),
            [(v, a)] => {
                debug_assert_eq!(*v, z);
                if a.is_positive() {
                    continue;
                }
                // a*z (<=|<) rhs with a < 0: z >= rhs/a (or >).
                let bound = &c.rhs / a;
                let stronger = match &best {
                    None => true,
                    Some((b, attained)) => {
                        bound > *b || (bound == *b && *attained && c.strict)
                    }
                };
                if stronger {
                    best = Some((bound, !c.strict));
                }
            }
            _ => unreachable!("projection left a multi-variable constraint"),
        }
    }
    match best {
        None => FmMinimum::Unbounded,
        Some((infimum, attained)) => FmMinimum::Bounded { infimum, attained },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn le(coeffs: &[(usize, &str)], rhs: &str) -> LinearConstraint {
        LinearConstraint::new(
            coeffs.iter().map(|&(v, c)| (v, r(c))).collect(),
            false,
            r(rhs),
        )
    }

    fn lt(coeffs: &[(usize, &str)], rhs: &str) -> LinearConstraint {
        LinearConstraint::new(
            coeffs.iter().map(|&(v, c)| (v, r(c))).collect(),
            true,
            r(rhs),
        )
    }

    #[test]
    fn detects_feasible_and_infeasible_boxes() {
        // 1 <= x <= 2, expressed as x <= 2 and -x <= -1.
        let feasible = vec![le(&[(0, "1")], "2"), le(&[(0, "-1")], "-1")];
        assert!(satisfiable(&feasible));
        // x <= 1 and x >= 2.
        let infeasible = vec![le(&[(0, "1")], "1"), le(&[(0, "-1")], "-2")];
        assert!(!satisfiable(&infeasible));
    }

    #[test]
    fn strictness_matters_at_touching_bounds() {
        // x <= 1 and x >= 1 is satisfiable; x < 1 and x >= 1 is not.
        assert!(satisfiable(&[le(&[(0, "1")], "1"), le(&[(0, "-1")], "-1")]));
        assert!(!satisfiable(&[lt(&[(0, "1")], "1"), le(&[(0, "-1")], "-1")]));
    }

    #[test]
    fn elimination_chains_through_shared_variables() {
        // x + y <= 2, y >= 3, x >= 0 is infeasible.
        let system = vec![
            le(&[(0, "1"), (1, "1")], "2"),
            le(&[(1, "-1")], "-3"),
            le(&[(0, "-1")], "0"),
        ];
        assert!(!satisfiable(&system));
        // Dropping x >= 0 makes it feasible (x can go negative).
        assert!(satisfiable(&system[..2]));
    }

    #[test]
    fn minimize_reports_attained_minimum() {
        // Minimize x subject to x >= 3.
        let got = minimize(&[(0, r("1"))], &[le(&[(0, "-1")], "-3")]);
        assert_eq!(got, FmMinimum::Bounded { infimum: r("3"), attained: true });
    }

    #[test]
    fn minimize_reports_unattained_infimum() {
        // Minimize x subject to x > 3.
        let got = minimize(&[(0, r("1"))], &[lt(&[(0, "-1")], "-3")]);
        assert_eq!(got, FmMinimum::Bounded { infimum: r("3"), attained: false });
    }

    #[test]
    fn minimize_detects_unbounded_and_infeasible() {
        assert_eq!(minimize(&[(0, r("1"))], &[le(&[(0, "1")], "5")]), FmMinimum::Unbounded);
        assert_eq!(
            minimize(&[(0, r("1"))], &[le(&[(0, "1")], "0"), le(&[(0, "-1")], "-1")]),
            FmMinimum::Infeasible
        );
    }

    #[test]
    fn minimize_combines_variables() {
        // Minimize x + 2y subject to x >= 1, y >= 1/2, x + y <= 10.
        let constraints = vec![
            le(&[(0, "-1")], "-1"),
            le(&[(1, "-1")], "-1/2"),
            le(&[(0, "1"), (1, "1")], "10"),
        ];
        let got = minimize(&[(0, r("1")), (1, r("2"))], &constraints);
        assert_eq!(got, FmMinimum::Bounded { infimum: r("2"), attained: true });
    }

    #[test]
    fn negation_flips_sign_and_strictness() {
        let c = le(&[(0, "2"), (1, "-1")], "3");
        let n = c.negated();
        assert!(n.strict);
        assert_eq!(n.rhs, r("-3"));
        assert_eq!(n.coeffs, vec![(0, r("-2")), (1, r("1"))]);
        assert_eq!(n.negated(), c);
    }

    #[test]
    fn evaluate_agrees_with_satisfiability_on_samples() {
        let c = lt(&[(0, "1"), (1, "1")], "2");
        assert!(c.evaluate(&[r("1/2"), r("1")]));
        assert!(!c.evaluate(&[r("1"), r("1")]));
    }
}
