//! Formal substitution of a truncated series into its system, by sparse
//! exponent-map arithmetic. Deliberately shares no code with the recursion
//! so it can serve as an independent check of it.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::rational::{int, Rational};
use crate::recursion::SeriesSolution;
use crate::systems::{QuadraticSystem, SystemError};

/// Generalized power series `sum c_e t^e` with finitely many terms.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FormalSeries(pub BTreeMap<Rational, Rational>);

impl FormalSeries {
    pub fn constant(c: Rational) -> Self {
        let mut s = FormalSeries::default();
        s.add_term(Rational::zero(), c);
        s
    }

    pub fn add_term(&mut self, exponent: Rational, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.0.entry(exponent.clone()).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.0.remove(&exponent);
        }
    }

    pub fn add(&self, other: &FormalSeries) -> FormalSeries {
        let mut out = self.clone();
        for (e, c) in &other.0 {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> FormalSeries {
        let mut out = FormalSeries::default();
        for (e, c) in &self.0 {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &FormalSeries) -> FormalSeries {
        let mut out = FormalSeries::default();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &other.0 {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }

    /// Term-by-term `d/dt`.
    pub fn derivative(&self) -> FormalSeries {
        let mut out = FormalSeries::default();
        for (e, c) in &self.0 {
            out.add_term(e - int(1), c * e);
        }
        out
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn order(&self) -> Option<&Rational> {
        self.0.keys().next()
    }
}

/// Each variable of a solution as a formal series.
pub fn series_of(sol: &SeriesSolution) -> Vec<FormalSeries> {
    sol.variables
        .iter()
        .map(|v| {
            let mut s = FormalSeries::default();
            for t in &v.terms {
                s.add_term(t.exponent.clone(), t.coeff.clone());
            }
            s
        })
        .collect()
}

/// `y_j' - f_j(y)` for every equation, as exact formal series.
pub fn residual_series(
    sys: &QuadraticSystem,
    sol: &SeriesSolution,
) -> Result<Vec<FormalSeries>, SystemError> {
    if sys.n_vars() != sol.n_vars() {
        return Err(SystemError::StateLength {
            expected: sys.n_vars(),
            found: sol.n_vars(),
        });
    }
    let ys = series_of(sol);
    Ok(sys
        .rhs
        .iter()
        .enumerate()
        .map(|(j, monomials)| {
            let mut r = ys[j].derivative();
            for m in monomials {
                let term = m
                    .factors()
                    .iter()
                    .fold(FormalSeries::constant(m.coeff.clone()), |acc, &k| acc.mul(&ys[k]));
                r = r.add(&term.scale(&int(-1)));
            }
            r
        })
        .collect())
}

/// Highest exponent of equation `j` whose residual coefficient is fully
/// determined by the retained steps: `alpha_j - 1 + N Q`.
pub fn guaranteed_exponent(sol: &SeriesSolution, j: usize) -> Rational {
    &sol.variables[j].leading_exponent - int(1) + int(sol.truncation as i64) * &sol.q
}

/// A nonzero residual coefficient inside the guaranteed range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualViolation {
    pub equation: String,
    pub exponent: Rational,
    pub coeff: Rational,
}

/// Checks that every residual coefficient up to the guaranteed exponent of
/// its equation vanishes. Returns the lowest exponent among the surviving
/// (truncation) terms across all equations, or `None` for an exact solution.
pub fn check_residual(
    sys: &QuadraticSystem,
    sol: &SeriesSolution,
) -> Result<Option<Rational>, ResidualViolation> {
    let residuals = residual_series(sys, sol).map_err(|e| ResidualViolation {
        equation: e.to_string(),
        exponent: Rational::zero(),
        coeff: Rational::zero(),
    })?;
    let mut lowest: Option<Rational> = None;
    for (j, r) in residuals.iter().enumerate() {
        let bound = guaranteed_exponent(sol, j);
        if let Some((e, c)) = r.0.iter().find(|(e, _)| **e <= bound) {
            return Err(ResidualViolation {
                equation: sys.variables[j].clone(),
                exponent: e.clone(),
                coeff: c.clone(),
            });
        }
        if let Some(e) = r.order() {
            if lowest.as_ref().is_none_or(|l| e < l) {
                lowest = Some(e.clone());
            }
        }
    }
    Ok(lowest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{balance_bb, uno};
    use crate::rational::frac;
    use crate::recursion::run;

    #[test]
    fn series_arithmetic() {
        let mut a = FormalSeries::default();
        a.add_term(int(-1), int(2));
        a.add_term(frac(1, 2), int(1));
        let sq = a.mul(&a);
        assert_eq!(sq.0.get(&int(-2)), Some(&int(4)));
        assert_eq!(sq.0.get(&frac(-1, 2)), Some(&int(4)));
        assert_eq!(sq.0.get(&int(1)), Some(&int(1)));
        let d = a.derivative();
        assert_eq!(d.0.get(&int(-2)), Some(&int(-2)));
        assert_eq!(d.0.get(&frac(-1, 2)), Some(&frac(1, 2)));
    }

    #[test]
    fn uno_residual_vanishes_in_range() {
        let b = uno(3).unwrap();
        let sol = run(&b, &b.default_params(), 8, true).unwrap();
        let sys = b.build_system().unwrap();
        let lowest = check_residual(&sys, &sol).unwrap().unwrap();
        assert!(lowest > int(-3) + int(8));
    }

    #[test]
    fn corrupted_coefficient_detected() {
        let b = balance_bb(2).unwrap();
        let mut sol = run(&b, &b.default_params(), 6, false).unwrap();
        sol.variables[0].terms[3].coeff += int(1);
        let sys = b.build_system().unwrap();
        let err = check_residual(&sys, &sol).unwrap_err();
        assert_eq!(err.exponent, int(2));
    }
}
