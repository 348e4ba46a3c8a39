//! Floating-point evaluation of truncated series and of their ODE residual.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::NumericError;
use crate::rational::{common_denominator, to_f64, Rational};
use crate::recursion::SeriesSolution;
use crate::systems::QuadraticSystem;

fn check_time(t: f64) -> Result<(), NumericError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(NumericError::NonPositiveTime(t))
    }
}

/// Partial sums `y_j(t)` through the truncation order; `t > 0`, real
/// positive branch of fractional powers.
pub fn eval_series(sol: &SeriesSolution, t: f64) -> Result<Vec<f64>, NumericError> {
    check_time(t)?;
    Ok(sol
        .variables
        .iter()
        .map(|v| {
            v.terms
                .iter()
                .filter(|term| !term.coeff.is_zero())
                .map(|term| to_f64(&term.coeff) * t.powf(to_f64(&term.exponent)))
                .sum()
        })
        .collect())
}

/// Term-by-term derivative `y_j'(t)`.
pub fn eval_series_derivative(sol: &SeriesSolution, t: f64) -> Result<Vec<f64>, NumericError> {
    check_time(t)?;
    Ok(sol
        .variables
        .iter()
        .map(|v| {
            v.terms
                .iter()
                .filter(|term| !term.coeff.is_zero())
                .map(|term| {
                    let e = to_f64(&term.exponent);
                    to_f64(&term.coeff) * e * t.powf(e - 1.0)
                })
                .sum()
        })
        .collect())
}

/// Residual evaluated at the rational point nearest the requested time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    /// Time actually used, `sigma^D` for a rational `sigma`.
    pub t: f64,
    pub residual: f64,
}

/// Denominator scale of the rational `t^{1/D}` used for exact sampling.
const SIGMA_SCALE: i64 = 1_000_000;

/// `max_j |y_j' - f_j(y)|`, with the derivative taken term by term.
///
/// The series and the right-hand side nearly cancel, so the residual is
/// computed exactly: `t` is replaced by `sigma^D`, where `D` clears every
/// exponent denominator and `sigma` is a rational approximation of
/// `t^{1/D}`. Only the final value is rounded.
pub fn ode_residual_sample(
    sol: &SeriesSolution,
    sys: &QuadraticSystem,
    t: f64,
) -> Result<ResidualSample, NumericError> {
    check_time(t)?;
    if sys.n_vars() != sol.n_vars() {
        return Err(NumericError::Shape(format!(
            "series has {} variables, system has {}",
            sol.n_vars(),
            sys.n_vars()
        )));
    }
    let exponents = sol
        .variables
        .iter()
        .flat_map(|v| v.terms.iter().map(|term| &term.exponent));
    let d = common_denominator(exponents.chain(std::iter::once(&sol.q)));
    let d_f = d.to_f64().unwrap_or(1.0);
    let sigma_num = (t.powf(1.0 / d_f) * SIGMA_SCALE as f64).round() as i64;
    let sigma = Rational::new(BigInt::from(sigma_num.max(1)), BigInt::from(SIGMA_SCALE));
    let d_int = d.to_i64().expect("exponent denominators are small");

    let mut powers: BTreeMap<i64, Rational> = BTreeMap::new();
    let mut power = |k: i64| -> Rational {
        powers
            .entry(k)
            .or_insert_with(|| pow_i(&sigma, k))
            .clone()
    };
    let mut y = Vec::with_capacity(sol.n_vars());
    let mut dy = Vec::with_capacity(sol.n_vars());
    for v in &sol.variables {
        let mut value = Rational::zero();
        let mut deriv = Rational::zero();
        for term in &v.terms {
            if term.coeff.is_zero() {
                continue;
            }
            let k = scaled_exponent(&term.exponent, d_int);
            value += &term.coeff * power(k);
            if !term.exponent.is_zero() {
                deriv += &term.coeff * &term.exponent * power(k - d_int);
            }
        }
        y.push(value);
        dy.push(deriv);
    }
    let f = sys.eval_rhs(&y)?;
    let residual = dy
        .iter()
        .zip(&f)
        .map(|(a, b)| to_f64(&(a - b).abs()))
        .fold(0.0f64, f64::max);
    Ok(ResidualSample {
        t: to_f64(&pow_i(&sigma, d_int)),
        residual,
    })
}

/// [`ode_residual_sample`] without the sampling time.
pub fn ode_residual(sol: &SeriesSolution, sys: &QuadraticSystem, t: f64) -> Result<f64, NumericError> {
    Ok(ode_residual_sample(sol, sys, t)?.residual)
}

fn scaled_exponent(e: &Rational, d: i64) -> i64 {
    let k = e * Rational::from_integer(BigInt::from(d));
    debug_assert!(k.is_integer());
    k.to_integer().to_i64().expect("scaled exponent fits in i64")
}

fn pow_i(base: &Rational, k: i64) -> Rational {
    let mut result = Rational::one();
    let mut b = if k < 0 { base.recip() } else { base.clone() };
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e.is_odd() {
            result *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    result
}

/// Least-squares slope of `log r` against `log t`.
pub fn loglog_slope(ts: &[f64], rs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Radius of convergence in `t` from a root test on the coefficient tails
/// (upper half of the retained steps), or `None` when the tails vanish.
pub fn estimate_radius(sol: &SeriesSolution) -> Option<f64> {
    let n = sol.truncation;
    if n < 2 {
        return None;
    }
    let q = to_f64(&sol.q);
    let mut worst: Option<f64> = None;
    for v in &sol.variables {
        for (i, term) in v.terms.iter().enumerate().skip(n / 2).filter(|(i, _)| *i > 0) {
            if term.coeff.is_zero() {
                continue;
            }
            let lead = v.terms[0].coeff.abs();
            let scale = if lead.is_zero() { 1.0 } else { to_f64(&lead) };
            let root = (to_f64(&term.coeff.abs()) / scale).powf(1.0 / i as f64);
            if root.is_finite() && root > 0.0 {
                worst = Some(worst.map_or(root, |w: f64| w.max(root)));
            }
        }
    }
    worst.map(|r| (1.0 / r).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{balance_equilibrium, uno};
    use crate::rational::int;
    use crate::recursion::run;
    use crate::systems::DimensionSpec;

    #[test]
    fn leading_term_dominates() {
        let b = uno(2).unwrap();
        let sol = run(&b, &b.default_params(), 8, true).unwrap();
        let mut prev = f64::INFINITY;
        for t in [1e-1, 1e-2, 1e-3] {
            let y = eval_series(&sol, t).unwrap();
            let lead = 2.0 * t.powi(-2);
            let rel = ((y[0] - lead) / lead).abs();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn rejects_non_positive_time() {
        let b = uno(2).unwrap();
        let sol = run(&b, &b.default_params(), 2, false).unwrap();
        assert!(eval_series(&sol, 0.0).is_err());
        assert!(eval_series(&sol, -1.0).is_err());
    }

    #[test]
    fn equilibrium_residual_is_zero() {
        let dims = DimensionSpec::warped(&[3]).unwrap();
        let b = balance_equilibrium(&dims).unwrap();
        let sol = run(&b, &b.default_params(), 4, false).unwrap();
        let sys = b.build_system().unwrap();
        assert_eq!(ode_residual(&sol, &sys, 0.1).unwrap(), 0.0);
        assert_eq!(eval_series(&sol, 0.3).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn lower_truncation_has_larger_residual() {
        let b = uno(3).unwrap();
        let sys = b.build_system().unwrap();
        let full = run(&b, &b.default_params(), 12, true).unwrap();
        let short = run(&b, &b.default_params(), 10, true).unwrap();
        let t = 0.05;
        assert!(ode_residual(&short, &sys, t).unwrap() > ode_residual(&full, &sys, t).unwrap());
    }

    #[test]
    fn exact_powers() {
        let s = Rational::new(2.into(), 3.into());
        assert_eq!(pow_i(&s, 3), Rational::new(8.into(), 27.into()));
        assert_eq!(pow_i(&s, -2), Rational::new(9.into(), 4.into()));
        assert_eq!(pow_i(&s, 0), int(1));
    }

    #[test]
    fn slope_of_power_law() {
        let ts = [0.1, 0.05, 0.025];
        let rs: Vec<f64> = ts.iter().map(|t: &f64| 3.0 * t.powf(7.5)).collect();
        assert!((loglog_slope(&ts, &rs) - 7.5).abs() < 1e-12);
    }
}
