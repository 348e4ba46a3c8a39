//! Phase-plane coordinates of the warped soliton flow and its Lyapunov
//! function.
//!
//! With `u = u_{r+1}`: `X_i = sqrt(d_i) u_i / u`, `Y_i = sqrt(x_i) / u`, and
//! `L = sum X_i^2 + Y_i^2 - 1 = (G - 1) / u^2`. The arc variable satisfies
//! `ds/dt = u`.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::integrate::{integrate, Tolerances, Trajectory};
use super::series::eval_series;
use super::NumericError;
use crate::balance::{Balance, BalanceFamily};
use crate::formal::FormalSeries;
use crate::rational::{int, to_f64, Rational};
use crate::recursion::{SeriesSolution, SeriesVariable};
use crate::systems::{QuadraticSystem, SystemKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricFrame {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub lyapunov: f64,
}

impl GeometricFrame {
    /// `sum X_i^2 + Y_i^2`.
    pub fn norm_sq(&self) -> f64 {
        self.x.iter().chain(&self.y).map(|v| v * v).sum()
    }
}

fn warped_dims(sys: &QuadraticSystem) -> Result<&[u32], NumericError> {
    if sys.kind() != SystemKind::Warped {
        return Err(NumericError::NotWarped);
    }
    Ok(sys.dims.factor_dims())
}

/// Frame of a warped-system state; requires `u_{r+1} != 0` and `x_i >= 0`.
pub fn geometric_frame(sys: &QuadraticSystem, state: &[f64]) -> Result<GeometricFrame, NumericError> {
    let dims = warped_dims(sys)?;
    let r = dims.len();
    if state.len() != 2 * r + 2 {
        return Err(NumericError::Shape(format!(
            "state has {} entries, expected {}",
            state.len(),
            2 * r + 2
        )));
    }
    let top = state[2 * r + 1];
    if top == 0.0 || !top.is_finite() {
        return Err(NumericError::FrameUndefined(format!("u{} = {top}", r + 1)));
    }
    let mut x = Vec::with_capacity(r);
    let mut y = Vec::with_capacity(r);
    for (i, &d) in dims.iter().enumerate() {
        let xi = state[i];
        if xi < 0.0 {
            return Err(NumericError::FrameUndefined(format!("x{} = {xi} < 0", i + 1)));
        }
        x.push(f64::from(d).sqrt() * state[r + 1 + i] / top);
        y.push(xi.sqrt() / top);
    }
    let mut frame = GeometricFrame { x, y, lyapunov: 0.0 };
    frame.lyapunov = frame.norm_sq() - 1.0;
    Ok(frame)
}

/// `|sum X_i^2 + Y_i^2 - (1 - 1/u_{r+1}^2)|`, which equals `|G| / u_{r+1}^2`.
pub fn identity_error(sys: &QuadraticSystem, state: &[f64]) -> Result<f64, NumericError> {
    let frame = geometric_frame(sys, state)?;
    let top = state[state.len() - 1];
    Ok((frame.norm_sq() - (1.0 - 1.0 / (top * top))).abs())
}

/// Right-hand side of the reduced flow in the arc variable `s`:
/// `X_i' = X_i (sum X_j^2 - 1) + Y_i^2 / sqrt(d_i)`,
/// `Y_i' = Y_i (sum X_j^2 - X_i / sqrt(d_i))`.
pub fn vectfield_rhs(dims: &[u32], frame: &GeometricFrame) -> (Vec<f64>, Vec<f64>) {
    let sx: f64 = frame.x.iter().map(|v| v * v).sum();
    let mut dx = Vec::with_capacity(dims.len());
    let mut dy = Vec::with_capacity(dims.len());
    for (i, &d) in dims.iter().enumerate() {
        let sd = f64::from(d).sqrt();
        let (xi, yi) = (frame.x[i], frame.y[i]);
        dx.push(xi * (sx - 1.0) + yi * yi / sd);
        dy.push(yi * (sx - xi / sd));
    }
    (dx, dy)
}

/// Arc-length step used by [`vectfield_residual`].
pub const ARC_STEP: f64 = 1e-3;

/// Largest deviation between central differences of `(X, Y)` in `s` and
/// the reduced vector field, over the sampled trajectory points. Neighbours
/// at `t +/- h_s / u_{r+1}` come from short integrations at `tol`.
pub fn vectfield_residual(
    sys: &QuadraticSystem,
    traj: &Trajectory,
    h_s: f64,
    tol: Tolerances,
) -> Result<f64, NumericError> {
    let dims = warped_dims(sys)?.to_vec();
    let mut worst = 0.0f64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let frame = geometric_frame(sys, state)?;
        let top = state[state.len() - 1];
        let h_t = h_s / top;
        let ahead = integrate(sys, state, (*t, t + h_t), tol);
        let behind = integrate(sys, state, (*t, t - h_t), tol);
        if !ahead.completed() || !behind.completed() {
            return Err(NumericError::FrameUndefined(format!(
                "neighbourhood of t = {t:e} could not be integrated"
            )));
        }
        let plus = geometric_frame(sys, ahead.end_state())?;
        let minus = geometric_frame(sys, behind.end_state())?;
        let (fx, fy) = vectfield_rhs(&dims, &frame);
        for i in 0..dims.len() {
            let dx = (plus.x[i] - minus.x[i]) / (2.0 * h_s);
            let dy = (plus.y[i] - minus.y[i]) / (2.0 * h_s);
            worst = worst.max((dx - fx[i]).abs()).max((dy - fy[i]).abs());
        }
    }
    Ok(worst)
}

/// `t -> 0` limits of `(X_i, Y_i)` predicted by the balance alone, or `None`
/// for families without a warped frame.
pub fn expected_frame_limits(bal: &Balance) -> Option<(Vec<f64>, Vec<f64>)> {
    if bal.system_kind != SystemKind::Warped {
        return None;
    }
    let dims = bal.dims.factor_dims();
    let r = dims.len();
    let mut xs = vec![0.0; r];
    let mut ys = vec![0.0; r];
    match &bal.family {
        BalanceFamily::Uno | BalanceFamily::CaseI { .. } => {
            let e0: f64 = dims[..bal.l].iter().map(|&d| f64::from(d)).sum();
            for i in 0..bal.l {
                let d = f64::from(dims[i]);
                xs[i] = d.sqrt() / e0;
                ys[i] = (d * (e0 - 1.0)).sqrt() / e0;
            }
        }
        BalanceFamily::Dos { .. } | BalanceFamily::CaseII { .. } => {
            for i in 0..bal.l {
                xs[i] = -to_f64(&bal.exponents[i]) * f64::from(dims[i]).sqrt() / 2.0;
            }
        }
        BalanceFamily::Bb | BalanceFamily::Equilibrium => return None,
    }
    Some((xs, ys))
}

/// Sample times of the extrapolation.
pub const RICHARDSON_TIMES: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Frame limits extrapolated from the series at [`RICHARDSON_TIMES`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLimits {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// `ratio = num / den` as exact exponent-ordered terms, through the steps
/// both series retain. `None` if the denominator's leading coefficient
/// vanishes.
fn series_quotient(num: &FormalSeries, den: &FormalSeries, q: &Rational, steps: usize) -> Option<FormalSeries> {
    let (d_lead, d0) = den.0.iter().next()?;
    let n_lead = num.order()?.clone();
    let shift = &n_lead - d_lead;
    let coeff_at = |s: &FormalSeries, base: &Rational, k: usize| -> Rational {
        s.0.get(&(base + int(k as i64) * q)).cloned().unwrap_or_else(Rational::zero)
    };
    let mut out: Vec<Rational> = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let mut c = coeff_at(num, &n_lead, k);
        for j in 1..=k {
            c -= coeff_at(den, d_lead, j) * &out[k - j];
        }
        out.push(c / d0);
    }
    let mut series = FormalSeries::default();
    for (k, c) in out.into_iter().enumerate() {
        series.add_term(&shift + int(k as i64) * q, c);
    }
    Some(series)
}

fn formal(v: &SeriesVariable) -> FormalSeries {
    let mut s = FormalSeries::default();
    for t in &v.terms {
        s.add_term(t.exponent.clone(), t.coeff.clone());
    }
    s
}

/// Fits `L + A t^{e1} + B t^{e2}` through three samples.
fn richardson(ts: &[f64; 3], vs: &[f64; 3], e1: f64, e2: f64) -> f64 {
    let m: Vec<[f64; 3]> = ts.iter().map(|t| [1.0, t.powf(e1), t.powf(e2)]).collect();
    let det3 = |a: [[f64; 3]; 3]| -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let full = [m[0], m[1], m[2]];
    let mut with_rhs = full;
    for i in 0..3 {
        with_rhs[i][0] = vs[i];
    }
    det3(with_rhs) / det3(full)
}

/// Positive exponents of the first two correction terms of `ratio`;
/// falls back to further multiples of `Q` when fewer are retained.
fn correction_exponents(ratio: &FormalSeries, q: &Rational) -> Result<(Rational, Rational), NumericError> {
    if let Some(e) = ratio.order() {
        if e.is_negative() {
            return Err(NumericError::NoLimit(format!("leading exponent {e}")));
        }
    }
    let mut found: Vec<Rational> = ratio.0.keys().filter(|e| e.is_positive()).take(2).cloned().collect();
    while found.len() < 2 {
        let next = found.last().map_or_else(|| q.clone(), |e| e + q);
        found.push(next);
    }
    let second = found.pop().expect("two exponents");
    Ok((found.pop().expect("two exponents"), second))
}

/// Correction exponents of `sqrt(ratio)`. With `ratio = c t^o (1 + b t^p + ...)`
/// the root is `t^{o/2}(...)` when `o > 0`; when `o = 0` the expansion of
/// the root also contains `t^{2 p}`.
fn sqrt_correction_exponents(ratio: &FormalSeries, q: &Rational) -> Result<(Rational, Rational), NumericError> {
    let (p1, p2) = correction_exponents(ratio, q)?;
    match ratio.order() {
        Some(o) if o.is_positive() => {
            let half = o / int(2);
            let gap = if p2 > *o { &p2 - o } else { q.clone() };
            Ok((half.clone(), half + gap))
        }
        _ => {
            let doubled = &p1 * int(2);
            Ok((p1, if doubled < p2 { doubled } else { p2 }))
        }
    }
}

/// Extrapolates `X_i` from `u_i / u_{r+1}` and `Y_i = sqrt(x_i) / u_{r+1}`,
/// with correction exponents read off the exact quotient series
/// `u_i / u_{r+1}` and `x_i / u_{r+1}^2`.
pub fn extrapolate_frame_limits(sol: &SeriesSolution, sys: &QuadraticSystem) -> Result<FrameLimits, NumericError> {
    let dims = warped_dims(sys)?.to_vec();
    let r = dims.len();
    let top = formal(&sol.variables[2 * r + 1]);
    let top_sq = top.mul(&top);
    let steps = sol.truncation;
    let samples: Vec<Vec<f64>> = RICHARDSON_TIMES
        .iter()
        .map(|&t| eval_series(sol, t))
        .collect::<Result<_, _>>()?;
    let quotient = |num: usize, den: &FormalSeries| -> Result<FormalSeries, NumericError> {
        let num = formal(&sol.variables[num]);
        if num.0.is_empty() {
            return Ok(num);
        }
        series_quotient(&num, den, &sol.q, steps)
            .ok_or_else(|| NumericError::FrameUndefined("u_{r+1} has no leading term".into()))
    };
    let fit = |(e1, e2): (Rational, Rational), value: &dyn Fn(&[f64]) -> f64| -> f64 {
        let vs = [value(&samples[0]), value(&samples[1]), value(&samples[2])];
        richardson(&RICHARDSON_TIMES, &vs, to_f64(&e1), to_f64(&e2))
    };
    let mut xs = Vec::with_capacity(r);
    let mut ys = Vec::with_capacity(r);
    for (i, &d) in dims.iter().enumerate() {
        let sd = f64::from(d).sqrt();
        let ratio = quotient(r + 1 + i, &top)?;
        xs.push(if ratio.0.is_empty() {
            0.0
        } else {
            sd * fit(correction_exponents(&ratio, &sol.q)?, &|s: &[f64]| s[r + 1 + i] / s[2 * r + 1])
        });
        let y_sq = quotient(i, &top_sq)?;
        ys.push(if y_sq.0.is_empty() {
            0.0
        } else {
            fit(sqrt_correction_exponents(&y_sq, &sol.q)?, &|s: &[f64]| {
                s[i].max(0.0).sqrt() / s[2 * r + 1]
            })
        });
    }
    Ok(FrameLimits { x: xs, y: ys })
}

/// Exact `t -> 0` limits of `u_i / u_{r+1}` from leading coefficients, as a
/// cross-check of [`expected_frame_limits`] that needs no square roots.
pub fn leading_ratio(sol: &SeriesSolution, num: usize, den: usize) -> Option<Rational> {
    let n = formal(&sol.variables[num]);
    let d = formal(&sol.variables[den]);
    let ratio = series_quotient(&n, &d, &sol.q, 0)?;
    match ratio.order() {
        None => Some(Rational::zero()),
        Some(e) if e.is_zero() => ratio.0.values().next().cloned(),
        Some(e) if e.is_positive() => Some(Rational::zero()),
        Some(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{balance_multi_case_ii, dos, uno, EllipsoidPoint, Sign};
    use crate::rational::frac;
    use crate::recursion::run;
    use crate::systems::build_warped_system;

    #[test]
    fn equilibrium_of_reduced_flow() {
        for d in 2..=10u32 {
            let sd = f64::from(d).sqrt();
            let frame = GeometricFrame {
                x: vec![1.0 / sd],
                y: vec![(1.0 - 1.0 / f64::from(d)).sqrt()],
                lyapunov: 0.0,
            };
            let (dx, dy) = vectfield_rhs(&[d], &frame);
            assert!(dx[0].abs() < 1e-15 && dy[0].abs() < 1e-15);
        }
        let origin = GeometricFrame {
            x: vec![0.0; 2],
            y: vec![0.0; 2],
            lyapunov: -1.0,
        };
        let (dx, dy) = vectfield_rhs(&[2, 3], &origin);
        assert!(dx.iter().chain(&dy).all(|v| *v == 0.0));
    }

    #[test]
    fn identity_on_exact_constraint_states() {
        // d = 3: 3 u1^2 - u2^2 + x1 + 1 = 0 with u1 = 1, u2 = 3 gives x1 = 5
        let sys = build_warped_system(&[3]).unwrap();
        let state = [5.0, 0.7, 1.0, 3.0];
        assert!(sys.eval_constraint_f64(&state).abs() < 1e-15);
        assert!(identity_error(&sys, &state).unwrap() < 1e-10);
        assert!(geometric_frame(&sys, &state).unwrap().lyapunov < 0.0);
    }

    #[test]
    fn undefined_frames() {
        let sys = build_warped_system(&[3]).unwrap();
        assert!(geometric_frame(&sys, &[1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(geometric_frame(&sys, &[-1.0, 1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn uno_limits() {
        for d in [2u32, 3, 5] {
            let b = uno(d).unwrap();
            let sol = run(&b, &b.default_params(), 12, true).unwrap();
            let sys = b.build_system().unwrap();
            let got = extrapolate_frame_limits(&sol, &sys).unwrap();
            let (ex, ey) = expected_frame_limits(&b).unwrap();
            assert!((got.x[0] - ex[0]).abs() < 1e-4, "{d}: {:?}", got);
            assert!((got.y[0] - ey[0]).abs() < 1e-4, "{d}: {:?}", got);
            assert!((ex[0] - 1.0 / f64::from(d).sqrt()).abs() < 1e-15);
            assert_eq!(leading_ratio(&sol, 2, 3), Some(frac(1, i64::from(d))));
        }
    }

    #[test]
    fn case_ii_limits() {
        let point = EllipsoidPoint::new(vec![frac(-4, 3), frac(-1, 3)]);
        let b = balance_multi_case_ii(&[2, 4], &point).unwrap();
        let sol = run(&b, &b.default_params(), 24, true).unwrap();
        let sys = b.build_system().unwrap();
        let got = extrapolate_frame_limits(&sol, &sys).unwrap();
        let (ex, ey) = expected_frame_limits(&b).unwrap();
        for i in 0..2 {
            assert!((got.x[i] - ex[i]).abs() < 1e-4, "{got:?} vs {ex:?}");
            assert!((got.y[i] - ey[i]).abs() < 1e-4, "{got:?} vs {ey:?}");
        }
        let b = dos(4, Sign::Minus).unwrap();
        assert_eq!(expected_frame_limits(&b).unwrap().0, vec![1.0]);
    }
}
