//! Named numeric checks of a series, aggregated into one report.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::frame::{
    expected_frame_limits, extrapolate_frame_limits, geometric_frame, identity_error, vectfield_residual, ARC_STEP,
};
use super::integrate::{integrate, Tolerances, Trajectory};
use super::series::{estimate_radius, eval_series, loglog_slope, ode_residual_sample};
use super::NumericError;
use crate::balance::BalanceFamily;
use crate::formal::check_residual;
use crate::rational::to_f64;
use crate::recursion::SeriesSolution;
use crate::systems::{QuadraticSystem, SystemKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    /// Sample times of the log-log residual fit.
    pub residual_times: Vec<f64>,
    pub slope_tolerance: f64,
    /// Initial times of the integrated trajectories.
    pub seed_times: Vec<f64>,
    /// Trajectories run from each seed time to this time.
    pub t_end: f64,
    pub tolerance: f64,
    pub drift_threshold: f64,
    pub identity_threshold: f64,
    pub limit_threshold: f64,
    pub vectfield_threshold: f64,
    /// Trajectory samples at which the reduced vector field is compared.
    pub vectfield_samples: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            residual_times: vec![0.1, 0.05, 0.025],
            slope_tolerance: 0.5,
            seed_times: vec![0.05, 0.1],
            t_end: 0.5,
            tolerance: 1e-10,
            drift_threshold: 1e-8,
            identity_threshold: 1e-8,
            limit_threshold: 1e-4,
            vectfield_threshold: 1e-4,
            vectfield_samples: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass: value.is_finite() && value <= threshold,
            value,
            threshold,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, threshold: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            pass: false,
            value: f64::NAN,
            threshold,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub family: String,
    pub truncation: usize,
    pub h0_projected: bool,
    /// Root-test estimate of the radius of convergence in `t`.
    pub radius: Option<f64>,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Runs every check that applies to the series' system and family.
pub fn validate(sol: &SeriesSolution, opts: &ValidationOptions) -> Result<ValidationReport, NumericError> {
    let sys = sol.system()?;
    let mut checks = Vec::new();
    if sol.balance.family == BalanceFamily::Equilibrium {
        checks.push(equilibrium_check(sol, &sys)?);
    } else {
        checks.push(formal_check(sol, &sys));
        checks.push(slope_check(sol, &sys, opts)?);
        checks.push(constraint_check(sol)?);
        let trajectories = trajectory_checks(sol, &sys, opts, &mut checks)?;
        if sys.kind() == SystemKind::Warped {
            checks.push(limit_check(sol, &sys, opts));
            if let Some(traj) = trajectories.last() {
                checks.push(vectfield_check(&sys, traj, opts));
            }
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        family: sol.balance.family.label(),
        truncation: sol.truncation,
        h0_projected: sol.h0_projected,
        radius: estimate_radius(sol),
        checks,
        pass,
    })
}

fn equilibrium_check(sol: &SeriesSolution, sys: &QuadraticSystem) -> Result<Check, NumericError> {
    let state = eval_series(sol, 1.0)?;
    let mut rate = vec![0.0; state.len()];
    sys.eval_rhs_f64(&state, &mut rate);
    let worst = state.iter().chain(&rate).fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(Check::at_most("equilibrium", worst, 0.0, "zero state is a fixed point"))
}

fn formal_check(sol: &SeriesSolution, sys: &QuadraticSystem) -> Check {
    match check_residual(sys, sol) {
        Ok(lowest) => Check {
            name: "formal_residual".into(),
            pass: true,
            value: 0.0,
            threshold: 0.0,
            detail: match lowest {
                Some(e) => format!("zero through the guaranteed order; first surviving exponent {e}"),
                None => "exact solution".into(),
            },
        },
        Err(v) => Check {
            name: "formal_residual".into(),
            pass: false,
            value: to_f64(&v.coeff.abs()),
            threshold: 0.0,
            detail: format!("equation {} has coefficient {} at t^{}", v.equation, v.coeff, v.exponent),
        },
    }
}

fn slope_check(sol: &SeriesSolution, sys: &QuadraticSystem, opts: &ValidationOptions) -> Result<Check, NumericError> {
    let expected = match check_residual(sys, sol) {
        Ok(Some(e)) => to_f64(&e),
        Ok(None) => {
            let worst = opts
                .residual_times
                .iter()
                .map(|&t| ode_residual_sample(sol, sys, t).map(|s| s.residual))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0f64, f64::max);
            return Ok(Check::at_most("residual_slope", worst, 0.0, "exact solution, residual vanishes"));
        }
        Err(_) => {
            return Ok(Check::failed(
                "residual_slope",
                opts.slope_tolerance,
                "formal residual does not vanish through the guaranteed order",
            ))
        }
    };
    let samples = opts
        .residual_times
        .iter()
        .map(|&t| ode_residual_sample(sol, sys, t))
        .collect::<Result<Vec<_>, _>>()?;
    let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let rs: Vec<f64> = samples.iter().map(|s| s.residual).collect();
    if rs.iter().any(|r| *r <= 0.0) {
        return Ok(Check::failed(
            "residual_slope",
            opts.slope_tolerance,
            "residual vanished at a sample time",
        ));
    }
    let slope = loglog_slope(&ts, &rs);
    Ok(Check::at_most(
        "residual_slope",
        (slope - expected).abs(),
        opts.slope_tolerance,
        format!("fitted slope {slope:.4}, truncation order {expected:.4}"),
    ))
}

fn constraint_check(sol: &SeriesSolution) -> Result<Check, NumericError> {
    let coeffs = sol.constraint_series(sol.truncation)?;
    let (offending, detail): (Vec<_>, String) = if sol.h0_projected {
        (
            coeffs.iter().filter(|(_, c)| !c.is_zero()).collect(),
            "H = 0: every retained constraint coefficient vanishes".into(),
        )
    } else {
        let constant = coeffs
            .iter()
            .find(|(e, _)| e.is_zero())
            .map(|(_, c)| c.to_string())
            .unwrap_or_else(|| "0".into());
        (
            coeffs.iter().filter(|(e, c)| !e.is_zero() && !c.is_zero()).collect(),
            format!("G is constant along the series, G = {constant}"),
        )
    };
    Ok(match offending.first() {
        None => Check::at_most("constraint", 0.0, 0.0, detail),
        Some((e, c)) => Check {
            name: "constraint".into(),
            pass: false,
            value: to_f64(&c.abs()),
            threshold: 0.0,
            detail: format!("constraint coefficient {c} at t^{e}"),
        },
    })
}

fn trajectory_checks(
    sol: &SeriesSolution,
    sys: &QuadraticSystem,
    opts: &ValidationOptions,
    checks: &mut Vec<Check>,
) -> Result<Vec<Trajectory>, NumericError> {
    let warped = sys.kind() == SystemKind::Warped;
    let mut trajectories = Vec::new();
    let mut identity_worst = 0.0f64;
    let mut lyapunov_worst = f64::NEG_INFINITY;
    let mut frame_failure: Option<String> = None;
    for &t0 in &opts.seed_times {
        let name = format!("constraint_drift(t0={t0})");
        let y0 = eval_series(sol, t0)?;
        let traj = integrate(sys, &y0, (t0, opts.t_end), Tolerances::uniform(opts.tolerance));
        let g0 = sys.eval_constraint_f64(&y0);
        let drift = traj
            .states
            .iter()
            .map(|s| (sys.eval_constraint_f64(s) - g0).abs())
            .fold(0.0f64, f64::max);
        let mut check = Check::at_most(
            name,
            drift,
            opts.drift_threshold,
            format!(
                "{} steps to t = {:.4}, G(t0) = {g0:.3e}",
                traj.stats.accepted,
                traj.end_time()
            ),
        );
        if let Some(reason) = &traj.truncated {
            check.pass = false;
            check.detail = format!("trajectory truncated: {reason}");
        }
        checks.push(check);
        if warped {
            for s in &traj.states {
                match (identity_error(sys, s), geometric_frame(sys, s)) {
                    (Ok(err), Ok(frame)) => {
                        identity_worst = identity_worst.max(err);
                        lyapunov_worst = lyapunov_worst.max(frame.lyapunov);
                    }
                    (Err(e), _) | (_, Err(e)) => frame_failure = Some(e.to_string()),
                }
            }
        }
        trajectories.push(traj);
    }
    if warped {
        match &frame_failure {
            None => {
                checks.push(Check::at_most(
                    "lyapunov_identity",
                    identity_worst,
                    opts.identity_threshold,
                    "sum X^2 + Y^2 = 1 - 1/u^2 along the trajectories",
                ));
                checks.push(Check {
                    name: "lyapunov_negative".into(),
                    pass: lyapunov_worst < 0.0,
                    value: lyapunov_worst,
                    threshold: 0.0,
                    detail: "largest Lyapunov value along the trajectories".into(),
                });
            }
            Some(reason) => {
                checks.push(Check::failed("lyapunov_identity", opts.identity_threshold, reason.clone()));
                checks.push(Check::failed("lyapunov_negative", 0.0, reason.clone()));
            }
        }
    }
    Ok(trajectories)
}

fn limit_check(sol: &SeriesSolution, sys: &QuadraticSystem, opts: &ValidationOptions) -> Check {
    let Some((ex, ey)) = expected_frame_limits(&sol.balance) else {
        return Check::failed("frame_limits", opts.limit_threshold, "no predicted limits");
    };
    match extrapolate_frame_limits(sol, sys) {
        Ok(got) => {
            let worst = got
                .x
                .iter()
                .zip(&ex)
                .chain(got.y.iter().zip(&ey))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            Check::at_most(
                "frame_limits",
                worst,
                opts.limit_threshold,
                format!("X -> {:?}, Y -> {:?}", got.x, got.y),
            )
        }
        Err(e) => Check::failed("frame_limits", opts.limit_threshold, e.to_string()),
    }
}

fn vectfield_check(sys: &QuadraticSystem, traj: &Trajectory, opts: &ValidationOptions) -> Check {
    let n = traj.times.len();
    let picks = opts.vectfield_samples.clamp(1, n);
    let idx: Vec<usize> = if picks == 1 {
        vec![0]
    } else {
        (0..picks).map(|k| k * (n - 1) / (picks - 1)).collect()
    };
    let sub = Trajectory {
        variables: traj.variables.clone(),
        times: idx.iter().map(|&i| traj.times[i]).collect(),
        states: idx.iter().map(|&i| traj.states[i].clone()).collect(),
        stats: traj.stats.clone(),
        truncated: None,
    };
    let tight = Tolerances::uniform((opts.tolerance * 1e-2).max(1e-13));
    match vectfield_residual(sys, &sub, ARC_STEP, tight) {
        Ok(v) => Check::at_most(
            "vectfield",
            v,
            opts.vectfield_threshold,
            format!("central differences at s-step {ARC_STEP} over {picks} samples"),
        ),
        Err(e) => Check::failed("vectfield", opts.vectfield_threshold, e.to_string()),
    }
}
