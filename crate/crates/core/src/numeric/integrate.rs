//! Adaptive explicit Runge-Kutta integration of the quadratic systems.

use ode_solvers::{DVector, Dop853, OutputType, System};
use serde::{Deserialize, Serialize};

use crate::systems::QuadraticSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub fn uniform(tol: f64) -> Self {
        Tolerances { rtol: tol, atol: tol }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub tolerances: Tolerances,
    /// Sum over accepted steps of the local error allowance
    /// `max_i (atol + rtol |y_i|)`; a crude bound on the global error.
    pub error_estimate: f64,
}

/// Accepted steps of one integration. `times` is strictly monotone in the
/// direction of integration; states are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub variables: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: IntegratorStats,
    /// Why integration stopped before the end of the span, if it did.
    pub truncated: Option<String>,
}

impl Trajectory {
    pub fn end_time(&self) -> f64 {
        *self.times.last().expect("trajectory has its initial point")
    }

    pub fn end_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has its initial point")
    }

    pub fn completed(&self) -> bool {
        self.truncated.is_none()
    }

    /// `t,<var>...` header followed by one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for v in &self.variables {
            out.push(',');
            out.push_str(v);
        }
        out.push('\n');
        for (t, y) in self.times.iter().zip(&self.states) {
            out.push_str(&format!("{t:e}"));
            for v in y {
                out.push_str(&format!(",{v:e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Right-hand side adapter for the solver crate.
struct Field<'a>(&'a QuadraticSystem);

impl System<f64, DVector<f64>> for Field<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        self.0.eval_rhs_f64(y.as_slice(), dy.as_mut_slice());
    }
}

const MAX_STEPS: u32 = 1_000_000;
const STIFFNESS_CHECK_INTERVAL: u32 = 1000;

/// Integrates `sys` from `t_span.0` to `t_span.1` (either direction) with
/// the Dormand-Prince 8(5,3) pair, recording every accepted step.
/// Divergence, stiffness or step-size underflow truncates the trajectory.
pub fn integrate(sys: &QuadraticSystem, initial: &[f64], t_span: (f64, f64), tol: Tolerances) -> Trajectory {
    assert_eq!(initial.len(), sys.n_vars(), "initial state length");
    let (t0, t1) = t_span;
    let mut traj = Trajectory {
        variables: sys.variables.clone(),
        times: vec![t0],
        states: vec![initial.to_vec()],
        stats: IntegratorStats {
            accepted: 0,
            rejected: 0,
            tolerances: tol,
            error_estimate: 0.0,
        },
        truncated: None,
    };
    if initial.iter().any(|v| !v.is_finite()) {
        traj.truncated = Some("non-finite initial state".into());
        return traj;
    }
    if t0 == t1 {
        return traj;
    }
    let mut solver = Dop853::from_param(
        Field(sys),
        t0,
        t1,
        0.0,
        DVector::from_column_slice(initial),
        tol.rtol,
        tol.atol,
        0.9,
        0.0,
        0.333,
        6.0,
        (t1 - t0).abs(),
        0.0,
        MAX_STEPS,
        STIFFNESS_CHECK_INTERVAL,
        OutputType::Sparse,
    );
    let outcome = solver.integrate();
    let mut times = Vec::with_capacity(solver.x_out().len());
    let mut states = Vec::with_capacity(solver.x_out().len());
    for (t, y) in solver.x_out().iter().zip(solver.y_out()) {
        if !t.is_finite() || y.iter().any(|v| !v.is_finite()) {
            traj.truncated = Some(format!("state diverged after t = {:e}", times.last().unwrap_or(&t0)));
            break;
        }
        times.push(*t);
        states.push(y.as_slice().to_vec());
    }
    match outcome {
        Ok(stats) => {
            traj.stats.accepted = stats.accepted_steps as usize;
            traj.stats.rejected = stats.rejected_steps as usize;
        }
        Err(e) => {
            traj.truncated.get_or_insert_with(|| e.to_string());
            traj.stats.accepted = times.len().saturating_sub(1);
        }
    }
    // each accepted step has weighted local error at most 1
    traj.stats.error_estimate = states
        .iter()
        .skip(1)
        .map(|y| y.iter().fold(0.0f64, |m, v| m.max(tol.atol + tol.rtol * v.abs())))
        .sum();
    traj.times = times;
    traj.states = states;
    traj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::build_warped_system;

    #[test]
    fn equilibrium_stays_put() {
        let sys = build_warped_system(&[3]).unwrap();
        let traj = integrate(&sys, &[0.0; 4], (0.0, 1.0), Tolerances::uniform(1e-10));
        assert!(traj.completed());
        assert!(traj.states.iter().all(|s| s.iter().all(|v| *v == 0.0)));
        assert_eq!(traj.end_time(), 1.0);
    }

    #[test]
    fn exact_solution_of_decoupled_subsystem() {
        // x1 = 0 = u1, x2' = x2 u2, u2' = 0: x2 = e^{u2 t}
        let sys = build_warped_system(&[2]).unwrap();
        let traj = integrate(&sys, &[0.0, 1.0, 0.0, 0.5], (0.0, 2.0), Tolerances::uniform(1e-10));
        assert!((traj.end_state()[1] - 1f64.exp()).abs() < 1e-8);
    }

    #[test]
    fn backward_integration() {
        let sys = build_warped_system(&[2]).unwrap();
        let traj = integrate(&sys, &[0.0, 1.0, 0.0, 0.5], (0.0, -2.0), Tolerances::uniform(1e-10));
        assert!(traj.times.windows(2).all(|w| w[1] < w[0]));
        assert!((traj.end_state()[1] - (-1f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn blow_up_truncates() {
        // u2' = -2 u1^2 with u1' = -u1 u2: u2 < 0 drives u1 to infinity in finite time
        let sys = build_warped_system(&[2]).unwrap();
        let traj = integrate(&sys, &[0.0, 1.0, 1.0, -1.0], (0.0, 10.0), Tolerances::uniform(1e-8));
        assert!(!traj.completed());
        assert!(traj.states.iter().all(|s| s.iter().all(|v| v.is_finite())));
    }

    #[test]
    fn csv_export() {
        let sys = build_warped_system(&[2]).unwrap();
        let traj = integrate(&sys, &[0.0; 4], (0.0, 0.5), Tolerances::uniform(1e-6));
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,x1,x2,u1,u2\n"));
        assert_eq!(csv.lines().count(), traj.times.len() + 1);
    }
}
