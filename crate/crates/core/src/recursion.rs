//! Coefficient recursion for a balance.
//!
//! Variable `j` is expanded as `y_j = sum_i a_{j,i} t^{alpha_j + iQ}`. Every
//! right-hand monomial of equation `j` is assigned a shift `n`: its leading
//! exponent is `alpha_j - 1 + nQ`. Collecting `t^{alpha_j - 1 + iQ}` gives
//!
//! ```text
//! X(iQ) a_i = v_i,   X(iota) = diag(alpha_j + iota) - J
//! ```
//!
//! where `J` is the Jacobian of the shift-zero terms at the leading
//! coefficients, and `v_i` collects shifted terms and the convolution sums
//! that only involve steps below `i`. The same construction reproduces the
//! block matrices of every family, so the engine is family-agnostic.

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::balance::{validate_balance, Balance};
use crate::linalg::{det_poly, rank, solve_affine, LinalgError, QMatrix};
use crate::poly::QPolynomial;
use crate::rational::{
    int, serde_q, serde_q_map, serde_q_matrix, serde_q_opt, serde_q_vec, Rational,
};
use crate::systems::{QuadraticSystem, SystemError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecursionError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("free parameter {0} is not bound")]
    UnboundParameter(String),
    #[error("unknown parameter {0}")]
    UnknownParameter(String),
    #[error("balance is not admissible: {0}")]
    InvalidBalance(String),
    #[error("steps must be advanced in order: next is {expected}, got {got}")]
    OutOfOrder { expected: usize, got: usize },
    #[error("compatibility condition fails at resonance step {step}")]
    Incompatible { step: usize },
    #[error("no positive resonance on the step grid")]
    NoTopResonance,
    #[error("the t^0 constraint coefficient does not depend on the top-resonance parameter")]
    Degenerate,
    #[error("the t^0 constraint coefficient is not affine in the top-resonance parameter")]
    NotAffine,
    #[error("the constraint has no t^0 coefficient on the step grid")]
    NoConstantTerm,
    #[error("constraint coefficient at t^{exponent} is {value}, expected 0")]
    ConstraintResidual { exponent: Rational, value: Rational },
}

/// One right-hand monomial of one equation with its step shift.
#[derive(Debug, Clone, PartialEq, Eq)]
struct PlanTerm {
    coeff: Rational,
    factors: Vec<usize>,
    shift: usize,
}

/// Balance-specific form of the system used by the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
struct RecursionPlan {
    exponents: Vec<Rational>,
    q: Rational,
    leading: Vec<Rational>,
    terms: Vec<Vec<PlanTerm>>,
    jacobian: Vec<Vec<Rational>>,
}

impl RecursionPlan {
    fn new(sys: &QuadraticSystem, bal: &Balance, leading: Vec<Rational>) -> Result<Self, RecursionError> {
        let n = sys.n_vars();
        let mut terms = vec![Vec::new(); n];
        let mut jacobian = vec![vec![Rational::zero(); n]; n];
        for (j, monomials) in sys.rhs.iter().enumerate() {
            let base = &bal.exponents[j] - int(1);
            for m in monomials {
                let factors = m.factors();
                let exponent = factors
                    .iter()
                    .fold(Rational::zero(), |acc, &k| acc + &bal.exponents[k]);
                let shift = (&exponent - &base) / &bal.q;
                if shift.is_negative() || !shift.is_integer() {
                    return Err(RecursionError::InvalidBalance(format!(
                        "term of order t^{exponent} in the {} equation is off the grid t^({base} + kQ)",
                        sys.variables[j]
                    )));
                }
                let shift = shift.to_integer().to_usize().expect("shift fits in usize");
                if shift == 0 {
                    match factors.as_slice() {
                        [k] => jacobian[j][*k] += &m.coeff,
                        [k, l] => {
                            jacobian[j][*k] += &m.coeff * &leading[*l];
                            jacobian[j][*l] += &m.coeff * &leading[*k];
                        }
                        _ => {}
                    }
                }
                terms[j].push(PlanTerm {
                    coeff: m.coeff.clone(),
                    factors,
                    shift,
                });
            }
        }
        Ok(RecursionPlan {
            exponents: bal.exponents.clone(),
            q: bal.q.clone(),
            leading,
            terms,
            jacobian,
        })
    }

    fn n_vars(&self) -> usize {
        self.exponents.len()
    }

    /// `X(iota)`, affine in `iota`.
    fn matrix(&self, iota: &Rational) -> QMatrix {
        let n = self.n_vars();
        let mut m = QMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                m[(r, c)] = -&self.jacobian[r][c];
            }
            m[(r, r)] += &self.exponents[r] + iota;
        }
        m
    }

    /// `v_i` for `i >= 1`, from steps `0..i`.
    fn rhs(&self, steps: &[Vec<Rational>], i: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.n_vars()];
        for (j, terms) in self.terms.iter().enumerate() {
            for t in terms {
                let value = match (t.factors.as_slice(), t.shift) {
                    ([], n) if n == i => t.coeff.clone(),
                    ([], _) => continue,
                    ([_], 0) => continue,
                    ([k], n) if n <= i => &t.coeff * &steps[i - n][*k],
                    ([_], _) => continue,
                    ([k, l], 0) => {
                        let sum = (1..i).fold(Rational::zero(), |acc, p| {
                            acc + &steps[p][*k] * &steps[i - p][*l]
                        });
                        &t.coeff * sum
                    }
                    ([k, l], n) if n <= i => {
                        let m = i - n;
                        let sum = (0..=m).fold(Rational::zero(), |acc, p| {
                            acc + &steps[p][*k] * &steps[m - p][*l]
                        });
                        &t.coeff * sum
                    }
                    _ => continue,
                };
                out[j] += value;
            }
        }
        out
    }
}

/// Where a resonance sits relative to the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceKind {
    /// Below `-1`; no geometric meaning.
    Negative,
    /// `-1`: the arbitrary position of the singularity.
    Position,
    /// `0`: free leading coefficients.
    Leading,
    /// Positive but not a multiple of `Q`; never reached.
    OffGrid,
    /// Positive on-grid resonance below the top one.
    Ordinary,
    /// Largest positive on-grid resonance.
    Top,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonanceRoot {
    /// Root in `iota = iQ`.
    #[serde(with = "serde_q")]
    pub iota: Rational,
    pub multiplicity: usize,
    pub kind: ResonanceKind,
    /// Integer step `iota / Q` when on the grid and positive.
    pub step: Option<usize>,
}

/// `det X(iota)` with its rational roots and unfactored residual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub det: QPolynomial,
    pub roots: Vec<ResonanceRoot>,
    pub residual: QPolynomial,
}

impl ResonanceReport {
    fn new(det: QPolynomial, q: &Rational) -> Self {
        let (raw, residual) = det.rational_roots();
        let top = raw
            .iter()
            .filter(|(r, _)| r.is_positive() && (r / q).is_integer())
            .map(|(r, _)| r.clone())
            .max();
        let roots = raw
            .into_iter()
            .map(|(iota, multiplicity)| {
                let on_grid = (&iota / q).is_integer();
                let (kind, step) = if iota < int(-1) {
                    (ResonanceKind::Negative, None)
                } else if iota == int(-1) {
                    (ResonanceKind::Position, None)
                } else if iota.is_zero() {
                    (ResonanceKind::Leading, Some(0))
                } else if !on_grid {
                    (ResonanceKind::OffGrid, None)
                } else {
                    let step = (&iota / q).to_integer().to_usize();
                    if Some(&iota) == top.as_ref() {
                        (ResonanceKind::Top, step)
                    } else {
                        (ResonanceKind::Ordinary, step)
                    }
                };
                ResonanceRoot {
                    iota,
                    multiplicity,
                    kind,
                    step,
                }
            })
            .collect();
        ResonanceReport {
            det,
            roots,
            residual,
        }
    }

    /// Positive on-grid resonance steps in increasing order.
    pub fn positive_steps(&self) -> Vec<usize> {
        self.roots
            .iter()
            .filter(|r| matches!(r.kind, ResonanceKind::Ordinary | ResonanceKind::Top))
            .filter_map(|r| r.step)
            .collect()
    }

    pub fn top_step(&self) -> Option<usize> {
        self.roots
            .iter()
            .find(|r| r.kind == ResonanceKind::Top)
            .and_then(|r| r.step)
    }

    /// Rational roots as `(iota, multiplicity)` pairs.
    pub fn root_pairs(&self) -> Vec<(Rational, usize)> {
        self.roots
            .iter()
            .map(|r| (r.iota.clone(), r.multiplicity))
            .collect()
    }

    /// `prod (iota - r)^m * residual`.
    pub fn reassemble(&self) -> QPolynomial {
        self.roots.iter().fold(self.residual.clone(), |acc, r| {
            &acc * &QPolynomial::linear_factor(&r.iota).pow(r.multiplicity)
        })
    }
}

/// One singular step of the recursion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonanceEntry {
    pub step: usize,
    #[serde(with = "serde_q")]
    pub iota: Rational,
    #[serde(with = "serde_q")]
    pub det: Rational,
    pub rank: usize,
    #[serde(with = "serde_q_matrix")]
    pub kernel_basis: Vec<Vec<Rational>>,
    #[serde(with = "serde_q_vec")]
    pub rhs: Vec<Rational>,
    pub compatible: bool,
    /// Parameter names bound to the kernel directions, in basis order.
    pub parameters: Vec<String>,
    #[serde(with = "serde_q_vec")]
    pub choice: Vec<Rational>,
}

/// Name of the `k`-th (0-based) kernel direction at `step`.
pub fn resonance_parameter(step: usize, k: usize) -> String {
    if k == 0 {
        format!("lambda_{step}")
    } else {
        format!("lambda_{step}_{}", k + 1)
    }
}

fn is_resonance_parameter(name: &str) -> bool {
    name.strip_prefix("lambda_").is_some_and(|rest| {
        !rest.is_empty() && rest.split('_').all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
    })
}

/// Coefficients computed so far plus everything needed to continue.
#[derive(Debug, Clone)]
pub struct RecursionState {
    pub balance: Balance,
    pub system: QuadraticSystem,
    /// Free-parameter and resonance-parameter bindings.
    pub params: BTreeMap<String, Rational>,
    /// `steps[i][j] = a_{j,i}`.
    pub steps: Vec<Vec<Rational>>,
    pub resonance_log: Vec<ResonanceEntry>,
    pub report: ResonanceReport,
    plan: RecursionPlan,
}

impl RecursionState {
    pub fn new(bal: &Balance, params: &BTreeMap<String, Rational>) -> Result<Self, RecursionError> {
        let system = bal.build_system()?;
        if system.n_vars() != bal.n_vars() {
            return Err(RecursionError::InvalidBalance(
                "balance does not match the system shape".into(),
            ));
        }
        let verdict = validate_balance(&system, bal);
        if !verdict.pass {
            return Err(RecursionError::InvalidBalance(format!(
                "{} equation: {}",
                verdict.failed_equation.unwrap_or_default(),
                verdict.reason.unwrap_or_default()
            )));
        }
        for name in params.keys() {
            if !bal.free_parameters.contains(name) && !is_resonance_parameter(name) {
                return Err(RecursionError::UnknownParameter(name.clone()));
            }
        }
        let leading = bal
            .leading_values(params)
            .map_err(RecursionError::UnboundParameter)?;
        let plan = RecursionPlan::new(&system, bal, leading.clone())?;
        let det = det_poly(|iota| plan.matrix(iota), plan.n_vars())?;
        let report = ResonanceReport::new(det, &bal.q);
        Ok(RecursionState {
            balance: bal.clone(),
            system,
            params: params.clone(),
            steps: vec![leading],
            resonance_log: Vec::new(),
            report,
            plan,
        })
    }

    /// Index of the next step to compute.
    pub fn next_step(&self) -> usize {
        self.steps.len()
    }

    pub fn matrix(&self, step: usize) -> QMatrix {
        self.plan.matrix(&(int(step as i64) * &self.plan.q))
    }

    pub fn rhs(&self, step: usize) -> Result<Vec<Rational>, RecursionError> {
        if step == 0 || step > self.steps.len() {
            return Err(RecursionError::OutOfOrder {
                expected: self.steps.len(),
                got: step,
            });
        }
        Ok(self.plan.rhs(&self.steps, step))
    }

    /// Computes step `step`, which must be the next one. At a resonance the
    /// kernel directions are weighted by `choice`, or by the bound
    /// `lambda_*` parameters, defaulting to zero.
    pub fn advance(&mut self, step: usize, choice: Option<&[Rational]>) -> Result<(), RecursionError> {
        if step != self.next_step() || step == 0 {
            return Err(RecursionError::OutOfOrder {
                expected: self.next_step(),
                got: step,
            });
        }
        let m = self.matrix(step);
        let v = self.plan.rhs(&self.steps, step);
        let solution = solve_affine(&m, &v)?;
        if solution.kernel_basis.is_empty() {
            let x = solution
                .particular
                .expect("injective square systems are always solvable");
            self.steps.push(x);
            return Ok(());
        }
        let names: Vec<String> = (0..solution.kernel_basis.len())
            .map(|k| resonance_parameter(step, k))
            .collect();
        if let Some(values) = choice {
            for (name, value) in names.iter().zip(values) {
                self.params.insert(name.clone(), value.clone());
            }
        }
        let lambdas: Vec<Rational> = names
            .iter()
            .map(|n| self.params.get(n).cloned().unwrap_or_else(Rational::zero))
            .collect();
        let compatible = solution.is_feasible();
        self.resonance_log.push(ResonanceEntry {
            step,
            iota: int(step as i64) * &self.plan.q,
            det: Rational::zero(),
            rank: rank(&m),
            kernel_basis: solution.kernel_basis.clone(),
            rhs: v,
            compatible,
            parameters: names,
            choice: lambdas.clone(),
        });
        match solution.point(&lambdas) {
            Some(x) => {
                self.steps.push(x);
                Ok(())
            }
            None => Err(RecursionError::Incompatible { step }),
        }
    }

    /// Advances through step `last` inclusive.
    pub fn advance_to(&mut self, last: usize) -> Result<(), RecursionError> {
        while self.next_step() <= last {
            let step = self.next_step();
            self.advance(step, None)?;
        }
        Ok(())
    }

    /// Drops every step at and beyond `step`.
    pub fn truncate(&mut self, step: usize) {
        self.steps.truncate(step.max(1));
        self.resonance_log.retain(|e| e.step < step);
    }

    /// Step index of the `t^0` coefficient of the constraint.
    pub fn constant_term_step(&self) -> Result<usize, RecursionError> {
        let lowest = lowest_constraint_exponent(&self.system, &self.plan.exponents);
        let k = -lowest / &self.plan.q;
        if k.is_negative() || !k.is_integer() {
            return Err(RecursionError::NoConstantTerm);
        }
        Ok(k.to_integer().to_usize().expect("step fits in usize"))
    }

    /// Coefficients of `G` along the current steps through `through`.
    pub fn constraint_series(&self, through: usize) -> Vec<(Rational, Rational)> {
        constraint_coefficients(&self.system, &self.plan.exponents, &self.plan.q, &self.steps, through)
    }

    fn constant_coefficient(&self) -> Rational {
        let k = self.steps.len() - 1;
        self.constraint_series(k)
            .into_iter()
            .find(|(e, _)| e.is_zero())
            .map(|(_, c)| c)
            .unwrap_or_else(Rational::zero)
    }

    /// Chooses the first top-resonance parameter so that the `t^0`
    /// coefficient of `G` vanishes, recomputes every later step, and returns
    /// the chosen value (relative to the engine's kernel basis).
    pub fn project_h0(&mut self) -> Result<Rational, RecursionError> {
        let top = self.report.top_step().ok_or(RecursionError::NoTopResonance)?;
        let k0 = self.constant_term_step()?;
        let through = (self.next_step().max(1) - 1).max(top).max(k0);
        let name = resonance_parameter(top, 0);
        let probe = |lambda: Rational| -> Result<Rational, RecursionError> {
            let mut trial = self.clone();
            trial.truncate(top);
            trial.params.insert(name.clone(), lambda);
            trial.advance_to(k0.max(top))?;
            Ok(trial.constant_coefficient())
        };
        let g0 = probe(Rational::zero())?;
        let g1 = probe(Rational::one())?;
        let g2 = probe(int(2))?;
        if &g2 - int(2) * &g1 + &g0 != Rational::zero() {
            return Err(RecursionError::NotAffine);
        }
        let slope = &g1 - &g0;
        if slope.is_zero() {
            return Err(RecursionError::Degenerate);
        }
        let lambda = -g0 / slope;
        self.truncate(top);
        self.params.insert(name, lambda.clone());
        self.advance_to(through)?;
        Ok(lambda)
    }

    /// Snapshot as a truncated series through step `n`.
    pub fn to_solution(&self, n: usize, h0_projected: bool, lambda: Option<Rational>) -> SeriesSolution {
        let n = n.min(self.steps.len() - 1);
        let variables = self
            .system
            .variables
            .iter()
            .enumerate()
            .map(|(j, name)| SeriesVariable {
                name: name.clone(),
                leading_exponent: self.plan.exponents[j].clone(),
                terms: (0..=n)
                    .map(|i| SeriesTerm {
                        exponent: &self.plan.exponents[j] + int(i as i64) * &self.plan.q,
                        coeff: self.steps[i][j].clone(),
                    })
                    .collect(),
            })
            .collect();
        SeriesSolution {
            balance: self.balance.clone(),
            params: self.params.clone(),
            q: self.plan.q.clone(),
            truncation: n,
            h0_projected,
            lambda,
            variables,
            resonance_log: self.resonance_log.clone(),
        }
    }
}

/// Lowest leading exponent among the constraint monomials.
fn lowest_constraint_exponent(sys: &QuadraticSystem, exponents: &[Rational]) -> Rational {
    sys.constraint
        .iter()
        .map(|m| {
            m.factors()
                .iter()
                .fold(Rational::zero(), |acc, &k| acc + &exponents[k])
        })
        .min()
        .unwrap_or_else(Rational::zero)
}

/// Coefficients of `G(y(t))` ordered by exponent, for exponents up to
/// `lowest + through * Q`. Every listed coefficient is exact: it only
/// involves steps `<= through`. Grid exponents with no contribution are
/// listed with a zero coefficient.
pub fn constraint_coefficients(
    sys: &QuadraticSystem,
    exponents: &[Rational],
    q: &Rational,
    steps: &[Vec<Rational>],
    through: usize,
) -> Vec<(Rational, Rational)> {
    let through = through.min(steps.len().saturating_sub(1));
    let lowest = lowest_constraint_exponent(sys, exponents);
    let ceiling = &lowest + int(through as i64) * q;
    let mut acc: BTreeMap<Rational, Rational> = (0..=through)
        .map(|k| (&lowest + int(k as i64) * q, Rational::zero()))
        .collect();
    for m in &sys.constraint {
        let factors = m.factors();
        let lead = factors
            .iter()
            .fold(Rational::zero(), |s, &k| s + &exponents[k]);
        match factors.as_slice() {
            [] => *acc.entry(lead).or_insert_with(Rational::zero) += &m.coeff,
            [k] => {
                for (p, step) in steps.iter().enumerate().take(through + 1) {
                    let e = &lead + int(p as i64) * q;
                    if e <= ceiling {
                        *acc.entry(e).or_insert_with(Rational::zero) += &m.coeff * &step[*k];
                    }
                }
            }
            [k, l] => {
                for p in 0..=through {
                    for r in 0..=(through - p) {
                        let e = &lead + int((p + r) as i64) * q;
                        if e <= ceiling {
                            *acc.entry(e).or_insert_with(Rational::zero) +=
                                &m.coeff * &steps[p][*k] * &steps[r][*l];
                        }
                    }
                }
            }
            _ => unreachable!("constraint monomials have degree <= 2"),
        }
    }
    acc.into_iter().filter(|(e, _)| *e <= ceiling).collect()
}

/// `X(iQ)` for a balance under the given bindings.
pub fn resonance_matrix(
    bal: &Balance,
    params: &BTreeMap<String, Rational>,
    step: usize,
) -> Result<QMatrix, RecursionError> {
    Ok(RecursionState::new(bal, params)?.matrix(step))
}

/// `X(iota)` at an arbitrary rational `iota`.
pub fn resonance_matrix_at(
    bal: &Balance,
    params: &BTreeMap<String, Rational>,
    iota: &Rational,
) -> Result<QMatrix, RecursionError> {
    Ok(RecursionState::new(bal, params)?.plan.matrix(iota))
}

/// `det X(iota)` with rational roots, classified.
pub fn resonance_report(
    bal: &Balance,
    params: &BTreeMap<String, Rational>,
) -> Result<ResonanceReport, RecursionError> {
    Ok(RecursionState::new(bal, params)?.report)
}

/// One coefficient `coeff * t^exponent`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTerm {
    #[serde(with = "serde_q")]
    pub exponent: Rational,
    #[serde(with = "serde_q")]
    pub coeff: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesVariable {
    pub name: String,
    #[serde(with = "serde_q")]
    pub leading_exponent: Rational,
    /// `terms[i]` is step `i`.
    pub terms: Vec<SeriesTerm>,
}

/// Truncated series `y_j = sum_{i <= N} a_{j,i} t^{alpha_j + iQ}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub balance: Balance,
    #[serde(with = "serde_q_map")]
    pub params: BTreeMap<String, Rational>,
    #[serde(with = "serde_q")]
    pub q: Rational,
    pub truncation: usize,
    pub h0_projected: bool,
    #[serde(with = "serde_q_opt")]
    pub lambda: Option<Rational>,
    pub variables: Vec<SeriesVariable>,
    pub resonance_log: Vec<ResonanceEntry>,
}

impl SeriesSolution {
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn coeff(&self, var: usize, step: usize) -> &Rational {
        &self.variables[var].terms[step].coeff
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn exponents(&self) -> Vec<Rational> {
        self.variables
            .iter()
            .map(|v| v.leading_exponent.clone())
            .collect()
    }

    /// `steps[i][j] = a_{j,i}`.
    pub fn steps(&self) -> Vec<Vec<Rational>> {
        (0..=self.truncation)
            .map(|i| self.variables.iter().map(|v| v.terms[i].coeff.clone()).collect())
            .collect()
    }

    pub fn system(&self) -> Result<QuadraticSystem, SystemError> {
        self.balance.build_system()
    }

    /// Coefficients of `G` along the series through step `through`.
    pub fn constraint_series(&self, through: usize) -> Result<Vec<(Rational, Rational)>, SystemError> {
        Ok(constraint_coefficients(
            &self.system()?,
            &self.exponents(),
            &self.q,
            &self.steps(),
            through,
        ))
    }
}

/// Default truncation `12 / Q`, rounded up.
pub fn default_truncation(q: &Rational) -> usize {
    (int(12) / q).ceil().to_integer().to_usize().unwrap_or(12)
}

/// Full pipeline: recursion through step `n`, optionally projected onto
/// `G = 0` at the top resonance. A projected run is computed at least
/// through the top resonance and the `t^0` constraint step, and every
/// constraint coefficient in that range is checked to vanish.
pub fn run(
    bal: &Balance,
    params: &BTreeMap<String, Rational>,
    n: usize,
    auto_h0: bool,
) -> Result<SeriesSolution, RecursionError> {
    let mut state = RecursionState::new(bal, params)?;
    if !auto_h0 {
        state.advance_to(n)?;
        return Ok(state.to_solution(n, false, None));
    }
    let top = state.report.top_step().ok_or(RecursionError::NoTopResonance)?;
    let through = n.max(top).max(state.constant_term_step()?);
    state.advance_to(through)?;
    let lambda = state.project_h0()?;
    for (exponent, value) in state.constraint_series(through) {
        if !value.is_zero() {
            return Err(RecursionError::ConstraintResidual { exponent, value });
        }
    }
    Ok(state.to_solution(n, true, Some(lambda)))
}

/// Independent parameters of a family: the singularity position, the free
/// leading coefficients, and the kernel directions at compatible positive
/// resonances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterCensus {
    pub position: usize,
    pub leading: usize,
    pub resonant: usize,
    pub total: usize,
}

/// Census over a recursion state advanced past every positive resonance.
pub fn parameter_census(state: &RecursionState) -> ParameterCensus {
    let position = usize::from(
        state
            .report
            .roots
            .iter()
            .any(|r| r.kind == ResonanceKind::Position),
    );
    let leading = state.balance.free_parameters.len();
    let resonant = state
        .resonance_log
        .iter()
        .filter(|e| e.step > 0 && e.compatible)
        .map(|e| e.kernel_basis.len())
        .sum();
    ParameterCensus {
        position,
        leading,
        resonant,
        total: position + leading + resonant,
    }
}
