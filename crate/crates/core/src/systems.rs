//! The two quadratic ODE systems: multiple warped products over Einstein
//! factors and the S^1-bundle (Berard Bergery) ansatz, each with the
//! constraint function `G` whose zero set is the zero-energy level `H = 0`.
//!
//! Warped products with factor dimensions `d_1..d_r` use the variables
//! `(x_1..x_{r+1}, u_1..u_{r+1})`:
//!
//! ```text
//! x_i' = -2 x_i u_i              u_i' = -u_i u_{r+1} + x_i / d_i
//! x_{r+1}' = x_{r+1} u_{r+1}     u_{r+1}' = -sum_k d_k u_k^2
//! G = sum_k d_k u_k^2 - u_{r+1}^2 + sum_k x_k + 1
//! ```
//!
//! The bundle system with even base dimension `d_2` uses `(x1,x2,x3,v1,v2,v3)`:
//!
//! ```text
//! x1' = -2 x1 v1                 v1' = -v1 v3 + (x1 + 2 x2) / d_2
//! x2' = -2 x2 (2 v1 + v2)        v2' = -v2 v3 + x2
//! x3' = x3 v3                    v3' = -d_2 v1^2 - v2^2
//! G = d_2 v1^2 + v2^2 - v3^2 + x1 + x2 + 1
//! ```
//!
//! `G` is a first integral of both systems.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{frac, int, serde_q, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("invalid dimensions: {0}")]
    InvalidDimension(String),
    #[error("state has {found} entries, system has {expected} variables")]
    StateLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Warped,
    BerardBergery,
}

impl SystemKind {
    pub fn label(self) -> &'static str {
        match self {
            SystemKind::Warped => "warped",
            SystemKind::BerardBergery => "bb",
        }
    }
}

/// Factor dimensions: `d_1..d_r` for warped products, the base dimension
/// `d_2` for the bundle ansatz.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimensionSpec {
    Warped { dims: Vec<u32> },
    BerardBergery { d2: u32 },
}

impl DimensionSpec {
    pub fn warped(dims: &[u32]) -> Result<Self, SystemError> {
        let spec = DimensionSpec::Warped {
            dims: dims.to_vec(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn bb(d2: u32) -> Result<Self, SystemError> {
        let spec = DimensionSpec::BerardBergery { d2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SystemError> {
        match self {
            DimensionSpec::Warped { dims } => {
                if dims.is_empty() {
                    return Err(SystemError::InvalidDimension(
                        "a warped product needs at least one factor".into(),
                    ));
                }
                if let Some(d) = dims.iter().find(|&&d| d < 2) {
                    return Err(SystemError::InvalidDimension(format!(
                        "factor dimension {d} < 2"
                    )));
                }
                Ok(())
            }
            DimensionSpec::BerardBergery { d2 } => {
                if *d2 < 2 || d2 % 2 != 0 {
                    return Err(SystemError::InvalidDimension(format!(
                        "base dimension {d2} must be even and >= 2"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn kind(&self) -> SystemKind {
        match self {
            DimensionSpec::Warped { .. } => SystemKind::Warped,
            DimensionSpec::BerardBergery { .. } => SystemKind::BerardBergery,
        }
    }

    /// Warped factor dimensions; empty for the bundle ansatz.
    pub fn factor_dims(&self) -> &[u32] {
        match self {
            DimensionSpec::Warped { dims } => dims,
            DimensionSpec::BerardBergery { .. } => &[],
        }
    }

    pub fn build_system(&self) -> Result<QuadraticSystem, SystemError> {
        match self {
            DimensionSpec::Warped { dims } => build_warped_system(dims),
            DimensionSpec::BerardBergery { d2 } => build_bb_system(*d2),
        }
    }
}

/// `coeff * prod_k state[k]^exponents[k]` with total degree at most two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    #[serde(with = "serde_q")]
    pub coeff: Rational,
    pub exponents: Vec<u8>,
}

impl Monomial {
    pub fn constant(n: usize, coeff: Rational) -> Self {
        Monomial {
            coeff,
            exponents: vec![0; n],
        }
    }

    pub fn linear(n: usize, coeff: Rational, var: usize) -> Self {
        let mut exponents = vec![0; n];
        exponents[var] = 1;
        Monomial { coeff, exponents }
    }

    pub fn quadratic(n: usize, coeff: Rational, a: usize, b: usize) -> Self {
        let mut exponents = vec![0; n];
        exponents[a] += 1;
        exponents[b] += 1;
        Monomial { coeff, exponents }
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().map(|&e| u32::from(e)).sum()
    }

    /// Variable indices with multiplicity, e.g. `x_0 x_3 -> [0, 3]`,
    /// `x_2^2 -> [2, 2]`.
    pub fn factors(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .enumerate()
            .flat_map(|(k, &e)| std::iter::repeat_n(k, usize::from(e)))
            .collect()
    }

    pub fn eval(&self, state: &[Rational]) -> Rational {
        self.factors()
            .iter()
            .fold(self.coeff.clone(), |acc, &k| acc * &state[k])
    }

    pub fn eval_f64(&self, state: &[f64]) -> f64 {
        self.factors()
            .iter()
            .fold(to_f64(&self.coeff), |acc, &k| acc * state[k])
    }

    /// Partial derivative with respect to `var`, evaluated at `state`.
    pub fn partial(&self, var: usize, state: &[Rational]) -> Rational {
        let e = self.exponents[var];
        if e == 0 {
            return Rational::zero();
        }
        let mut reduced = self.clone();
        reduced.exponents[var] -= 1;
        reduced.coeff *= int(i64::from(e));
        reduced.eval(state)
    }
}

/// First-order system `y' = f(y)` with polynomial right-hand sides of degree
/// at most two, together with its quadratic constraint function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticSystem {
    pub dims: DimensionSpec,
    pub variables: Vec<String>,
    pub rhs: Vec<Vec<Monomial>>,
    pub constraint: Vec<Monomial>,
}

impl QuadraticSystem {
    pub fn kind(&self) -> SystemKind {
        self.dims.kind()
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    fn check_len(&self, len: usize) -> Result<(), SystemError> {
        if len != self.n_vars() {
            return Err(SystemError::StateLength {
                expected: self.n_vars(),
                found: len,
            });
        }
        Ok(())
    }

    /// Exact evaluation of every right-hand side.
    pub fn eval_rhs(&self, state: &[Rational]) -> Result<Vec<Rational>, SystemError> {
        self.check_len(state.len())?;
        Ok(self
            .rhs
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .fold(Rational::zero(), |acc, m| acc + m.eval(state))
            })
            .collect())
    }

    /// Exact value of the constraint `G`.
    pub fn eval_constraint(&self, state: &[Rational]) -> Result<Rational, SystemError> {
        self.check_len(state.len())?;
        Ok(self
            .constraint
            .iter()
            .fold(Rational::zero(), |acc, m| acc + m.eval(state)))
    }

    /// Gradient of `G` at `state`.
    pub fn constraint_gradient(&self, state: &[Rational]) -> Result<Vec<Rational>, SystemError> {
        self.check_len(state.len())?;
        Ok((0..self.n_vars())
            .map(|k| {
                self.constraint
                    .iter()
                    .fold(Rational::zero(), |acc, m| acc + m.partial(k, state))
            })
            .collect())
    }

    /// Time derivative of `G` along the flow, `grad G . f`, evaluated exactly.
    pub fn constraint_rate(&self, state: &[Rational]) -> Result<Rational, SystemError> {
        let grad = self.constraint_gradient(state)?;
        let f = self.eval_rhs(state)?;
        Ok(grad.iter().zip(&f).fold(Rational::zero(), |acc, (g, v)| acc + g * v))
    }

    /// Floating-point right-hand side. Panics on a length mismatch.
    pub fn eval_rhs_f64(&self, state: &[f64], out: &mut [f64]) {
        assert_eq!(state.len(), self.n_vars());
        for (slot, terms) in out.iter_mut().zip(&self.rhs) {
            *slot = terms.iter().map(|m| m.eval_f64(state)).sum();
        }
    }

    pub fn eval_constraint_f64(&self, state: &[f64]) -> f64 {
        assert_eq!(state.len(), self.n_vars());
        self.constraint.iter().map(|m| m.eval_f64(state)).sum()
    }
}

/// Warped product system for factor dimensions `d_1..d_r`.
pub fn build_warped_system(dims: &[u32]) -> Result<QuadraticSystem, SystemError> {
    let spec = DimensionSpec::warped(dims)?;
    let r = dims.len();
    let n = 2 * r + 2;
    let x = |i: usize| i;
    let u = |i: usize| r + 1 + i;
    let top = r; // index of x_{r+1} among x's and of u_{r+1} among u's

    let mut variables: Vec<String> = (1..=r + 1).map(|i| format!("x{i}")).collect();
    variables.extend((1..=r + 1).map(|i| format!("u{i}")));

    let mut rhs = vec![Vec::new(); n];
    for (i, &d) in dims.iter().enumerate() {
        rhs[x(i)].push(Monomial::quadratic(n, int(-2), x(i), u(i)));
        rhs[u(i)].push(Monomial::quadratic(n, int(-1), u(i), u(top)));
        rhs[u(i)].push(Monomial::linear(n, frac(1, i64::from(d)), x(i)));
    }
    rhs[x(top)].push(Monomial::quadratic(n, int(1), x(top), u(top)));
    for (k, &d) in dims.iter().enumerate() {
        rhs[u(top)].push(Monomial::quadratic(n, -int(i64::from(d)), u(k), u(k)));
    }

    let mut constraint = Vec::new();
    for (k, &d) in dims.iter().enumerate() {
        constraint.push(Monomial::quadratic(n, int(i64::from(d)), u(k), u(k)));
    }
    constraint.push(Monomial::quadratic(n, int(-1), u(top), u(top)));
    for k in 0..r {
        constraint.push(Monomial::linear(n, int(1), x(k)));
    }
    constraint.push(Monomial::constant(n, Rational::one()));

    Ok(QuadraticSystem {
        dims: spec,
        variables,
        rhs,
        constraint,
    })
}

/// Bundle-ansatz system over a Kahler-Einstein base of even dimension `d2`.
pub fn build_bb_system(d2: u32) -> Result<QuadraticSystem, SystemError> {
    let spec = DimensionSpec::bb(d2)?;
    let n = 6;
    let (x1, x2, x3, v1, v2, v3) = (0, 1, 2, 3, 4, 5);
    let d = i64::from(d2);
    let variables = ["x1", "x2", "x3", "v1", "v2", "v3"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rhs = vec![
        vec![Monomial::quadratic(n, int(-2), x1, v1)],
        vec![
            Monomial::quadratic(n, int(-4), x2, v1),
            Monomial::quadratic(n, int(-2), x2, v2),
        ],
        vec![Monomial::quadratic(n, int(1), x3, v3)],
        vec![
            Monomial::quadratic(n, int(-1), v1, v3),
            Monomial::linear(n, frac(1, d), x1),
            Monomial::linear(n, frac(2, d), x2),
        ],
        vec![
            Monomial::quadratic(n, int(-1), v2, v3),
            Monomial::linear(n, int(1), x2),
        ],
        vec![
            Monomial::quadratic(n, int(-d), v1, v1),
            Monomial::quadratic(n, int(-1), v2, v2),
        ],
    ];
    let constraint = vec![
        Monomial::quadratic(n, int(d), v1, v1),
        Monomial::quadratic(n, int(1), v2, v2),
        Monomial::quadratic(n, int(-1), v3, v3),
        Monomial::linear(n, int(1), x1),
        Monomial::linear(n, int(1), x2),
        Monomial::constant(n, Rational::one()),
    ];
    Ok(QuadraticSystem {
        dims: spec,
        variables,
        rhs,
        constraint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&k| int(k)).collect()
    }

    #[test]
    fn one_factor_u1_equation() {
        let sys = build_warped_system(&[7]).unwrap();
        assert_eq!(sys.variables, ["x1", "x2", "u1", "u2"]);
        // u1' = -u1 u2 + x1/7
        assert_eq!(
            sys.rhs[2],
            vec![
                Monomial::quadratic(4, int(-1), 2, 3),
                Monomial::linear(4, frac(1, 7), 0)
            ]
        );
    }

    #[test]
    fn two_factor_top_equation() {
        let sys = build_warped_system(&[2, 2]).unwrap();
        assert_eq!(sys.n_vars(), 6);
        // u3' = -2 u1^2 - 2 u2^2
        let state = ints(&[0, 0, 0, 1, 1, 0]);
        assert_eq!(sys.eval_rhs(&state).unwrap()[5], int(-4));
        let state = ints(&[0, 0, 0, 3, 0, 0]);
        assert_eq!(sys.eval_rhs(&state).unwrap()[5], int(-18));
    }

    #[test]
    fn origin_is_an_equilibrium() {
        for sys in [
            build_warped_system(&[3]).unwrap(),
            build_warped_system(&[2, 5, 4]).unwrap(),
            build_bb_system(4).unwrap(),
        ] {
            let zero = vec![Rational::zero(); sys.n_vars()];
            assert!(sys.eval_rhs(&zero).unwrap().iter().all(Zero::is_zero));
            assert_eq!(sys.eval_constraint(&zero).unwrap(), int(1));
        }
    }

    #[test]
    fn warped_hand_substitution() {
        let sys = build_warped_system(&[2]).unwrap();
        let f = sys.eval_rhs(&ints(&[1, 1, 1, 1])).unwrap();
        assert_eq!(f, vec![int(-2), int(1), frac(-1, 2), int(-2)]);
    }

    #[test]
    fn x_top_slot_vanishes_with_x_top() {
        let sys = build_warped_system(&[3, 4]).unwrap();
        let mut state = vec![Rational::zero(); 6];
        state[5] = int(5);
        let f = sys.eval_rhs(&state).unwrap();
        assert!(f[2].is_zero());
        assert!(f.iter().all(Zero::is_zero));
    }

    #[test]
    fn constraint_values() {
        let sys = build_warped_system(&[2]).unwrap();
        assert_eq!(sys.eval_constraint(&ints(&[1, 0, 1, 2])).unwrap(), int(0));
        let bb = build_bb_system(2).unwrap();
        assert_eq!(bb.eval_constraint(&ints(&[0, 0, 0, 0, 0, 1])).unwrap(), int(0));
    }

    #[test]
    fn bundle_equations() {
        let bb = build_bb_system(2).unwrap();
        // v1' = -v1 v3 + (x1 + 2 x2)/2
        let f = bb.eval_rhs(&ints(&[1, 1, 0, 1, 0, 1])).unwrap();
        assert_eq!(f[3], frac(1, 2));
        assert_eq!(
            bb.rhs[1],
            vec![
                Monomial::quadratic(6, int(-4), 1, 3),
                Monomial::quadratic(6, int(-2), 1, 4)
            ]
        );
        // x3' = x3 v3
        assert_eq!(bb.rhs[2], vec![Monomial::quadratic(6, int(1), 2, 5)]);
    }

    #[test]
    fn invalid_dimensions() {
        assert!(build_warped_system(&[1]).is_err());
        assert!(build_warped_system(&[]).is_err());
        assert!(build_bb_system(3).is_err());
        assert!(build_bb_system(0).is_err());
    }

    #[test]
    fn state_length_checked() {
        let sys = build_warped_system(&[2]).unwrap();
        assert!(matches!(
            sys.eval_rhs(&ints(&[1, 2])),
            Err(SystemError::StateLength { .. })
        ));
        assert!(sys.eval_constraint(&ints(&[1])).is_err());
    }

    #[test]
    fn every_monomial_has_degree_at_most_two() {
        for sys in [build_warped_system(&[2, 3, 9]).unwrap(), build_bb_system(6).unwrap()] {
            assert!(sys.rhs.iter().flatten().all(|m| m.degree() <= 2));
            assert!(sys.constraint.iter().all(|m| m.degree() <= 2));
        }
    }
}
