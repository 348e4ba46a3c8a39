//! Leading-order balances `y_j ~ c_j t^{alpha_j}` for both systems and a
//! symbolic check that the dominant terms of every equation cancel.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{exact_sqrt, frac, int, rational_gcd, serde_q, serde_q_vec, Rational};
use crate::systems::{DimensionSpec, QuadraticSystem, SystemError, SystemKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BalanceError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("l = {l} is out of range 1..={r}")]
    LOutOfRange { l: usize, r: usize },
    #[error("ellipsoid point has {len} coordinates, only {r} factors")]
    PointTooLong { len: usize, r: usize },
    #[error("ellipsoid point has a zero coordinate")]
    ZeroCoordinate,
    #[error("point is not on the ellipsoid: sum d_k alpha_k^2 = {value}, expected 4")]
    NotOnEllipsoid { value: Rational },
    #[error("d1 = {0} is not a perfect square; this balance has irrational exponents")]
    IrrationalExponent(u32),
}

/// Which of the classified leading-order families a balance belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BalanceFamily {
    /// One factor, `alpha = -2`.
    Uno,
    /// One factor, `alpha = -/+ 2/sqrt(d1)`; `sign` is the sign of alpha.
    Dos { sign: Sign },
    /// `l` factors with `alpha_i = -2`, the rest with `alpha_i = 0`.
    CaseI { l: usize },
    /// `l` factors with `alpha_i > -2` on the ellipsoid, the rest zero.
    CaseII {
        #[serde(with = "serde_q_vec")]
        point: Vec<Rational>,
    },
    /// The bundle family with exponents `(0, 2, 1, 1, -1, -1)`.
    Bb,
    /// The zero state, a constant solution.
    Equilibrium,
}

impl BalanceFamily {
    pub fn label(&self) -> String {
        match self {
            BalanceFamily::Uno => "uno".into(),
            BalanceFamily::Dos { sign } => format!("dos({sign})"),
            BalanceFamily::CaseI { l } => format!("caseI(l={l})"),
            BalanceFamily::CaseII { point } => {
                let p: Vec<String> = point.iter().map(ToString::to_string).collect();
                format!("caseII({})", p.join(","))
            }
            BalanceFamily::Bb => "bb".into(),
            BalanceFamily::Equilibrium => "equilibrium".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

/// Leading coefficient of one variable: a fixed rational, or `scale * p` for
/// a named free parameter `p`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeadingCoeff {
    Fixed {
        #[serde(with = "serde_q")]
        value: Rational,
    },
    Param {
        name: String,
        #[serde(with = "serde_q")]
        scale: Rational,
    },
}

impl LeadingCoeff {
    pub fn fixed(value: Rational) -> Self {
        LeadingCoeff::Fixed { value }
    }

    pub fn param(name: impl Into<String>) -> Self {
        Self::scaled(name, Rational::one())
    }

    pub fn scaled(name: impl Into<String>, scale: Rational) -> Self {
        LeadingCoeff::Param {
            name: name.into(),
            scale,
        }
    }

    /// Value under the given bindings; `Err(name)` if unbound.
    pub fn value(&self, params: &BTreeMap<String, Rational>) -> Result<Rational, String> {
        match self {
            LeadingCoeff::Fixed { value } => Ok(value.clone()),
            LeadingCoeff::Param { name, scale } => params
                .get(name)
                .map(|p| p * scale)
                .ok_or_else(|| name.clone()),
        }
    }

    fn symbolic(&self) -> ParamPoly {
        match self {
            LeadingCoeff::Fixed { value } => ParamPoly::constant(value.clone()),
            LeadingCoeff::Param { name, scale } => ParamPoly::param(name, scale.clone()),
        }
    }
}

/// A leading-order ansatz for every variable of a system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Balance {
    pub system_kind: SystemKind,
    /// Factor dimensions after canonical reordering.
    pub dims: DimensionSpec,
    pub family: BalanceFamily,
    #[serde(with = "serde_q_vec")]
    pub exponents: Vec<Rational>,
    pub coefficients: Vec<LeadingCoeff>,
    #[serde(with = "serde_q")]
    pub q: Rational,
    /// Number of factors with nonzero leading exponent.
    pub l: usize,
    pub free_parameters: Vec<String>,
    /// `permutation[k]` is the caller's index of reordered factor `k`.
    pub permutation: Vec<usize>,
}

impl Balance {
    pub fn n_vars(&self) -> usize {
        self.exponents.len()
    }

    /// Default bindings: every free parameter set to one.
    pub fn default_params(&self) -> BTreeMap<String, Rational> {
        self.free_parameters
            .iter()
            .map(|p| (p.clone(), Rational::one()))
            .collect()
    }

    /// Leading coefficients under the given bindings.
    pub fn leading_values(
        &self,
        params: &BTreeMap<String, Rational>,
    ) -> Result<Vec<Rational>, String> {
        self.coefficients.iter().map(|c| c.value(params)).collect()
    }

    /// Integer steps `s_j = (alpha_j + 2)/Q` for the first `l` factors.
    pub fn steps(&self) -> Vec<Rational> {
        self.exponents[..self.l]
            .iter()
            .map(|a| (a + int(2)) / &self.q)
            .collect()
    }

    pub fn build_system(&self) -> Result<QuadraticSystem, SystemError> {
        self.dims.build_system()
    }
}

/// A rational point with nonzero coordinates on `sum d_k alpha_k^2 = 4`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EllipsoidPoint {
    #[serde(with = "serde_q_vec")]
    pub coordinates: Vec<Rational>,
}

impl EllipsoidPoint {
    pub fn new(coordinates: Vec<Rational>) -> Self {
        EllipsoidPoint { coordinates }
    }

    /// `sum d_k alpha_k^2`.
    pub fn quadric_value(&self, dims: &[u32]) -> Rational {
        self.coordinates
            .iter()
            .zip(dims)
            .fold(Rational::zero(), |acc, (a, &d)| acc + a * a * int(i64::from(d)))
    }

    pub fn check(&self, dims: &[u32]) -> Result<(), BalanceError> {
        if self.coordinates.len() > dims.len() {
            return Err(BalanceError::PointTooLong {
                len: self.coordinates.len(),
                r: dims.len(),
            });
        }
        if self.coordinates.iter().any(Zero::is_zero) {
            return Err(BalanceError::ZeroCoordinate);
        }
        let value = self.quadric_value(dims);
        if value != int(4) {
            return Err(BalanceError::NotOnEllipsoid { value });
        }
        Ok(())
    }
}

impl fmt::Display for EllipsoidPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coordinates.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Name of the free leading coefficient of factor `i` (1-based).
pub fn a_name(i: usize) -> String {
    format!("a_{{{i},0}}")
}

pub const B0: &str = "b0";

/// Result of enumerating the one-factor balances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneFactorBalances {
    pub balances: Vec<Balance>,
    /// Families that exist but have irrational exponents, as labels.
    pub irrational: Vec<String>,
}

/// Balances for a single factor: (uno) always, both (dos) variants when
/// `d1` is a perfect square.
pub fn balances_one_factor(d1: u32) -> Result<OneFactorBalances, BalanceError> {
    DimensionSpec::warped(&[d1])?;
    let mut balances = vec![uno(d1)?];
    let mut irrational = Vec::new();
    for sign in [Sign::Minus, Sign::Plus] {
        match dos(d1, sign) {
            Ok(b) => balances.push(b),
            Err(BalanceError::IrrationalExponent(_)) => {
                irrational.push(BalanceFamily::Dos { sign }.label())
            }
            Err(e) => return Err(e),
        }
    }
    Ok(OneFactorBalances {
        balances,
        irrational,
    })
}

/// `a0 = d1(d1-1), c0 = 1, alpha = -2, e0 = beta = d1`.
pub fn uno(d1: u32) -> Result<Balance, BalanceError> {
    let mut b = balance_multi_case_i(&[d1], 1)?;
    b.family = BalanceFamily::Uno;
    Ok(b)
}

/// `c0 = -alpha/2 = +/- 1/sqrt(d1)`, `e0 = beta = 1`, `Q = 2/sqrt(d1)`.
pub fn dos(d1: u32, sign: Sign) -> Result<Balance, BalanceError> {
    DimensionSpec::warped(&[d1])?;
    let root = exact_sqrt(&int(i64::from(d1))).ok_or(BalanceError::IrrationalExponent(d1))?;
    let alpha = match sign {
        Sign::Minus => -int(2) / root,
        Sign::Plus => int(2) / root,
    };
    let mut b = balance_multi_case_ii(&[d1], &EllipsoidPoint::new(vec![alpha]))?;
    b.family = BalanceFamily::Dos { sign };
    Ok(b)
}

/// `alpha_1..alpha_l = -2`, the remaining factors have `alpha_i = 0`.
pub fn balance_multi_case_i(dims: &[u32], l: usize) -> Result<Balance, BalanceError> {
    let spec = DimensionSpec::warped(dims)?;
    let r = dims.len();
    if l == 0 || l > r {
        return Err(BalanceError::LOutOfRange { l, r });
    }
    let e0: i64 = dims[..l].iter().map(|&d| i64::from(d)).sum();
    let mut exponents = Vec::with_capacity(2 * r + 2);
    let mut coefficients = Vec::with_capacity(2 * r + 2);
    let mut free = vec![B0.to_string()];
    for (i, &d) in dims.iter().enumerate() {
        if i < l {
            exponents.push(int(-2));
            coefficients.push(LeadingCoeff::fixed(int(i64::from(d) * (e0 - 1))));
        } else {
            exponents.push(int(0));
            coefficients.push(LeadingCoeff::param(a_name(i + 1)));
            free.push(a_name(i + 1));
        }
    }
    exponents.push(int(e0));
    coefficients.push(LeadingCoeff::param(B0));
    for (i, &d) in dims.iter().enumerate() {
        if i < l {
            exponents.push(int(-1));
            coefficients.push(LeadingCoeff::fixed(int(1)));
        } else {
            exponents.push(int(1));
            coefficients.push(LeadingCoeff::scaled(
                a_name(i + 1),
                frac(1, i64::from(d) * (e0 + 1)),
            ));
        }
    }
    exponents.push(int(-1));
    coefficients.push(LeadingCoeff::fixed(int(e0)));
    Ok(Balance {
        system_kind: SystemKind::Warped,
        dims: spec,
        family: BalanceFamily::CaseI { l },
        exponents,
        coefficients,
        q: int(1),
        l,
        free_parameters: free,
        permutation: (0..r).collect(),
    })
}

/// `l` factors with `alpha_i` on the ellipsoid, `c_{i,0} = -alpha_i/2`,
/// `e0 = 1`; the first `l` factors are sorted by ascending `alpha_i`.
pub fn balance_multi_case_ii(dims: &[u32], point: &EllipsoidPoint) -> Result<Balance, BalanceError> {
    DimensionSpec::warped(dims)?;
    point.check(dims)?;
    let r = dims.len();
    let l = point.coordinates.len();

    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&a, &b| point.coordinates[a].cmp(&point.coordinates[b]));
    order.extend(l..r);
    let dims: Vec<u32> = order.iter().map(|&k| dims[k]).collect();
    let alphas: Vec<Rational> = order[..l]
        .iter()
        .map(|&k| point.coordinates[k].clone())
        .collect();

    let q = alphas
        .iter()
        .fold(int(2), |g, a| rational_gcd(&g, a));

    let mut exponents = Vec::with_capacity(2 * r + 2);
    let mut coefficients = Vec::with_capacity(2 * r + 2);
    let mut free = vec![B0.to_string()];
    for i in 0..r {
        exponents.push(alphas.get(i).cloned().unwrap_or_else(Rational::zero));
        coefficients.push(LeadingCoeff::param(a_name(i + 1)));
        free.push(a_name(i + 1));
    }
    exponents.push(int(1));
    coefficients.push(LeadingCoeff::param(B0));
    for (i, &d) in dims.iter().enumerate() {
        if i < l {
            exponents.push(int(-1));
            coefficients.push(LeadingCoeff::fixed(-&alphas[i] / int(2)));
        } else {
            exponents.push(int(1));
            coefficients.push(LeadingCoeff::scaled(a_name(i + 1), frac(1, 2 * i64::from(d))));
        }
    }
    exponents.push(int(-1));
    coefficients.push(LeadingCoeff::fixed(int(1)));
    Ok(Balance {
        system_kind: SystemKind::Warped,
        dims: DimensionSpec::Warped { dims },
        family: BalanceFamily::CaseII {
            point: alphas,
        },
        exponents,
        coefficients,
        q,
        l,
        free_parameters: free,
        permutation: order,
    })
}

/// Bundle family: exponents `(0, 2, 1, 1, -1, -1)` for `(x1,x2,x3,v1,v2,v3)`.
pub fn balance_bb(d2: u32) -> Result<Balance, BalanceError> {
    let spec = DimensionSpec::bb(d2)?;
    let a1 = a_name(1);
    let a2 = a_name(2);
    Ok(Balance {
        system_kind: SystemKind::BerardBergery,
        dims: spec,
        family: BalanceFamily::Bb,
        exponents: [0, 2, 1, 1, -1, -1].iter().map(|&k| int(k)).collect(),
        coefficients: vec![
            LeadingCoeff::param(&a1),
            LeadingCoeff::param(&a2),
            LeadingCoeff::param(B0),
            LeadingCoeff::scaled(&a1, frac(1, 2 * i64::from(d2))),
            LeadingCoeff::fixed(int(-1)),
            LeadingCoeff::fixed(int(1)),
        ],
        q: int(1),
        l: 2,
        free_parameters: vec![a1, a2, B0.to_string()],
        permutation: vec![0, 1],
    })
}

/// The zero state as a trivial constant "series".
pub fn balance_equilibrium(dims: &DimensionSpec) -> Result<Balance, BalanceError> {
    let sys = dims.build_system()?;
    let n = sys.n_vars();
    Ok(Balance {
        system_kind: dims.kind(),
        dims: dims.clone(),
        family: BalanceFamily::Equilibrium,
        exponents: vec![Rational::zero(); n],
        coefficients: vec![LeadingCoeff::fixed(Rational::zero()); n],
        q: int(1),
        l: 0,
        free_parameters: Vec::new(),
        permutation: (0..dims.factor_dims().len()).collect(),
    })
}

/// Polynomial in the named free parameters: monomial (sorted name multiset)
/// to coefficient.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct ParamPoly(BTreeMap<Vec<String>, Rational>);

impl ParamPoly {
    fn constant(c: Rational) -> Self {
        let mut p = ParamPoly::default();
        p.add_term(Vec::new(), c);
        p
    }

    fn param(name: &str, scale: Rational) -> Self {
        let mut p = ParamPoly::default();
        p.add_term(vec![name.to_string()], scale);
        p
    }

    fn add_term(&mut self, key: Vec<String>, c: Rational) {
        let slot = self.0.entry(key.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&key);
        }
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&mut self, other: &ParamPoly) {
        for (k, c) in &other.0 {
            self.add_term(k.clone(), c.clone());
        }
    }

    fn mul(&self, other: &ParamPoly) -> ParamPoly {
        let mut out = ParamPoly::default();
        for (ka, ca) in &self.0 {
            for (kb, cb) in &other.0 {
                let mut key: Vec<String> = ka.iter().chain(kb).cloned().collect();
                key.sort();
                out.add_term(key, ca * cb);
            }
        }
        out
    }

    fn scale(&self, c: &Rational) -> ParamPoly {
        let mut out = ParamPoly::default();
        for (k, v) in &self.0 {
            out.add_term(k.clone(), v * c);
        }
        out
    }
}

/// Outcome of [`validate_balance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceVerdict {
    pub pass: bool,
    /// First failing equation, by variable name.
    pub failed_equation: Option<String>,
    pub reason: Option<String>,
}

impl BalanceVerdict {
    fn pass() -> Self {
        BalanceVerdict {
            pass: true,
            failed_equation: None,
            reason: None,
        }
    }

    fn fail(var: &str, reason: String) -> Self {
        BalanceVerdict {
            pass: false,
            failed_equation: Some(var.to_string()),
            reason: Some(reason),
        }
    }
}

/// Substitutes the one-term ansatz into every equation. Passes when, for each
/// equation, no right-hand term is more singular than `y_j'`, every term sits
/// on the exponent grid `alpha_j - 1 + kQ`, and the coefficients at
/// `alpha_j - 1` cancel identically in the free parameters.
pub fn validate_balance(sys: &QuadraticSystem, bal: &Balance) -> BalanceVerdict {
    if sys.n_vars() != bal.n_vars() || sys.kind() != bal.system_kind {
        return BalanceVerdict::fail("", "balance does not match the system shape".into());
    }
    if !bal.q.is_positive() {
        return BalanceVerdict::fail("", "step Q must be positive".into());
    }
    let lead: Vec<ParamPoly> = bal.coefficients.iter().map(LeadingCoeff::symbolic).collect();
    for (j, terms) in sys.rhs.iter().enumerate() {
        let var = &sys.variables[j];
        let target = &bal.exponents[j] - int(1);
        let mut balance = lead[j].scale(&bal.exponents[j]).scale(&int(-1));
        for m in terms {
            let factors = m.factors();
            let coeff = factors
                .iter()
                .fold(ParamPoly::constant(m.coeff.clone()), |acc, &k| acc.mul(&lead[k]));
            if coeff.is_zero() {
                continue;
            }
            let exponent = factors
                .iter()
                .fold(Rational::zero(), |acc, &k| acc + &bal.exponents[k]);
            let shift = (&exponent - &target) / &bal.q;
            if shift.is_negative() {
                return BalanceVerdict::fail(
                    var,
                    format!("term of order t^{exponent} dominates t^{target}"),
                );
            }
            if !shift.is_integer() {
                return BalanceVerdict::fail(
                    var,
                    format!("term of order t^{exponent} is off the grid t^({target} + kQ)"),
                );
            }
            if shift.is_zero() {
                balance.add(&coeff);
            }
        }
        if !balance.is_zero() {
            return BalanceVerdict::fail(
                var,
                format!("coefficients at t^{target} do not cancel"),
            );
        }
    }
    BalanceVerdict::pass()
}
