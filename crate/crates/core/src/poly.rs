//! Dense univariate polynomials over the rationals.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{common_denominator, int, serde_q_vec, Rational};

/// Polynomial with rational coefficients, lowest degree first. The
/// coefficient vector is kept trimmed so the last entry is nonzero; the zero
/// polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QPolynomial {
    #[serde(with = "serde_q_vec")]
    coeffs: Vec<Rational>,
}

impl QPolynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPolynomial { coeffs }
    }

    pub fn zero() -> Self {
        QPolynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x - root`
    pub fn linear_factor(root: &Rational) -> Self {
        Self::new(vec![-root.clone(), Rational::one()])
    }

    /// Monic polynomial `prod (x - r)` over the given roots.
    pub fn from_roots<'a>(roots: impl IntoIterator<Item = &'a Rational>) -> Self {
        roots
            .into_iter()
            .fold(Self::constant(Rational::one()), |acc, r| {
                &acc * &Self::linear_factor(r)
            })
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn pow(&self, exp: usize) -> Self {
        (0..exp).fold(Self::constant(Rational::one()), |acc, _| &acc * self)
    }

    /// Exact division by `x - root`; `None` if `root` is not a root.
    pub fn divide_by_root(&self, root: &Rational) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        let n = self.coeffs.len();
        let mut quotient = vec![Rational::zero(); n - 1];
        let mut carry = Rational::zero();
        for k in (1..n).rev() {
            carry = &self.coeffs[k] + &carry * root;
            quotient[k - 1] = carry.clone();
        }
        let remainder = &self.coeffs[0] + &carry * root;
        remainder.is_zero().then(|| Self::new(quotient))
    }

    /// Lagrange interpolation through `(x_k, y_k)`; the abscissae must be
    /// pairwise distinct. Uses Newton divided differences.
    pub fn interpolate(xs: &[Rational], ys: &[Rational]) -> Self {
        assert_eq!(xs.len(), ys.len(), "interpolation needs matching abscissae and values");
        let n = xs.len();
        let mut table = ys.to_vec();
        for level in 1..n {
            for k in (level..n).rev() {
                let denom = &xs[k] - &xs[k - level];
                assert!(!denom.is_zero(), "interpolation abscissae must be distinct");
                table[k] = (&table[k] - &table[k - 1]) / denom;
            }
        }
        let mut result = Self::zero();
        for k in (0..n).rev() {
            result = &(&result * &Self::linear_factor(&xs[k])) + &Self::constant(table[k].clone());
        }
        result
    }

    /// Rational roots with multiplicities (ascending) and the residual factor
    /// that has no rational roots. `product (x - r)^m * residual == self`.
    pub fn rational_roots(&self) -> (Vec<(Rational, usize)>, QPolynomial) {
        let mut residual = self.clone();
        let mut roots = Vec::new();
        if residual.is_zero() {
            return (roots, residual);
        }
        let mut zero_mult = 0;
        while residual.coeffs.first().is_some_and(Zero::is_zero) {
            residual.coeffs.remove(0);
            zero_mult += 1;
        }
        if zero_mult > 0 {
            roots.push((Rational::zero(), zero_mult));
        }
        for candidate in residual.root_candidates() {
            let mut mult = 0;
            while let Some(q) = residual.divide_by_root(&candidate) {
                residual = q;
                mult += 1;
            }
            if mult > 0 {
                roots.push((candidate, mult));
            }
        }
        roots.sort_by(|a, b| a.0.cmp(&b.0));
        (roots, residual)
    }

    /// Candidate rational roots of a polynomial with nonzero constant term,
    /// from the rational root theorem.
    fn root_candidates(&self) -> Vec<Rational> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let scale = Rational::from_integer(common_denominator(&self.coeffs));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * &scale).to_integer())
            .collect();
        let lead = ints.last().unwrap().abs();
        let constant = ints[0].abs();
        let mut out = Vec::new();
        for p in divisors(&constant) {
            for q in divisors(&lead) {
                let cand = Rational::new(p.clone(), q);
                out.push(-cand.clone());
                out.push(cand);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Pretty form in the named variable, e.g. `s^2 + 4*s + 8`.
    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            let body = match (k, mag.is_one()) {
                (0, _) => mag.to_string(),
                (1, true) => var.to_string(),
                (1, false) => format!("{mag}*{var}"),
                (_, true) => format!("{var}^{k}"),
                (_, false) => format!("{mag}*{var}^{k}"),
            };
            parts.push((sign, body));
        }
        let mut out = String::new();
        for (idx, (sign, body)) in parts.iter().enumerate() {
            match (idx, *sign) {
                (0, "-") => out.push('-'),
                (0, _) => {}
                (_, s) => {
                    out.push(' ');
                    out.push_str(s);
                    out.push(' ');
                }
            }
            out.push_str(body);
        }
        out
    }
}

impl fmt::Display for QPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("x"))
    }
}

impl std::ops::Add for &QPolynomial {
    type Output = QPolynomial;
    fn add(self, rhs: &QPolynomial) -> QPolynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        QPolynomial::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + rhs.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl std::ops::Sub for &QPolynomial {
    type Output = QPolynomial;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: &QPolynomial) -> QPolynomial {
        let neg = QPolynomial::new(rhs.coeffs.iter().map(|c| -c).collect());
        self + &neg
    }
}

impl std::ops::Mul for &QPolynomial {
    type Output = QPolynomial;
    fn mul(self, rhs: &QPolynomial) -> QPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return QPolynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPolynomial::new(out)
    }
}

/// Positive divisors of `|n|` (n nonzero) by trial division.
fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return Vec::new();
    }
    if let Some(small) = n.to_u64() {
        let mut small_divs = Vec::new();
        let mut d = 1u64;
        while d.saturating_mul(d) <= small {
            if small % d == 0 {
                small_divs.push(d);
                if d != small / d {
                    small_divs.push(small / d);
                }
            }
            d += 1;
        }
        small_divs.sort_unstable();
        return small_divs.into_iter().map(BigInt::from).collect();
    }
    // Large values: factor by trial division, then expand.
    let mut factors: Vec<(BigInt, u32)> = Vec::new();
    let mut rest = n.clone();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut e = 0;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            factors.push((p.clone(), e));
        }
        p += 1;
    }
    if rest > BigInt::one() {
        factors.push((rest, 1));
    }
    let mut divs = vec![BigInt::one()];
    for (p, e) in factors {
        let mut next = Vec::new();
        for d in &divs {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        divs = next;
    }
    divs.sort();
    divs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn from_roots_expands() {
        // s(s+4)(s+1)(s-2) = s^4 + 3s^3 - 6s^2 - 8s
        let p = QPolynomial::from_roots(&[int(0), int(-4), int(-1), int(2)]);
        assert_eq!(p, QPolynomial::from_ints(&[0, -8, -6, 3, 1]));
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let p = QPolynomial::from_ints(&[5, -1, 0, 2]);
        let xs: Vec<_> = (0..4).map(int).collect();
        let ys: Vec<_> = xs.iter().map(|x| p.eval(x)).collect();
        assert_eq!(QPolynomial::interpolate(&xs, &ys), p);
    }

    #[test]
    fn rational_roots_with_residual() {
        // (2x - 1)^2 (x + 3) (x^2 + 4x + 8)
        let p = &(&QPolynomial::from_ints(&[-1, 2]).pow(2) * &QPolynomial::from_ints(&[3, 1]))
            * &QPolynomial::from_ints(&[8, 4, 1]);
        let (roots, residual) = p.rational_roots();
        assert_eq!(roots, vec![(int(-3), 1), (frac(1, 2), 2)]);
        assert_eq!(residual.degree(), Some(2));
        // residual is the p(i) factor up to a constant
        assert_eq!(residual.eval(&int(0)) / residual.leading().unwrap(), int(8));
    }

    #[test]
    fn zero_roots_counted() {
        let p = QPolynomial::from_ints(&[0, 0, 0, -4, 0, 1]);
        let (roots, residual) = p.rational_roots();
        assert_eq!(roots, vec![(int(-2), 1), (int(0), 3), (int(2), 1)]);
        assert_eq!(residual, QPolynomial::from_ints(&[1]));
    }

    #[test]
    fn pretty_printing() {
        let p = QPolynomial::from_ints(&[8, 4, 1]);
        assert_eq!(p.to_string_in("i"), "i^2 + 4*i + 8");
        assert_eq!(QPolynomial::from_ints(&[0, -1]).to_string_in("s"), "-s");
    }

    #[test]
    fn divisors_of_large_values() {
        let n = BigInt::from(2u64).pow(70) * BigInt::from(3);
        let d = divisors(&n);
        assert_eq!(d.len(), 71 * 2);
    }
}
