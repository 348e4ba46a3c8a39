//! Rational points with nonzero coordinates on `sum d_k alpha_k^2 = 4`.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::balance::EllipsoidPoint;
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EllipsoidError {
    #[error("invalid quadric: {0}")]
    InvalidSpec(String),
    #[error("base point is not on the quadric")]
    BaseNotOnQuadric,
    #[error("direction has {found} entries, expected {expected}")]
    DirectionLength { expected: usize, found: usize },
    #[error("direction is zero")]
    ZeroDirection,
    #[error("modulus must be at least 2")]
    BadModulus,
}

/// The quadric `sum d_k alpha_k^2 = 4`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadricSpec {
    pub dims: Vec<u32>,
}

impl QuadricSpec {
    pub fn new(dims: &[u32]) -> Result<Self, EllipsoidError> {
        if dims.is_empty() {
            return Err(EllipsoidError::InvalidSpec("no factors".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(EllipsoidError::InvalidSpec(format!("dimension {d} < 2")));
        }
        Ok(QuadricSpec {
            dims: dims.to_vec(),
        })
    }

    pub fn target(&self) -> Rational {
        int(4)
    }

    pub fn value(&self, alpha: &[Rational]) -> Rational {
        alpha
            .iter()
            .zip(&self.dims)
            .fold(Rational::zero(), |acc, (a, &d)| acc + a * a * int(i64::from(d)))
    }

    /// Symmetric bilinear form `B(a, b) = sum d_k a_k b_k`.
    pub fn bilinear(&self, a: &[Rational], b: &[Rational]) -> Rational {
        a.iter()
            .zip(b)
            .zip(&self.dims)
            .fold(Rational::zero(), |acc, ((x, y), &d)| acc + x * y * int(i64::from(d)))
    }

    pub fn contains(&self, alpha: &[Rational]) -> bool {
        alpha.len() == self.dims.len() && self.value(alpha) == self.target()
    }
}

/// Outcome of [`enumerate_points`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSearch {
    pub points: Vec<EllipsoidPoint>,
    /// Distinct rational solutions dropped for having a zero coordinate.
    pub with_zero_coordinate: usize,
}

/// All points `(p_1/q, ..., p_l/q)` with `q <= height_bound`, found by
/// solving `sum d_k p_k^2 = 4 q^2` over the box `|p_k| <= 2q/sqrt(d_k)`.
/// Sorted and deduplicated.
pub fn enumerate_points(spec: &QuadricSpec, height_bound: u32) -> PointSearch {
    let mut points = BTreeSet::new();
    let mut zeros = BTreeSet::new();
    let dims: Vec<i64> = spec.dims.iter().map(|&d| i64::from(d)).collect();
    for q in 1..=i64::from(height_bound) {
        let mut p = vec![0i64; dims.len()];
        search(&dims, 0, 4 * q * q, &mut p, &mut |sol| {
            let alpha: Vec<Rational> = sol.iter().map(|&x| Rational::new(x.into(), q.into())).collect();
            if sol.contains(&0) {
                zeros.insert(alpha);
            } else {
                points.insert(EllipsoidPoint::new(alpha));
            }
        });
    }
    PointSearch {
        points: points.into_iter().collect(),
        with_zero_coordinate: zeros.len(),
    }
}

/// Assigns `p[k..]` so that `sum_{j>=k} d_j p_j^2 = remaining`.
fn search(dims: &[i64], k: usize, remaining: i64, p: &mut [i64], emit: &mut impl FnMut(&[i64])) {
    if k == dims.len() {
        if remaining == 0 {
            emit(p);
        }
        return;
    }
    let d = dims[k];
    if k + 1 == dims.len() {
        if remaining % d != 0 {
            return;
        }
        let sq = remaining / d;
        let root = sq.isqrt();
        if root * root == sq {
            for v in if root == 0 { vec![0] } else { vec![-root, root] } {
                p[k] = v;
                emit(p);
            }
        }
        return;
    }
    let max = (remaining / d).isqrt();
    for v in -max..=max {
        p[k] = v;
        search(dims, k + 1, remaining - d * v * v, p, emit);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionVerdict {
    /// No admissible solution modulo `m`: the quadric has no rational point.
    Obstructed,
    /// A solution modulo `m` exists; nothing is decided.
    Inconclusive,
}

/// Tests `sum d_k p_k^2 = z^2 (mod m)` over all residues, requiring that for
/// every prime `ell | m` not all `p_k` vanish mod `ell`. A rational point
/// scales to a primitive integer solution of `sum d_k p_k^2 = z^2`, which
/// satisfies that condition, so `Obstructed` rules out rational points.
/// Cost is `m^l`.
pub fn modular_obstruction(spec: &QuadricSpec, modulus: u32) -> Result<ObstructionVerdict, EllipsoidError> {
    if modulus < 2 {
        return Err(EllipsoidError::BadModulus);
    }
    let m = u64::from(modulus);
    let primes = prime_factors(m);
    let squares: BTreeSet<u64> = (0..m).map(|z| z * z % m).collect();
    let dims: Vec<u64> = spec.dims.iter().map(|&d| u64::from(d) % m).collect();
    let l = dims.len();
    let mut p = vec![0u64; l];
    loop {
        let admissible = primes
            .iter()
            .all(|&ell| p.iter().any(|&x| x % ell != 0));
        if admissible {
            let s = dims
                .iter()
                .zip(&p)
                .fold(0u64, |acc, (&d, &x)| (acc + d * (x * x % m)) % m);
            if squares.contains(&s) {
                return Ok(ObstructionVerdict::Inconclusive);
            }
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == l {
                return Ok(ObstructionVerdict::Obstructed);
            }
            p[k] += 1;
            if p[k] < m {
                break;
            }
            p[k] = 0;
            k += 1;
        }
    }
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// The line is tangent at the base point.
    Tangent,
    /// The second intersection has a zero coordinate.
    ZeroCoordinate,
    /// Same point as an earlier slope (only possible when `l = 1`).
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecantSkip {
    pub slope: usize,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecantFamily {
    pub points: Vec<EllipsoidPoint>,
    pub skipped: Vec<SecantSkip>,
}

/// Second intersections of the lines `base + s w_k` with the quadric, for
/// `w_k = direction + k e_j` (`k = 0..count`), where `e_j` is the first unit
/// vector not parallel to `direction`. Distinct slopes give non-parallel
/// lines through `base`, hence distinct points.
pub fn secant_family(
    spec: &QuadricSpec,
    base: &EllipsoidPoint,
    direction: &[Rational],
    count: usize,
) -> Result<SecantFamily, EllipsoidError> {
    let l = spec.dims.len();
    if !spec.contains(&base.coordinates) {
        return Err(EllipsoidError::BaseNotOnQuadric);
    }
    if direction.len() != l {
        return Err(EllipsoidError::DirectionLength {
            expected: l,
            found: direction.len(),
        });
    }
    if direction.iter().all(Zero::is_zero) {
        return Err(EllipsoidError::ZeroDirection);
    }
    let support: Vec<usize> = (0..l).filter(|&k| !direction[k].is_zero()).collect();
    let j = (0..l)
        .find(|&k| support.len() > 1 || support[0] != k)
        .unwrap_or(0);

    let mut points = Vec::new();
    let mut seen = BTreeSet::new();
    let mut skipped = Vec::new();
    for k in 0..count {
        let mut w = direction.to_vec();
        if l > 1 {
            w[j] += int(k as i64);
        }
        let b = spec.bilinear(&base.coordinates, &w);
        let qw = spec.value(&w);
        if b.is_zero() || qw.is_zero() {
            skipped.push(SecantSkip {
                slope: k,
                reason: SkipReason::Tangent,
            });
            continue;
        }
        let s = -int(2) * b / qw;
        let point: Vec<Rational> = base
            .coordinates
            .iter()
            .zip(&w)
            .map(|(x, y)| x + &s * y)
            .collect();
        debug_assert!(spec.contains(&point));
        if point.iter().any(Zero::is_zero) {
            skipped.push(SecantSkip {
                slope: k,
                reason: SkipReason::ZeroCoordinate,
            });
            continue;
        }
        if !seen.insert(point.clone()) {
            skipped.push(SecantSkip {
                slope: k,
                reason: SkipReason::Duplicate,
            });
            continue;
        }
        points.push(EllipsoidPoint::new(point));
    }
    Ok(SecantFamily { points, skipped })
}

/// `+/- 2/sqrt(d)` when `d` is a perfect square, the only points for `l = 1`.
pub fn one_factor_points(d: u32) -> Vec<EllipsoidPoint> {
    let root = u64::from(d).isqrt();
    if root * root != u64::from(d) {
        return Vec::new();
    }
    let a = Rational::new(2.into(), (root as i64).into());
    vec![EllipsoidPoint::new(vec![-a.clone()]), EllipsoidPoint::new(vec![a.abs()])]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn pt(v: &[(i64, i64)]) -> EllipsoidPoint {
        EllipsoidPoint::new(v.iter().map(|&(p, q)| frac(p, q)).collect())
    }

    #[test]
    fn two_two_bound_one() {
        let s = QuadricSpec::new(&[2, 2]).unwrap();
        let found = enumerate_points(&s, 1);
        for p in [[-1, -1], [-1, 1], [1, -1], [1, 1]] {
            assert!(found.points.contains(&pt(&[(p[0], 1), (p[1], 1)])));
        }
    }

    #[test]
    fn four_bound_one() {
        let s = QuadricSpec::new(&[4]).unwrap();
        let found = enumerate_points(&s, 1);
        assert_eq!(found.points, vec![pt(&[(-1, 1)]), pt(&[(1, 1)])]);
        assert_eq!(found.points, one_factor_points(4));
    }

    #[test]
    fn seven_cubed_is_empty_and_obstructed() {
        let s = QuadricSpec::new(&[7, 7, 7]).unwrap();
        assert!(enumerate_points(&s, 6).points.is_empty());
        assert_eq!(modular_obstruction(&s, 8).unwrap(), ObstructionVerdict::Obstructed);
    }

    #[test]
    fn inconclusive_cases() {
        let s = QuadricSpec::new(&[2, 2]).unwrap();
        assert_eq!(modular_obstruction(&s, 8).unwrap(), ObstructionVerdict::Inconclusive);
        let s = QuadricSpec::new(&[4]).unwrap();
        for m in [3, 5, 7, 8] {
            assert_eq!(modular_obstruction(&s, m).unwrap(), ObstructionVerdict::Inconclusive);
        }
        assert!(modular_obstruction(&s, 1).is_err());
    }

    #[test]
    fn zero_coordinate_solutions_counted() {
        // (0, 2/sqrt(4)) = (0, 1) lies on 2a^2 + 4b^2 = 4
        let s = QuadricSpec::new(&[2, 4]).unwrap();
        let found = enumerate_points(&s, 1);
        assert!(found.with_zero_coordinate > 0);
        assert!(found.points.iter().all(|p| p.coordinates.iter().all(|c| !c.is_zero())));
    }

    #[test]
    fn secant_tangent_and_second_point() {
        let s = QuadricSpec::new(&[2, 2]).unwrap();
        let base = pt(&[(1, 1), (1, 1)]);
        let fam = secant_family(&s, &base, &[int(1), int(-1)], 1).unwrap();
        assert!(fam.points.is_empty());
        assert_eq!(fam.skipped[0].reason, SkipReason::Tangent);

        let fam = secant_family(&s, &base, &[int(1), int(-2)], 1).unwrap();
        assert_eq!(fam.points, vec![pt(&[(7, 5), (1, 5)])]);
        assert!(s.contains(&fam.points[0].coordinates));

        assert!(secant_family(&s, &base, &[int(1), int(-2)], 0).unwrap().points.is_empty());
    }

    #[test]
    fn secant_rejects_bad_input() {
        let s = QuadricSpec::new(&[2, 2]).unwrap();
        let off = pt(&[(1, 1), (1, 2)]);
        assert_eq!(
            secant_family(&s, &off, &[int(1), int(0)], 3),
            Err(EllipsoidError::BaseNotOnQuadric)
        );
        let base = pt(&[(1, 1), (1, 1)]);
        assert_eq!(
            secant_family(&s, &base, &[int(0), int(0)], 3),
            Err(EllipsoidError::ZeroDirection)
        );
    }
}
