//! Exact linear algebra over the rationals.
//!
//! Elimination always pivots on the first nonzero entry of a column; there is
//! no notion of magnitude pivoting over Q, and this keeps every result
//! deterministic. Kernel bases come from the reduced row-echelon form, so a
//! basis vector has a `1` in its free coordinate and zeros in the other free
//! coordinates.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::poly::QPolynomial;
use crate::rational::{int, serde_q_matrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degree bound {bound} is below the matrix size {size}; interpolation would be underdetermined")]
    DegreeBoundTooSmall { bound: usize, size: usize },
    #[error("determinant is not a polynomial of degree <= {bound} in the step variable (entries not affine?)")]
    NotPolynomial { bound: usize },
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl QMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        Ok(QMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut entries = Vec::with_capacity(nrows * cols);
        for row in rows {
            if row.len() != cols {
                return Err(LinalgError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(nrows, cols, entries)
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
            .expect("ragged integer rows")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Result<Vec<Rational>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect())
    }

    /// Reduced row-echelon form and the pivot column of each nonzero row.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].recip();
            for c in col..m.cols {
                let v = &m[(row, c)] * &inv;
                m[(row, c)] = v;
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in col..m.cols {
                    let v = &m[(row, c)] * &factor;
                    m[(r, c)] -= v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (r, c): (usize, usize)) -> &Rational {
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rational {
        &mut self.entries[r * self.cols + c]
    }
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Serialize for QMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serde_q_matrix::serialize(&self.to_rows(), s)
    }
}

impl<'de> Deserialize<'de> for QMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = serde_q_matrix::deserialize(d)?;
        QMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Exact determinant by Gaussian elimination.
pub fn det(m: &QMatrix) -> Result<Rational, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut a = m.clone();
    let mut result = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[(r, col)].is_zero()) else {
            return Ok(Rational::zero());
        };
        if p != col {
            a.swap_rows(p, col);
            result = -result;
        }
        let pivot = a[(col, col)].clone();
        result *= &pivot;
        for r in col + 1..n {
            if a[(r, col)].is_zero() {
                continue;
            }
            let factor = &a[(r, col)] / &pivot;
            for c in col..n {
                let v = &a[(col, c)] * &factor;
                a[(r, c)] -= v;
            }
        }
    }
    Ok(result)
}

pub fn rank(m: &QMatrix) -> usize {
    m.rref().1.len()
}

/// Basis of the right null space, read off the reduced row-echelon form.
pub fn kernel(m: &QMatrix) -> Vec<Vec<Rational>> {
    let (r, pivots) = m.rref();
    let free: Vec<usize> = (0..m.cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); m.cols];
            v[f] = Rational::one();
            for (k, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[(k, f)].clone();
            }
            v
        })
        .collect()
}

/// Solution set of `M x = b`: a particular solution (absent when the system
/// is inconsistent) plus a basis of `ker M`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineSolutionSet {
    #[serde(with = "crate::rational::serde_q_vec_opt")]
    pub particular: Option<Vec<Rational>>,
    #[serde(with = "serde_q_matrix")]
    pub kernel_basis: Vec<Vec<Rational>>,
}

impl AffineSolutionSet {
    pub fn is_feasible(&self) -> bool {
        self.particular.is_some()
    }

    /// `particular + sum lambda_k * kernel_k`. Missing lambdas count as zero.
    pub fn point(&self, lambdas: &[Rational]) -> Option<Vec<Rational>> {
        let mut x = self.particular.clone()?;
        for (lambda, v) in lambdas.iter().zip(&self.kernel_basis) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += lambda * vi;
            }
        }
        Some(x)
    }
}

/// Solves `M x = b`. The particular solution sets every free variable to zero.
pub fn solve_affine(m: &QMatrix, b: &[Rational]) -> Result<AffineSolutionSet, LinalgError> {
    if b.len() != m.rows {
        return Err(LinalgError::DimensionMismatch {
            expected: m.rows,
            found: b.len(),
        });
    }
    let mut aug = QMatrix::zeros(m.rows, m.cols + 1);
    for r in 0..m.rows {
        for c in 0..m.cols {
            aug[(r, c)] = m[(r, c)].clone();
        }
        aug[(r, m.cols)] = b[r].clone();
    }
    let (reduced, pivots) = aug.rref();
    let particular = if pivots.last() == Some(&m.cols) {
        None
    } else {
        let mut x = vec![Rational::zero(); m.cols];
        for (k, &pc) in pivots.iter().enumerate() {
            x[pc] = reduced[(k, m.cols)].clone();
        }
        Some(x)
    };
    Ok(AffineSolutionSet {
        particular,
        kernel_basis: kernel(m),
    })
}

/// Recovers `det F(s)` as an exact polynomial in `s` for a matrix family whose
/// entries are affine in `s`, by evaluating at `degree_bound + 1` integer
/// points and interpolating. One extra evaluation verifies the result.
pub fn det_poly<F>(family: F, degree_bound: usize) -> Result<QPolynomial, LinalgError>
where
    F: Fn(&Rational) -> QMatrix,
{
    let probe = family(&Rational::zero());
    if !probe.is_square() {
        return Err(LinalgError::NotSquare {
            rows: probe.rows,
            cols: probe.cols,
        });
    }
    if degree_bound < probe.rows {
        return Err(LinalgError::DegreeBoundTooSmall {
            bound: degree_bound,
            size: probe.rows,
        });
    }
    let xs: Vec<Rational> = (0..=degree_bound as i64).map(int).collect();
    let ys = xs
        .iter()
        .map(|x| det(&family(x)))
        .collect::<Result<Vec<_>, _>>()?;
    let poly = QPolynomial::interpolate(&xs, &ys);
    let check = int(-(degree_bound as i64) - 7);
    if poly.eval(&check) != det(&family(&check))? {
        return Err(LinalgError::NotPolynomial {
            bound: degree_bound,
        });
    }
    Ok(poly)
}

/// True when two nonzero vectors are rational multiples of each other.
pub fn proportional(a: &[Rational], b: &[Rational]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(k) = a.iter().position(|x| !x.is_zero()) else {
        return false;
    };
    if b[k].is_zero() {
        return false;
    }
    let ratio = &b[k] / &a[k];
    a.iter().zip(b).all(|(x, y)| &(x * &ratio) == y)
}

/// True when `span(a) == span(b)`.
pub fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    if a.is_empty() || b.is_empty() {
        return a.is_empty() && b.is_empty();
    }
    let ra = rank(&QMatrix::from_rows(a.to_vec()).expect("ragged span"));
    let rb = rank(&QMatrix::from_rows(b.to_vec()).expect("ragged span"));
    let both: Vec<Vec<Rational>> = a.iter().chain(b).cloned().collect();
    let rab = rank(&QMatrix::from_rows(both).expect("ragged span"));
    ra == rb && ra == rab
}

/// Writes a kernel vector with integer-free normalization: scaled so its
/// first nonzero entry is one. Handy for display.
pub fn normalize_first(v: &[Rational]) -> Vec<Rational> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let lead = lead.clone();
            v.iter().map(|x| x / &lead).collect()
        }
        None => v.to_vec(),
    }
}

/// Coordinates `lambda` with `point = base + sum lambda_k basis_k`, if any.
/// Unique when the basis is independent.
pub fn affine_coordinates(
    point: &[Rational],
    base: &[Rational],
    basis: &[Vec<Rational>],
) -> Option<Vec<Rational>> {
    let diff: Vec<Rational> = point.iter().zip(base).map(|(p, b)| p - b).collect();
    if basis.is_empty() {
        return diff.iter().all(Zero::is_zero).then(Vec::new);
    }
    let m = QMatrix::from_rows(basis.to_vec()).ok()?.transpose();
    solve_affine(&m, &diff).ok()?.particular
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn identity_determinant() {
        assert_eq!(det(&QMatrix::identity(3)).unwrap(), int(1));
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(
            det(&QMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn zero_matrix_rank_and_kernel() {
        let z = QMatrix::zeros(2, 3);
        assert_eq!(rank(&z), 0);
        assert_eq!(kernel(&z).len(), 3);
    }

    #[test]
    fn invertible_has_empty_kernel() {
        let m = QMatrix::from_int_rows(&[&[2, 1, 0], &[0, 1, 4], &[1, 0, 1]]);
        assert!(kernel(&m).is_empty());
        assert_eq!(rank(&m), 3);
    }

    #[test]
    fn identity_solve() {
        let b = vec![frac(1, 2), int(-3), int(7)];
        let s = solve_affine(&QMatrix::identity(3), &b).unwrap();
        assert_eq!(s.particular, Some(b));
        assert!(s.kernel_basis.is_empty());
    }

    #[test]
    fn inconsistent_system_is_infeasible() {
        // second row is twice the first, rhs is not
        let m = QMatrix::from_int_rows(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        let s = solve_affine(&m, &[int(1), int(3), int(0)]).unwrap();
        assert!(!s.is_feasible());
        assert_eq!(s.kernel_basis.len(), 1);
        let ok = solve_affine(&m, &[int(1), int(2), int(0)]).unwrap();
        assert!(ok.is_feasible());
    }

    #[test]
    fn solve_dimension_mismatch() {
        assert!(solve_affine(&QMatrix::identity(2), &[int(1)]).is_err());
    }

    #[test]
    fn scalar_family_det_poly() {
        let p = det_poly(
            |s| {
                let mut m = QMatrix::identity(2);
                m[(0, 0)] = s.clone();
                m[(1, 1)] = s.clone();
                m
            },
            2,
        )
        .unwrap();
        assert_eq!(p, QPolynomial::from_ints(&[0, 0, 1]));
    }

    #[test]
    fn det_poly_refuses_low_degree_bound() {
        let r = det_poly(|_| QMatrix::identity(3), 2);
        assert!(matches!(r, Err(LinalgError::DegreeBoundTooSmall { .. })));
    }

    #[test]
    fn det_poly_detects_non_affine_family() {
        // entry s^3 in a 1x1 family cannot be captured with bound 1
        let r = det_poly(
            |s| QMatrix::new(1, 1, vec![s * s * s]).unwrap(),
            1,
        );
        assert!(matches!(r, Err(LinalgError::NotPolynomial { .. })));
    }

    #[test]
    fn proportionality() {
        let a = vec![int(2), int(1), frac(-1, 3), int(2)];
        let b: Vec<_> = a.iter().map(|x| x * frac(-3, 7)).collect();
        assert!(proportional(&a, &b));
        assert!(!proportional(&a, &[int(2), int(1), int(0), int(2)]));
    }
}
