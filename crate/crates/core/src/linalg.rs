//! Exact Gaussian elimination over the rationals. Vectors are rows; a matrix
//! is a list of rows.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Vector = Vec<Rational>;
pub type Matrix = Vec<Vector>;

pub fn zeros(n: usize) -> Vector {
    vec![Rational::zero(); n]
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            let mut row = zeros(n);
            row[i] = Rational::one();
            row
        })
        .collect()
}

pub fn is_zero(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Row vector times matrix.
pub fn vec_mat(v: &[Rational], m: &[Vector], cols: usize) -> Vector {
    let mut out = zeros(cols);
    for (coef, row) in v.iter().zip(m) {
        if coef.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += coef * x;
        }
    }
    out
}

pub fn mat_mul(a: &[Vector], b: &[Vector], cols: usize) -> Matrix {
    a.iter().map(|row| vec_mat(row, b, cols)).collect()
}

pub fn transpose(m: &[Vector], cols: usize) -> Matrix {
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Reduces `m` to reduced row echelon form in place and returns the pivot
/// columns. Zero rows end up at the bottom.
pub fn rref(m: &mut [Vector]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let factor = m[i][c].clone();
            let (pivot_row, target) = if i < r {
                let (lo, hi) = m.split_at_mut(r);
                (&hi[0], &mut lo[i])
            } else {
                let (lo, hi) = m.split_at_mut(i);
                (&lo[r], &mut hi[0])
            };
            for (t, p) in target.iter_mut().zip(pivot_row.iter()) {
                if !p.is_zero() {
                    *t -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vector]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

/// A reduced basis of the row space.
pub fn row_space_basis(m: &[Vector]) -> Matrix {
    let mut work = m.to_vec();
    let r = rref(&mut work).len();
    work.truncate(r);
    work
}

pub fn in_row_space(m: &[Vector], v: &[Rational]) -> bool {
    if is_zero(v) {
        return true;
    }
    let r = rank(m);
    let mut ext = m.to_vec();
    ext.push(v.to_vec());
    rank(&ext) == r
}

/// Basis of `{x : m x = 0}` where `m` has `cols` columns.
pub fn kernel(m: &[Vector], cols: usize) -> Matrix {
    let mut work = m.to_vec();
    let pivots = rref(&mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = zeros(cols);
            x[f] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                x[p] = -work[row][f].clone();
            }
            x
        })
        .collect()
}

/// Basis of `{c : c·m = 0}`.
pub fn left_kernel(m: &[Vector], cols: usize) -> Matrix {
    kernel(&transpose(m, cols), m.len())
}

/// Some solution of `m x = b`, free variables set to zero.
pub fn solve(m: &[Vector], b: &[Rational]) -> Option<Vector> {
    let cols = m.first().map_or(0, Vec::len);
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = zeros(cols);
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = aug[row][cols].clone();
    }
    Some(x)
}

/// Coefficients `c` with `Σ c_i rows_i = target`, if `target` lies in the row span.
pub fn combination(rows: &[Vector], target: &[Rational]) -> Option<Vector> {
    solve(&transpose(rows, target.len()), target)
}

pub fn inverse(m: &[Vector]) -> Result<Matrix> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
    }
    let id = identity(n);
    let mut aug: Matrix = m
        .iter()
        .zip(&id)
        .map(|(row, e)| row.iter().chain(e).cloned().collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::Singular);
    }
    Ok(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn rank_and_membership() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rank(&a), 2);
        assert!(in_row_space(&a, &[int(1), int(3), int(4)]));
        assert!(!in_row_space(&a, &[int(0), int(0), int(1)]));
    }

    #[test]
    fn kernel_is_annihilated() {
        let a = m(&[&[1, 2, 3], &[0, 1, 1]]);
        let k = kernel(&a, 3);
        assert_eq!(k.len(), 1);
        for row in &a {
            let dot: Rational = row.iter().zip(&k[0]).map(|(x, y)| x * y).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn inverse_round_trip() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv, 2), identity(2));
        assert_eq!(inverse(&m(&[&[1, 2], &[2, 4]])), Err(Error::Singular));
    }

    #[test]
    fn combination_recovers_coefficients() {
        let rows = m(&[&[1, 1], &[0, 1]]);
        let c = combination(&rows, &[int(3), int(5)]).unwrap();
        assert_eq!(c, vec![int(3), int(2)]);
        assert!(combination(&m(&[&[1, 1]]), &[int(1), int(0)]).is_none());
    }
}
