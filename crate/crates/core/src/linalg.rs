//! Dense exact linear algebra over ℚ(i).

use num_traits::{One, Zero};

use crate::scalars::GaussianRational as GR;

pub type Matrix = Vec<Vec<GR>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { GR::one() } else { GR::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let inner = b.len();
    let mut out = vec![vec![GR::zero(); m]; n];
    for i in 0..n {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                if !b[k][j].is_zero() {
                    out[i][j] += &(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    out
}

pub fn transpose(a: &Matrix) -> Matrix {
    let m = a.first().map_or(0, |r| r.len());
    (0..m).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(a: &mut Matrix) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].inv().expect("pivot is nonzero");
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let factor = a[i][c].clone();
                for j in c..cols {
                    if !a[r][j].is_zero() {
                        let t = &factor * &a[r][j];
                        a[i][j] -= &t;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(a: &Matrix) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

pub fn invert(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { GR::one() } else { GR::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<GR>),
    /// A particular solution plus the dimension of the solution space.
    Underdetermined(Vec<GR>, usize),
    Inconsistent,
}

/// Solves `a·x = b`.
pub fn solve(a: &Matrix, b: &[GR]) -> Solution {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return Solution::Inconsistent;
    }
    let mut x = vec![GR::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    if pivots.len() == cols {
        Solution::Unique(x)
    } else {
        Solution::Underdetermined(x, cols - pivots.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|&v| GR::from_int(v)).collect())
            .collect()
    }

    #[test]
    fn inverse_of_small_matrix() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = invert(&a).unwrap();
        assert_eq!(inv, m(&[&[1, -1], &[-1, 2]]));
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        assert!(invert(&m(&[&[1, 2], &[2, 4]])).is_none());
    }

    #[test]
    fn inconsistent_system_is_detected() {
        let a = m(&[&[1, 1], &[1, 1]]);
        assert_eq!(solve(&a, &[GR::from_int(1), GR::from_int(2)]), Solution::Inconsistent);
        match solve(&a, &[GR::from_int(1), GR::from_int(1)]) {
            Solution::Underdetermined(_, 1) => {}
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn inverse_multiplies_to_identity(v in proptest::collection::vec(-5i64..6, 9), im in -3i64..4) {
            let mut a: Matrix = v.chunks(3).map(|r| r.iter().map(|&x| GR::from_int(x)).collect()).collect();
            a[0][1] = &a[0][1] + &(&GR::i() * &GR::from_int(im));
            if let Some(inv) = invert(&a) {
                prop_assert_eq!(mat_mul(&a, &inv), identity(3));
            } else {
                prop_assert!(rank(&a) < 3);
            }
        }
    }
}
