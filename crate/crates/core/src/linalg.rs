//! Dense exact linear algebra on small rational matrices.

use num_traits::{One, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form. Returns the reduced matrix and its pivot columns.
pub fn rref(matrix: &[Vec<Rational>], cols: usize) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = matrix.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row >= m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..cols {
                    if !m[row][c].is_zero() {
                        let delta = &f * &m[row][c];
                        m[r][c] -= &delta;
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    (m, pivots)
}

pub fn rank(matrix: &[Vec<Rational>], cols: usize) -> usize {
    rref(matrix, cols).1.len()
}

/// Basis of `{x : M x = 0}`, one vector per free column in increasing order.
/// Each basis vector has a 1 in its free column and 0 in the other free columns.
pub fn nullspace(matrix: &[Vec<Rational>], cols: usize) -> Matrix {
    let (r, pivots) = rref(matrix, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[i][f];
            }
            v
        })
        .collect()
}

/// Some solution of `M x = b`, if one exists.
pub fn solve(matrix: &[Vec<Rational>], rhs: &[Rational], cols: usize) -> Option<Vec<Rational>> {
    let augmented: Matrix = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&augmented, cols + 1);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = r[i][cols].clone();
    }
    Some(x)
}

pub fn mat_vec(matrix: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    matrix
        .iter()
        .map(|row| crate::rational::dot(row, v))
        .collect()
}
