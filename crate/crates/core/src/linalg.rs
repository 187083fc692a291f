//! Tiny dense solvers for the 3-parameter fits.

#![allow(clippy::needless_range_loop)]

use crate::scalar::Real;

pub(crate) type Mat3<T> = [[T; 3]; 3];

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` for a numerically singular system.
pub(crate) fn solve3<T: Real>(a: &Mat3<T>, b: &[T; 3]) -> Option<[T; 3]> {
    let mut m = *a;
    let mut v = *b;
    let scale = a.iter().flatten().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    if !(scale > T::zero()) || !scale.is_finite() {
        return None;
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| {
                m[i][col]
                    .abs()
                    .partial_cmp(&m[j][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap();
        if m[pivot][col].abs() <= scale * T::epsilon() * T::lit(16.0) {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] = m[row][k] - f * m[col][k];
            }
            v[row] = v[row] - f * v[col];
        }
    }
    let mut x = [T::zero(); 3];
    for row in (0..3).rev() {
        let mut s = v[row];
        for k in row + 1..3 {
            s = s - m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

pub(crate) fn invert3<T: Real>(a: &Mat3<T>) -> Option<Mat3<T>> {
    let mut inv = [[T::zero(); 3]; 3];
    for j in 0..3 {
        let mut e = [T::zero(); 3];
        e[j] = T::one();
        let col = solve3(a, &e)?;
        for i in 0..3 {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}
