//! Small dense linear-algebra helpers shared by the solvers and certificates.

use std::hash::{DefaultHasher, Hash, Hasher};

use nalgebra::{DMatrix, DVector};

/// `‖x‖₁ / ‖x‖₂`, with the value 1 at the origin so the ratio stays lower semicontinuous.
pub fn l1_over_l2(x: &DVector<f64>) -> f64 {
    let l2 = x.norm();
    if l2 == 0.0 {
        1.0
    } else {
        x.lp_norm(1) / l2
    }
}

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Largest eigenvalue of `AᵀA` by power iteration, stopped when the Rayleigh quotient
/// changes by less than `rel_tol` relative.
pub fn largest_eigenvalue_ata(a: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return 0.0;
    }
    // iterate on the smaller Gram matrix; both share the nonzero spectrum
    let gram = if m < n {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    let k = gram.nrows();
    let mut v = DVector::from_fn(k, |i, _| 1.0 + 0.01 * ((i + 1) as f64).sin());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = &gram * &v;
        let next = v.dot(&w);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        v = w / nw;
        if (next - lambda).abs() <= rel_tol * next.abs() {
            return next.max(nw);
        }
        lambda = next;
    }
    lambda
}

/// Columns of `a` indexed by `cols`, in order.
pub fn select_columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Smallest singular value of `a` (treating a wide matrix as having `ncols - nrows`
/// zero singular values) together with a unit right singular vector attaining it.
pub fn smallest_singular_pair(a: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let (m, k) = a.shape();
    let padded = if m < k {
        let mut p = DMatrix::zeros(k, k);
        p.view_mut((0, 0), (m, k)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let (idx, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty matrix");
    (sigma, v_t.row(idx).transpose())
}

/// Largest singular value of `a`.
pub fn largest_singular_value(a: &DMatrix<f64>) -> f64 {
    a.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Orthonormal basis of the null space of `a`, one basis vector per column.
pub fn null_space_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    let mut padded = DMatrix::zeros(m.max(n), n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = smax * (m.max(n) as f64) * f64::EPSILON;
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Order-sensitive hash of a matrix together with a scalar, used to tie cached
/// factorizations to the data they were built from.
pub fn fingerprint(a: &DMatrix<f64>, scalar: f64) -> u64 {
    let mut h = DefaultHasher::new();
    a.nrows().hash(&mut h);
    a.ncols().hash(&mut h);
    for v in a.iter() {
        v.to_bits().hash(&mut h);
    }
    scalar.to_bits().hash(&mut h);
    h.finish()
}

pub fn support(x: &DVector<f64>) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}
