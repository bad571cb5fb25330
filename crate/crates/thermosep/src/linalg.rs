//! Shared dense linear algebra over complex matrices.
//!
//! Conventions used across the crate: multi-site indices are mixed-radix with
//! site 0 as the leftmost (most significant) Kronecker factor, so
//! `kron(&[A, B])` places `A` on site 0.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn ci(im: f64) -> C64 {
    C64::new(0.0, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Kronecker product of a list of square matrices, first factor leftmost.
pub fn kron(factors: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Largest entrywise deviation from Hermiticity, max |M - M^†|.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let mut d = 0.0f64;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            let v = (m[(i, j)] - m[(j, i)].conj()).norm();
            if v > d {
                d = v;
            }
        }
    }
    d
}

pub fn require_hermitian(m: &CMat, what: &str, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{what}: not square")));
    }
    let d = hermiticity_defect(m);
    if d > tol {
        return Err(Error::NotHermitian(format!("{what}: defect {d:.3e} > {tol:.1e}")));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues sorted ascending.
///
/// The input is explicitly Hermitized before factorization so tiny asymmetries
/// from upstream arithmetic cannot leak into the solver.
pub fn hermitian_eigen(m: &CMat) -> (DVector<f64>, CMat) {
    let h = (m + m.adjoint()).scale(0.5);
    let se = h.symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let vals = DVector::from_iterator(n, order.iter().map(|&k| se.eigenvalues[k]));
    let mut vecs = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &se.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> DVector<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    DVector::from_vec(v)
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalue|).
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Trace norm of a general matrix (sum of singular values).
pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &CMat) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

pub fn frobenius_distance(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Mixed-radix strides for a site-dimension list, site 0 most significant.
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let mut s = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Decompose a flat index into per-site digits.
pub fn digits_of(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = Vec::with_capacity(dims.len());
    for s in st {
        out.push(idx / s);
        idx %= s;
    }
    out
}

pub fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    let st = strides(dims);
    digits.iter().zip(st.iter()).map(|(d, s)| d * s).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sigma_y() -> CMat {
        CMat::from_row_slice(2, 2, &[cr(0.0), ci(-1.0), ci(1.0), cr(0.0)])
    }

    #[test]
    fn hermitian_eigen_sigma_y() {
        let (vals, vecs) = hermitian_eigen(&sigma_y());
        assert_relative_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 1.0, epsilon = 1e-12);
        // reconstruct
        let d = CMat::from_fn(2, 2, |i, j| if i == j { cr(vals[i]) } else { cr(0.0) });
        let rec = &vecs * d * vecs.adjoint();
        assert!(frobenius_distance(&rec, &sigma_y()) < 1e-12);
    }

    #[test]
    fn strides_and_digits_roundtrip() {
        let dims = [2usize, 3, 2];
        for idx in 0..12 {
            let d = digits_of(idx, &dims);
            assert_eq!(index_of(&d, &dims), idx);
        }
        assert_eq!(strides(&dims), vec![6, 2, 1]);
    }

    #[test]
    fn trace_norm_matches_hermitian_path() {
        let m = CMat::from_row_slice(2, 2, &[cr(1.0), cr(2.0), cr(2.0), cr(-1.0)]);
        assert_relative_eq!(trace_norm(&m), trace_norm_hermitian(&m), epsilon = 1e-10);
    }
}
