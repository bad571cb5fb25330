//! Gibbs states, KMS verification via complex-time evolution, and reduced
//! density matrices on region pairs.
//!
//! All spectral work happens in the eigenbasis of the Hamiltonian. Complex-time
//! evolution is exact there (finite volume), and the KMS defect is evaluated
//! with the Boltzmann weights kept as separate factors so no large
//! intermediate leaves the representable range.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, cr, CMat};
use crate::spin::Operator;
use crate::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const DM_TRACE_TOL: f64 = 1e-12;
pub const DM_EIG_TOL: f64 = 1e-10;

/// Hermitian, positive-semidefinite, unit-trace matrix with subsystem dims.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: CMat,
    pub dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validating constructor: Hermitian to 1e-12, trace 1 to 1e-12, minimum
    /// eigenvalue at least -1e-10.
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "density matrix is {}x{}, dims give {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let hd = linalg::hermiticity_defect(&matrix);
        if hd > 1e-12 {
            return Err(Error::NotHermitian(format!(
                "density matrix defect {hd:.3e}"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DM_TRACE_TOL || tr.im.abs() > DM_TRACE_TOL {
            return Err(Error::Domain(format!("trace {tr} != 1")));
        }
        let min = linalg::min_eigenvalue(&matrix);
        if min < -DM_EIG_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix, dims })
    }

    /// Internal constructor for matrices positive by construction.
    pub(crate) fn new_unchecked(matrix: CMat, dims: Vec<usize>) -> Self {
        debug_assert_eq!(matrix.nrows(), dims.iter().product::<usize>());
        Self { matrix, dims }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Maximally mixed state I/D on the given dims.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self::new_unchecked(linalg::identity(d).scale(1.0 / d as f64), dims)
    }

    /// Pure state from a (normalized) vector.
    pub fn pure(psi: &linalg::CVec, dims: Vec<usize>) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!("state vector norm {n} != 1")));
        }
        let m = psi * psi.adjoint();
        Ok(Self::new_unchecked(m, dims))
    }

    /// Tensor product of two density matrices.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let m = self.matrix.kronecker(&other.matrix);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix::new_unchecked(m, dims)
    }

    /// Frobenius distance to the maximally mixed state of the same dimension.
    pub fn distance_to_tracial(&self) -> f64 {
        let d = self.dim();
        let id = linalg::identity(d).scale(1.0 / d as f64);
        linalg::frobenius_distance(&self.matrix, &id)
    }

    /// Row-major serialization with explicit re/im pairs, for golden files.
    pub fn to_json(&self) -> serde_json::Value {
        let data: Vec<[f64; 2]> = self
            .matrix
            .row_iter()
            .flat_map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            .collect();
        serde_json::json!({ "dims": self.dims, "data": data })
    }
}

/// Two disjoint, nonempty ordered site lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPair {
    pub region1: Vec<usize>,
    pub region2: Vec<usize>,
}

impl RegionPair {
    pub fn new(region1: Vec<usize>, region2: Vec<usize>) -> Result<Self> {
        if region1.is_empty() || region2.is_empty() {
            return Err(Error::Domain("regions must be nonempty".into()));
        }
        let mut all: Vec<usize> = region1.iter().chain(region2.iter()).copied().collect();
        all.sort_unstable();
        let len = all.len();
        all.dedup();
        if all.len() != len {
            return Err(Error::Domain("regions must be disjoint".into()));
        }
        Ok(Self { region1, region2 })
    }

    pub fn label(&self) -> String {
        let fmt = |r: &[usize]| {
            r.iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("+")
        };
        format!("{}|{}", fmt(&self.region1), fmt(&self.region2))
    }
}

/// Eigendecomposition of a Hamiltonian, cached for reuse across β values and
/// observables.
pub struct SpectralDecomp {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMat,
    pub dims: Vec<usize>,
}

impl SpectralDecomp {
    pub fn new(h: &Operator) -> Result<Self> {
        linalg::require_hermitian(&h.matrix, "hamiltonian", HERMITICITY_TOL)?;
        let (vals, vecs) = linalg::hermitian_eigen(&h.matrix);
        Ok(Self {
            eigenvalues: vals.iter().copied().collect(),
            eigenvectors: vecs,
            dims: h.dims.clone(),
        })
    }

    /// Gibbs state e^{-βH}/Z. Weights are shifted by the spectral minimum
    /// before exponentiation so overflow cannot occur at any β ≥ 0.
    pub fn gibbs(&self, beta: f64) -> Result<DensityMatrix> {
        if !beta.is_finite() {
            return Err(Error::Domain(
                "beta must be finite; approach ground states via large beta".into(),
            ));
        }
        let d = self.eigenvalues.len();
        if beta == 0.0 {
            return Ok(DensityMatrix::maximally_mixed(self.dims.clone()));
        }
        let shift = if beta > 0.0 {
            self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        } else {
            self.eigenvalues
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let weights: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|e| (-beta * (e - shift)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let mut m = CMat::zeros(d, d);
        for (k, w) in weights.iter().enumerate() {
            let col = self.eigenvectors.column(k);
            // rho += (w/z) |v_k><v_k|
            let p = &col * col.adjoint();
            m += p.scale(w / z);
        }
        Ok(DensityMatrix::new_unchecked(m, self.dims.clone()))
    }

    /// Transform an operator into the eigenbasis.
    pub fn to_eigenbasis(&self, a: &CMat) -> CMat {
        self.eigenvectors.adjoint() * a * &self.eigenvectors
    }

    /// α_z(A) = e^{izH} A e^{-izH}, exact in the eigenbasis.
    pub fn evolve(&self, a: &CMat, z: num_complex::Complex64) -> Result<CMat> {
        let spread = self.eigenvalues.last().unwrap() - self.eigenvalues.first().unwrap();
        if z.im.abs() * spread > 700.0 {
            return Err(Error::Numerical(format!(
                "complex-time evolution overflows: |Im z|*spread = {:.1}",
                z.im.abs() * spread
            )));
        }
        let at = self.to_eigenbasis(a);
        let n = self.eigenvalues.len();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let phase = (num_complex::Complex64::i()
                    * z
                    * (self.eigenvalues[j] - self.eigenvalues[k]))
                    .exp();
                out[(j, k)] = phase * at[(j, k)];
            }
        }
        Ok(&self.eigenvectors * out * self.eigenvectors.adjoint())
    }

    /// |tr(ρ_β A B) - tr(ρ_β B α_{iβ}(A))|, the KMS defect.
    ///
    /// Both traces are evaluated in the eigenbasis. The right-hand side keeps
    /// the Boltzmann factor and the evolution factor as separate exponentials,
    /// so their product stays O(1) even when each side alone is astronomically
    /// large.
    pub fn kms_defect(&self, beta: f64, a: &CMat, b: &CMat) -> Result<f64> {
        if !beta.is_finite() {
            return Err(Error::Domain("beta must be finite".into()));
        }
        let n = self.eigenvalues.len();
        let e0 = self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|e| (-beta * (e - e0)).exp())
            .collect();
        let z: f64 = weights.iter().sum();
        let at = self.to_eigenbasis(a);
        let bt = self.to_eigenbasis(b);
        let mut lhs = num_complex::Complex64::new(0.0, 0.0);
        let mut rhs = num_complex::Complex64::new(0.0, 0.0);
        for j in 0..n {
            let rho_j = weights[j] / z;
            if rho_j == 0.0 {
                continue;
            }
            for k in 0..n {
                lhs += rho_j * at[(j, k)] * bt[(k, j)];
                // α_{iβ}(A)_{kj} = e^{-β(E_k - E_j)} A_{kj}
                let w = (-beta * (self.eigenvalues[k] - self.eigenvalues[j])).exp();
                rhs += rho_j * bt[(j, k)] * (w * at[(k, j)]);
            }
        }
        Ok((lhs - rhs).norm())
    }
}

/// Gibbs state of a Hamiltonian operator at inverse temperature β.
pub fn gibbs_state(h: &Operator, beta: f64) -> Result<DensityMatrix> {
    SpectralDecomp::new(h)?.gibbs(beta)
}

/// Complex-time evolution of `a` under `h`.
pub fn evolve_complex_time(
    h: &Operator,
    a: &Operator,
    z: num_complex::Complex64,
) -> Result<Operator> {
    if a.dim() != h.dim() {
        return Err(Error::Dimension("operator dimensions differ".into()));
    }
    let sd = SpectralDecomp::new(h)?;
    Ok(Operator {
        matrix: sd.evolve(&a.matrix, z)?,
        dims: a.dims.clone(),
    })
}

/// KMS defect |tr(ρ A B) - tr(ρ B α_{iβ}(A))| for the Gibbs state of `h`.
pub fn kms_defect(h: &Operator, beta: f64, a: &Operator, b: &Operator) -> Result<f64> {
    let sd = SpectralDecomp::new(h)?;
    sd.kms_defect(beta, &a.matrix, &b.matrix)
}

/// Partial trace keeping `keep` (ordered, distinct); the output subsystem
/// order follows `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let m = partial_trace_matrix(&rho.matrix, &rho.dims, keep)?;
    let dims: Vec<usize> = keep.iter().map(|&s| rho.dims[s]).collect();
    Ok(DensityMatrix::new_unchecked(m, dims))
}

/// Partial trace of an arbitrary matrix over the complement of `keep`.
pub fn partial_trace_matrix(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let n = dims.len();
    let mut seen = vec![false; n];
    for &s in keep {
        if s >= n {
            return Err(Error::Dimension(format!("keep site {s} out of range")));
        }
        if seen[s] {
            return Err(Error::Dimension(format!("keep site {s} repeated")));
        }
        seen[s] = true;
    }
    let traced: Vec<usize> = (0..n).filter(|s| !seen[*s]).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = traced_dims.iter().product();
    let strides = linalg::strides(dims);
    let mut out = CMat::zeros(dk, dk);
    for r in 0..dk {
        let rd = linalg::digits_of(r, &keep_dims);
        for c in 0..dk {
            let cd = linalg::digits_of(c, &keep_dims);
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for t in 0..dt {
                let td = linalg::digits_of(t, &traced_dims);
                let mut row = 0usize;
                let mut col = 0usize;
                for (k, &site) in keep.iter().enumerate() {
                    row += rd[k] * strides[site];
                    col += cd[k] * strides[site];
                }
                for (k, &site) in traced.iter().enumerate() {
                    row += td[k] * strides[site];
                    col += td[k] * strides[site];
                }
                acc += m[(row, col)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reduce a state to a region pair: partial trace keeping Λ1 then Λ2, with the
/// bipartition recorded as dims `[d^|Λ1|, d^|Λ2|]`.
pub fn restrict_to_pair(rho: &DensityMatrix, pair: &RegionPair) -> Result<DensityMatrix> {
    let keep: Vec<usize> = pair
        .region1
        .iter()
        .chain(pair.region2.iter())
        .copied()
        .collect();
    let reduced = partial_trace(rho, &keep)?;
    let d1: usize = pair.region1.iter().map(|&s| rho.dims[s]).product();
    let d2: usize = pair.region2.iter().map(|&s| rho.dims[s]).product();
    Ok(DensityMatrix::new_unchecked(reduced.matrix, vec![d1, d2]))
}

/// Translation-invariant separable state: the product state with period-k
/// pattern `site_states`, averaged over the k distinct translates.
pub fn translation_average(
    site_states: &[DensityMatrix],
    n_sites: usize,
) -> Result<DensityMatrix> {
    let k = site_states.len();
    if k == 0 || n_sites == 0 || n_sites % k != 0 {
        return Err(Error::Domain(format!(
            "period {k} must divide n_sites {n_sites}"
        )));
    }
    let d = site_states[0].dim();
    if site_states.iter().any(|s| s.dim() != d || s.dims.len() != 1) {
        return Err(Error::Domain(
            "site states must be single-site and of equal dimension".into(),
        ));
    }
    let dims = vec![d; n_sites];
    let dim: usize = d.pow(n_sites as u32);
    let mut acc = CMat::zeros(dim, dim);
    for shift in 0..k {
        let factors: Vec<CMat> = (0..n_sites)
            .map(|s| site_states[(s + k - shift) % k].matrix.clone())
            .collect();
        acc += linalg::kron(&factors);
    }
    Ok(DensityMatrix::new_unchecked(
        acc.scale(1.0 / k as f64),
        dims,
    ))
}

/// Bell state (|00> + |11>)/sqrt(2) as a 2x2-partitioned density matrix.
pub fn bell_state() -> DensityMatrix {
    let mut psi = linalg::CVec::zeros(4);
    psi[0] = cr(1.0 / 2f64.sqrt());
    psi[3] = cr(1.0 / 2f64.sqrt());
    DensityMatrix::pure(&psi, vec![2, 2]).unwrap()
}
