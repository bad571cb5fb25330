//! Finite-dimensional operators for spin lattices: single-site matrices,
//! Kronecker embeddings, lattice translation, and the model Hamiltonians used
//! throughout the crate.
//!
//! Site 0 is the leftmost Kronecker factor; this convention is fixed so that
//! golden files and serialized matrices are stable.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, kron, CMat};
use crate::{Error, Result};

/// Identifier for a single-site Hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteMatrix {
    Identity,
    SigmaX,
    SigmaY,
    SigmaZ,
    /// Explicit d×d Hermitian matrix, row-major `[re, im]` pairs.
    Custom(Vec<Vec<[f64; 2]>>),
}

impl SiteMatrix {
    pub fn name(&self) -> &'static str {
        match self {
            SiteMatrix::Identity => "identity",
            SiteMatrix::SigmaX => "sigma_x",
            SiteMatrix::SigmaY => "sigma_y",
            SiteMatrix::SigmaZ => "sigma_z",
            SiteMatrix::Custom(_) => "custom",
        }
    }
}

/// Materialize a single-site matrix id at site dimension `d`.
///
/// Pauli matrices use the standard convention with `sigma_z = diag(1, -1)`;
/// requesting one at `d != 2` is an error.
pub fn single_site_matrix(id: &SiteMatrix, d: usize) -> Result<CMat> {
    if d == 0 {
        return Err(Error::Dimension("site dimension must be positive".into()));
    }
    let pauli = |entries: [[f64; 2]; 4]| {
        CMat::from_row_slice(
            2,
            2,
            &entries
                .iter()
                .map(|[re, im]| num_complex::Complex64::new(*re, *im))
                .collect::<Vec<_>>(),
        )
    };
    match id {
        SiteMatrix::Identity => Ok(linalg::identity(d)),
        SiteMatrix::SigmaX | SiteMatrix::SigmaY | SiteMatrix::SigmaZ if d != 2 => Err(
            Error::Dimension(format!("{} requires site dimension 2, got {d}", id.name())),
        ),
        SiteMatrix::SigmaX => Ok(pauli([[0., 0.], [1., 0.], [1., 0.], [0., 0.]])),
        SiteMatrix::SigmaY => Ok(pauli([[0., 0.], [0., -1.], [0., 1.], [0., 0.]])),
        SiteMatrix::SigmaZ => Ok(pauli([[1., 0.], [0., 0.], [0., 0.], [-1., 0.]])),
        SiteMatrix::Custom(rows) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Dimension(format!(
                    "custom matrix must be {d}x{d}, got {}x{}",
                    rows.len(),
                    rows.first().map_or(0, Vec::len)
                )));
            }
            let m = CMat::from_fn(d, d, |i, j| {
                num_complex::Complex64::new(rows[i][j][0], rows[i][j][1])
            });
            linalg::require_hermitian(&m, "custom site matrix", 1e-12)?;
            Ok(m)
        }
    }
}

/// One finite-range interaction term: a coefficient times a product of
/// single-site matrices at distinct site offsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalTerm {
    pub coefficient: f64,
    pub factors: Vec<(i64, SiteMatrix)>,
}

impl LocalTerm {
    pub fn new(coefficient: f64, factors: Vec<(i64, SiteMatrix)>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::Domain("term coefficient must be finite".into()));
        }
        let mut offsets: Vec<i64> = factors.iter().map(|(o, _)| *o).collect();
        offsets.sort_unstable();
        offsets.dedup();
        if offsets.len() != factors.len() {
            return Err(Error::Domain("term offsets must be distinct".into()));
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Open,
}

/// A translation-invariant lattice model on a chain of `n_sites` sites.
///
/// `mean_field_terms` holds all-to-all couplings `(M, c)` contributing
/// `(c / n_sites) * sum_{k != l} M_k M_l` over ordered pairs; the diagonal
/// `k = l` is excluded, which only shifts the Hamiltonian by a constant and
/// leaves every Gibbs state unchanged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_sites: usize,
    pub site_dim: usize,
    pub boundary: Boundary,
    pub terms: Vec<LocalTerm>,
    #[serde(default)]
    pub mean_field_terms: Vec<(SiteMatrix, f64)>,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::Domain("n_sites must be positive".into()));
        }
        if self.site_dim < 2 {
            return Err(Error::Domain("site_dim must be at least 2".into()));
        }
        let dim = self.hilbert_dim();
        if dim > 4096 {
            return Err(Error::Domain(format!(
                "dense scale exceeded: d^n = {dim} > 4096"
            )));
        }
        for t in &self.terms {
            for (off, id) in &t.factors {
                single_site_matrix(id, self.site_dim)?;
                if off.unsigned_abs() as usize >= self.n_sites {
                    return Err(Error::Domain(format!(
                        "term offset {off} does not fit on {} sites",
                        self.n_sites
                    )));
                }
            }
        }
        for (id, _) in &self.mean_field_terms {
            single_site_matrix(id, self.site_dim)?;
        }
        Ok(())
    }

    pub fn hilbert_dim(&self) -> usize {
        self.site_dim.pow(self.n_sites as u32)
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.site_dim; self.n_sites]
    }

    /// Nearest-neighbour Ising chain `-j * sum sigma_z sigma_z`.
    pub fn ising(n_sites: usize, boundary: Boundary, j: f64) -> Self {
        ModelSpec {
            n_sites,
            site_dim: 2,
            boundary,
            terms: vec![LocalTerm::new(
                -j,
                vec![(0, SiteMatrix::SigmaZ), (1, SiteMatrix::SigmaZ)],
            )
            .unwrap()],
            mean_field_terms: vec![],
        }
    }

    /// Isotropic Heisenberg chain `j * sum (sx sx + sy sy + sz sz)`; `j > 0`
    /// is antiferromagnetic.
    pub fn heisenberg(n_sites: usize, boundary: Boundary, j: f64) -> Self {
        let mk = |m: SiteMatrix| LocalTerm::new(j, vec![(0, m.clone()), (1, m)]).unwrap();
        ModelSpec {
            n_sites,
            site_dim: 2,
            boundary,
            terms: vec![
                mk(SiteMatrix::SigmaX),
                mk(SiteMatrix::SigmaY),
                mk(SiteMatrix::SigmaZ),
            ],
            mean_field_terms: vec![],
        }
    }

    /// Transverse-field Ising chain `-j * sum sz sz - h * sum sx`.
    pub fn transverse_ising(n_sites: usize, boundary: Boundary, j: f64, h: f64) -> Self {
        ModelSpec {
            n_sites,
            site_dim: 2,
            boundary,
            terms: vec![
                LocalTerm::new(-j, vec![(0, SiteMatrix::SigmaZ), (1, SiteMatrix::SigmaZ)])
                    .unwrap(),
                LocalTerm::new(-h, vec![(0, SiteMatrix::SigmaX)]).unwrap(),
            ],
            mean_field_terms: vec![],
        }
    }

    /// Homogeneous field model `a * sum sigma_z`.
    pub fn meanfield_h1(n_sites: usize, a: f64) -> Self {
        ModelSpec {
            n_sites,
            site_dim: 2,
            boundary: Boundary::Periodic,
            terms: vec![LocalTerm::new(a, vec![(0, SiteMatrix::SigmaZ)]).unwrap()],
            mean_field_terms: vec![],
        }
    }

    /// Field plus isotropic all-to-all coupling
    /// `c * sum sz + (1/n) * sum_{k != l} (sx sx + sy sy + sz sz)`.
    pub fn meanfield_h2(n_sites: usize, c: f64) -> Self {
        ModelSpec {
            n_sites,
            site_dim: 2,
            boundary: Boundary::Periodic,
            terms: vec![LocalTerm::new(c, vec![(0, SiteMatrix::SigmaZ)]).unwrap()],
            mean_field_terms: vec![
                (SiteMatrix::SigmaX, 1.0),
                (SiteMatrix::SigmaY, 1.0),
                (SiteMatrix::SigmaZ, 1.0),
            ],
        }
    }
}

/// A complex square matrix together with the ordered list of subsystem
/// dimensions whose product equals the matrix dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    pub matrix: CMat,
    pub dims: Vec<usize>,
}

impl Operator {
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but subsystem dims give {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, dims })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Embed a local term at `base_site`: each factor lands at
/// `base_site + offset`, identity everywhere else, times the coefficient.
///
/// Periodic boundaries wrap the shifted site index mod `n_sites`; open
/// boundaries reject out-of-range placements.
pub fn embed_term(term: &LocalTerm, base_site: usize, model: &ModelSpec) -> Result<Operator> {
    let n = model.n_sites as i64;
    let mut placed: Vec<Option<CMat>> = vec![None; model.n_sites];
    for (off, id) in &term.factors {
        let raw = base_site as i64 + off;
        let site = match model.boundary {
            Boundary::Periodic => raw.rem_euclid(n),
            Boundary::Open => {
                if raw < 0 || raw >= n {
                    return Err(Error::Domain(format!(
                        "site {raw} out of range under open boundary (n = {n})"
                    )));
                }
                raw
            }
        } as usize;
        if placed[site].is_some() {
            return Err(Error::Domain(format!(
                "two factors land on site {site} after wrapping"
            )));
        }
        placed[site] = Some(single_site_matrix(id, model.site_dim)?);
    }
    let factors: Vec<CMat> = placed
        .into_iter()
        .map(|p| p.unwrap_or_else(|| linalg::identity(model.site_dim)))
        .collect();
    let matrix = kron(&factors).scale(term.coefficient);
    Operator::new(matrix, model.dims())
}

/// Assemble the full Hamiltonian: every term embedded at every base site, plus
/// the mean-field part summed over ordered pairs `k != l` scaled by `1/n`.
///
/// Under open boundaries, base sites whose term would leave the chain are
/// skipped, which reproduces the usual open-chain sum over bonds.
pub fn build_hamiltonian(model: &ModelSpec) -> Result<Operator> {
    model.validate()?;
    let d = model.hilbert_dim();
    let mut h = CMat::zeros(d, d);
    for term in &model.terms {
        for base in 0..model.n_sites {
            match embed_term(term, base, model) {
                Ok(op) => h += op.matrix,
                Err(Error::Domain(_)) if model.boundary == Boundary::Open => continue,
                Err(e) => return Err(e),
            }
        }
    }
    for (id, coupling) in &model.mean_field_terms {
        let m = single_site_matrix(id, model.site_dim)?;
        let scale = coupling / model.n_sites as f64;
        for k in 0..model.n_sites {
            for l in 0..model.n_sites {
                if k == l {
                    continue;
                }
                let factors: Vec<CMat> = (0..model.n_sites)
                    .map(|s| {
                        if s == k || s == l {
                            m.clone()
                        } else {
                            linalg::identity(model.site_dim)
                        }
                    })
                    .collect();
                h += kron(&factors).scale(scale);
            }
        }
    }
    Operator::new(h, model.dims())
}

/// Conjugate an operator by the cyclic site permutation sending site `l` to
/// site `l + shift (mod n)`. Requires all subsystem dimensions equal.
pub fn translate_operator(op: &Operator, shift: i64) -> Result<Operator> {
    let n = op.dims.len();
    if n == 0 {
        return Err(Error::Dimension("operator has no subsystems".into()));
    }
    let d0 = op.dims[0];
    if op.dims.iter().any(|&d| d != d0) {
        return Err(Error::Dimension(
            "translation requires equal site dimensions".into(),
        ));
    }
    let s = shift.rem_euclid(n as i64) as usize;
    let dim = op.dim();
    let mut perm = vec![0usize; dim];
    for (idx, p) in perm.iter_mut().enumerate() {
        let digits = linalg::digits_of(idx, &op.dims);
        let mut nd = vec![0usize; n];
        for (l, &dg) in digits.iter().enumerate() {
            nd[(l + s) % n] = dg;
        }
        *p = linalg::index_of(&nd, &op.dims);
    }
    let mut out = CMat::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            out[(perm[i], perm[j])] = op.matrix[(i, j)];
        }
    }
    Operator::new(out, op.dims.clone())
}
