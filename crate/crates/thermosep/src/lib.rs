//! Thermal equilibrium states of finite lattice systems and their local
//! entanglement structure.
//!
//! The crate covers three families of models and the criteria used to decide
//! whether their equilibrium states carry entanglement between pairs of local
//! regions:
//!
//! * dense spin chains ([`spin`], [`gibbs`]): Gibbs states by exact
//!   diagonalization, KMS checks by complex-time evolution, reduced states on
//!   region pairs, and partial-transpose tests ([`separability`]) together
//!   with the high-temperature convergence bounds that guarantee a separable
//!   regime ([`hightemp`]);
//! * quasifree fermions and bosons ([`quasifree`], [`continuum`]): one-particle
//!   symbols, block partial-transpose tests on region pairs, Bogoliubov
//!   rotations, a Wick-theorem oracle for small systems, and continuum mode
//!   kernels with the thermal scaling check;
//! * mean-field spin models ([`fluctuation`]): self-consistent single-site
//!   states, left/right fluctuation Weyl algebras, linearized collective
//!   dynamics, normal modes, Gaussian thermal states, and the associated
//!   separability inequality and Gaussian PPT verdict.
//!
//! The `thermosep` binary drives parameter sweeps from JSON configs and writes
//! CSV/JSON results; see `docs/formats.md` in the repository root. Each major
//! capability also has a runnable example under `examples/`.

pub mod config;
pub mod continuum;
pub mod fluctuation;
pub mod gibbs;
pub mod hightemp;
pub mod linalg;
pub mod quasifree;
pub mod records;
pub mod runner;
pub mod separability;
pub mod spin;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
