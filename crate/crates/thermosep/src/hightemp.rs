//! High-temperature convergence machinery: closed-form norms of the two
//! fixed-point operators entering the matrix-unit expansion of the
//! equilibrium state, the series convergence threshold in β, and a comparison
//! of that analytic threshold against numerically located NPT onsets.

use serde::Serialize;

use crate::gibbs::{restrict_to_pair, SpectralDecomp};
use crate::linalg;
use crate::separability::{enumerate_pairs, ppt_min_eig_tol, OrderOptions, ThresholdOptions};
use crate::spin::{build_hamiltonian, single_site_matrix, ModelSpec};
use crate::{Error, Result};

/// Norm of the projection part of the fixed-point equation, 1/(d+1).
pub fn k_norm(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("site dimension {d} < 2")));
    }
    Ok(1.0 / (d as f64 + 1.0))
}

/// Bound on the interaction part: (d+1)^2 · 2βh / (1 − 2βh), valid on
/// 2βh < 1 and divergent at the pole.
pub fn l_bound(beta: f64, h_norm: f64, d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("site dimension {d} < 2")));
    }
    if beta < 0.0 || h_norm < 0.0 {
        return Err(Error::Domain("beta and h_norm must be nonnegative".into()));
    }
    let x = 2.0 * beta * h_norm;
    if x >= 1.0 {
        return Err(Error::Domain(format!(
            "outside the bound's domain: 2*beta*h = {x} >= 1"
        )));
    }
    let dp = d as f64 + 1.0;
    Ok(dp * dp * x / (1.0 - x))
}

/// The unique β with k_norm + l_bound = 1: the sufficient convergence
/// threshold of the fixed-point series. Closed form
/// β* = d / (2h((d+1)^3 + d)).
pub fn series_beta_max(d: usize, h_norm: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("site dimension {d} < 2")));
    }
    if h_norm <= 0.0 {
        return Err(Error::Domain("h_norm must be positive".into()));
    }
    let dd = d as f64;
    let dp = dd + 1.0;
    Ok(dd / (2.0 * h_norm * (dp * dp * dp + dd)))
}

/// Computable stand-in for the interaction norm: per translation cell, the
/// sum over terms of |coefficient| times the product of factor operator
/// norms. Mean-field couplings are not finite-range and are rejected.
pub fn interaction_norm_surrogate(model: &ModelSpec) -> Result<f64> {
    if !model.mean_field_terms.is_empty() {
        return Err(Error::Domain(
            "mean-field couplings have no finite-range interaction norm".into(),
        ));
    }
    let mut total = 0.0;
    for term in &model.terms {
        let mut prod = term.coefficient.abs();
        for (_, id) in &term.factors {
            let m = single_site_matrix(id, model.site_dim)?;
            prod *= linalg::operator_norm(&m);
        }
        total += prod;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub d: usize,
    pub h_norm: f64,
    pub k_norm: f64,
    /// Samples of the interaction bound on a grid inside its domain.
    pub l_bound_curve: Vec<(f64, f64)>,
    pub beta_star_analytic: f64,
    /// First β at which any scanned region pair goes NPT, if one exists.
    pub beta_star_numeric: Option<f64>,
    /// True when the analytic threshold is the more conservative one.
    pub consistent: bool,
    /// The interaction norm here is a surrogate; the original convergence
    /// estimates defer the exact norm to the operator-algebra literature, so
    /// the comparison against exact diagonalization is what validates it.
    pub norm_is_surrogate: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundScanConfig {
    /// Region enumeration for the numeric scan.
    pub order: OrderOptions,
    /// Search range for the numeric threshold.
    pub beta_hi: f64,
    pub threshold: ThresholdOptions,
    /// Test hook: override the interaction norm fed to the analytic side.
    pub h_norm_override: Option<f64>,
}

impl Default for BoundScanConfig {
    fn default() -> Self {
        BoundScanConfig {
            order: OrderOptions::default(),
            beta_hi: 5.0,
            threshold: ThresholdOptions::default(),
            h_norm_override: None,
        }
    }
}

/// Compare the analytic convergence threshold against the first numerically
/// observed NPT onset over all region pairs.
///
/// The numeric side bisects the first sign change of the minimum over pairs
/// of the reduced-state PT eigenvalue, so one Gibbs state per β serves every
/// pair. `consistent` means the analytic β* does not exceed the numeric one.
pub fn bound_vs_numeric(model: &ModelSpec, cfg: &BoundScanConfig) -> Result<BoundReport> {
    let h_norm = match cfg.h_norm_override {
        Some(h) => h,
        None => interaction_norm_surrogate(model)?,
    };
    let d = model.site_dim;
    let kn = k_norm(d)?;
    let beta_star_analytic = series_beta_max(d, h_norm)?;
    let mut curve = Vec::new();
    for i in 0..10 {
        let beta = beta_star_analytic * i as f64 / 10.0;
        curve.push((beta, l_bound(beta, h_norm, d)?));
    }

    let ham = build_hamiltonian(model)?;
    let sd = SpectralDecomp::new(&ham)?;
    let pairs = enumerate_pairs(model.n_sites, &cfg.order)?;
    let pt_tol = cfg.order.pt_tol;
    let min_over_pairs = |beta: f64| -> Result<f64> {
        let rho = sd.gibbs(beta)?;
        let mut min = f64::INFINITY;
        for pair in &pairs {
            let reduced = restrict_to_pair(&rho, pair)?;
            let (eig, _) = ppt_min_eig_tol(&reduced, pt_tol)?;
            min = min.min(eig);
        }
        Ok(min)
    };

    let mut beta_star_numeric = None;
    let mut prev = 0.0f64;
    for i in 1..=cfg.threshold.grid {
        let beta = cfg.beta_hi * i as f64 / cfg.threshold.grid as f64;
        if min_over_pairs(beta)? < -pt_tol {
            let (mut lo, mut hi) = (prev, beta);
            while hi - lo > cfg.threshold.tol_beta {
                let mid = 0.5 * (lo + hi);
                if min_over_pairs(mid)? < -pt_tol {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            beta_star_numeric = Some(0.5 * (lo + hi));
            break;
        }
        prev = beta;
    }

    let consistent = match beta_star_numeric {
        Some(b) => beta_star_analytic <= b,
        None => true,
    };
    Ok(BoundReport {
        d,
        h_norm,
        k_norm: kn,
        l_bound_curve: curve,
        beta_star_analytic,
        beta_star_numeric,
        consistent,
        norm_is_surrogate: cfg.h_norm_override.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::Boundary;
    use approx::assert_relative_eq;

    #[test]
    fn k_norm_values() {
        assert_relative_eq!(k_norm(2).unwrap(), 1.0 / 3.0);
        assert_relative_eq!(k_norm(3).unwrap(), 0.25);
        assert!(k_norm(1).is_err());
    }

    #[test]
    fn l_bound_values() {
        // beta*h = 0.1, d = 2: 9 * 0.2 / 0.8 = 2.25
        assert_relative_eq!(l_bound(0.1, 1.0, 2).unwrap(), 2.25, epsilon = 1e-14);
        assert_relative_eq!(l_bound(0.0, 1.0, 2).unwrap(), 0.0);
        assert!(l_bound(0.5, 1.0, 2).is_err()); // pole
    }

    #[test]
    fn l_bound_increasing_convex() {
        let h = 1.0;
        let d = 2;
        let f = |b: f64| l_bound(b, h, d).unwrap();
        let mut prev = f(0.0);
        let mut prev_slope = f64::NEG_INFINITY;
        for i in 1..40 {
            let b = 0.012 * i as f64;
            let v = f(b);
            let slope = v - prev;
            assert!(v > prev, "not increasing at {b}");
            assert!(slope >= prev_slope - 1e-12, "not convex at {b}");
            prev = v;
            prev_slope = slope;
        }
    }

    #[test]
    fn series_threshold_closed_form_and_fixed_point() {
        let b = series_beta_max(2, 1.0).unwrap();
        assert_relative_eq!(b, 1.0 / 29.0, epsilon = 1e-15);
        // doubling h halves the threshold
        assert_relative_eq!(series_beta_max(2, 2.0).unwrap(), b / 2.0, epsilon = 1e-15);
        // large d pushes the threshold to zero
        assert!(series_beta_max(40, 1.0).unwrap() < series_beta_max(4, 1.0).unwrap());
        // defining identity k + l = 1 at the threshold
        for (d, h) in [(2usize, 1.0f64), (2, 3.0), (3, 0.5), (5, 2.0)] {
            let b = series_beta_max(d, h).unwrap();
            let sum = k_norm(d).unwrap() + l_bound(b, h, d).unwrap();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn surrogate_norms() {
        let ising = ModelSpec::ising(4, Boundary::Periodic, 1.0);
        assert_relative_eq!(interaction_norm_surrogate(&ising).unwrap(), 1.0);
        let heis = ModelSpec::heisenberg(4, Boundary::Periodic, 1.0);
        assert_relative_eq!(
            interaction_norm_surrogate(&heis).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        let zero = ModelSpec {
            terms: vec![],
            ..ModelSpec::ising(4, Boundary::Periodic, 1.0)
        };
        assert_relative_eq!(interaction_norm_surrogate(&zero).unwrap(), 0.0);
        let mf = ModelSpec::meanfield_h2(4, 1.0);
        assert!(interaction_norm_surrogate(&mf).is_err());
    }

    #[test]
    fn heisenberg_bound_is_conservative() {
        let model = ModelSpec::heisenberg(2, Boundary::Open, 1.0);
        let rep = bound_vs_numeric(&model, &BoundScanConfig::default()).unwrap();
        assert!(rep.consistent);
        let numeric = rep.beta_star_numeric.expect("two-site chain goes NPT");
        assert!(
            (numeric - 3f64.ln() / 4.0).abs() < 1e-4,
            "numeric {numeric}"
        );
        assert_relative_eq!(rep.beta_star_analytic, series_beta_max(2, 3.0).unwrap());
        assert!(rep.beta_star_analytic < numeric);
    }

    #[test]
    fn ising_consistent_vacuously() {
        let model = ModelSpec::ising(4, Boundary::Periodic, 1.0);
        let rep = bound_vs_numeric(&model, &BoundScanConfig::default()).unwrap();
        assert!(rep.consistent);
        assert_eq!(rep.beta_star_numeric, None);
    }

    #[test]
    fn understated_norm_is_flagged() {
        let model = ModelSpec::heisenberg(2, Boundary::Open, 1.0);
        // pretend the interaction were 100x weaker: analytic threshold lands
        // far above the true NPT onset
        let cfg = BoundScanConfig {
            h_norm_override: Some(0.03),
            ..BoundScanConfig::default()
        };
        let rep = bound_vs_numeric(&model, &cfg).unwrap();
        assert!(!rep.consistent);
    }
}
