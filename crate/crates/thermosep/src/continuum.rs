//! Continuum free-fermion mode kernels: thermal two-point data between a pair
//! of localized single-particle modes, computed by adaptive Gauss–Legendre
//! quadrature in momentum space, and the thermal scaling check.
//!
//! The thermal weight for dispersion p² concentrates on |p| ≲ β^{-1/2}, so the
//! dilation that compensates a temperature change rescales momenta by √β:
//! f̃_β(p) = β^{1/4} f̃(√β p). With that choice the kernel is β-independent by
//! an exact change of variables. The linear-dispersion scaling
//! f̃_β(p) = √β f̃(β p) is kept available as a variant; it does not leave the
//! p² kernel invariant.

use serde::{Deserialize, Serialize};

use crate::linalg::{cr, CMat, C64};
use crate::quasifree::{QuasifreeSymbol, RegionProjection, Statistics};
use crate::separability::Verdict;
use crate::{Error, Result};

/// One family of normalized single-particle modes, parameterized in position
/// space and evaluated analytically in momentum space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum ModeFamily {
    /// (πw²)^{-1/4} exp(-(x-c)²/2w²)
    GaussianBump { center: f64, width: f64 },
    /// (1/√w) cos(π(x-c)/2w) on |x-c| ≤ w, zero outside
    CosineBump { center: f64, half_width: f64 },
    /// odd bump: N (x-c) exp(-(x-c)²/2w²)
    GaussianDerivative { center: f64, width: f64 },
}

impl ModeFamily {
    /// Momentum representation (unitary Fourier convention).
    pub fn eval_momentum(&self, p: f64) -> C64 {
        match *self {
            ModeFamily::GaussianBump { center, width } => {
                let amp = (width * width / std::f64::consts::PI).powf(0.25);
                let gauss = (-0.5 * width * width * p * p).exp();
                C64::from_polar(amp * gauss, -p * center)
            }
            ModeFamily::CosineBump { center, half_width } => {
                let a = std::f64::consts::FRAC_PI_2 / half_width;
                let t = p.abs();
                // cos(t·hw)/(a² - t²) with its removable singularity at t = a
                let core = if (t - a).abs() < 1e-4 {
                    let x = (t - a) * half_width;
                    let sinc = if x.abs() < 1e-12 { 1.0 } else { x.sin() / x };
                    half_width * sinc / (a + t)
                } else {
                    (t * half_width).cos() / ((a - t) * (a + t))
                };
                let amp = 2.0 * a / (2.0 * std::f64::consts::PI * half_width).sqrt();
                C64::from_polar(1.0, -p * center) * cr(amp * core)
            }
            ModeFamily::GaussianDerivative { center, width } => {
                let n = (2.0 / (std::f64::consts::PI.sqrt() * width.powi(3))).sqrt();
                let val = -n * width.powi(3) * p * (-0.5 * width * width * p * p).exp();
                // -i * val * e^{-ipc}
                C64::new(0.0, val) * C64::from_polar(1.0, -p * center) * cr(-1.0)
            }
        }
    }

    /// Position representation.
    pub fn eval_position(&self, x: f64) -> f64 {
        match *self {
            ModeFamily::GaussianBump { center, width } => {
                let u = x - center;
                (std::f64::consts::PI * width * width).powf(-0.25)
                    * (-0.5 * u * u / (width * width)).exp()
            }
            ModeFamily::CosineBump { center, half_width } => {
                let u = x - center;
                if u.abs() <= half_width {
                    (1.0 / half_width).sqrt()
                        * (std::f64::consts::FRAC_PI_2 * u / half_width).cos()
                } else {
                    0.0
                }
            }
            ModeFamily::GaussianDerivative { center, width } => {
                let u = x - center;
                let n = (2.0 / (std::f64::consts::PI.sqrt() * width.powi(3))).sqrt();
                n * u * (-0.5 * u * u / (width * width)).exp()
            }
        }
    }

    /// Dilate all length parameters by `s > 0`; every family is closed under
    /// dilation with its normalization preserved.
    fn dilated(&self, s: f64) -> ModeFamily {
        match *self {
            ModeFamily::GaussianBump { center, width } => ModeFamily::GaussianBump {
                center: s * center,
                width: s * width,
            },
            ModeFamily::CosineBump { center, half_width } => ModeFamily::CosineBump {
                center: s * center,
                half_width: s * half_width,
            },
            ModeFamily::GaussianDerivative { center, width } => ModeFamily::GaussianDerivative {
                center: s * center,
                width: s * width,
            },
        }
    }

    /// Exact L² overlap ⟨f|g⟩ for same-family pairs of equal width.
    fn overlap(&self, other: &ModeFamily) -> Option<f64> {
        match (*self, *other) {
            (
                ModeFamily::GaussianBump { center: c1, width: w1 },
                ModeFamily::GaussianBump { center: c2, width: w2 },
            ) => {
                let ws = w1 * w1 + w2 * w2;
                let pref = (2.0 * w1 * w2 / ws).sqrt();
                Some(pref * (-(c1 - c2) * (c1 - c2) / (2.0 * ws)).exp())
            }
            (
                ModeFamily::CosineBump { center: c1, half_width: w1 },
                ModeFamily::CosineBump { center: c2, half_width: w2 },
            ) => {
                if (c1 - c2).abs() >= w1 + w2 {
                    Some(0.0)
                } else {
                    None
                }
            }
            (
                ModeFamily::GaussianDerivative { center: c1, width: w1 },
                ModeFamily::GaussianDerivative { center: c2, width: w2 },
            ) => {
                if (w1 - w2).abs() > 1e-14 {
                    return None;
                }
                let d = 0.5 * (c2 - c1);
                // ∫ N²(x-d)(x+d) e^{-(x²+d²)/w²} dx = e^{-d²/w²}(1 - 2d²/w²)
                Some((-d * d / (w1 * w1)).exp() * (1.0 - 2.0 * d * d / (w1 * w1)))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingVariant {
    /// β^{1/4} f̃(√β p): leaves the p² thermal kernel exactly invariant.
    Corrected,
    /// √β f̃(β p): the linear-dispersion scaling, kept for comparison.
    Literal,
}

/// A localized mode: a real linear combination of family functions (so that
/// orthogonalized pairs stay in closed form under scaling).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub terms: Vec<(f64, ModeFamily)>,
}

impl Mode {
    pub fn family(f: ModeFamily) -> Mode {
        Mode {
            terms: vec![(1.0, f)],
        }
    }

    pub fn eval_momentum(&self, p: f64) -> C64 {
        self.terms
            .iter()
            .map(|(c, f)| f.eval_momentum(p) * cr(*c))
            .sum()
    }

    pub fn eval_position(&self, x: f64) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.eval_position(x)).sum()
    }

    /// Thermal rescaling of the mode. Scaling is linear, so it applies
    /// termwise; position-space support keeps its side of the origin.
    pub fn scaled(&self, beta: f64, variant: ScalingVariant) -> Result<Mode> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::Domain("scaling needs finite beta > 0".into()));
        }
        let s = match variant {
            ScalingVariant::Corrected => beta.sqrt(),
            ScalingVariant::Literal => beta,
        };
        Ok(Mode {
            terms: self
                .terms
                .iter()
                .map(|(c, f)| (*c, f.dilated(s)))
                .collect(),
        })
    }

    fn overlap(&self, other: &Mode) -> Option<f64> {
        let mut total = 0.0;
        for (ca, fa) in &self.terms {
            for (cb, fb) in &other.terms {
                total += ca * cb * fa.overlap(fb)?;
            }
        }
        Some(total)
    }
}

/// An orthonormal mode pair ready for kernel evaluation.
#[derive(Debug, Clone)]
pub struct ModePair {
    pub f: Mode,
    pub g: Mode,
    /// Residual overlap after preparation.
    pub residual_overlap: f64,
}

/// Enforce ⟨f|g⟩ = 0: if the overlap is nonzero the second mode is
/// Gram–Schmidt orthogonalized against the first (in closed form), and the
/// residual must come out below 1e-8.
pub fn orthogonal_pair(f: Mode, g: Mode) -> Result<ModePair> {
    let ov = f
        .overlap(&g)
        .ok_or_else(|| Error::Domain("no closed-form overlap for this mode pair".into()))?;
    let g = if ov.abs() <= 1e-12 {
        g
    } else {
        let norm = (1.0 - ov * ov).max(0.0).sqrt();
        if norm < 1e-6 {
            return Err(Error::Domain(
                "modes are nearly parallel; cannot orthogonalize".into(),
            ));
        }
        let mut terms: Vec<(f64, ModeFamily)> = g
            .terms
            .iter()
            .map(|(c, fam)| (c / norm, *fam))
            .collect();
        for (c, fam) in &f.terms {
            terms.push((-ov * c / norm, *fam));
        }
        Mode { terms }
    };
    let residual = f.overlap(&g).unwrap_or(f64::NAN);
    if !(residual.abs() <= 1e-8) {
        return Err(Error::Numerical(format!(
            "orthogonality residual {residual:.3e} exceeds 1e-8"
        )));
    }
    Ok(ModePair {
        f,
        g,
        residual_overlap: residual,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Nodes for the first evaluation; refinement doubles until agreement.
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Entrywise agreement required between successive refinements.
    pub tol: f64,
    /// Integration half-range; default picks the point where the thermal
    /// factor drops below ~1e-18.
    pub p_max: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            initial_nodes: 64,
            max_nodes: 4096,
            tol: 1e-8,
            p_max: None,
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x)
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn fermi_factor(beta: f64, p: f64) -> f64 {
    let x = beta * p * p;
    let e = (-x).exp();
    e / (1.0 + e)
}

fn kernel_once(pair: &ModePair, beta: f64, p_max: f64, n: usize) -> CMat {
    let (nodes, weights) = gauss_legendre(n);
    let mut k = CMat::zeros(2, 2);
    for (x, w) in nodes.iter().zip(weights.iter()) {
        let p = x * p_max;
        let wt = w * p_max * fermi_factor(beta, p);
        let fv = pair.f.eval_momentum(p);
        let gv = pair.g.eval_momentum(p);
        let vals = [fv, gv];
        for i in 0..2 {
            for j in 0..2 {
                k[(i, j)] += vals[i].conj() * vals[j] * cr(wt);
            }
        }
    }
    k
}

#[derive(Debug, Clone)]
pub struct KernelResult {
    /// 2×2 Hermitian occupation matrix over the mode pair.
    pub matrix: CMat,
    pub nodes_used: usize,
    pub p_max: f64,
}

/// Thermal two-point kernel of the mode pair: entries
/// ∫ dp conj(ũ(p)) ṽ(p) / (1 + e^{βp²}) for u, v ∈ {f, g}, evaluated by
/// Gauss–Legendre quadrature with doubling refinement until successive
/// results agree entrywise to `cfg.tol`.
pub fn continuum_mode_kernel(
    pair: &ModePair,
    beta: f64,
    cfg: &QuadratureConfig,
) -> Result<KernelResult> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain("kernel needs finite beta > 0".into()));
    }
    let p_max = cfg.p_max.unwrap_or_else(|| (40.0 / beta).sqrt());
    let mut n = cfg.initial_nodes.max(8);
    let mut prev = kernel_once(pair, beta, p_max, n);
    loop {
        n *= 2;
        if n > cfg.max_nodes {
            return Err(Error::Numerical(format!(
                "quadrature did not converge below {:.1e} within {} nodes",
                cfg.tol, cfg.max_nodes
            )));
        }
        let cur = kernel_once(pair, beta, p_max, n);
        let mut dev = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                dev = dev.max((cur[(i, j)] - prev[(i, j)]).norm());
            }
        }
        if dev <= cfg.tol {
            // symmetrize away quadrature-level Hermiticity error
            let sym = (cur.clone() + cur.adjoint()).scale(0.5);
            return Ok(KernelResult {
                matrix: sym,
                nodes_used: n,
                p_max,
            });
        }
        prev = cur;
    }
}

/// Fermionic PT verdict of a 2×2 mode kernel, treating it as a two-mode
/// gauge-invariant symbol split into one mode per region.
pub fn kernel_pt_verdict(kernel: &CMat, tol: f64) -> Result<Verdict> {
    let sym = QuasifreeSymbol::gauge_invariant(kernel.clone(), Statistics::Fermi)?;
    let regions = RegionProjection::new(vec![0], vec![1])?;
    crate::quasifree::fermion_pt_test(&sym, &regions, tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingCheckRow {
    pub beta: f64,
    pub max_entry_deviation: f64,
    pub verdict_matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingCheckRow>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Compare the kernel of the rescaled pair at each β against the reference
/// kernel at β = 1. With the corrected scaling the agreement is exact up to
/// quadrature error; PT verdicts must match as well.
pub fn scaling_invariance_check(
    pair: &ModePair,
    betas: &[f64],
    variant: ScalingVariant,
    cfg: &QuadratureConfig,
    tol: f64,
) -> Result<ScalingReport> {
    let reference = continuum_mode_kernel(pair, 1.0, cfg)?;
    let ref_verdict = kernel_pt_verdict(&reference.matrix, 1e-10)?;
    let mut rows = Vec::with_capacity(betas.len());
    let mut max_dev = 0.0f64;
    for &beta in betas {
        let scaled = ModePair {
            f: pair.f.scaled(beta, variant)?,
            g: pair.g.scaled(beta, variant)?,
            residual_overlap: pair.residual_overlap,
        };
        let k = continuum_mode_kernel(&scaled, beta, cfg)?;
        let mut dev = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                dev = dev.max((k.matrix[(i, j)] - reference.matrix[(i, j)]).norm());
            }
        }
        let verdict = kernel_pt_verdict(&k.matrix, 1e-10)?;
        rows.push(ScalingCheckRow {
            beta,
            max_entry_deviation: dev,
            verdict_matches: verdict.is_npt() == ref_verdict.is_npt(),
        });
        max_dev = max_dev.max(dev);
    }
    let pass = rows
        .iter()
        .all(|r| r.max_entry_deviation <= tol && r.verdict_matches);
    Ok(ScalingReport {
        rows,
        max_deviation: max_dev,
        pass,
    })
}

/// The three shipped mode pairs: mirrored bumps of each family.
pub fn builtin_mode_pairs() -> Result<Vec<(String, ModePair)>> {
    let gauss = orthogonal_pair(
        Mode::family(ModeFamily::GaussianBump {
            center: 2.0,
            width: 1.0,
        }),
        Mode::family(ModeFamily::GaussianBump {
            center: -2.0,
            width: 1.0,
        }),
    )?;
    let cosine = orthogonal_pair(
        Mode::family(ModeFamily::CosineBump {
            center: 1.5,
            half_width: 1.5,
        }),
        Mode::family(ModeFamily::CosineBump {
            center: -1.5,
            half_width: 1.5,
        }),
    )?;
    let deriv = orthogonal_pair(
        Mode::family(ModeFamily::GaussianDerivative {
            center: 1.8,
            width: 0.9,
        }),
        Mode::family(ModeFamily::GaussianDerivative {
            center: -1.8,
            width: 0.9,
        }),
    )?;
    Ok(vec![
        ("gaussian".to_string(), gauss),
        ("cosine".to_string(), cosine),
        ("gaussian_derivative".to_string(), deriv),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn position_norm(mode: &Mode) -> f64 {
        // fine trapezoid on a generous window
        let (lo, hi, n) = (-60.0, 60.0, 240_001);
        let h = (hi - lo) / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = lo + i as f64 * h;
            let v = mode.eval_position(x);
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * v * v;
        }
        (acc * h).sqrt()
    }

    fn position_overlap(a: &Mode, b: &Mode) -> f64 {
        let (lo, hi, n) = (-60.0, 60.0, 240_001);
        let h = (hi - lo) / (n - 1) as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += w * a.eval_position(x) * b.eval_position(x);
        }
        acc * h
    }

    #[test]
    fn families_are_normalized_both_representations() {
        let fams = [
            ModeFamily::GaussianBump {
                center: 1.0,
                width: 0.8,
            },
            ModeFamily::CosineBump {
                center: -0.5,
                half_width: 1.3,
            },
            ModeFamily::GaussianDerivative {
                center: 0.7,
                width: 1.1,
            },
        ];
        for fam in fams {
            let mode = Mode::family(fam);
            assert_relative_eq!(position_norm(&mode), 1.0, epsilon = 1e-8);
            // momentum norm via wide quadrature
            let (nodes, weights) = gauss_legendre(2048);
            let p_max = 60.0;
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let p = x * p_max;
                acc += w * p_max * mode.eval_momentum(p).norm_sqr();
            }
            assert_relative_eq!(acc, 1.0, epsilon = 1e-5);
        }
    }

    #[test]
    fn analytic_overlaps_match_position_quadrature() {
        let f = Mode::family(ModeFamily::GaussianBump {
            center: 2.0,
            width: 1.0,
        });
        let g = Mode::family(ModeFamily::GaussianBump {
            center: -2.0,
            width: 1.0,
        });
        let analytic = f.overlap(&g).unwrap();
        assert_relative_eq!(analytic, position_overlap(&f, &g), epsilon = 1e-9);
        assert_relative_eq!(analytic, (-4.0f64).exp(), epsilon = 1e-12);

        let fd = Mode::family(ModeFamily::GaussianDerivative {
            center: 1.8,
            width: 0.9,
        });
        let gd = Mode::family(ModeFamily::GaussianDerivative {
            center: -1.8,
            width: 0.9,
        });
        assert_relative_eq!(
            fd.overlap(&gd).unwrap(),
            position_overlap(&fd, &gd),
            epsilon = 1e-9
        );
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre(8);
        // exact for degree <= 15: ∫ x^14 on [-1,1] = 2/15
        let got: f64 = nodes
            .iter()
            .zip(weights.iter())
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert_relative_eq!(got, 2.0 / 15.0, epsilon = 1e-12);
    }

    #[test]
    fn orthogonal_pair_kills_overlap() {
        let pairs = builtin_mode_pairs().unwrap();
        for (name, pair) in &pairs {
            assert!(
                pair.residual_overlap.abs() <= 1e-8,
                "{name}: residual {}",
                pair.residual_overlap
            );
            assert!(
                position_overlap(&pair.f, &pair.g).abs() < 1e-7,
                "{name} not orthogonal in position space"
            );
        }
    }

    #[test]
    fn kernel_entries_are_physical() {
        let pairs = builtin_mode_pairs().unwrap();
        for (name, pair) in &pairs {
            let k = continuum_mode_kernel(pair, 1.0, &QuadratureConfig::default()).unwrap();
            for i in 0..2 {
                let d = k.matrix[(i, i)].re;
                assert!(
                    (-1e-8..=1.0 + 1e-8).contains(&d),
                    "{name} diagonal {d} out of range"
                );
                assert!(k.matrix[(i, i)].im.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn scaled_modes_preserve_norm_and_side() {
        let f = Mode::family(ModeFamily::GaussianBump {
            center: 2.0,
            width: 1.0,
        });
        for variant in [ScalingVariant::Corrected, ScalingVariant::Literal] {
            let fb = f.scaled(4.0, variant).unwrap();
            assert_relative_eq!(position_norm(&fb), 1.0, epsilon = 1e-8);
            // mass stays on the right half-line
            let mut right = 0.0;
            let mut total = 0.0;
            let h = 0.001;
            for i in 0..120_000 {
                let x = -60.0 + i as f64 * h;
                let v = fb.eval_position(x) * fb.eval_position(x) * h;
                total += v;
                if x > 0.0 {
                    right += v;
                }
            }
            assert!(right / total > 0.999);
        }
        assert!(f.scaled(1.0, ScalingVariant::Corrected).unwrap() == f);
        assert!(f.scaled(-1.0, ScalingVariant::Corrected).is_err());
    }

    #[test]
    fn corrected_scaling_is_invariant_literal_is_not() {
        let pairs = builtin_mode_pairs().unwrap();
        let betas = [0.5, 2.0, 10.0];
        for (name, pair) in &pairs {
            let rep = scaling_invariance_check(
                pair,
                &betas,
                ScalingVariant::Corrected,
                &QuadratureConfig::default(),
                1e-6,
            )
            .unwrap();
            assert!(rep.pass, "{name}: corrected max dev {}", rep.max_deviation);
        }
        // the linear-dispersion scaling fails the p² kernel comparison
        let (_, gauss) = &pairs[0];
        let rep = scaling_invariance_check(
            gauss,
            &betas,
            ScalingVariant::Literal,
            &QuadratureConfig::default(),
            1e-6,
        )
        .unwrap();
        assert!(!rep.pass);
        assert!(rep.max_deviation > 1e-3);
    }

    #[test]
    fn unscaled_partner_is_detected() {
        let pairs = builtin_mode_pairs().unwrap();
        let (_, pair) = &pairs[0];
        let beta = 2.0;
        let broken = ModePair {
            f: pair.f.scaled(beta, ScalingVariant::Corrected).unwrap(),
            g: pair.g.clone(), // deliberately left unscaled
            residual_overlap: pair.residual_overlap,
        };
        let reference = continuum_mode_kernel(pair, 1.0, &QuadratureConfig::default()).unwrap();
        let k = continuum_mode_kernel(&broken, beta, &QuadratureConfig::default()).unwrap();
        let mut dev = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                dev = dev.max((k.matrix[(i, j)] - reference.matrix[(i, j)]).norm());
            }
        }
        assert!(dev > 1e-3, "negative control too small: {dev}");
    }

    #[test]
    fn cross_entry_decays_with_separation() {
        let mut last = f64::INFINITY;
        for sep in [1.0, 2.0, 4.0] {
            let pair = orthogonal_pair(
                Mode::family(ModeFamily::GaussianBump {
                    center: sep,
                    width: 0.7,
                }),
                Mode::family(ModeFamily::GaussianBump {
                    center: -sep,
                    width: 0.7,
                }),
            )
            .unwrap();
            let k = continuum_mode_kernel(&pair, 1.0, &QuadratureConfig::default()).unwrap();
            let cross = k.matrix[(0, 1)].norm();
            assert!(cross < last, "no decay at separation {sep}");
            last = cross;
        }
    }

    #[test]
    fn quadrature_failure_reported() {
        let pairs = builtin_mode_pairs().unwrap();
        let (_, pair) = &pairs[1];
        let cfg = QuadratureConfig {
            initial_nodes: 8,
            max_nodes: 16,
            tol: 1e-14,
            p_max: None,
        };
        assert!(continuum_mode_kernel(pair, 1.0, &cfg).is_err());
    }
}
