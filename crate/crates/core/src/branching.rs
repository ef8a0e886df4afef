//! Branching-process view of the population: mean offspring matrix, its
//! Perron-Frobenius eigenvalue (the per-generation growth rate), the stable
//! age distribution and criticality classification.
//!
//! One reporting note: informal arguments support either direction for how
//! the stable mean age responds to the division-sharpness exponent, so
//! nothing here asserts a direction. Sweeps and the acceptance log record
//! what the computation yields; on every grid tried so far the mean age
//! strictly decreases as the exponent grows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::Error;
use crate::model::{binomial_weight, transition_kernel, MAlphaParams, ModelParams};
use crate::numerics::{power_iteration, DenseMatrix, EIG_MAX_ITER, EIG_TOL};
use crate::Result;

/// Half-width of the band around 1 treated as critical.
pub const CRITICALITY_BAND: f64 = 1e-9;

/// Mean number of age-j offspring (surviving mother plus daughter) produced
/// in one generation by a cell of age i, for i, j in 0..n.
#[derive(Debug, Clone)]
pub struct MeanMatrix {
    matrix: DenseMatrix,
    blocks: Option<(DenseMatrix, DenseMatrix)>,
}

impl MeanMatrix {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// For (m, alpha) parameters: the positive top-left block of size n - m
    /// and the top-right block feeding the last m ages, which themselves
    /// produce no offspring.
    pub fn blocks(&self) -> Option<(&DenseMatrix, &DenseMatrix)> {
        self.blocks.as_ref().map(|(a, b)| (a, b))
    }
}

/// M = Q + R(p) + R(1-p) restricted to the non-senescent ages: the mother
/// contributes her division and no-division moves, the daughter the
/// complement-retention division moves. Symmetric in p <-> 1-p.
pub fn mean_matrix(params: &ModelParams) -> MeanMatrix {
    let n = params.n();
    let kern = transition_kernel(params);
    let flipped = transition_kernel(&params.flip_retention());
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m.set(
                i,
                j,
                kern.q().get(i, j) + kern.r().get(i, j) + flipped.r().get(i, j),
            );
        }
    }
    let blocks = params.malpha().map(|ma| {
        let dim = n - ma.m();
        (m.block(0, dim, 0, dim), m.block(0, dim, dim, n))
    });
    MeanMatrix { matrix: m, blocks }
}

/// Direct evaluation of the (m, alpha) mean matrix without going through the
/// kernel: rows below n - m keep mass at i + m (no division) and spread
/// binomially on division; the remaining rows are zero.
pub fn mean_matrix_closed_form(ma: &MAlphaParams) -> DenseMatrix {
    let n = ma.n();
    let m = ma.m();
    let p = ma.p();
    let nf = n as f64;
    let mut out = DenseMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(m) {
        let reach = i + m;
        let stay = (reach as f64 / nf).powf(ma.alpha());
        for j in 0..=reach.min(n - 1) {
            let mut v = (1.0 - stay) * (binomial_weight(reach, j, p) + binomial_weight(reach, j, 1.0 - p));
            if j == reach {
                v += stay;
            }
            out.set(i, j, v);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Criticality::Subcritical => "subcritical",
            Criticality::Critical => "critical",
            Criticality::Supercritical => "supercritical",
        };
        f.write_str(s)
    }
}

/// Growth rate r, stable age distribution v (left eigenvector, sums to 1),
/// reproductive values u (right eigenvector, scaled so v . u = 1), mean
/// stable age a, and the criticality class of r against 1.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub r: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub a: f64,
    pub criticality: Criticality,
    /// True when the reduced (m, alpha) block was iterated instead of the
    /// full matrix.
    pub decomposed: bool,
    pub iterations: u64,
    pub residual: f64,
}

/// Spectral analysis of the mean matrix. (m, alpha) parameters with
/// 0 < p < 1 go through the reduced block (whose restriction is primitive)
/// and extend the eigenvectors to the full age range; p = 0 or 1 and general
/// parameters fall back to power iteration on the full matrix.
pub fn spectral(params: &ModelParams) -> Result<SpectralResult> {
    let mm = mean_matrix(params);
    if let (Some(_), Some((mhat, mstar))) = (params.malpha(), mm.blocks()) {
        let p = params.retention();
        if p > 0.0 && p < 1.0 {
            return spectral_decomposed(params.n(), mhat, mstar);
        }
    }
    spectral_from_matrix(mm.matrix())
}

/// Spectral analysis forced through the full matrix, bypassing the reduced
/// (m, alpha) block. Companion route for consistency checks.
pub fn spectral_general(params: &ModelParams) -> Result<SpectralResult> {
    spectral_from_matrix(mean_matrix(params).matrix())
}

fn spectral_decomposed(
    n: usize,
    mhat: &DenseMatrix,
    mstar: &DenseMatrix,
) -> Result<SpectralResult> {
    let eig = power_iteration(mhat, EIG_TOL, EIG_MAX_ITER)?;
    let r = eig.value;
    if r <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "reduced mean matrix has zero dominant eigenvalue".into(),
        ));
    }
    let mut v = eig.left.clone();
    let tail = mstar.tr_mul_vec(&eig.left);
    v.extend(tail.iter().map(|t| t / r));
    let mut u = eig.right.clone();
    u.resize(n, 0.0);
    finish(n, r, v, u, true, eig.iterations, eig.residual)
}

fn spectral_from_matrix(matrix: &DenseMatrix) -> Result<SpectralResult> {
    let n = matrix.rows();
    let eig = power_iteration(matrix, EIG_TOL, EIG_MAX_ITER)?;
    if eig.value <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "mean matrix has zero dominant eigenvalue".into(),
        ));
    }
    finish(n, eig.value, eig.left.clone(), eig.right.clone(), false, eig.iterations, eig.residual)
}

fn finish(
    n: usize,
    r: f64,
    mut v: Vec<f64>,
    mut u: Vec<f64>,
    decomposed: bool,
    iterations: u64,
    residual: f64,
) -> Result<SpectralResult> {
    debug_assert_eq!(v.len(), n);
    debug_assert_eq!(u.len(), n);
    let total: f64 = v.iter().sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "stable age distribution has zero mass".into(),
        ));
    }
    for x in v.iter_mut() {
        *x /= total;
    }
    let dot: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
    if !dot.is_finite() || dot <= 0.0 {
        return Err(Error::DegenerateSpectrum(
            "left and right eigenvectors do not overlap".into(),
        ));
    }
    for x in u.iter_mut() {
        *x /= dot;
    }
    let a = v.iter().enumerate().map(|(i, x)| i as f64 * x).sum();
    let criticality = if (r - 1.0).abs() <= CRITICALITY_BAND {
        Criticality::Critical
    } else if r > 1.0 {
        Criticality::Supercritical
    } else {
        Criticality::Subcritical
    };
    Ok(SpectralResult {
        r,
        v,
        u,
        a,
        criticality,
        decomposed,
        iterations,
        residual,
    })
}

/// Which (m, alpha) parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Retention,
    Inflow,
    Alpha,
}

impl SweepVar {
    /// Base parameters with this variable replaced by `value`. Inflow values
    /// must be integral.
    pub fn apply(&self, base: &MAlphaParams, value: f64) -> Result<MAlphaParams> {
        match self {
            SweepVar::Retention => MAlphaParams::new(base.n(), base.m(), value, base.alpha()),
            SweepVar::Inflow => {
                if !value.is_finite() || value < 0.0 || (value - value.round()).abs() > 1e-9 {
                    return Err(Error::InvalidParams(format!(
                        "inflow sweep values must be non-negative integers, got {value}"
                    )));
                }
                MAlphaParams::new(base.n(), value.round() as usize, base.p(), base.alpha())
            }
            SweepVar::Alpha => MAlphaParams::new(base.n(), base.m(), base.p(), value),
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SweepVar::Retention => "p",
            SweepVar::Inflow => "m",
            SweepVar::Alpha => "alpha",
        };
        f.write_str(s)
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(SweepVar::Retention),
            "m" => Ok(SweepVar::Inflow),
            "alpha" => Ok(SweepVar::Alpha),
            other => Err(Error::InvalidParams(format!(
                "unknown sweep variable {other:?} (expected p, m or alpha)"
            ))),
        }
    }
}

/// One sweep entry: the varied value and the spectral outcome (errors are
/// kept per point rather than aborting the sweep).
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: Result<SpectralResult>,
}

/// Spectral results across a list of values for one varied parameter.
/// Points are independent and evaluated in parallel; output order follows
/// the input order.
pub fn growth_rate_sweep(base: &MAlphaParams, vary: SweepVar, values: &[f64]) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| SweepPoint {
            value,
            outcome: vary.apply(base, value).and_then(|ma| spectral(&ma.params())),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_mean_matrix_and_spectrum() {
        // n=2, m=1, alpha=1, p=0.5: reduced block (0.5), feeder block (1.0).
        let ma = MAlphaParams::new(2, 1, 0.5, 1.0).unwrap();
        let params = ma.params();
        let mm = mean_matrix(&params);
        let (mhat, mstar) = mm.blocks().unwrap();
        assert!((mhat.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((mstar.get(0, 0) - 1.0).abs() < 1e-15);

        let spec = spectral(&params).unwrap();
        assert!((spec.r - 0.5).abs() < 1e-10);
        assert!((spec.v[0] - 1.0 / 3.0).abs() < 1e-10);
        assert!((spec.v[1] - 2.0 / 3.0).abs() < 1e-10);
        assert!((spec.u[0] - 3.0).abs() < 1e-9);
        assert_eq!(spec.u[1], 0.0);
        assert!((spec.a - 2.0 / 3.0).abs() < 1e-10);
        assert_eq!(spec.criticality, Criticality::Subcritical);
        assert!(spec.decomposed);
    }

    #[test]
    fn closed_form_matches_kernel_route() {
        for (n, m, p, alpha) in [(12, 3, 0.4, 1.0), (25, 10, 0.7, 3.0), (8, 7, 0.5, 2.0)] {
            let ma = MAlphaParams::new(n, m, p, alpha).unwrap();
            let via_kernel = mean_matrix(&ma.params());
            let direct = mean_matrix_closed_form(&ma);
            for i in 0..n {
                for j in 0..n {
                    assert!(
                        (via_kernel.matrix().get(i, j) - direct.get(i, j)).abs() < 1e-12,
                        "({n},{m},{p},{alpha}) entry [{i}][{j}]"
                    );
                }
            }
        }
    }

    #[test]
    fn mean_matrix_symmetric_in_retention() {
        let a = mean_matrix(&MAlphaParams::new(15, 4, 0.3, 2.0).unwrap().params());
        let b = mean_matrix(&MAlphaParams::new(15, 4, 0.7, 2.0).unwrap().params());
        for i in 0..15 {
            for j in 0..15 {
                assert!((a.matrix().get(i, j) - b.matrix().get(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_matrix_row_sums_at_most_two() {
        let mm = mean_matrix(&MAlphaParams::new(30, 6, 0.25, 2.0).unwrap().params());
        for i in 0..30 {
            let s: f64 = mm.matrix().row(i).iter().sum();
            assert!(s <= 2.0 + 1e-12, "row {i} sums to {s}");
        }
    }

    #[test]
    fn extreme_retention_uses_general_path() {
        let params = MAlphaParams::new(10, 2, 1.0, 2.0).unwrap().params();
        let spec = spectral(&params).unwrap();
        assert!(!spec.decomposed);
        assert!(spec.r > 0.0 && spec.r < 2.0);
    }

    #[test]
    fn sweep_records_per_point_errors() {
        let base = MAlphaParams::new(10, 2, 0.5, 2.0).unwrap();
        let points = growth_rate_sweep(&base, SweepVar::Retention, &[0.3, 1.5]);
        assert!(points[0].outcome.is_ok());
        assert!(points[1].outcome.is_err());
        let points = growth_rate_sweep(&base, SweepVar::Inflow, &[2.5]);
        assert!(points[0].outcome.is_err());
    }

    #[test]
    fn sweep_var_strings() {
        assert_eq!("p".parse::<SweepVar>().unwrap(), SweepVar::Retention);
        assert_eq!("m".parse::<SweepVar>().unwrap(), SweepVar::Inflow);
        assert_eq!("alpha".parse::<SweepVar>().unwrap(), SweepVar::Alpha);
        assert!("q".parse::<SweepVar>().is_err());
        assert_eq!(SweepVar::Inflow.to_string(), "m");
    }
}
