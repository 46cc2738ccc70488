//! Multivariate Monte Carlo standard-error machinery.
//!
//! Two covariance matrices drive everything: the sample covariance of the
//! chain (the scale of the target law) and the batch-means estimate of the
//! long-run covariance (the scale of the Monte Carlo error). From them come
//! the multivariate effective sample size
//! `ESS = m (|Lambda| / |Sigma|)^{1/p}`, the volume of the Hotelling
//! confidence ellipsoid, and the pre-computable minimum ESS for a requested
//! confidence level and relative precision.

mod special;

pub use special::{
    chi2_cdf, chi2_quantile, f_cdf, f_quantile, hotelling_t2_quantile, ln_gamma,
    reg_inc_beta, reg_lower_gamma,
};

use std::str::FromStr;

use nalgebra::DMatrix;

use crate::chain::FeatureChain;
use crate::error::{Error, Result};
use crate::numeric::{icbrt, isqrt, Kbn};

/// Batch-size rule for batch means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchRule {
    /// Batch size `floor(sqrt(m))`.
    #[default]
    Sqrt,
    /// Batch size `floor(m^(1/3))`.
    CubeRoot,
}

impl BatchRule {
    pub fn batch_size(self, m: usize) -> usize {
        match self {
            Self::Sqrt => isqrt(m),
            Self::CubeRoot => icbrt(m),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sqrt => "sqrt",
            Self::CubeRoot => "cuberoot",
        }
    }
}

impl FromStr for BatchRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sqrt" => Ok(Self::Sqrt),
            "cuberoot" | "cbrt" => Ok(Self::CubeRoot),
            other => Err(Error::InvalidParam(format!("unknown batch rule {other:?}"))),
        }
    }
}

impl std::fmt::Display for BatchRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Paired covariance estimates with their batching metadata.
#[derive(Debug, Clone)]
pub struct CovarianceEstimates {
    /// Sample covariance of the chain (divisor m - 1).
    pub lambda: DMatrix<f64>,
    /// Batch-means estimate of the long-run covariance.
    pub sigma: DMatrix<f64>,
    /// Number of batches used.
    pub batch_count: usize,
    /// Batch size.
    pub batch_size: usize,
    /// `batch_count * batch_size`; trailing observations beyond this were
    /// not used for `sigma`.
    pub steps_used: usize,
    /// Chain length `m`.
    pub steps_total: usize,
    /// Set when `batch_count <= p`, where `sigma` cannot be positive
    /// definite. Non-fatal: the caller should keep sampling.
    pub insufficient_batches: bool,
    /// Set when the chain had no variation at all (both matrices zero).
    pub degenerate: bool,
}

impl CovarianceEstimates {
    pub fn dim(&self) -> usize {
        self.lambda.nrows()
    }
}

fn compensated_mean(chain: &FeatureChain, steps: usize) -> Vec<f64> {
    let p = chain.dim();
    let mut acc = vec![Kbn::new(); p];
    for t in 0..steps {
        for (a, &x) in acc.iter_mut().zip(chain.step(t)) {
            a.add(x);
        }
    }
    acc.iter().map(|a| a.value() / steps as f64).collect()
}

/// Accumulate `weight * (x - mu)(x - mu)^T` over rows into a symmetric
/// matrix, filling the upper triangle once and mirroring.
fn accumulate_outer<I>(p: usize, mu: &[f64], rows: I, weight: f64) -> DMatrix<f64>
where
    I: Iterator,
    I::Item: AsRef<[f64]>,
{
    let mut acc = vec![Kbn::new(); p * (p + 1) / 2];
    let mut centered = vec![0.0; p];
    for row in rows {
        let row = row.as_ref();
        for (c, (&x, &m)) in centered.iter_mut().zip(row.iter().zip(mu)) {
            *c = x - m;
        }
        let mut k = 0;
        for i in 0..p {
            for j in i..p {
                acc[k].add(centered[i] * centered[j]);
                k += 1;
            }
        }
    }
    let mut out = DMatrix::zeros(p, p);
    let mut k = 0;
    for i in 0..p {
        for j in i..p {
            let v = acc[k].value() * weight;
            out[(i, j)] = v;
            out[(j, i)] = v;
            k += 1;
        }
    }
    out
}

/// Unbiased sample covariance (divisor m - 1) of the chain's vectors.
pub fn sample_covariance(chain: &FeatureChain) -> Result<DMatrix<f64>> {
    let m = chain.len();
    if m < 2 {
        return Err(Error::ChainTooShort(format!(
            "sample covariance needs m >= 2, got {m}"
        )));
    }
    let mu = compensated_mean(chain, m);
    Ok(accumulate_outer(chain.dim(), &mu, chain.iter_steps(), 1.0 / (m - 1) as f64))
}

/// Batch-means long-run covariance plus the sample covariance.
///
/// The batch size is `floor(sqrt(m))` (or the cube root), the batch count is
/// `floor(m / b)`, and only the first `batch_count * batch_size`
/// observations enter the batch means; the mean they are centered on is
/// recomputed over that prefix. The sample covariance uses the full chain.
pub fn batch_means_covariance(
    chain: &FeatureChain,
    rule: BatchRule,
) -> Result<CovarianceEstimates> {
    let m = chain.len();
    let p = chain.dim();
    if m < 2 {
        return Err(Error::ChainTooShort(format!("batch means need m >= 2, got {m}")));
    }
    let batch_size = rule.batch_size(m).max(1);
    let batch_count = m / batch_size;
    let steps_used = batch_count * batch_size;
    let insufficient_batches = batch_count <= p;

    let lambda = sample_covariance(chain)?;

    let sigma = if batch_count >= 2 {
        let mu = compensated_mean(chain, steps_used);
        let inv_b = 1.0 / batch_size as f64;
        let batch_means = (0..batch_count).map(|k| {
            let mut acc = vec![Kbn::new(); p];
            for t in k * batch_size..(k + 1) * batch_size {
                for (a, &x) in acc.iter_mut().zip(chain.step(t)) {
                    a.add(x);
                }
            }
            acc.iter().map(|a| a.value() * inv_b).collect::<Vec<f64>>()
        });
        let weight = batch_size as f64 / (batch_count - 1) as f64;
        accumulate_outer(p, &mu, batch_means, weight)
    } else {
        DMatrix::zeros(p, p)
    };

    let degenerate = sigma.iter().all(|&x| x == 0.0) && lambda.iter().all(|&x| x == 0.0);
    Ok(CovarianceEstimates {
        lambda,
        sigma,
        batch_count,
        batch_size,
        steps_used,
        steps_total: m,
        insufficient_batches,
        degenerate,
    })
}

/// Log-determinant of a symmetric positive-definite matrix via Cholesky;
/// `None` when the factorization fails (numerically nonpositive
/// determinant).
pub(crate) fn ln_det_spd(m: &DMatrix<f64>) -> Option<f64> {
    let chol = nalgebra::Cholesky::new(m.clone())?;
    let mut acc = 0.0;
    for i in 0..m.nrows() {
        let d = chol.l_dirty()[(i, i)];
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        acc += d.ln();
    }
    Some(2.0 * acc)
}

/// Multivariate effective sample size `m (|Lambda| / |Sigma|)^{1/p}`.
/// Returns `None` when either determinant is numerically nonpositive, which
/// callers treat as "keep sampling".
pub fn multivariate_ess(m: usize, lambda: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Option<f64> {
    let p = lambda.nrows();
    debug_assert_eq!(sigma.nrows(), p);
    let ln_lambda = ln_det_spd(lambda)?;
    let ln_sigma = ln_det_spd(sigma)?;
    Some(m as f64 * ((ln_lambda - ln_sigma) / p as f64).exp())
}

/// Raw (un-ceiled) minimum effective sample size for `p` features at
/// confidence `1 - alpha` and relative precision `eps`:
/// `2^{2/p} pi / (p Gamma(p/2))^{2/p} * chi2_{1-alpha,p} / eps^2`.
pub fn min_ess_raw(p: usize, alpha: f64, eps: f64) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidParam("dimension must be >= 1".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParam(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if eps <= 0.0 {
        return Err(Error::InvalidParam(format!("eps must be positive, got {eps}")));
    }
    let pf = p as f64;
    let ln_prefactor = (2.0 / pf) * std::f64::consts::LN_2 + std::f64::consts::PI.ln()
        - (2.0 / pf) * (pf.ln() + ln_gamma(pf / 2.0));
    let chi2 = chi2_quantile(1.0 - alpha, p)?;
    Ok(ln_prefactor.exp() * chi2 / (eps * eps))
}

/// Minimum effective sample size, rounded up to an integer. Computable
/// before any sampling.
pub fn min_ess(p: usize, alpha: f64, eps: f64) -> Result<u64> {
    Ok(min_ess_raw(p, alpha, eps)?.ceil() as u64)
}

/// Confidence-region geometry: level, dimension, and the batch-derived
/// degrees of freedom `q = batch_count - p`.
#[derive(Debug, Clone, Copy)]
pub struct RegionSpec {
    /// Confidence level `1 - alpha`.
    pub confidence: f64,
    pub dim: usize,
    /// Degrees of freedom of the T-squared quantile.
    pub dof: usize,
}

impl RegionSpec {
    pub fn new(alpha: f64, dim: usize, batch_count: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParam(format!("alpha must lie in (0,1), got {alpha}")));
        }
        if batch_count <= dim {
            return Err(Error::InvalidParam(format!(
                "region needs batch_count > p, got {batch_count} batches for p = {dim}"
            )));
        }
        Ok(Self { confidence: 1.0 - alpha, dim, dof: batch_count - dim })
    }

    /// The Hotelling T-squared quantile defining the region.
    pub fn t2_quantile(&self) -> Result<f64> {
        hotelling_t2_quantile(self.confidence, self.dim, self.dof)
    }
}

/// Natural log of the ellipsoid volume
/// `2 pi^{p/2} / (p Gamma(p/2)) * (T2 / m)^{p/2} * |Sigma|^{1/2}`.
fn ln_confidence_volume(m: usize, sigma: &DMatrix<f64>, region: &RegionSpec) -> Result<f64> {
    let p = region.dim;
    if sigma.nrows() != p {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, region dimension is {p}",
            sigma.nrows(),
            sigma.ncols()
        )));
    }
    let ln_det = ln_det_spd(sigma).ok_or_else(|| {
        Error::Singular("long-run covariance is not positive definite".into())
    })?;
    let pf = p as f64;
    let t2 = region.t2_quantile()?;
    Ok(std::f64::consts::LN_2 + (pf / 2.0) * std::f64::consts::PI.ln()
        - pf.ln()
        - ln_gamma(pf / 2.0)
        + (pf / 2.0) * (t2.ln() - (m as f64).ln())
        + 0.5 * ln_det)
}

/// Volume of the `100 confidence%` Hotelling ellipsoid around the mean
/// estimate after `m` steps.
pub fn confidence_volume(m: usize, sigma: &DMatrix<f64>, region: &RegionSpec) -> Result<f64> {
    Ok(ln_confidence_volume(m, sigma, region)?.exp())
}

/// `Vol^{1/p}`, the edge scale of the confidence region.
pub fn confidence_volume_root(m: usize, sigma: &DMatrix<f64>, region: &RegionSpec) -> Result<f64> {
    Ok((ln_confidence_volume(m, sigma, region)? / region.dim as f64).exp())
}

/// Whether `mu_0` lies strictly inside the confidence region:
/// `m (mu_hat - mu_0)^T Sigma^{-1} (mu_hat - mu_0) < T2`. Solved through the
/// Cholesky factor, never by explicit inversion.
pub fn region_contains(
    mu_hat: &[f64],
    sigma: &DMatrix<f64>,
    m: usize,
    region: &RegionSpec,
    mu_0: &[f64],
) -> Result<bool> {
    let p = region.dim;
    if mu_hat.len() != p || mu_0.len() != p || sigma.nrows() != p {
        return Err(Error::DimensionMismatch(format!(
            "estimates ({}), truth ({}), covariance ({}) must all have dimension {p}",
            mu_hat.len(),
            mu_0.len(),
            sigma.nrows()
        )));
    }
    let chol = nalgebra::Cholesky::new(sigma.clone())
        .ok_or_else(|| Error::Singular("long-run covariance is not positive definite".into()))?;
    let diff = nalgebra::DVector::from_iterator(p, mu_hat.iter().zip(mu_0).map(|(a, b)| a - b));
    let solved = chol.solve(&diff);
    let statistic = m as f64 * diff.dot(&solved);
    Ok(statistic < region.t2_quantile()?)
}
