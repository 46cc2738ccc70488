//! Relative fixed-volume sequential stopping.
//!
//! A walk keeps sampling until the confidence-region edge scale
//! `Vol^{1/p}` drops below `eps` times the target scale
//! `|Lambda_m|^{1/2p}`, with an indicator term that forbids stopping before
//! the minimum effort `m_star` and a `1/m` term that forbids degenerate
//! early stops:
//!
//! ```text
//! Vol(C(m))^{1/p} + eps |Lambda_m|^{1/2p} I(m < m_star) + 1/m  <=  eps |Lambda_m|^{1/2p}
//! ```
//!
//! For SRW runs the rule is applied to the delta-method-transformed
//! covariances, so the certified precision refers to the reported
//! ratio-scale estimates; the effective sample size is invariant under that
//! transform either way.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::{ratio_map, ratio_map_jacobian, sample_mean, transform_covariance};
use crate::features::FeatureEvaluator;
use crate::mcse::{
    batch_means_covariance, confidence_volume_root, multivariate_ess, region_contains,
    BatchRule, CovarianceEstimates, RegionSpec,
};
use crate::walk::{random_start, FeatureMap, WalkKind, WalkState, WalkTrace};

/// Parameters of the sequential stopping rule.
#[derive(Debug, Clone)]
pub struct StoppingConfig {
    /// Relative precision eps > 0.
    pub eps: f64,
    /// One minus the confidence level.
    pub alpha: f64,
    /// Minimum simulation effort; the rule cannot fire before this.
    pub m_star: usize,
    /// Steps between stopping evaluations once `m_star` is reached.
    pub check_interval: usize,
    /// Hard step budget.
    pub max_steps: usize,
    pub batch_rule: BatchRule,
    /// Unrecorded transitions before sampling starts. Default 0; the rule
    /// itself absorbs initialization bias.
    pub burn_in: usize,
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            eps: 0.05,
            alpha: 0.05,
            m_star: 10_000,
            check_interval: 1_000,
            max_steps: 10_000_000,
            batch_rule: BatchRule::Sqrt,
            burn_in: 0,
        }
    }
}

impl StoppingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eps <= 0.0 {
            return Err(Error::InvalidParam(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParam(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if self.m_star < 1 || self.check_interval < 1 || self.max_steps < 1 {
            return Err(Error::InvalidParam(
                "m_star, check_interval, and max_steps must all be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one stopping evaluation.
#[derive(Debug, Clone, Copy)]
pub struct StopCheck {
    pub satisfied: bool,
    /// `Vol^{1/p} / |Lambda|^{1/2p}`; at a rule stop this is <= eps.
    pub ratio_statistic: Option<f64>,
    pub ess: Option<f64>,
    /// Why the rule could not be evaluated, when it could not.
    pub reason: Option<&'static str>,
}

impl StopCheck {
    fn indeterminate(reason: &'static str) -> Self {
        Self { satisfied: false, ratio_statistic: None, ess: None, reason: Some(reason) }
    }
}

/// Evaluate the stopping inequality on a pair of covariance estimates.
/// Indeterminate covariances (too few batches, nonpositive determinants)
/// yield `satisfied = false` with a reason, i.e. keep sampling.
pub fn check_stop(
    cov: &CovarianceEstimates,
    alpha: f64,
    eps: f64,
    m_star: usize,
) -> StopCheck {
    let m = cov.steps_total;
    let p = cov.dim();
    if cov.degenerate {
        return StopCheck::indeterminate("degenerate chain: no variation observed");
    }
    if cov.insufficient_batches {
        return StopCheck::indeterminate("insufficient batches");
    }
    let Some(ln_lambda) = crate::mcse::ln_det_spd(&cov.lambda) else {
        return StopCheck::indeterminate("sample covariance not positive definite");
    };
    let Ok(region) = RegionSpec::new(alpha, p, cov.batch_count) else {
        return StopCheck::indeterminate("insufficient batches");
    };
    let Ok(vol_root) = confidence_volume_root(m, &cov.sigma, &region) else {
        return StopCheck::indeterminate("long-run covariance not positive definite");
    };
    let lambda_scale = (ln_lambda / (2.0 * p as f64)).exp();
    let indicator = if m < m_star { 1.0 } else { 0.0 };
    let lhs = vol_root + eps * lambda_scale * indicator + 1.0 / m as f64;
    StopCheck {
        satisfied: lhs <= eps * lambda_scale,
        ratio_statistic: Some(vol_root / lambda_scale),
        ess: multivariate_ess(m, &cov.lambda, &cov.sigma),
        reason: None,
    }
}

/// Everything known about a terminated run.
#[derive(Debug, Clone)]
pub struct TerminationReport {
    pub kind: WalkKind,
    pub seed: u64,
    /// Node where recording started (after any burn-in).
    pub start: u32,
    /// Recorded samples at termination (the start node counts as sample 0).
    pub termination_step: usize,
    /// True when the step budget ran out before the rule fired.
    pub budget_terminated: bool,
    pub estimates: Vec<f64>,
    pub ess: Option<f64>,
    pub ratio_statistic: Option<f64>,
    pub unique_nodes: usize,
    /// Accepted proposals over attempted transitions; `None` for SRW.
    pub acceptance_rate: Option<f64>,
    /// Whether the confidence region contains the supplied truth, when a
    /// truth was supplied and the region was computable.
    pub covered: Option<bool>,
    pub batch_count: usize,
    pub batch_size: usize,
    pub wallclock_secs: f64,
}

/// Covariances entering the stopping rule: batch means on the recorded
/// chain, pushed through the ratio-map Jacobian for SRW.
fn checkpoint_covariances(
    trace: &WalkTrace,
    kind: WalkKind,
    rule: BatchRule,
) -> Result<CovarianceEstimates> {
    let raw = batch_means_covariance(trace.values(), rule)?;
    match kind {
        WalkKind::Mh => Ok(raw),
        WalkKind::Srw => {
            let mu_weighted = sample_mean(trace.values())?;
            let j = ratio_map_jacobian(&mu_weighted)?;
            Ok(CovarianceEstimates {
                lambda: transform_covariance(&j, &raw.lambda)?,
                sigma: transform_covariance(&j, &raw.sigma)?,
                ..raw
            })
        }
    }
}

/// Run one walk from a seeded random start until the stopping rule fires or
/// the budget runs out, and assemble the termination report.
///
/// The graph must be connected (extract the largest connected component
/// first); SRW runs additionally need `degree` as the leading feature
/// component. When `truth` is supplied the report carries a coverage flag
/// for the `1 - alpha` confidence region around the estimates.
pub fn run_until_stop(
    eval: &FeatureEvaluator<'_>,
    kind: WalkKind,
    cfg: &StoppingConfig,
    seed: u64,
    truth: Option<&[f64]>,
) -> Result<TerminationReport> {
    run_until_stop_traced(eval, kind, cfg, seed, truth).map(|(report, _)| report)
}

/// As [`run_until_stop`], additionally returning the recorded trace (for
/// debugging dumps; the trace holds `p + 2` values per step).
pub fn run_until_stop_traced(
    eval: &FeatureEvaluator<'_>,
    kind: WalkKind,
    cfg: &StoppingConfig,
    seed: u64,
    truth: Option<&[f64]>,
) -> Result<(TerminationReport, WalkTrace)> {
    cfg.validate()?;
    let g = eval.graph();
    let map = match kind {
        WalkKind::Srw => {
            if !eval.degree_first() {
                return Err(Error::InvalidSpec(
                    "SRW runs need `degree` as the first feature component".into(),
                ));
            }
            FeatureMap::Reweighted
        }
        WalkKind::Mh => FeatureMap::Plain,
    };
    if let Some(t) = truth {
        if t.len() != eval.dim() {
            return Err(Error::DimensionMismatch(format!(
                "truth has {} entries for {} features",
                t.len(),
                eval.dim()
            )));
        }
    }

    let clock = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entry = random_start(g, &mut rng);
    let mut state = WalkState::new(g, kind, entry, rng)?;
    for _ in 0..cfg.burn_in {
        state.advance(g)?;
    }
    state.reset_counters();

    let start = state.current();
    let mut trace = WalkTrace::with_capacity(kind, map, start, eval.dim(), cfg.m_star);
    trace.set_seed(seed);
    let mut buf = vec![0.0; eval.dim()];
    let record = |trace: &mut WalkTrace, node: u32, accepted: bool, buf: &mut [f64]| {
        match map {
            FeatureMap::Plain => eval.eval(node, buf),
            FeatureMap::Reweighted => eval.eval_weighted(node, buf),
        }
        trace.record(node, g.degree(node), buf, accepted);
    };
    record(&mut trace, start, true, &mut buf);

    let mut m = 1usize;
    let mut last_cov: Option<CovarianceEstimates> = None;
    let mut last_check: Option<StopCheck> = None;
    let mut rule_stop = false;
    loop {
        let at_budget = m >= cfg.max_steps;
        let at_checkpoint =
            m >= cfg.m_star && (m - cfg.m_star) % cfg.check_interval == 0;
        if (at_checkpoint || at_budget) && m >= 2 {
            let cov = checkpoint_covariances(&trace, kind, cfg.batch_rule)?;
            let check = check_stop(&cov, cfg.alpha, cfg.eps, cfg.m_star);
            let satisfied = check.satisfied;
            last_cov = Some(cov);
            last_check = Some(check);
            if satisfied {
                rule_stop = true;
                break;
            }
        }
        if at_budget {
            break;
        }
        let (node, accepted) = state.advance(g)?;
        record(&mut trace, node, accepted, &mut buf);
        m += 1;
    }

    let estimates = match kind {
        WalkKind::Mh => sample_mean(trace.values())?,
        WalkKind::Srw => ratio_map(&sample_mean(trace.values())?)?,
    };
    let covered = match (truth, &last_cov) {
        (Some(mu_0), Some(cov)) => RegionSpec::new(cfg.alpha, eval.dim(), cov.batch_count)
            .and_then(|region| region_contains(&estimates, &cov.sigma, m, &region, mu_0))
            .ok(),
        _ => None,
    };

    let report = TerminationReport {
        kind,
        seed,
        start,
        termination_step: m,
        budget_terminated: !rule_stop,
        estimates,
        ess: last_check.and_then(|c| c.ess),
        ratio_statistic: last_check.and_then(|c| c.ratio_statistic),
        unique_nodes: state.unique_nodes(),
        acceptance_rate: state.acceptance_rate(),
        covered,
        batch_count: last_cov.as_ref().map_or(0, |c| c.batch_count),
        batch_size: last_cov.as_ref().map_or(0, |c| c.batch_size),
        wallclock_secs: clock.elapsed().as_secs_f64(),
    };
    Ok((report, trace))
}
