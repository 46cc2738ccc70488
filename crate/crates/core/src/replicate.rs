//! Replicated experiment harness: run many independently seeded certified
//! walks over one shared immutable graph and summarize the reports.
//!
//! Replication `i` uses seed `base_seed + i`, so results are independent of
//! execution order and identical between the parallel and sequential paths.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::features::FeatureEvaluator;
use crate::stopping::{run_until_stop, StoppingConfig, TerminationReport};
use crate::walk::WalkKind;

/// Run `count` replications, in parallel when the `parallel` feature is
/// enabled. Each element is the report of replication `i` (seed
/// `base_seed + i`) or the error that stopped it.
pub fn run_replications(
    eval: &FeatureEvaluator<'_>,
    kind: WalkKind,
    cfg: &StoppingConfig,
    base_seed: u64,
    count: usize,
    truth: Option<&[f64]>,
) -> Vec<Result<TerminationReport>> {
    #[cfg(feature = "parallel")]
    {
        (0..count)
            .into_par_iter()
            .map(|i| run_until_stop(eval, kind, cfg, base_seed.wrapping_add(i as u64), truth))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_replications_sequential(eval, kind, cfg, base_seed, count, truth)
    }
}

/// Single-threaded replication loop; same results as [`run_replications`].
pub fn run_replications_sequential(
    eval: &FeatureEvaluator<'_>,
    kind: WalkKind,
    cfg: &StoppingConfig,
    base_seed: u64,
    count: usize,
    truth: Option<&[f64]>,
) -> Vec<Result<TerminationReport>> {
    (0..count)
        .map(|i| run_until_stop(eval, kind, cfg, base_seed.wrapping_add(i as u64), truth))
        .collect()
}

/// Mean and standard error of one summarized quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStat {
    pub mean: f64,
    /// Sample standard deviation across replications divided by sqrt(count).
    pub se: f64,
    /// Replications contributing (quantities like coverage can be missing
    /// on some rows).
    pub count: usize,
}

fn summarize_values(values: &[f64]) -> SummaryStat {
    let count = values.len();
    if count == 0 {
        return SummaryStat { mean: f64::NAN, se: f64::NAN, count: 0 };
    }
    let mean = values.iter().sum::<f64>() / count as f64;
    if count == 1 {
        return SummaryStat { mean, se: f64::NAN, count };
    }
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (count - 1) as f64;
    SummaryStat { mean, se: (var / count as f64).sqrt(), count }
}

/// Per-walk-kind summary across successful replications.
#[derive(Debug, Clone)]
pub struct SummaryTable {
    pub kind: WalkKind,
    /// Successful replications summarized.
    pub replications: usize,
    /// Replications that returned an error.
    pub failures: usize,
    /// Rows that hit the step budget instead of the rule.
    pub budget_terminated: usize,
    /// One stat per feature component.
    pub estimates: Vec<SummaryStat>,
    pub termination_step: SummaryStat,
    pub ess: SummaryStat,
    pub unique_nodes: SummaryStat,
    pub ratio_statistic: SummaryStat,
    /// Present when any row carried an acceptance rate (MH).
    pub acceptance_rate: Option<SummaryStat>,
    /// Present when any row carried a coverage flag.
    pub coverage: Option<SummaryStat>,
}

/// Summarize the successful rows of a replication batch.
pub fn summarize(
    kind: WalkKind,
    dim: usize,
    outcomes: &[Result<TerminationReport>],
) -> SummaryTable {
    let reports: Vec<&TerminationReport> = outcomes
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .filter(|r| r.kind == kind)
        .collect();
    let failures = outcomes.iter().filter(|r| r.is_err()).count();

    let collect = |f: &dyn Fn(&TerminationReport) -> Option<f64>| -> Vec<f64> {
        reports.iter().filter_map(|r| f(r)).collect()
    };

    let estimates = (0..dim)
        .map(|j| summarize_values(&collect(&|r| r.estimates.get(j).copied())))
        .collect();
    let acceptance = collect(&|r| r.acceptance_rate);
    let coverage = collect(&|r| r.covered.map(|c| c as u8 as f64));

    SummaryTable {
        kind,
        replications: reports.len(),
        failures,
        budget_terminated: reports.iter().filter(|r| r.budget_terminated).count(),
        estimates,
        termination_step: summarize_values(&collect(&|r| Some(r.termination_step as f64))),
        ess: summarize_values(&collect(&|r| r.ess)),
        unique_nodes: summarize_values(&collect(&|r| Some(r.unique_nodes as f64))),
        ratio_statistic: summarize_values(&collect(&|r| r.ratio_statistic)),
        acceptance_rate: (!acceptance.is_empty()).then(|| summarize_values(&acceptance)),
        coverage: (!coverage.is_empty()).then(|| summarize_values(&coverage)),
    }
}
