//! Random-walk sampling of undirected networks with certified estimate
//! reliability.
//!
//! The toolkit runs two MCMC samplers over graph nodes -- a simple random
//! walk (degree-biased, corrected by an importance-sampling ratio
//! estimator) and a Metropolis-Hastings walk targeting the uniform law --
//! and certifies the resulting multivariate feature estimates with
//! batch-means long-run covariances, multivariate effective sample size,
//! and a relative fixed-volume sequential stopping rule.
//!
//! Replications, per-node statistics, and exact-mean enumeration run in
//! parallel through rayon by default; build with
//! `--no-default-features` for a fully sequential library.

pub mod attrs;
pub mod chain;
pub mod error;
pub mod estimators;
pub mod features;
pub mod graph;
pub mod mcse;
mod numeric;
pub mod oracle;
mod par;
pub mod replicate;
pub mod stopping;
pub mod walk;

pub use attrs::{AttrDecl, AttrKind, AttributeSchema, AttributeTable};
pub use chain::FeatureChain;
pub use error::{Error, Result};
pub use features::{FeatureComponent, FeatureEvaluator, FeatureSpec};
pub use graph::{
    generate_er, largest_connected_component, load_edge_list, Graph, NodeStats, NodeStatsTable,
};
pub use mcse::{min_ess, BatchRule, CovarianceEstimates, RegionSpec};
pub use replicate::{run_replications, summarize, SummaryStat, SummaryTable};
pub use stopping::{run_until_stop, StoppingConfig, TerminationReport};
pub use walk::{FeatureMap, WalkKind, WalkState, WalkTrace};
