//! Independent analytic references: exact population means by full
//! enumeration, exact stationary laws, and synthetic chains with known
//! long-run variance. The exact means also back the `stats` CLI command.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::attrs::AttributeTable;
use crate::chain::FeatureChain;
use crate::error::{Error, Result};
use crate::features::{FeatureEvaluator, FeatureSpec};
use crate::graph::{Graph, NodeStatsTable};
use crate::numeric::Kbn;
use crate::par;

/// Exact population summary of a graph under a feature spec.
#[derive(Debug, Clone)]
pub struct ExactSummary {
    pub means: Vec<f64>,
    /// SRW stationary vector `d_i / 2 n_e`.
    pub srw_stationary: Vec<f64>,
    pub nodes: usize,
    pub edges: usize,
}

/// Population mean of the feature vector: `(1/n) sum_v h(v)`, by literal
/// enumeration over all nodes. Parallelized over node ranges with a
/// deterministic chunk-ordered reduction.
pub fn exact_means(
    graph: &Graph,
    spec: &FeatureSpec,
    attrs: Option<&AttributeTable>,
) -> Result<Vec<f64>> {
    let stats = NodeStatsTable::compute(graph);
    exact_means_with(graph, &stats, spec, attrs)
}

/// As [`exact_means`] but reusing a precomputed statistics table.
pub fn exact_means_with(
    graph: &Graph,
    stats: &NodeStatsTable,
    spec: &FeatureSpec,
    attrs: Option<&AttributeTable>,
) -> Result<Vec<f64>> {
    let eval = FeatureEvaluator::new(graph, stats, attrs, spec)?;
    let n = graph.node_count();
    let p = spec.dim();
    let sums = par::chunked_reduce(
        n,
        |range| {
            let mut acc = vec![Kbn::new(); p];
            let mut buf = vec![0.0; p];
            for v in range {
                eval.eval(v as u32, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.add(x);
                }
            }
            acc.iter().map(Kbn::value).collect::<Vec<f64>>()
        },
        |parts| {
            let mut total = vec![Kbn::new(); p];
            for part in parts {
                for (t, x) in total.iter_mut().zip(part) {
                    t.add(x);
                }
            }
            total
        },
    );
    Ok(sums.iter().map(|s| s.value() / n as f64).collect())
}

/// Sequential enumeration, kept callable for benchmarking against the
/// parallel path.
pub fn exact_means_sequential(
    graph: &Graph,
    stats: &NodeStatsTable,
    spec: &FeatureSpec,
    attrs: Option<&AttributeTable>,
) -> Result<Vec<f64>> {
    let eval = FeatureEvaluator::new(graph, stats, attrs, spec)?;
    let p = spec.dim();
    let mut acc = vec![Kbn::new(); p];
    let mut buf = vec![0.0; p];
    for v in 0..graph.node_count() as u32 {
        eval.eval(v, &mut buf);
        for (a, &x) in acc.iter_mut().zip(&buf) {
            a.add(x);
        }
    }
    Ok(acc.iter().map(|a| a.value() / graph.node_count() as f64).collect())
}

/// SRW stationary vector `d_i / 2 n_e`. Requires at least one edge.
pub fn srw_stationary(graph: &Graph) -> Result<Vec<f64>> {
    let two_ne = 2.0 * graph.edge_count() as f64;
    if two_ne == 0.0 {
        return Err(Error::InvalidParam("stationary law needs at least one edge".into()));
    }
    Ok((0..graph.node_count() as u32)
        .map(|v| graph.degree(v) as f64 / two_ne)
        .collect())
}

/// Full population summary backing the `stats` command.
pub fn exact_summary(
    graph: &Graph,
    spec: &FeatureSpec,
    attrs: Option<&AttributeTable>,
) -> Result<ExactSummary> {
    Ok(ExactSummary {
        means: exact_means(graph, spec, attrs)?,
        srw_stationary: srw_stationary(graph)?,
        nodes: graph.node_count(),
        edges: graph.edge_count(),
    })
}

/// Scalar AR(1) chain `x_t = rho x_{t-1} + e_t` with unit-variance normal
/// innovations, started from the stationary law. Returns the chain and its
/// analytic long-run variance `1 / (1 - rho)^2`, which makes it an
/// independent check on batch-means estimates.
pub fn ar1_chain(rho: f64, m: usize, seed: u64) -> (FeatureChain, f64) {
    assert!(rho.abs() < 1.0, "AR(1) needs |rho| < 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(m);
    // Stationary marginal variance is 1 / (1 - rho^2).
    let mut x = rng.sample::<f64, _>(StandardNormal) / (1.0 - rho * rho).sqrt();
    for _ in 0..m {
        values.push(x);
        x = rho * x + rng.sample::<f64, _>(StandardNormal);
    }
    let long_run = 1.0 / ((1.0 - rho) * (1.0 - rho));
    (FeatureChain::from_scalar(values), long_run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;
    use approx::assert_relative_eq;

    fn graph(edges: &str) -> Graph {
        load_edge_list(edges.as_bytes()).unwrap().0
    }

    #[test]
    fn exact_means_on_tiny_graphs() {
        let spec = FeatureSpec::parse_list("degree,cc").unwrap();
        let k3 = graph("0 1\n0 2\n1 2");
        assert_eq!(exact_means(&k3, &spec, None).unwrap(), vec![2.0, 1.0]);

        let p3 = graph("0 1\n1 2");
        let spec_d = FeatureSpec::parse_list("degree").unwrap();
        assert_relative_eq!(exact_means(&p3, &spec_d, None).unwrap()[0], 4.0 / 3.0);

        let star = graph("0 1\n0 2\n0 3");
        assert_eq!(exact_means(&star, &spec, None).unwrap(), vec![1.5, 0.0]);
    }

    #[test]
    fn exact_means_agree_with_direct_node_average() {
        let g = crate::graph::generate_er(300, 0.03, 9).unwrap();
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree,degind:8,cc").unwrap();
        let eval = FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let mut sums = vec![0.0; spec.dim()];
        for v in 0..g.node_count() as u32 {
            for (s, x) in sums.iter_mut().zip(eval.eval_vec(v)) {
                *s += x;
            }
        }
        let direct: Vec<f64> = sums.iter().map(|s| s / g.node_count() as f64).collect();
        let parallel = exact_means_with(&g, &stats, &spec, None).unwrap();
        let sequential = exact_means_sequential(&g, &stats, &spec, None).unwrap();
        for j in 0..spec.dim() {
            assert_relative_eq!(parallel[j], direct[j], max_relative = 1e-12);
            assert_relative_eq!(sequential[j], parallel[j], max_relative = 1e-14);
        }
    }

    #[test]
    fn stationary_vector_examples() {
        let p3 = graph("0 1\n1 2");
        assert_eq!(srw_stationary(&p3).unwrap(), vec![0.25, 0.5, 0.25]);

        let k3 = graph("0 1\n0 2\n1 2");
        let pi = srw_stationary(&k3).unwrap();
        assert!(pi.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));

        let g = crate::graph::generate_er(100, 0.05, 2).unwrap();
        let total: f64 = srw_stationary(&g).unwrap().iter().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    /// The stationary vector is a left eigenvector of the analytic SRW
    /// kernel; uniform is one for the MH kernel.
    #[test]
    fn stationary_vectors_are_left_eigenvectors() {
        for edges in ["0 1\n1 2", "0 1\n0 2\n1 2", "0 1\n0 2\n0 3", "0 1\n1 2\n2 3\n3 0\n0 2"] {
            let g = graph(edges);
            let n = g.node_count();
            let pi = srw_stationary(&g).unwrap();
            let mut srw_next = vec![0.0; n];
            let mut mh_next = vec![0.0; n];
            for i in 0..n {
                let di = g.degree(i as u32) as f64;
                let mut self_mass = 1.0;
                for &j in g.neighbors(i as u32) {
                    let dj = g.degree(j) as f64;
                    srw_next[j as usize] += pi[i] / di;
                    let p = (1.0 / di) * (di / dj).min(1.0);
                    mh_next[j as usize] += p / n as f64;
                    self_mass -= p;
                }
                mh_next[i] += self_mass / n as f64;
            }
            for i in 0..n {
                assert_relative_eq!(srw_next[i], pi[i], max_relative = 1e-12);
                assert_relative_eq!(mh_next[i], 1.0 / n as f64, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn ar1_closed_forms() {
        assert_eq!(ar1_chain(0.0, 10, 0).1, 1.0);
        assert_eq!(ar1_chain(0.5, 10, 0).1, 4.0);
        assert_relative_eq!(ar1_chain(0.9, 10, 0).1, 100.0, max_relative = 1e-12);

        let (chain, _) = ar1_chain(0.5, 1000, 7);
        let (chain2, _) = ar1_chain(0.5, 1000, 7);
        assert_eq!(chain.data(), chain2.data());
        assert_eq!(chain.len(), 1000);
    }
}
