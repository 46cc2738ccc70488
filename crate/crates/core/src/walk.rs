//! Random walks over graph nodes: the simple random walk and the
//! Metropolis-Hastings walk with SRW proposal.
//!
//! The SRW moves to a uniformly chosen neighbor and has stationary mass
//! proportional to degree. The MH walk proposes an SRW move from `i` to `j`
//! and accepts it with probability `min(1, d_i / d_j)`, which makes its
//! stationary law uniform over nodes.
//!
//! All randomness comes from a caller-supplied ChaCha8 generator, so a
//! `(graph, kind, start, seed)` tuple fully determines a walk.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chain::FeatureChain;
use crate::error::{Error, Result};
use crate::features::FeatureEvaluator;
use crate::graph::Graph;

/// Which transition kernel drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WalkKind {
    /// Simple random walk; stationary mass `d_i / 2 n_e`.
    Srw,
    /// Metropolis-Hastings walk with SRW proposal; uniform stationary law.
    Mh,
}

impl WalkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Srw => "srw",
            Self::Mh => "mh",
        }
    }
}

impl std::str::FromStr for WalkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "srw" => Ok(Self::Srw),
            "mh" => Ok(Self::Mh),
            other => Err(Error::InvalidParam(format!("unknown walk kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for WalkKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which per-node vector gets recorded into the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMap {
    /// The feature vector itself.
    Plain,
    /// The degree-reweighted vector used by importance-sampled SRW runs.
    Reweighted,
}

/// Uniformly random node id.
pub fn random_start<R: Rng>(g: &Graph, rng: &mut R) -> u32 {
    rng.random_range(0..g.node_count() as u32)
}

/// One SRW transition: a uniformly chosen neighbor of `i`.
pub fn srw_step<R: Rng>(g: &Graph, i: u32, rng: &mut R) -> Result<u32> {
    let neighbors = g.neighbors(i);
    if neighbors.is_empty() {
        return Err(Error::IsolatedNode(i));
    }
    Ok(neighbors[rng.random_range(0..neighbors.len())])
}

/// One MH transition from `i`: propose a uniform neighbor `j`, accept with
/// probability `min(1, d_i / d_j)`. Returns the next node and whether the
/// proposal was accepted (on rejection the chain stays at `i`).
pub fn mh_step<R: Rng>(g: &Graph, i: u32, rng: &mut R) -> Result<(u32, bool)> {
    let proposal = srw_step(g, i, rng)?;
    let di = g.degree(i) as f64;
    let dj = g.degree(proposal) as f64;
    let accept = di >= dj || rng.random::<f64>() < di / dj;
    if accept {
        Ok((proposal, true))
    } else {
        Ok((i, false))
    }
}

/// Exact membership bitset over `n` known node ids.
#[derive(Debug, Clone)]
struct NodeBitset {
    words: Vec<u64>,
    count: usize,
}

impl NodeBitset {
    fn new(n: usize) -> Self {
        Self { words: vec![0; n.div_ceil(64)], count: 0 }
    }

    /// Insert; returns true if the node was new.
    fn insert(&mut self, v: u32) -> bool {
        let (word, bit) = (v as usize / 64, v as usize % 64);
        let mask = 1u64 << bit;
        if self.words[word] & mask == 0 {
            self.words[word] |= mask;
            self.count += 1;
            true
        } else {
            false
        }
    }
}

/// Mutable state of a running walk: current node, transition bookkeeping,
/// the generator, and the exact set of visited nodes.
#[derive(Debug, Clone)]
pub struct WalkState {
    kind: WalkKind,
    current: u32,
    transitions: usize,
    accepted: usize,
    visited: NodeBitset,
    rng: ChaCha8Rng,
}

impl WalkState {
    pub fn new(g: &Graph, kind: WalkKind, start: u32, rng: ChaCha8Rng) -> Result<Self> {
        g.check_node(start)?;
        let mut visited = NodeBitset::new(g.node_count());
        visited.insert(start);
        Ok(Self { kind, current: start, transitions: 0, accepted: 0, visited, rng })
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn current(&self) -> u32 {
        self.current
    }

    /// Transitions attempted so far (the recorded sample count minus one,
    /// when every step is recorded).
    pub fn transitions(&self) -> usize {
        self.transitions
    }

    pub fn unique_nodes(&self) -> usize {
        self.visited.count
    }

    /// Accepted proposals over transitions attempted; `None` for SRW or
    /// before the first transition.
    pub fn acceptance_rate(&self) -> Option<f64> {
        match self.kind {
            WalkKind::Srw => None,
            WalkKind::Mh => {
                if self.transitions == 0 {
                    None
                } else {
                    Some(self.accepted as f64 / self.transitions as f64)
                }
            }
        }
    }

    /// Make one transition; returns the new node and the acceptance flag
    /// (always true for SRW).
    pub fn advance(&mut self, g: &Graph) -> Result<(u32, bool)> {
        let (next, accepted) = match self.kind {
            WalkKind::Srw => (srw_step(g, self.current, &mut self.rng)?, true),
            WalkKind::Mh => mh_step(g, self.current, &mut self.rng)?,
        };
        self.transitions += 1;
        if accepted {
            self.accepted += accepted as usize;
        }
        self.current = next;
        self.visited.insert(next);
        Ok((next, accepted))
    }

    /// Zero the transition/acceptance counters, e.g. after a burn-in phase,
    /// so the acceptance rate covers only recorded transitions. Visited
    /// nodes are kept.
    pub fn reset_counters(&mut self) {
        self.transitions = 0;
        self.accepted = 0;
    }
}

/// The recorded chain: one feature vector, node id, and degree per step,
/// plus acceptance flags for MH walks.
#[derive(Debug, Clone)]
pub struct WalkTrace {
    kind: WalkKind,
    map: FeatureMap,
    start: u32,
    seed: Option<u64>,
    values: FeatureChain,
    degrees: Vec<u32>,
    nodes: Vec<u32>,
    accept_flags: Vec<bool>,
}

impl WalkTrace {
    pub fn new(kind: WalkKind, map: FeatureMap, start: u32, dim: usize) -> Self {
        Self {
            kind,
            map,
            start,
            seed: None,
            values: FeatureChain::new(dim),
            degrees: Vec::new(),
            nodes: Vec::new(),
            accept_flags: Vec::new(),
        }
    }

    pub fn with_capacity(
        kind: WalkKind,
        map: FeatureMap,
        start: u32,
        dim: usize,
        steps: usize,
    ) -> Self {
        let mut t = Self::new(kind, map, start, dim);
        t.values = FeatureChain::with_capacity(dim, steps);
        t.degrees = Vec::with_capacity(steps);
        t.nodes = Vec::with_capacity(steps);
        t
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn record(&mut self, node: u32, degree: usize, step_values: &[f64], accepted: bool) {
        self.values.push(step_values);
        self.degrees.push(degree as u32);
        self.nodes.push(node);
        if self.kind == WalkKind::Mh {
            self.accept_flags.push(accepted);
        }
    }

    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn map(&self) -> FeatureMap {
        self.map
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    /// Recorded sample count (including the start node at t = 0).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &FeatureChain {
        &self.values
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    /// Per-step acceptance flags; empty for SRW. Index 0 corresponds to the
    /// start node and is always true.
    pub fn accept_flags(&self) -> &[bool] {
        &self.accept_flags
    }
}

/// Run a walk for exactly `m` recorded samples (the start node counts as
/// sample zero) and record the evaluator's plain or reweighted vector at
/// every step.
pub fn run_walk(
    g: &Graph,
    kind: WalkKind,
    start: u32,
    m: usize,
    eval: &FeatureEvaluator<'_>,
    map: FeatureMap,
    rng: ChaCha8Rng,
) -> Result<(WalkTrace, WalkState)> {
    if m < 1 {
        return Err(Error::InvalidParam("step budget must be >= 1".into()));
    }
    if map == FeatureMap::Reweighted && !eval.degree_first() {
        return Err(Error::InvalidSpec(
            "reweighted traces need `degree` as the first component".into(),
        ));
    }
    let mut state = WalkState::new(g, kind, start, rng)?;
    let mut trace = WalkTrace::with_capacity(kind, map, start, eval.dim(), m);
    let mut buf = vec![0.0; eval.dim()];

    let record = |trace: &mut WalkTrace, node: u32, accepted: bool, buf: &mut [f64]| {
        match map {
            FeatureMap::Plain => eval.eval(node, buf),
            FeatureMap::Reweighted => eval.eval_weighted(node, buf),
        }
        trace.record(node, g.degree(node), buf, accepted);
    };

    record(&mut trace, start, true, &mut buf);
    for _ in 1..m {
        let (node, accepted) = state.advance(g)?;
        record(&mut trace, node, accepted, &mut buf);
    }
    Ok((trace, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureSpec;
    use crate::graph::{generate_er, largest_connected_component, load_edge_list, NodeStatsTable};
    use rand::SeedableRng;

    fn p3() -> Graph {
        load_edge_list("0 1\n1 2".as_bytes()).unwrap().0
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn random_start_single_node_graph() {
        // A single-node graph can only arise through LCC extraction.
        let g = load_edge_list("0 1\n2 2".as_bytes()).unwrap().0;
        let (lcc, _) = largest_connected_component(&g);
        assert_eq!(lcc.node_count(), 2);
        let single = {
            let g = load_edge_list("5 5".as_bytes()).unwrap().0;
            g
        };
        assert_eq!(single.node_count(), 1);
        let mut r = rng(0);
        for _ in 0..10 {
            assert_eq!(random_start(&single, &mut r), 0);
        }
    }

    #[test]
    fn random_start_is_uniform_and_deterministic() {
        let g = p3();
        let mut counts = [0usize; 3];
        let mut r = rng(42);
        let draws = 300_000;
        for _ in 0..draws {
            counts[random_start(&g, &mut r) as usize] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.01, "freq {freq}");
        }

        let (mut a, mut b) = (rng(7), rng(7));
        assert_eq!(random_start(&g, &mut a), random_start(&g, &mut b));
    }

    #[test]
    fn srw_step_single_neighbor_and_uniformity() {
        let g = p3();
        let mut r = rng(1);
        for _ in 0..20 {
            assert_eq!(srw_step(&g, 0, &mut r).unwrap(), 1);
        }
        let mut count0 = 0usize;
        let trials = 1_000_000;
        for _ in 0..trials {
            if srw_step(&g, 1, &mut r).unwrap() == 0 {
                count0 += 1;
            }
        }
        let freq = count0 as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.005, "freq {freq}");
    }

    #[test]
    fn srw_step_errors_on_isolated_node() {
        let g = load_edge_list("0 1\n2 2".as_bytes()).unwrap().0;
        assert_eq!(g.degree(2), 0);
        assert!(matches!(srw_step(&g, 2, &mut rng(0)), Err(Error::IsolatedNode(2))));
    }

    #[test]
    fn mh_step_acceptance_probabilities() {
        let g = p3();
        // From a leaf the only proposal is the center (degree 2):
        // acceptance probability 1/2.
        let mut r = rng(5);
        let trials = 1_000_000;
        let mut accepted = 0usize;
        for _ in 0..trials {
            let (_, ok) = mh_step(&g, 0, &mut r).unwrap();
            accepted += ok as usize;
        }
        let rate = accepted as f64 / trials as f64;
        assert!((rate - 0.5).abs() < 0.005, "rate {rate}");

        // From the center every proposal is a leaf (degree 1): always accepted.
        for _ in 0..100 {
            let (node, ok) = mh_step(&g, 1, &mut r).unwrap();
            assert!(ok);
            assert!(node == 0 || node == 2);
        }
    }

    #[test]
    fn mh_always_accepts_on_regular_graphs() {
        let g = load_edge_list("0 1\n0 2\n1 2".as_bytes()).unwrap().0; // K3
        let mut r = rng(3);
        for start in 0..3 {
            for _ in 0..200 {
                let (_, ok) = mh_step(&g, start, &mut r).unwrap();
                assert!(ok);
            }
        }
    }

    #[test]
    fn run_walk_single_step() {
        let g = p3();
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = crate::features::FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (trace, state) =
            run_walk(&g, WalkKind::Srw, 1, 1, &eval, FeatureMap::Plain, rng(0)).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.values().step(0), &[2.0]);
        assert_eq!(state.unique_nodes(), 1);
        assert_eq!(state.acceptance_rate(), None);
    }

    #[test]
    fn constant_feature_stays_constant() {
        let g = load_edge_list("0 1\n0 2\n1 2".as_bytes()).unwrap().0; // K3
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = crate::features::FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (trace, _) =
            run_walk(&g, WalkKind::Srw, 0, 100_000, &eval, FeatureMap::Plain, rng(9)).unwrap();
        assert!(trace.values().data().iter().all(|&x| x == 2.0));
    }

    #[test]
    fn mh_acceptance_rate_strictly_inside_unit_interval_on_irregular_graph() {
        let g = generate_er(500, 0.02, 1).unwrap();
        let (g, _) = largest_connected_component(&g);
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = crate::features::FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (_, state) =
            run_walk(&g, WalkKind::Mh, 0, 20_000, &eval, FeatureMap::Plain, rng(2)).unwrap();
        let rate = state.acceptance_rate().unwrap();
        assert!(rate > 0.0 && rate < 1.0, "rate {rate}");
    }

    #[test]
    fn traces_are_deterministic() {
        let g = generate_er(100, 0.05, 4).unwrap();
        let (g, _) = largest_connected_component(&g);
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree,cc").unwrap();
        let eval = crate::features::FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        for kind in [WalkKind::Srw, WalkKind::Mh] {
            let (a, _) = run_walk(&g, kind, 3, 5_000, &eval, FeatureMap::Plain, rng(11)).unwrap();
            let (b, _) = run_walk(&g, kind, 3, 5_000, &eval, FeatureMap::Plain, rng(11)).unwrap();
            assert_eq!(a.nodes(), b.nodes());
            assert_eq!(a.values().data(), b.values().data());
        }
    }

    #[test]
    fn unique_node_count_saturates() {
        let g = p3();
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = crate::features::FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let (_, state) =
            run_walk(&g, WalkKind::Srw, 0, 1_000, &eval, FeatureMap::Plain, rng(0)).unwrap();
        assert_eq!(state.unique_nodes(), 3);
        assert!(state.transitions() == 999);
    }

    /// Empirical one-step transition frequencies match the analytic kernels
    /// on tiny graphs, within 3 binomial standard errors.
    #[test]
    fn one_step_kernels_match_analytic_probabilities() {
        let tiny: Vec<Graph> = vec![
            p3(),
            load_edge_list("0 1\n0 2\n1 2".as_bytes()).unwrap().0, // K3
            load_edge_list("0 1\n0 2\n0 3".as_bytes()).unwrap().0, // star
            load_edge_list("0 1\n1 2\n2 3\n3 0\n0 2".as_bytes()).unwrap().0, // C4 + chord
        ];
        let trials = 100_000usize;
        let mut r = rng(13);
        for g in &tiny {
            let n = g.node_count();
            // Analytic kernels straight from the transition definitions.
            let mut srw = vec![vec![0.0; n]; n];
            let mut mh = vec![vec![0.0; n]; n];
            for i in 0..n {
                let di = g.degree(i as u32) as f64;
                let mut self_mass = 1.0;
                for &j in g.neighbors(i as u32) {
                    let dj = g.degree(j) as f64;
                    srw[i][j as usize] = 1.0 / di;
                    let p = (1.0 / di) * (di / dj).min(1.0);
                    mh[i][j as usize] = p;
                    self_mass -= p;
                }
                mh[i][i] += self_mass;
            }
            for i in 0..n as u32 {
                let mut counts_srw = vec![0usize; n];
                let mut counts_mh = vec![0usize; n];
                for _ in 0..trials {
                    counts_srw[srw_step(g, i, &mut r).unwrap() as usize] += 1;
                    let (j, _) = mh_step(g, i, &mut r).unwrap();
                    counts_mh[j as usize] += 1;
                }
                for j in 0..n {
                    for (kernel, counts) in [(&srw, &counts_srw), (&mh, &counts_mh)] {
                        let q = kernel[i as usize][j];
                        let freq = counts[j] as f64 / trials as f64;
                        let se = (q * (1.0 - q) / trials as f64).sqrt();
                        if q == 0.0 {
                            assert_eq!(counts[j], 0, "impossible transition {i}->{j} occurred");
                        } else {
                            assert!(
                                (freq - q).abs() <= 3.0 * se,
                                "transition {i}->{j}: freq {freq}, prob {q}, se {se}"
                            );
                        }
                    }
                }
            }
        }
    }

    /// Long-run visit frequencies: SRW is degree-biased, MH is uniform.
    #[test]
    fn stationary_visit_frequencies_on_p3() {
        let g = p3();
        let stats = NodeStatsTable::compute(&g);
        let spec = FeatureSpec::parse_list("degree").unwrap();
        let eval = crate::features::FeatureEvaluator::new(&g, &stats, None, &spec).unwrap();
        let m = 1_000_000;

        let tv = |counts: &[usize; 3], target: [f64; 3]| -> f64 {
            counts
                .iter()
                .zip(target)
                .map(|(&c, t)| (c as f64 / m as f64 - t).abs())
                .sum::<f64>()
                / 2.0
        };

        let (trace, _) = run_walk(&g, WalkKind::Srw, 0, m, &eval, FeatureMap::Plain, rng(21)).unwrap();
        let mut counts = [0usize; 3];
        for &v in trace.nodes() {
            counts[v as usize] += 1;
        }
        let d = tv(&counts, [0.25, 0.5, 0.25]);
        assert!(d < 0.005, "SRW total variation {d}");

        let (trace, _) = run_walk(&g, WalkKind::Mh, 0, m, &eval, FeatureMap::Plain, rng(22)).unwrap();
        let mut counts = [0usize; 3];
        for &v in trace.nodes() {
            counts[v as usize] += 1;
        }
        let d = tv(&counts, [1.0 / 3.0; 3]);
        assert!(d < 0.005, "MH total variation {d}");
    }
}
