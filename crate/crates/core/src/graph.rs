//! Undirected simple graphs in compressed adjacency form.
//!
//! Nodes carry dense ids `0..n`; the original labels from the input edge
//! list are retained for reporting. Each node's neighbor slice is sorted
//! ascending with no self loops and no duplicates, so triangle counting can
//! run by sorted-list intersection.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::par;

/// Immutable undirected simple graph.
///
/// `offsets` has length `n + 1`; the neighbors of node `v` are
/// `neighbors[offsets[v]..offsets[v + 1]]`, sorted ascending.
#[derive(Debug, Clone)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    /// Dense id -> original input label.
    labels: Vec<u64>,
    /// Original input label -> dense id.
    label_index: HashMap<u64, u32>,
}

/// Counts of records dropped while ingesting an edge list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadSummary {
    pub self_loops_dropped: usize,
    pub duplicate_edges_dropped: usize,
}

impl Graph {
    /// Build from deduplicated dense-id edges. `edges` may arrive in any
    /// order; self loops and duplicates are a caller bug and are rejected.
    fn from_edges(n: usize, mut edges: Vec<(u32, u32)>, labels: Vec<u64>) -> Self {
        debug_assert_eq!(labels.len(), n);
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        debug_assert!(edges.iter().all(|&(a, b)| a != b));

        let mut degrees = vec![0usize; n];
        for &(a, b) in &edges {
            degrees[a as usize] += 1;
            degrees[b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0usize;
        offsets.push(0);
        for d in &degrees {
            acc += d;
            offsets.push(acc);
        }
        let mut neighbors = vec![0u32; acc];
        let mut cursor: Vec<usize> = offsets[..n].to_vec();
        for &(a, b) in &edges {
            neighbors[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            neighbors[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v]..offsets[v + 1]].sort_unstable();
        }

        let label_index = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();
        Self { offsets, neighbors, labels, label_index }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Original input label of a dense id.
    #[inline]
    pub fn label(&self, v: u32) -> u64 {
        self.labels[v as usize]
    }

    /// Dense id of an original input label, if present.
    pub fn dense_id(&self, label: u64) -> Option<u32> {
        self.label_index.get(&label).copied()
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count() as u32)
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    pub fn check_node(&self, v: u32) -> Result<()> {
        if (v as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange { id: v, n: self.node_count() })
        }
    }

    /// Full invariant scan: symmetric adjacency, strictly increasing neighbor
    /// slices (no duplicates), no self loops, degree sum = 2 * edge count.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if self.offsets.len() != n + 1 || self.offsets[0] != 0 {
            return Err(Error::InvalidParam("offset array malformed".into()));
        }
        let mut degree_sum = 0usize;
        for v in 0..n as u32 {
            let slice = self.neighbors(v);
            degree_sum += slice.len();
            for (i, &u) in slice.iter().enumerate() {
                if u == v {
                    return Err(Error::InvalidParam(format!("self loop at node {v}")));
                }
                if (u as usize) >= n {
                    return Err(Error::NodeOutOfRange { id: u, n });
                }
                if i > 0 && slice[i - 1] >= u {
                    return Err(Error::InvalidParam(format!(
                        "neighbor slice of node {v} not strictly increasing"
                    )));
                }
                if self.neighbors(u).binary_search(&v).is_err() {
                    return Err(Error::InvalidParam(format!(
                        "asymmetric adjacency: {u} in N({v}) but not vice versa"
                    )));
                }
            }
        }
        if degree_sum != 2 * self.edge_count() {
            return Err(Error::InvalidParam("degree sum != 2 * edge count".into()));
        }
        Ok(())
    }

    /// True if every node is reachable from node 0 (and n >= 1).
    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return false;
        }
        let (comp, size) = bfs_component(self, 0);
        let _ = comp;
        size == n
    }

    /// Write as an edge list, one `u v` line per edge with original labels,
    /// each edge once with the smaller dense id first. Output is
    /// deterministic for a given graph.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in 0..self.node_count() as u32 {
            for &u in self.neighbors(v) {
                if u > v {
                    writeln!(w, "{} {}", self.label(v), self.label(u))?;
                }
            }
        }
        Ok(())
    }
}

/// Parse a whitespace-separated edge list. Lines starting with `#` are
/// comments. Duplicate edges and self loops are dropped and counted; labels
/// are remapped to dense ids in first-appearance order.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<(Graph, LoadSummary)> {
    let mut labels: Vec<u64> = Vec::new();
    let mut label_index: HashMap<u64, u32> = HashMap::new();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut summary = LoadSummary::default();

    let mut intern = |label: u64, labels: &mut Vec<u64>| -> u32 {
        *label_index.entry(label).or_insert_with(|| {
            labels.push(label);
            (labels.len() - 1) as u32
        })
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected two node labels, got {line:?}"),
                })
            }
        };
        let parse = |tok: &str| -> Result<u64> {
            tok.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("non-integer node label {tok:?}"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == b {
            summary.self_loops_dropped += 1;
            // Still intern the label so an all-self-loop node keeps its id.
            intern(a, &mut labels);
            continue;
        }
        let ia = intern(a, &mut labels);
        let ib = intern(b, &mut labels);
        edges.push((ia.min(ib), ia.max(ib)));
    }

    if labels.is_empty() {
        return Err(Error::EmptyInput("no edges or nodes found".into()));
    }

    let before = edges.len();
    edges.sort_unstable();
    edges.dedup();
    summary.duplicate_edges_dropped = before - edges.len();

    Ok((Graph::from_edges(labels.len(), edges, labels), summary))
}

fn bfs_component(g: &Graph, root: u32) -> (Vec<u32>, usize) {
    let mut members = vec![root];
    let mut seen = vec![false; g.node_count()];
    seen[root as usize] = true;
    let mut head = 0;
    while head < members.len() {
        let v = members[head];
        head += 1;
        for &u in g.neighbors(v) {
            if !seen[u as usize] {
                seen[u as usize] = true;
                members.push(u);
            }
        }
    }
    let size = members.len();
    (members, size)
}

/// Induced subgraph on the largest connected component, plus the map from
/// new dense ids to the old ones. Ties between equal-sized components go to
/// the one containing the smallest dense id. New ids preserve the relative
/// order of the old ids, so neighbor slices stay sorted.
pub fn largest_connected_component(g: &Graph) -> (Graph, Vec<u32>) {
    let n = g.node_count();
    let mut assigned = vec![false; n];
    let mut best: Vec<u32> = Vec::new();
    for v in 0..n as u32 {
        if assigned[v as usize] {
            continue;
        }
        let (members, size) = bfs_component(g, v);
        for &m in &members {
            assigned[m as usize] = true;
        }
        // Scanning v in ascending order, the first component of maximal size
        // is the one with the smallest minimum id.
        if size > best.len() {
            best = members;
        }
    }
    best.sort_unstable();

    let mut old_to_new = vec![u32::MAX; n];
    for (new, &old) in best.iter().enumerate() {
        old_to_new[old as usize] = new as u32;
    }
    let mut edges = Vec::new();
    for &old in &best {
        for &u in g.neighbors(old) {
            if u > old {
                // Components are closed under adjacency, so u is kept too.
                edges.push((old_to_new[old as usize], old_to_new[u as usize]));
            }
        }
    }
    let labels = best.iter().map(|&old| g.label(old)).collect();
    (Graph::from_edges(best.len(), edges, labels), best)
}

/// Erdos-Renyi G(n, edge_prob) sample, deterministic for a given seed.
/// Labels are the dense ids themselves.
pub fn generate_er(n: usize, edge_prob: f64, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParam(format!("generator needs n >= 2, got {n}")));
    }
    if !(edge_prob > 0.0 && edge_prob < 1.0) {
        return Err(Error::InvalidParam(format!(
            "edge probability must lie in (0,1), got {edge_prob}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in (i + 1)..n as u32 {
            if rng.random::<f64>() < edge_prob {
                edges.push((i, j));
            }
        }
    }
    let labels = (0..n as u64).collect();
    Ok(Graph::from_edges(n, edges, labels))
}

/// Structural statistics of one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeStats {
    pub degree: usize,
    /// Number of edges among the node's neighbors.
    pub triangles: usize,
    /// `2 t / (d (d - 1))` for degree >= 2, else 0.
    pub clustering: f64,
}

/// Count of elements common to two ascending slices.
fn sorted_intersection_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Degree, triangle count, and local clustering coefficient of `v`.
pub fn node_stats(g: &Graph, v: u32) -> Result<NodeStats> {
    g.check_node(v)?;
    let nv = g.neighbors(v);
    let degree = nv.len();
    // Each neighbor-neighbor edge {u, w} is found once from u and once from w.
    let mut twice_triangles = 0usize;
    for &u in nv {
        twice_triangles += sorted_intersection_count(nv, g.neighbors(u));
    }
    let triangles = twice_triangles / 2;
    let clustering = if degree >= 2 {
        2.0 * triangles as f64 / (degree as f64 * (degree as f64 - 1.0))
    } else {
        0.0
    };
    Ok(NodeStats { degree, triangles, clustering })
}

/// Precomputed `NodeStats` for every node, shared by feature evaluation.
#[derive(Debug, Clone)]
pub struct NodeStatsTable {
    stats: Vec<NodeStats>,
}

impl NodeStatsTable {
    /// Compute all node statistics, in parallel when the `parallel` feature
    /// is enabled.
    pub fn compute(g: &Graph) -> Self {
        let stats = par::map_indexed(g.node_count(), |v| {
            node_stats(g, v as u32).expect("node id in range")
        });
        Self { stats }
    }

    /// Single-threaded variant, kept callable for benchmarking against the
    /// parallel path.
    pub fn compute_sequential(g: &Graph) -> Self {
        let stats = (0..g.node_count())
            .map(|v| node_stats(g, v as u32).expect("node id in range"))
            .collect();
        Self { stats }
    }

    #[inline]
    pub fn get(&self, v: u32) -> &NodeStats {
        &self.stats[v as usize]
    }

    pub fn len(&self) -> usize {
        self.stats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }
}
