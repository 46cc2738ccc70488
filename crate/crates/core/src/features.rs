//! Declaration and evaluation of the per-node feature vector.
//!
//! A feature spec is an ordered list of components; evaluating it at a node
//! yields a vector in `R^p`. Besides the plain vector there is a reweighted
//! variant used by importance-sampled walks: the leading degree component is
//! replaced by the reciprocal degree and every other component is divided by
//! the degree.

use std::fmt;
use std::str::FromStr;

use crate::attrs::{AttributeColumn, AttributeTable};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeStats, NodeStatsTable};
use crate::walk::WalkKind;

/// One coordinate of the feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureComponent {
    /// Node degree.
    Degree,
    /// Indicator that the degree equals `k`.
    DegreeIndicator(usize),
    /// Local clustering coefficient.
    LocalClustering,
    /// Indicator that a categorical attribute takes a given level.
    AttributeIndicator { attribute: String, level: String },
    /// Raw value of a numeric attribute.
    NumericAttribute { attribute: String },
}

impl fmt::Display for FeatureComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Degree => write!(f, "degree"),
            Self::DegreeIndicator(k) => write!(f, "degind:{k}"),
            Self::LocalClustering => write!(f, "cc"),
            Self::AttributeIndicator { attribute, level } => write!(f, "attr:{attribute}={level}"),
            Self::NumericAttribute { attribute } => write!(f, "num:{attribute}"),
        }
    }
}

impl FromStr for FeatureComponent {
    type Err = Error;

    /// Descriptor grammar: `degree`, `degind:<k>`, `cc`,
    /// `attr:<name>=<level>`, `num:<name>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "degree" {
            return Ok(Self::Degree);
        }
        if s == "cc" || s == "clustering" {
            return Ok(Self::LocalClustering);
        }
        if let Some(k) = s.strip_prefix("degind:") {
            let k = k
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad degree threshold in {s:?}")))?;
            return Ok(Self::DegreeIndicator(k));
        }
        if let Some(rest) = s.strip_prefix("attr:") {
            let (attribute, level) = rest.split_once('=').ok_or_else(|| {
                Error::InvalidSpec(format!("expected attr:<name>=<level>, got {s:?}"))
            })?;
            return Ok(Self::AttributeIndicator {
                attribute: attribute.to_string(),
                level: level.to_string(),
            });
        }
        if let Some(attribute) = s.strip_prefix("num:") {
            return Ok(Self::NumericAttribute { attribute: attribute.to_string() });
        }
        Err(Error::InvalidSpec(format!("unknown feature descriptor {s:?}")))
    }
}

/// Ordered, nonempty list of feature components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSpec {
    components: Vec<FeatureComponent>,
}

impl FeatureSpec {
    pub fn new(components: Vec<FeatureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidSpec("feature spec must have p >= 1 components".into()));
        }
        Ok(Self { components })
    }

    /// Parse a comma-separated descriptor list, e.g. `degree,degind:10,cc`.
    pub fn parse_list(list: &str) -> Result<Self> {
        let components = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(FeatureComponent::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[FeatureComponent] {
        &self.components
    }

    /// Component display names, used for report headers.
    pub fn names(&self) -> Vec<String> {
        self.components.iter().map(|c| c.to_string()).collect()
    }

    /// Check the spec against a graph and (optionally) an attribute table:
    /// degree thresholds must be attainable and attribute levels must exist.
    pub fn validate(&self, graph: &Graph, attrs: Option<&AttributeTable>) -> Result<()> {
        let max_degree = graph.max_degree();
        for c in &self.components {
            match c {
                FeatureComponent::Degree | FeatureComponent::LocalClustering => {}
                FeatureComponent::DegreeIndicator(k) => {
                    if *k > max_degree {
                        return Err(Error::InvalidSpec(format!(
                            "degree indicator threshold {k} exceeds the maximum degree {max_degree}; the component would be identically zero"
                        )));
                    }
                }
                FeatureComponent::AttributeIndicator { attribute, level } => {
                    let table = attrs.ok_or_else(|| {
                        Error::InvalidSpec(format!(
                            "component {c} needs an attribute table but none was supplied"
                        ))
                    })?;
                    table.level_index(attribute, level)?;
                }
                FeatureComponent::NumericAttribute { attribute } => {
                    let table = attrs.ok_or_else(|| {
                        Error::InvalidSpec(format!(
                            "component {c} needs an attribute table but none was supplied"
                        ))
                    })?;
                    match table.get(attribute) {
                        Some(AttributeColumn::Numeric { .. }) => {}
                        Some(_) => {
                            return Err(Error::Attribute(format!(
                                "attribute {attribute:?} is categorical, not numeric"
                            )))
                        }
                        None => {
                            return Err(Error::Attribute(format!(
                                "unknown attribute {attribute:?}"
                            )))
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Walk-specific validation: importance-sampled walks pivot on the mean
    /// reciprocal degree, so the first component must be `Degree`.
    pub fn validate_for_walk(&self, kind: WalkKind) -> Result<()> {
        if kind == WalkKind::Srw && self.components[0] != FeatureComponent::Degree {
            return Err(Error::InvalidSpec(
                "the first component must be `degree` for SRW runs (the ratio estimator pivots on it)"
                    .into(),
            ));
        }
        Ok(())
    }
}

enum Resolved<'a> {
    Degree,
    DegreeIndicator(usize),
    LocalClustering,
    AttributeIndicator { values: &'a [u32], level: u32 },
    NumericAttribute { values: &'a [f64] },
}

/// Spec compiled against a graph, its node statistics, and an attribute
/// table: attribute names and levels are resolved to indices once so that
/// per-step evaluation is lookup-only.
pub struct FeatureEvaluator<'a> {
    graph: &'a Graph,
    stats: &'a NodeStatsTable,
    resolved: Vec<Resolved<'a>>,
    degree_first: bool,
}

impl<'a> FeatureEvaluator<'a> {
    pub fn new(
        graph: &'a Graph,
        stats: &'a NodeStatsTable,
        attrs: Option<&'a AttributeTable>,
        spec: &FeatureSpec,
    ) -> Result<Self> {
        spec.validate(graph, attrs)?;
        let mut resolved = Vec::with_capacity(spec.dim());
        for c in spec.components() {
            resolved.push(match c {
                FeatureComponent::Degree => Resolved::Degree,
                FeatureComponent::DegreeIndicator(k) => Resolved::DegreeIndicator(*k),
                FeatureComponent::LocalClustering => Resolved::LocalClustering,
                FeatureComponent::AttributeIndicator { attribute, level } => {
                    let table = attrs.expect("validated above");
                    let level = table.level_index(attribute, level)?;
                    match table.get(attribute) {
                        Some(AttributeColumn::Categorical { values, .. }) => {
                            Resolved::AttributeIndicator { values, level }
                        }
                        _ => unreachable!("validated above"),
                    }
                }
                FeatureComponent::NumericAttribute { attribute } => {
                    let table = attrs.expect("validated above");
                    match table.get(attribute) {
                        Some(AttributeColumn::Numeric { values }) => {
                            Resolved::NumericAttribute { values }
                        }
                        _ => unreachable!("validated above"),
                    }
                }
            });
        }
        let degree_first = matches!(resolved.first(), Some(Resolved::Degree));
        Ok(Self { graph, stats, resolved, degree_first })
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn dim(&self) -> usize {
        self.resolved.len()
    }

    /// True when the leading component is `Degree`, as the reweighted
    /// evaluation requires.
    pub fn degree_first(&self) -> bool {
        self.degree_first
    }

    /// Evaluate the feature vector at node `v` into `out`.
    pub fn eval(&self, v: u32, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.resolved.len());
        let s: &NodeStats = self.stats.get(v);
        for (slot, c) in out.iter_mut().zip(&self.resolved) {
            *slot = match c {
                Resolved::Degree => s.degree as f64,
                Resolved::DegreeIndicator(k) => {
                    if s.degree == *k {
                        1.0
                    } else {
                        0.0
                    }
                }
                Resolved::LocalClustering => s.clustering,
                Resolved::AttributeIndicator { values, level } => {
                    if values[v as usize] == *level {
                        1.0
                    } else {
                        0.0
                    }
                }
                Resolved::NumericAttribute { values } => values[v as usize],
            };
        }
    }

    /// Evaluate the degree-reweighted vector at node `v` into `out`: slot 0
    /// becomes `1/d_v` and every other slot is the plain value divided by
    /// `d_v`. Requires a `Degree` leading component and `d_v >= 1`.
    pub fn eval_weighted(&self, v: u32, out: &mut [f64]) {
        debug_assert!(self.degree_first, "reweighted evaluation needs a leading degree component");
        self.eval(v, out);
        let d = out[0];
        debug_assert!(d >= 1.0);
        let inv = 1.0 / d;
        out[0] = inv;
        for slot in &mut out[1..] {
            *slot *= inv;
        }
    }

    pub fn eval_vec(&self, v: u32) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(v, &mut out);
        out
    }

    /// Checked reweighted evaluation; errors on a degree-zero node or a spec
    /// whose first component is not `Degree`.
    pub fn eval_weighted_vec(&self, v: u32) -> Result<Vec<f64>> {
        if !self.degree_first {
            return Err(Error::InvalidSpec(
                "reweighted evaluation needs `degree` as the first component".into(),
            ));
        }
        self.graph.check_node(v)?;
        if self.graph.degree(v) == 0 {
            return Err(Error::IsolatedNode(v));
        }
        let mut out = vec![0.0; self.dim()];
        self.eval_weighted(v, &mut out);
        Ok(out)
    }
}
