//! Experiment configuration file (TOML) and command-line overrides.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use netsample::mcse::BatchRule;
use netsample::stopping::StoppingConfig;
use netsample::walk::WalkKind;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    #[serde(default)]
    pub attributes: Option<AttributesSection>,
    pub features: Vec<String>,
    #[serde(default = "default_walks")]
    pub walks: Vec<String>,
    #[serde(default)]
    pub stopping: StoppingSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSource {
    /// Edge-list path; exactly one of `path` and `er` must be set.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub er: Option<ErSpec>,
    /// Extract the largest connected component after loading.
    #[serde(default = "default_true")]
    pub lcc: bool,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErSpec {
    pub n: usize,
    pub edge_prob: f64,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributesSection {
    pub path: PathBuf,
    #[serde(default = "default_id_column")]
    pub id_column: String,
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingSection {
    pub eps: f64,
    pub alpha: f64,
    pub m_star: usize,
    pub check_interval: usize,
    pub max_steps: usize,
    pub batch_rule: String,
    pub burn_in: usize,
}

impl Default for StoppingSection {
    fn default() -> Self {
        let d = StoppingConfig::default();
        Self {
            eps: d.eps,
            alpha: d.alpha,
            m_star: d.m_star,
            check_interval: d.check_interval,
            max_steps: d.max_steps,
            batch_rule: d.batch_rule.to_string(),
            burn_in: d.burn_in,
        }
    }
}

impl StoppingSection {
    pub fn to_config(&self) -> Result<StoppingConfig> {
        let batch_rule: BatchRule = self.batch_rule.parse()?;
        let cfg = StoppingConfig {
            eps: self.eps,
            alpha: self.alpha,
            m_star: self.m_star,
            check_interval: self.check_interval,
            max_steps: self.max_steps,
            batch_rule,
            burn_in: self.burn_in,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub replications: usize,
    pub base_seed: u64,
    /// Worker threads for replication-level parallelism; 0 means one per
    /// core.
    pub parallelism: usize,
    /// Compute exact means first and record per-replication coverage.
    pub truth_from_graph: bool,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { replications: 100, base_seed: 1, parallelism: 0, truth_from_graph: false }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub replications_csv: PathBuf,
    pub summary_csv: PathBuf,
    /// Histogram bin counts per estimate, written only when set.
    pub histogram_csv: Option<PathBuf>,
    pub histogram_bins: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            replications_csv: PathBuf::from("replications.csv"),
            summary_csv: PathBuf::from("summary.csv"),
            histogram_csv: None,
            histogram_bins: 30,
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_walks() -> Vec<String> {
    vec!["srw".into(), "mh".into()]
}

fn default_id_column() -> String {
    "id".into()
}

fn default_delimiter() -> String {
    ",".into()
}

/// Flag overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub replications: Option<usize>,
    pub base_seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub eps: Option<f64>,
    pub alpha: Option<f64>,
    pub m_star: Option<usize>,
    pub check_interval: Option<usize>,
    pub max_steps: Option<usize>,
    pub walks: Option<Vec<String>>,
    pub replications_csv: Option<PathBuf>,
    pub summary_csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if cfg.graph.path.is_some() == cfg.graph.er.is_some() {
            bail!("config must set exactly one of graph.path and graph.er");
        }
        Ok(cfg)
    }

    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(v) = ov.replications {
            self.experiment.replications = v;
        }
        if let Some(v) = ov.base_seed {
            self.experiment.base_seed = v;
        }
        if let Some(v) = ov.parallelism {
            self.experiment.parallelism = v;
        }
        if let Some(v) = ov.eps {
            self.stopping.eps = v;
        }
        if let Some(v) = ov.alpha {
            self.stopping.alpha = v;
        }
        if let Some(v) = ov.m_star {
            self.stopping.m_star = v;
        }
        if let Some(v) = ov.check_interval {
            self.stopping.check_interval = v;
        }
        if let Some(v) = ov.max_steps {
            self.stopping.max_steps = v;
        }
        if let Some(v) = &ov.walks {
            self.walks = v.clone();
        }
        if let Some(v) = &ov.replications_csv {
            self.output.replications_csv = v.clone();
        }
        if let Some(v) = &ov.summary_csv {
            self.output.summary_csv = v.clone();
        }
    }

    pub fn walk_kinds(&self) -> Result<Vec<WalkKind>> {
        let mut kinds = Vec::new();
        for w in &self.walks {
            let kind: WalkKind = w.parse()?;
            if !kinds.contains(&kind) {
                kinds.push(kind);
            }
        }
        if kinds.is_empty() {
            bail!("at least one walk kind is required");
        }
        Ok(kinds)
    }
}

/// Delimiter strings accepted on the command line and in configs: a single
/// character, or the names `tab` / `\t`.
pub fn parse_delimiter(s: &str) -> Result<char> {
    match s {
        "tab" | "\\t" => Ok('\t'),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => bail!("delimiter must be a single character or 'tab', got {s:?}"),
            }
        }
    }
}
