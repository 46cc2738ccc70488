//! Nodal attribute tables: categorical levels and numeric values aligned to
//! dense node ids.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Level assigned to nodes with no categorical record in the input file.
pub const NOT_REPORTED: &str = "Not Reported";

/// Declared shape of one attribute column.
#[derive(Debug, Clone)]
pub enum AttrKind {
    /// Categorical with an optional closed level list. With `levels: None`
    /// the levels are collected from the data in first-appearance order;
    /// with `Some(..)` any value outside the list is an error.
    Categorical { levels: Option<Vec<String>> },
    /// Numeric, with an optional default for nodes missing from the file.
    Numeric { default: Option<f64> },
}

#[derive(Debug, Clone)]
pub struct AttrDecl {
    pub name: String,
    pub kind: AttrKind,
}

impl AttrDecl {
    pub fn categorical(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: AttrKind::Categorical { levels: None } }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: AttrKind::Numeric { default: None } }
    }
}

/// How to read an attribute file: delimiter, which column holds the node
/// label, and the attribute declarations.
#[derive(Debug, Clone)]
pub struct AttributeSchema {
    pub id_column: String,
    pub delimiter: char,
    pub decls: Vec<AttrDecl>,
}

impl AttributeSchema {
    pub fn new(id_column: impl Into<String>, decls: Vec<AttrDecl>) -> Self {
        Self { id_column: id_column.into(), delimiter: ',', decls }
    }

    pub fn with_delimiter(mut self, delimiter: char) -> Self {
        self.delimiter = delimiter;
        self
    }
}

/// One loaded attribute column.
#[derive(Debug, Clone)]
pub enum AttributeColumn {
    Categorical {
        /// Level names; `values[v]` indexes into this list.
        levels: Vec<String>,
        values: Vec<u32>,
    },
    Numeric { values: Vec<f64> },
}

/// Per-node attributes aligned to a graph's dense ids.
#[derive(Debug, Clone, Default)]
pub struct AttributeTable {
    columns: Vec<(String, AttributeColumn)>,
    nodes: usize,
}

/// Counts of rows skipped or overwritten while loading attributes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AttrLoadSummary {
    /// Rows whose node label is absent from the graph.
    pub unknown_label_rows: usize,
    /// Rows repeating an earlier node label (last record wins).
    pub duplicate_rows: usize,
}

impl AttributeTable {
    pub fn new(nodes: usize) -> Self {
        Self { columns: Vec::new(), nodes }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn push_categorical(
        &mut self,
        name: impl Into<String>,
        levels: Vec<String>,
        values: Vec<u32>,
    ) -> Result<()> {
        let name = name.into();
        if values.len() != self.nodes {
            return Err(Error::Attribute(format!(
                "attribute {name:?} has {} values for {} nodes",
                values.len(),
                self.nodes
            )));
        }
        if let Some(&bad) = values.iter().find(|&&ix| ix as usize >= levels.len()) {
            return Err(Error::Attribute(format!(
                "attribute {name:?} has level index {bad} out of range"
            )));
        }
        self.columns.push((name, AttributeColumn::Categorical { levels, values }));
        Ok(())
    }

    pub fn push_numeric(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.nodes {
            return Err(Error::Attribute(format!(
                "attribute {name:?} has {} values for {} nodes",
                values.len(),
                self.nodes
            )));
        }
        self.columns.push((name, AttributeColumn::Numeric { values }));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&AttributeColumn> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
    }

    /// Resolve a categorical `(attribute, level)` pair to the level index.
    pub fn level_index(&self, attribute: &str, level: &str) -> Result<u32> {
        match self.get(attribute) {
            Some(AttributeColumn::Categorical { levels, .. }) => levels
                .iter()
                .position(|l| l == level)
                .map(|ix| ix as u32)
                .ok_or_else(|| {
                    Error::Attribute(format!(
                        "attribute {attribute:?} has no level {level:?} (levels: {levels:?})"
                    ))
                }),
            Some(AttributeColumn::Numeric { .. }) => Err(Error::Attribute(format!(
                "attribute {attribute:?} is numeric, not categorical"
            ))),
            None => Err(Error::Attribute(format!("unknown attribute {attribute:?}"))),
        }
    }
}

enum PendingColumn {
    Categorical {
        levels: Vec<String>,
        closed: bool,
        values: Vec<Option<u32>>,
    },
    Numeric {
        default: Option<f64>,
        values: Vec<Option<f64>>,
    },
}

/// Load delimiter-separated attributes with a header row and align them to
/// the graph's dense ids. Nodes missing from the file get the
/// `"Not Reported"` level for categorical attributes; missing numeric values
/// need a declared default.
pub fn load_attributes<R: BufRead>(
    graph: &Graph,
    reader: R,
    schema: &AttributeSchema,
) -> Result<(AttributeTable, AttrLoadSummary)> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => return Err(Error::EmptyInput("attribute file has no header".into())),
        }
    };
    let columns: Vec<&str> = header.trim().split(schema.delimiter).map(str::trim).collect();
    let find_col = |name: &str| -> Result<usize> {
        columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::Attribute(format!("missing column {name:?} in header")))
    };
    let id_col = find_col(&schema.id_column)?;

    let n = graph.node_count();
    let mut pending: Vec<(usize, PendingColumn)> = Vec::with_capacity(schema.decls.len());
    for decl in &schema.decls {
        let col = find_col(&decl.name)?;
        let state = match &decl.kind {
            AttrKind::Categorical { levels } => PendingColumn::Categorical {
                levels: levels.clone().unwrap_or_default(),
                closed: levels.is_some(),
                values: vec![None; n],
            },
            AttrKind::Numeric { default } => {
                PendingColumn::Numeric { default: *default, values: vec![None; n] }
            }
        };
        pending.push((col, state));
    }

    let mut summary = AttrLoadSummary::default();
    let mut seen = vec![false; n];
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(schema.delimiter).map(str::trim).collect();
        if fields.len() != columns.len() {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!(
                    "expected {} fields, got {}",
                    columns.len(),
                    fields.len()
                ),
            });
        }
        let label: u64 = fields[id_col].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("non-integer node label {:?}", fields[id_col]),
        })?;
        let Some(v) = graph.dense_id(label) else {
            summary.unknown_label_rows += 1;
            continue;
        };
        let v = v as usize;
        if seen[v] {
            summary.duplicate_rows += 1;
        }
        seen[v] = true;
        for (col, state) in pending.iter_mut() {
            let raw = fields[*col];
            match state {
                PendingColumn::Categorical { levels, closed, values } => {
                    let ix = match levels.iter().position(|l| l == raw) {
                        Some(ix) => ix,
                        None if *closed => {
                            return Err(Error::Attribute(format!(
                                "line {}: undeclared level {raw:?} (declared: {levels:?})",
                                lineno + 1
                            )))
                        }
                        None => {
                            levels.push(raw.to_string());
                            levels.len() - 1
                        }
                    };
                    values[v] = Some(ix as u32);
                }
                PendingColumn::Numeric { values, .. } => {
                    let x: f64 = raw.parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("non-numeric value {raw:?}"),
                    })?;
                    values[v] = Some(x);
                }
            }
        }
    }

    let mut table = AttributeTable::new(n);
    for (decl, (_, state)) in schema.decls.iter().zip(pending) {
        match state {
            PendingColumn::Categorical { mut levels, values, .. } => {
                let missing = values.iter().any(Option::is_none);
                let nr_index = if missing {
                    match levels.iter().position(|l| l == NOT_REPORTED) {
                        Some(ix) => ix as u32,
                        None => {
                            levels.push(NOT_REPORTED.to_string());
                            (levels.len() - 1) as u32
                        }
                    }
                } else {
                    0
                };
                let values = values
                    .into_iter()
                    .map(|v| v.unwrap_or(nr_index))
                    .collect();
                table.push_categorical(decl.name.clone(), levels, values)?;
            }
            PendingColumn::Numeric { default, values } => {
                let mut filled = Vec::with_capacity(n);
                for (v, value) in values.into_iter().enumerate() {
                    match value.or(default) {
                        Some(x) => filled.push(x),
                        None => {
                            return Err(Error::Attribute(format!(
                                "node {} (label {}) has no value for numeric attribute {:?} and no default is declared",
                                v,
                                graph.label(v as u32),
                                decl.name
                            )))
                        }
                    }
                }
                table.push_numeric(decl.name.clone(), filled)?;
            }
        }
    }
    Ok((table, summary))
}
