//! Graph files: whitespace-separated edge lists and JSON.
//!
//! Edge lists hold one `u v` pair per line with 0-based indices. Blank lines
//! and anything after `#` are ignored, and repeated pairs add multiplicity.
//! The node count is one more than the largest index unless a
//! `# nodes: N` header says otherwise (needed for trailing isolated nodes).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cayley::CayleyGraph;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modular_group::GENERATOR_LABELS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Edgelist,
    Json,
}

impl Format {
    /// Guesses from the extension; anything but `.json` is an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Edgelist,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub num_nodes: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_labels: Option<Vec<String>>,
}

impl GraphJson {
    pub fn from_graph(g: &Graph) -> Self {
        GraphJson {
            num_nodes: g.num_nodes(),
            edges: g.edges().iter().map(|&(u, v)| [u, v]).collect(),
            n: None,
            labels: None,
            generator_labels: None,
        }
    }

    /// Full Cayley graph, with each node labelled by its matrix entries.
    pub fn from_cayley(c: &CayleyGraph) -> Self {
        let labels = (0..c.num_nodes())
            .map(|i| {
                let [a, b, cc, d] = c.element(i).entries();
                format!("{a} {b} {cc} {d}")
            })
            .collect();
        GraphJson {
            n: Some(u64::from(c.modulus())),
            labels: Some(labels),
            generator_labels: Some(GENERATOR_LABELS.iter().map(|s| s.to_string()).collect()),
            ..GraphJson::from_graph(&c.to_graph())
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        if let Some(l) = &self.labels {
            if l.len() != self.num_nodes {
                return Err(Error::DimensionMismatch {
                    expected: self.num_nodes,
                    actual: l.len(),
                });
            }
        }
        Graph::new(self.num_nodes, self.edges.iter().map(|e| (e[0], e[1])).collect())
    }
}

pub fn parse_edgelist(text: &str) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.split_once('#') {
            Some((b, c)) => (b, Some(c)),
            None => (raw, None),
        };
        if let Some(rest) = comment.and_then(|c| c.trim().strip_prefix("nodes:")) {
            let n = rest.trim().parse().map_err(|_| Error::Parse {
                line,
                msg: format!("bad node count '{}'", rest.trim()),
            })?;
            declared = Some(n);
        }
        let fields: Vec<&str> = body.split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [u, v] => {
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| Error::Parse {
                        line,
                        msg: format!("'{s}' is not a node index"),
                    })
                };
                edges.push((parse(u)?, parse(v)?));
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected two fields, found {}", fields.len()),
                })
            }
        }
    }
    let implied = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
    Graph::new(declared.unwrap_or(implied), edges)
}

pub fn to_edgelist(g: &Graph) -> String {
    let mut out = format!("# nodes: {}\n", g.num_nodes());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_graph(path: &Path, format: Option<Format>) -> Result<Graph> {
    let text = fs::read_to_string(path)?;
    match format.unwrap_or_else(|| Format::from_path(path)) {
        Format::Edgelist => parse_edgelist(&text),
        Format::Json => serde_json::from_str::<GraphJson>(&text)?.to_graph(),
    }
}

pub fn write_graph_json(path: &Path, doc: &GraphJson) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(doc)?)?;
    Ok(())
}

pub fn write_graph(path: &Path, g: &Graph, format: Format) -> Result<()> {
    match format {
        Format::Edgelist => fs::write(path, to_edgelist(g))?,
        Format::Json => write_graph_json(path, &GraphJson::from_graph(g))?,
    }
    Ok(())
}
