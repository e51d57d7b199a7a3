//! Composite learner specs as TOML.
//!
//! A file holds exactly one of
//!
//! ```toml
//! learner = "rf-n50"
//!
//! [bagging]
//! bags = 20
//! base = "nn-h10-it100-e0.001"
//!
//! [stacking]
//! folds = 4
//! level2 = "nn-h10-it100-e0.005"
//! members = ["mean", "pls-l3", { stacking = { folds = 3, level2 = "mean", members = ["pls-l2"] } }]
//! ```
//!
//! Strings are learner display names. Wherever a name is accepted, a
//! nested table of the same shape may appear instead.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensembles::{BaggingSpec, StackingSpec};
use crate::error::{Error, Result};
use crate::learners::LearnerSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Node {
    Name(String),
    Composite(Box<Composite>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Composite {
    #[serde(skip_serializing_if = "Option::is_none")]
    learner: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bagging: Option<BaggingNode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stacking: Option<StackingNode>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaggingNode {
    bags: usize,
    base: Node,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StackingNode {
    folds: usize,
    level2: Node,
    members: Vec<Node>,
}

fn node_to_spec(node: &Node) -> std::result::Result<LearnerSpec, String> {
    match node {
        Node::Name(name) => name.parse().map_err(|e: Error| e.to_string()),
        Node::Composite(c) => composite_to_spec(c),
    }
}

fn composite_to_spec(c: &Composite) -> std::result::Result<LearnerSpec, String> {
    match (&c.learner, &c.bagging, &c.stacking) {
        (Some(name), None, None) => name.parse().map_err(|e: Error| e.to_string()),
        (None, Some(b), None) => Ok(LearnerSpec::Bagged(BaggingSpec::new(node_to_spec(&b.base)?, b.bags))),
        (None, None, Some(s)) => {
            let members = s.members.iter().map(node_to_spec).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(LearnerSpec::Stacking(StackingSpec::new(members, node_to_spec(&s.level2)?, s.folds)))
        }
        _ => Err("expected exactly one of `learner`, `[bagging]` or `[stacking]`".to_string()),
    }
}

/// Plain name when the display name parses back to the same spec.
fn spec_to_node(spec: &LearnerSpec) -> Node {
    let name = spec.display_name();
    if name.parse::<LearnerSpec>().ok().as_ref() == Some(spec) {
        return Node::Name(name);
    }
    Node::Composite(Box::new(spec_to_composite(spec)))
}

fn spec_to_composite(spec: &LearnerSpec) -> Composite {
    match spec {
        LearnerSpec::Bagged(b) => Composite {
            bagging: Some(BaggingNode { bags: b.bags, base: spec_to_node(&b.base) }),
            ..Composite::default()
        },
        LearnerSpec::Stacking(s) => Composite {
            stacking: Some(StackingNode {
                folds: s.folds,
                level2: spec_to_node(&s.level2),
                members: s.ensemble.iter().map(spec_to_node).collect(),
            }),
            ..Composite::default()
        },
        other => Composite { learner: Some(other.display_name()), ..Composite::default() },
    }
}

fn parse_at(text: &str, path: &Path) -> Result<LearnerSpec> {
    let err = |message: String| Error::SpecFile { path: path.to_path_buf(), message };
    let composite: Composite = toml::from_str(text).map_err(|e| err(e.message().to_string()))?;
    let spec = composite_to_spec(&composite).map_err(err)?;
    spec.validate().map_err(|e| err(e.to_string()))?;
    Ok(spec)
}

pub fn parse_spec(text: &str) -> Result<LearnerSpec> {
    parse_at(text, &PathBuf::from("<inline>"))
}

pub fn load_spec_file(path: impl AsRef<Path>) -> Result<LearnerSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_at(&text, path)
}

/// TOML text that [`parse_spec`] reads back as `spec`.
pub fn render_spec(spec: &LearnerSpec) -> String {
    toml::to_string(&spec_to_composite(spec)).expect("spec tree serializes")
}

pub fn write_spec_file(spec: &LearnerSpec, path: impl AsRef<Path>, header: &str) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for line in header.lines() {
        text.push('#');
        if !line.is_empty() {
            text.push(' ');
            text.push_str(line);
        }
        text.push('\n');
    }
    if !header.is_empty() {
        text.push('\n');
    }
    text.push_str(&render_spec(spec));
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
