//! Versioned JSON documents for trained models.
//!
//! Every document carries `"format": 1` and a `"kind"` of `mlp`, `tree` or
//! `policy`. Floats are written in shortest round-trip form and parsed at
//! full precision, so a reloaded model predicts bit-identically.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use shiftguard_core::learn::{ActorCritic, DecisionTree, Head, Layer, Mlp, Node};
use shiftguard_core::TransformSpec;

use crate::io::write_atomic;

pub const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LayerDoc {
    inputs: usize,
    outputs: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum HeadDoc {
    Linear,
    Softmax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MlpDoc {
    head: HeadDoc,
    layers: Vec<LayerDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum NodeDoc {
    Leaf {
        p1: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A trained model of any persisted kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Mlp(Mlp),
    Tree {
        tree: DecisionTree,
        /// Batch fraction above which the gate fires.
        threshold: f64,
        auroc: Option<f64>,
    },
    Policy {
        model: ActorCritic,
        /// Action library the policy's outputs index, in order.
        actions: Vec<TransformSpec>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Body {
    Mlp(MlpDoc),
    Tree {
        features: usize,
        max_depth: usize,
        threshold: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        auroc: Option<f64>,
        nodes: Vec<NodeDoc>,
    },
    Policy {
        actions: Vec<String>,
        input_mean: Vec<f64>,
        input_scale: Vec<f64>,
        actor: MlpDoc,
        critic: MlpDoc,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct Document {
    format: u32,
    #[serde(flatten)]
    body: Body,
}

fn mlp_doc(net: &Mlp) -> MlpDoc {
    MlpDoc {
        head: match net.head() {
            Head::Linear => HeadDoc::Linear,
            Head::Softmax => HeadDoc::Softmax,
        },
        layers: net
            .layers()
            .iter()
            .map(|l| LayerDoc {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: l.weights.clone(),
                bias: l.bias.clone(),
            })
            .collect(),
    }
}

fn mlp_from(doc: MlpDoc) -> anyhow::Result<Mlp> {
    let head = match doc.head {
        HeadDoc::Linear => Head::Linear,
        HeadDoc::Softmax => Head::Softmax,
    };
    let layers = doc
        .layers
        .into_iter()
        .map(|l| Layer {
            inputs: l.inputs,
            outputs: l.outputs,
            weights: l.weights,
            bias: l.bias,
        })
        .collect();
    Ok(Mlp::from_layers(layers, head)?)
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Mlp(_) => "mlp",
            Model::Tree { .. } => "tree",
            Model::Policy { .. } => "policy",
        }
    }

    fn document(&self) -> Document {
        let body = match self {
            Model::Mlp(net) => Body::Mlp(mlp_doc(net)),
            Model::Tree { tree, threshold, auroc } => Body::Tree {
                features: tree.features(),
                max_depth: tree.max_depth(),
                threshold: *threshold,
                auroc: *auroc,
                nodes: tree
                    .nodes()
                    .iter()
                    .map(|n| match *n {
                        Node::Leaf { p1, samples } => NodeDoc::Leaf { p1, samples },
                        Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => NodeDoc::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        },
                    })
                    .collect(),
            },
            Model::Policy { model, actions } => Body::Policy {
                actions: actions.iter().map(|a| a.to_string()).collect(),
                input_mean: model.input_mean.clone(),
                input_scale: model.input_scale.clone(),
                actor: mlp_doc(&model.actor),
                critic: mlp_doc(&model.critic),
            },
        };
        Document { format: FORMAT, body }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.document()).expect("model documents serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> anyhow::Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).context("model file is not JSON")?;
        match raw.get("format").and_then(|f| f.as_u64()) {
            Some(f) if f == u64::from(FORMAT) => {}
            Some(f) => bail!("unsupported model format {f}"),
            None => bail!("model file has no format version"),
        }
        let doc: Document = serde_json::from_value(raw).context("malformed model document")?;
        Ok(match doc.body {
            Body::Mlp(m) => Model::Mlp(mlp_from(m)?),
            Body::Tree {
                features,
                max_depth,
                threshold,
                auroc,
                nodes,
            } => {
                let nodes = nodes
                    .into_iter()
                    .map(|n| match n {
                        NodeDoc::Leaf { p1, samples } => Node::Leaf { p1, samples },
                        NodeDoc::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        } => Node::Split {
                            feature,
                            threshold,
                            left,
                            right,
                        },
                    })
                    .collect();
                Model::Tree {
                    tree: DecisionTree::from_nodes(nodes, features, max_depth)?,
                    threshold,
                    auroc,
                }
            }
            Body::Policy {
                actions,
                input_mean,
                input_scale,
                actor,
                critic,
            } => {
                let model = ActorCritic {
                    actor: mlp_from(actor)?,
                    critic: mlp_from(critic)?,
                    input_mean,
                    input_scale,
                };
                model.validate()?;
                let actions = actions
                    .iter()
                    .map(|a| TransformSpec::parse(a))
                    .collect::<Result<Vec<_>, _>>()?;
                if actions.len() != model.actor.output_dim() {
                    bail!(
                        "policy has {} outputs but lists {} actions",
                        model.actor.output_dim(),
                        actions.len()
                    );
                }
                Model::Policy { model, actions }
            }
        })
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        write_atomic(path, self.to_json().as_bytes()).with_context(|| format!("writing {}", path.display()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("loading model {}", path.display()))
    }

    pub fn into_mlp(self) -> anyhow::Result<Mlp> {
        match self {
            Model::Mlp(m) => Ok(m),
            other => bail!("expected an mlp model, found {}", other.kind()),
        }
    }

    pub fn into_tree(self) -> anyhow::Result<(DecisionTree, f64)> {
        match self {
            Model::Tree { tree, threshold, .. } => Ok((tree, threshold)),
            other => bail!("expected a tree model, found {}", other.kind()),
        }
    }

    pub fn into_policy(self) -> anyhow::Result<(ActorCritic, Vec<TransformSpec>)> {
        match self {
            Model::Policy { model, actions } => Ok((model, actions)),
            other => bail!("expected a policy model, found {}", other.kind()),
        }
    }
}
