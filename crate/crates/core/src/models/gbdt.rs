//! Gradient-boosted regression trees with exact greedy split search.
//!
//! Squared-error objective: per-round gradients are `pred - y` and hessians
//! are 1. Each feature is pre-sorted once per fit; candidate splits are
//! scored by scanning prefix sums of gradient and hessian totals, with
//!
//! ```text
//! gain = 0.5 * [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma
//! ```
//!
//! A split is kept only when its gain is positive and both children carry at
//! least `min_child_weight` hessian mass. Leaf weights are `-G/(H+lambda)`.
//! Thresholds sit at the midpoint of adjacent distinct values; gain ties go
//! to the lower feature index, then the lower threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frame::Frame;
use crate::models::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_rounds: usize,
    pub eta: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub subsample: f64,
    pub colsample: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    /// The boosting library's stock regression settings: eta 0.3, depth 6,
    /// min_child_weight 1, lambda 1, no gamma, no subsampling.
    fn default() -> Self {
        GbdtConfig {
            n_rounds: 100,
            eta: 0.3,
            max_depth: 6,
            min_child_weight: 1.0,
            lambda: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            colsample: 1.0,
            seed: 0,
        }
    }
}

impl GbdtConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta {} not in (0, 1]", self.eta));
        }
        if self.min_child_weight < 0.0 {
            return bad(format!("min_child_weight {} < 0", self.min_child_weight));
        }
        if self.lambda < 0.0 {
            return bad(format!("lambda {} < 0", self.lambda));
        }
        if self.gamma < 0.0 {
            return bad(format!("gamma {} < 0", self.gamma));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad(format!("subsample {} not in (0, 1]", self.subsample));
        }
        if !(self.colsample > 0.0 && self.colsample <= 1.0) {
            return bad(format!("colsample {} not in (0, 1]", self.colsample));
        }
        Ok(())
    }
}

/// Named hyperparameter set.
#[derive(Debug, Clone)]
pub struct GbdtPreset {
    pub name: &'static str,
    pub config: GbdtConfig,
}

/// The four fixed hyperparameter sets the comparison runs against. The
/// flagship is `XGB-100` (100 rounds, depth 6, eta 0.1); the other three
/// trade rounds against learning rate and depth.
pub fn four_xgb_presets() -> Vec<GbdtPreset> {
    vec![
        GbdtPreset {
            name: "XGB-100",
            config: GbdtConfig::default(),
        },
        GbdtPreset {
            name: "XGB-50",
            config: GbdtConfig {
                n_rounds: 50,
                eta: 0.2,
                max_depth: 4,
                ..GbdtConfig::default()
            },
        },
        GbdtPreset {
            name: "XGB-200",
            config: GbdtConfig {
                n_rounds: 200,
                eta: 0.05,
                max_depth: 6,
                ..GbdtConfig::default()
            },
        },
        GbdtPreset {
            name: "XGB-100-DEEP",
            config: GbdtConfig {
                n_rounds: 100,
                eta: 0.1,
                max_depth: 9,
                min_child_weight: 3.0,
                ..GbdtConfig::default()
            },
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        weight: f64,
    },
}

/// One axis-aligned regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { weight } => return *weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature as usize] < *threshold {
                        *left as usize
                    } else {
                        *right as usize
                    };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// Staged additive model: prediction = base_score + eta * sum of tree outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub columns: Vec<String>,
    pub base_score: f64,
    pub eta: f64,
    pub trees: Vec<RegressionTree>,
}

impl BoostedEnsemble {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base_score + self.eta * self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>()
    }

    /// Prediction using only the first `rounds` trees.
    pub fn predict_row_staged(&self, row: &[f64], rounds: usize) -> f64 {
        self.base_score
            + self.eta
                * self.trees[..rounds.min(self.trees.len())]
                    .iter()
                    .map(|t| t.predict_row(row))
                    .sum::<f64>()
    }
}

pub fn predict_gbdt(model: &BoostedEnsemble, frame: &Frame) -> Result<Vec<f64>, ModelError> {
    if frame.columns() != model.columns.as_slice() {
        return Err(ModelError::FeatureMismatch {
            expected: model.columns.clone(),
            found: frame.columns().to_vec(),
        });
    }
    Ok((0..frame.n_rows())
        .map(|i| model.predict_row(frame.row(i)))
        .collect())
}

const NO_NODE: u32 = u32::MAX;

/// Per-frontier-node accumulator during one level of tree growth.
struct FrontierNode {
    tree_pos: usize,
    grad_sum: f64,
    hess_sum: f64,
    count: u32,
    entry_start: usize,
    best: Option<Candidate>,
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// One in-sample row inside a feature's value-ordered list.
#[derive(Clone, Copy)]
struct Entry {
    row: u32,
    value: f64,
    grad: f64,
}

fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let parent = gl + gr;
    let hparent = hl + hr;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda)
        - parent * parent / (hparent + lambda))
        - gamma
}

/// Grow one tree on the sampled rows, level by level.
///
/// Each feature keeps a value-ordered entry list grouped by frontier node;
/// levels scan those lists sequentially and re-partition them for the next
/// level. Node gradient and hessian totals are accumulated in ascending row
/// order (not scan order) so identical row sets always produce bit-identical
/// leaf weights.
fn grow_tree(
    x: &[f64],
    p: usize,
    grad: &[f64],
    node_of_row: &mut [u32],
    row_output: &mut [f64],
    features: &[usize],
    sorted: &[(Vec<u32>, Vec<f64>)],
    cfg: &GbdtConfig,
) -> RegressionTree {
    let n = grad.len();
    let mut nodes: Vec<Node> = vec![Node::Leaf { weight: 0.0 }];

    let mut root = FrontierNode {
        tree_pos: 0,
        grad_sum: 0.0,
        hess_sum: 0.0,
        count: 0,
        entry_start: 0,
        best: None,
    };
    for (r, &slot) in node_of_row.iter().enumerate() {
        if slot != NO_NODE {
            root.grad_sum += grad[r];
            root.hess_sum += 1.0;
            root.count += 1;
        }
    }
    if root.count == 0 {
        return RegressionTree { nodes };
    }

    // Per-feature entry lists in value order, in-sample rows only.
    let mut lists: Vec<Vec<Entry>> = features
        .iter()
        .map(|&f| {
            let (idx, vals) = &sorted[f];
            idx.iter()
                .zip(vals)
                .filter(|(&r, _)| node_of_row[r as usize] != NO_NODE)
                .map(|(&r, &value)| Entry {
                    row: r,
                    value,
                    grad: grad[r as usize],
                })
                .collect()
        })
        .collect();

    let mut frontier = vec![root];

    for _depth in 0..cfg.max_depth {
        // Split search: each node's entries are contiguous and value-ordered.
        // Candidates merge in ascending feature order, matching the tie rule.
        let per_feature: Vec<Vec<Option<Candidate>>> = features
            .iter()
            .enumerate()
            .map(|(fi, &f)| {
                let list = &lists[fi];
                let mut bests: Vec<Option<Candidate>> = vec![None; frontier.len()];
                for (node, best) in frontier.iter().zip(bests.iter_mut()) {
                    let entries =
                        &list[node.entry_start..node.entry_start + node.count as usize];
                    let mut acc_g = 0.0;
                    let mut acc_h = 0.0;
                    let mut acc_n = 0u32;
                    let mut last_val = 0.0;
                    for e in entries {
                        if acc_n > 0 && e.value > last_val && acc_n < node.count {
                            let gr = node.grad_sum - acc_g;
                            let hr = node.hess_sum - acc_h;
                            if acc_h >= cfg.min_child_weight && hr >= cfg.min_child_weight {
                                let gain =
                                    split_gain(acc_g, acc_h, gr, hr, cfg.lambda, cfg.gamma);
                                let better = match best {
                                    None => gain > 0.0,
                                    Some(b) => gain > b.gain,
                                };
                                if better && gain > 0.0 {
                                    *best = Some(Candidate {
                                        gain,
                                        feature: f,
                                        threshold: 0.5 * (last_val + e.value),
                                    });
                                }
                            }
                        }
                        acc_g += e.grad;
                        acc_h += 1.0;
                        acc_n += 1;
                        last_val = e.value;
                    }
                }
                bests
            })
            .collect();
        for bests in &per_feature {
            for (node, cand) in frontier.iter_mut().zip(bests) {
                if let Some(c) = cand {
                    let better = match node.best {
                        None => true,
                        Some(b) => c.gain > b.gain,
                    };
                    if better {
                        node.best = Some(*c);
                    }
                }
            }
        }

        // Materialize splits; everything else becomes a leaf.
        enum Decision {
            Leaf { weight: f64 },
            Split {
                feature: usize,
                threshold: f64,
                left_slot: u32,
                right_slot: u32,
            },
        }
        let mut next: Vec<FrontierNode> = Vec::new();
        let mut decisions: Vec<Decision> = Vec::with_capacity(frontier.len());
        for node in &frontier {
            match node.best {
                Some(c) => {
                    let left_pos = nodes.len();
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes.push(Node::Leaf { weight: 0.0 });
                    nodes[node.tree_pos] = Node::Split {
                        feature: c.feature as u32,
                        threshold: c.threshold,
                        left: left_pos as u32,
                        right: (left_pos + 1) as u32,
                    };
                    let left_slot = next.len() as u32;
                    for offset in 0..2 {
                        next.push(FrontierNode {
                            tree_pos: left_pos + offset,
                            grad_sum: 0.0,
                            hess_sum: 0.0,
                            count: 0,
                            entry_start: 0,
                            best: None,
                        });
                    }
                    decisions.push(Decision::Split {
                        feature: c.feature,
                        threshold: c.threshold,
                        left_slot,
                        right_slot: left_slot + 1,
                    });
                }
                None => {
                    let weight = -node.grad_sum / (node.hess_sum + cfg.lambda);
                    nodes[node.tree_pos] = Node::Leaf { weight };
                    decisions.push(Decision::Leaf { weight });
                }
            }
        }
        if next.is_empty() {
            for r in 0..n {
                let slot = node_of_row[r];
                if slot != NO_NODE {
                    if let Decision::Leaf { weight } = decisions[slot as usize] {
                        row_output[r] = weight;
                    }
                    node_of_row[r] = NO_NODE;
                }
            }
            return RegressionTree { nodes };
        }

        // Partition rows in ascending row order, accumulating child stats.
        for r in 0..n {
            let slot = node_of_row[r];
            if slot == NO_NODE {
                continue;
            }
            match &decisions[slot as usize] {
                Decision::Leaf { weight } => {
                    row_output[r] = *weight;
                    node_of_row[r] = NO_NODE;
                }
                Decision::Split {
                    feature,
                    threshold,
                    left_slot,
                    right_slot,
                } => {
                    let child = if x[r * p + feature] < *threshold {
                        *left_slot
                    } else {
                        *right_slot
                    };
                    node_of_row[r] = child;
                    let c = &mut next[child as usize];
                    c.grad_sum += grad[r];
                    c.hess_sum += 1.0;
                    c.count += 1;
                }
            }
        }

        // Lay out next-level entry ranges, then stable-partition each
        // feature's list into them, preserving value order per child.
        let mut offset = 0usize;
        for child in next.iter_mut() {
            child.entry_start = offset;
            offset += child.count as usize;
        }
        let total = offset;
        let starts: Vec<usize> = next.iter().map(|c| c.entry_start).collect();
        lists.iter_mut().for_each(|list| {
            let mut scratch = Vec::with_capacity(total);
            scratch.resize(
                total,
                Entry {
                    row: 0,
                    value: 0.0,
                    grad: 0.0,
                },
            );
            let mut cursors = starts.clone();
            for e in list.iter() {
                let slot = node_of_row[e.row as usize];
                if slot == NO_NODE {
                    continue;
                }
                scratch[cursors[slot as usize]] = *e;
                cursors[slot as usize] += 1;
            }
            *list = scratch;
        });

        frontier = next;
    }

    // Depth limit reached: finalize whatever is left.
    let mut weights: Vec<f64> = Vec::with_capacity(frontier.len());
    for node in &frontier {
        let weight = -node.grad_sum / (node.hess_sum + cfg.lambda);
        nodes[node.tree_pos] = Node::Leaf { weight };
        weights.push(weight);
    }
    for r in 0..n {
        let slot = node_of_row[r];
        if slot != NO_NODE {
            row_output[r] = weights[slot as usize];
            node_of_row[r] = NO_NODE;
        }
    }
    RegressionTree { nodes }
}

/// Fit a boosted ensemble with exact greedy split search.
///
/// With `subsample == colsample == 1` no randomness is consumed, so the
/// result is independent of the seed.
pub fn fit_gbdt(train: &Frame, cfg: &GbdtConfig) -> Result<BoostedEnsemble, ModelError> {
    cfg.validate()?;
    let n = train.n_rows();
    let p = train.n_features();
    if n < 2 {
        return Err(ModelError::InsufficientRows {
            needed: 2,
            found: n,
        });
    }

    let x = train.x();
    let y = train.y();
    // Sort each feature once; values ride along so per-round list builds
    // read them contiguously.
    let sorted: Vec<(Vec<u32>, Vec<f64>)> = (0..p)
        .map(|j| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| {
                x[a as usize * p + j]
                    .total_cmp(&x[b as usize * p + j])
                    .then(a.cmp(&b))
            });
            let vals: Vec<f64> = idx.iter().map(|&r| x[r as usize * p + j]).collect();
            (idx, vals)
        })
        .collect();

    let base_score = y.iter().sum::<f64>() / n as f64;
    let mut preds = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut node_of_row = vec![0u32; n];
    let mut in_sample = vec![true; n];
    let mut row_output = vec![0.0; n];

    let needs_rng = cfg.subsample < 1.0 || cfg.colsample < 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut trees = Vec::with_capacity(cfg.n_rounds);
    for _round in 0..cfg.n_rounds {
        for i in 0..n {
            grad[i] = preds[i] - y[i];
        }

        if needs_rng && cfg.subsample < 1.0 {
            let k = ((n as f64 * cfg.subsample).round() as usize).clamp(1, n);
            node_of_row.iter_mut().for_each(|s| *s = NO_NODE);
            in_sample.iter_mut().for_each(|m| *m = false);
            for i in rand::seq::index::sample(&mut rng, n, k) {
                node_of_row[i] = 0;
                in_sample[i] = true;
            }
        } else {
            node_of_row.iter_mut().for_each(|s| *s = 0);
            in_sample.iter_mut().for_each(|m| *m = true);
        }

        let features: Vec<usize> = if needs_rng && cfg.colsample < 1.0 {
            let k = ((p as f64 * cfg.colsample).round() as usize).clamp(1, p);
            let mut f: Vec<usize> = rand::seq::index::sample(&mut rng, p, k).into_vec();
            f.sort_unstable();
            f
        } else {
            (0..p).collect()
        };

        let tree = grow_tree(
            x,
            p,
            &grad,
            &mut node_of_row,
            &mut row_output,
            &features,
            &sorted,
            cfg,
        );
        // In-sample rows already know their leaf; the rest traverse.
        for i in 0..n {
            let out = if in_sample[i] {
                row_output[i]
            } else {
                tree.predict_row(train.row(i))
            };
            preds[i] += cfg.eta * out;
        }
        trees.push(tree);
    }

    Ok(BoostedEnsemble {
        columns: train.columns().to_vec(),
        base_score,
        eta: cfg.eta,
        trees,
    })
}
