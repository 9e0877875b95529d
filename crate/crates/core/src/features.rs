//! Random-forest impurity importance and top-k feature selection.
//!
//! Trees split by maximum variance reduction over a per-node random feature
//! subset, on bootstrap samples when enabled. Importance is mean decrease in
//! impurity: every split credits its summed squared-error reduction to the
//! split feature; totals are normalized to sum to one.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::frame::Frame;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot fit a forest on an empty frame")]
    EmptyFrame,
    #[error("invalid forest config: {0}")]
    InvalidConfig(String),
    #[error("k = {k} exceeds the {p} available features")]
    KTooLarge { k: usize, p: usize },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Features considered per split; `None` means ceil(p / 3).
    pub features_per_split: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 12,
            min_samples_leaf: 5,
            features_per_split: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

enum FNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

pub struct ForestTree {
    nodes: Vec<FNode>,
    /// Summed SSE reduction credited to each feature by this tree's splits.
    gains: Vec<f64>,
}

impl ForestTree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                FNode::Leaf { value } => return *value,
                FNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] < *threshold { *left } else { *right },
            }
        }
    }
}

pub struct Forest {
    pub columns: Vec<String>,
    trees: Vec<ForestTree>,
}

impl Forest {
    pub fn trees(&self) -> &[ForestTree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

struct TreeBuilder<'a> {
    x: &'a [f64],
    y: &'a [f64],
    p: usize,
    cfg: &'a ForestConfig,
    features_per_split: usize,
    nodes: Vec<FNode>,
    gains: Vec<f64>,
}

impl TreeBuilder<'_> {
    /// Recursively grow; `rows` is this node's sample (indices into the frame).
    fn grow(&mut self, rows: &mut Vec<u32>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&r| self.y[r as usize]).sum();
        let sum_sq: f64 = rows
            .iter()
            .map(|&r| self.y[r as usize] * self.y[r as usize])
            .sum();
        let node_sse = sum_sq - sum * sum / n as f64;
        let mean = sum / n as f64;

        if depth >= self.cfg.max_depth || n < 2 * self.cfg.min_samples_leaf || node_sse <= 0.0 {
            self.nodes.push(FNode::Leaf { value: mean });
            return self.nodes.len() - 1;
        }

        let feats: Vec<usize> = if self.features_per_split >= self.p {
            (0..self.p).collect()
        } else {
            let mut f: Vec<usize> =
                rand::seq::index::sample(rng, self.p, self.features_per_split).into_vec();
            f.sort_unstable();
            f
        };

        let mut best: Option<(f64, usize, f64)> = None; // (reduction, feature, threshold)
        let mut order: Vec<u32> = Vec::with_capacity(n);
        for &f in &feats {
            order.clone_from(rows);
            order.sort_by(|&a, &b| {
                self.x[a as usize * self.p + f]
                    .total_cmp(&self.x[b as usize * self.p + f])
                    .then(a.cmp(&b))
            });
            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for (i, &r) in order.iter().enumerate() {
                let v = self.x[r as usize * self.p + f];
                if i > 0 {
                    let prev = self.x[order[i - 1] as usize * self.p + f];
                    if v > prev
                        && i >= self.cfg.min_samples_leaf
                        && n - i >= self.cfg.min_samples_leaf
                    {
                        let nl = i as f64;
                        let nr = (n - i) as f64;
                        let right_sum = sum - left_sum;
                        let right_sq = sum_sq - left_sq;
                        let sse_l = left_sq - left_sum * left_sum / nl;
                        let sse_r = right_sq - right_sum * right_sum / nr;
                        let reduction = node_sse - sse_l - sse_r;
                        let better = match best {
                            None => reduction > 0.0,
                            Some((b, _, _)) => reduction > b,
                        };
                        if better && reduction > 0.0 {
                            best = Some((reduction, f, 0.5 * (prev + v)));
                        }
                    }
                }
                left_sum += self.y[r as usize];
                left_sq += self.y[r as usize] * self.y[r as usize];
            }
        }

        match best {
            None => {
                self.nodes.push(FNode::Leaf { value: mean });
                self.nodes.len() - 1
            }
            Some((reduction, feature, threshold)) => {
                self.gains[feature] += reduction;
                let (mut left_rows, mut right_rows): (Vec<u32>, Vec<u32>) = rows
                    .iter()
                    .partition(|&&r| self.x[r as usize * self.p + feature] < threshold);
                rows.clear();
                rows.shrink_to_fit();
                let pos = self.nodes.len();
                self.nodes.push(FNode::Leaf { value: mean }); // placeholder
                let left = self.grow(&mut left_rows, depth + 1, rng);
                let right = self.grow(&mut right_rows, depth + 1, rng);
                self.nodes[pos] = FNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                pos
            }
        }
    }
}

/// Fit `n_trees` regression trees, each on its own bootstrap sample when
/// enabled. Per-tree RNG streams derive from the master seed, so the result
/// does not depend on evaluation order.
pub fn fit_forest(frame: &Frame, cfg: &ForestConfig) -> Result<Forest, FeatureError> {
    if frame.n_rows() == 0 || frame.n_features() == 0 {
        return Err(FeatureError::EmptyFrame);
    }
    if cfg.n_trees == 0 {
        return Err(FeatureError::InvalidConfig("n_trees must be >= 1".to_string()));
    }
    let p = frame.n_features();
    let fps = cfg.features_per_split.unwrap_or_else(|| p.div_ceil(3));
    if fps == 0 || fps > p {
        return Err(FeatureError::InvalidConfig(format!(
            "features_per_split {fps} not in [1, {p}]"
        )));
    }

    let n = frame.n_rows();
    let trees: Vec<ForestTree> = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64 + 1);
            let mut rows: Vec<u32> = if cfg.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
            } else {
                (0..n as u32).collect()
            };
            let mut builder = TreeBuilder {
                x: frame.x(),
                y: frame.y(),
                p,
                cfg,
                features_per_split: fps,
                nodes: Vec::new(),
                gains: vec![0.0; p],
            };
            builder.grow(&mut rows, 0, &mut rng);
            ForestTree {
                nodes: builder.nodes,
                gains: builder.gains,
            }
        })
        .collect();

    Ok(Forest {
        columns: frame.columns().to_vec(),
        trees,
    })
}

/// Per-feature importance scores, normalized to sum to one.
#[derive(Debug, Clone)]
pub struct ImportanceReport {
    pub features: Vec<String>,
    pub scores: Vec<f64>,
    /// Feature indices sorted by descending score; ties keep column order.
    pub ranking: Vec<usize>,
    /// True when no tree ever split (all scores zero).
    pub degenerate: bool,
}

impl ImportanceReport {
    /// Two-column CSV, in rank order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("feature,score\n");
        for &i in &self.ranking {
            s.push_str(&format!("{},{:.6}\n", self.features[i], self.scores[i]));
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), FeatureError> {
        std::fs::write(path, self.to_csv()).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Aggregate split gains across trees into normalized importance scores.
pub fn impurity_importance(forest: &Forest) -> ImportanceReport {
    let p = forest.columns.len();
    let mut totals = vec![0.0; p];
    for tree in &forest.trees {
        for (j, g) in tree.gains.iter().enumerate() {
            totals[j] += g;
        }
    }
    let sum: f64 = totals.iter().sum();
    let degenerate = sum <= 0.0;
    if !degenerate {
        for t in totals.iter_mut() {
            *t /= sum;
        }
    }
    let mut ranking: Vec<usize> = (0..p).collect();
    ranking.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
    ImportanceReport {
        features: forest.columns.clone(),
        scores: totals,
        ranking,
        degenerate,
    }
}

/// The `k` highest-ranked feature names, in rank order.
pub fn select_top_k(report: &ImportanceReport, k: usize) -> Result<Vec<String>, FeatureError> {
    if k > report.features.len() {
        return Err(FeatureError::KTooLarge {
            k,
            p: report.features.len(),
        });
    }
    Ok(report.ranking[..k]
        .iter()
        .map(|&i| report.features[i].clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use rand::Rng;

    fn frame(columns: &[&str], x: Vec<f64>, y: Vec<f64>) -> Frame {
        let keys = (0..y.len())
            .map(|i| {
                NaiveDate::from_ymd_opt(2018, 1, 1)
                    .unwrap()
                    .and_hms_opt(7, 0, 0)
                    .unwrap()
                    + chrono::Duration::minutes(i as i64)
            })
            .collect();
        Frame::new(columns.iter().map(|s| s.to_string()).collect(), x, y, keys).unwrap()
    }

    fn signal_noise_frame(n: usize, seed: u64) -> Frame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::with_capacity(n * 2);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let a = rng.gen_range(-2.0..2.0);
            let b = rng.gen_range(-2.0..2.0);
            x.extend([a, b]);
            y.push(3.0 * a);
        }
        frame(&["a", "b"], x, y)
    }

    #[test]
    fn zero_variance_target_yields_single_leaves() {
        let f = frame(
            &["a"],
            (0..30).map(|i| i as f64).collect(),
            vec![0.0; 30],
        );
        let forest = fit_forest(&f, &ForestConfig::default()).unwrap();
        for t in forest.trees() {
            assert_eq!(t.nodes.len(), 1);
            assert_eq!(t.predict_row(&[5.0]), 0.0);
        }
        let report = impurity_importance(&forest);
        assert!(report.degenerate);
        assert!(report.scores.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn signal_feature_outranks_noise() {
        let f = signal_noise_frame(200, 3);
        let forest = fit_forest(
            &f,
            &ForestConfig {
                n_trees: 20,
                features_per_split: Some(2),
                ..ForestConfig::default()
            },
        )
        .unwrap();
        let report = impurity_importance(&forest);
        let ia = report.scores[0];
        let ib = report.scores[1];
        assert!(ia > ib, "signal {ia} vs noise {ib}");
        assert!((report.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(report.ranking[0], 0);
    }

    #[test]
    fn fixed_seed_reproduces_forest() {
        let f = signal_noise_frame(100, 4);
        let cfg = ForestConfig {
            n_trees: 8,
            ..ForestConfig::default()
        };
        let r1 = impurity_importance(&fit_forest(&f, &cfg).unwrap());
        let r2 = impurity_importance(&fit_forest(&f, &cfg).unwrap());
        assert_eq!(r1.scores, r2.scores);
    }

    #[test]
    fn deterministic_without_bootstrap_and_full_features() {
        let f = signal_noise_frame(80, 5);
        let mk = |seed| ForestConfig {
            n_trees: 3,
            bootstrap: false,
            features_per_split: Some(2),
            seed,
            ..ForestConfig::default()
        };
        let a = impurity_importance(&fit_forest(&f, &mk(1)).unwrap());
        let b = impurity_importance(&fit_forest(&f, &mk(77)).unwrap());
        assert_eq!(a.scores, b.scores);
    }

    #[test]
    fn top_k_selection_and_bounds() {
        let f = signal_noise_frame(150, 6);
        let forest = fit_forest(&f, &ForestConfig::default()).unwrap();
        let report = impurity_importance(&forest);
        assert_eq!(select_top_k(&report, 2).unwrap().len(), 2);
        assert_eq!(select_top_k(&report, 1).unwrap(), vec!["a".to_string()]);
        assert!(matches!(
            select_top_k(&report, 3),
            Err(FeatureError::KTooLarge { k: 3, p: 2 })
        ));
    }

    #[test]
    fn tied_scores_prefer_earlier_column() {
        let report = ImportanceReport {
            features: vec!["x".into(), "y".into(), "z".into()],
            scores: vec![0.25, 0.5, 0.25],
            ranking: {
                let totals: [f64; 3] = [0.25, 0.5, 0.25];
                let mut r: Vec<usize> = (0..3).collect();
                r.sort_by(|&a, &b| totals[b].total_cmp(&totals[a]).then(a.cmp(&b)));
                r
            },
            degenerate: false,
        };
        assert_eq!(select_top_k(&report, 2).unwrap(), vec!["y".to_string(), "x".to_string()]);
    }

    #[test]
    fn duplicated_column_splits_the_credit() {
        // A duplicated signal column divides its importance; the family sum
        // should land near the single-column importance. The 20% tolerance
        // was frozen after running this exact setup.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 200;
        let mut xs = Vec::with_capacity(n * 3);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let a = rng.gen_range(-2.0..2.0);
            let b1 = rng.gen_range(-2.0..2.0);
            let b2 = rng.gen_range(-2.0..2.0);
            xs.extend([a, b1, b2]);
            y.push(3.0 * a + 0.3 * rng.gen_range(-1.0..1.0));
        }
        let single = frame(
            &["a", "b1", "b2"],
            xs.clone(),
            y.clone(),
        );
        let mut xd = Vec::with_capacity(n * 4);
        for i in 0..n {
            let row = &xs[i * 3..(i + 1) * 3];
            xd.extend([row[0], row[0], row[1], row[2]]);
        }
        let dup = frame(&["a", "a2", "b1", "b2"], xd, y);

        let cfg = ForestConfig {
            features_per_split: Some(2),
            seed: 5,
            ..ForestConfig::default()
        };
        let r_single = impurity_importance(&fit_forest(&single, &cfg).unwrap());
        let r_dup = impurity_importance(&fit_forest(&dup, &cfg).unwrap());
        let base = r_single.scores[0];
        let family = r_dup.scores[0] + r_dup.scores[1];
        assert!(r_dup.scores[0] > 0.0 && r_dup.scores[1] > 0.0, "{:?}", r_dup.scores);
        assert!(
            (family - base).abs() <= 0.2 * base,
            "family {family} vs single {base}"
        );
    }

    #[test]
    fn empty_frame_is_rejected() {
        let f = frame(&["a"], vec![], vec![]);
        assert!(matches!(
            fit_forest(&f, &ForestConfig::default()),
            Err(FeatureError::EmptyFrame)
        ));
    }

    #[test]
    fn column_permutation_permutes_report() {
        // With all features in play at every split, column order only
        // matters through the documented tie rule. Ties need two features
        // that partition a node identically, so keep nodes large enough
        // that continuous data cannot produce one.
        let f = signal_noise_frame(120, 9);
        let swapped = f.select_columns(&["b".to_string(), "a".to_string()]).unwrap();
        let cfg = ForestConfig {
            n_trees: 10,
            max_depth: 3,
            min_samples_leaf: 10,
            features_per_split: Some(2),
            ..ForestConfig::default()
        };
        let r1 = impurity_importance(&fit_forest(&f, &cfg).unwrap());
        let r2 = impurity_importance(&fit_forest(&swapped, &cfg).unwrap());
        assert!((r1.scores[0] - r2.scores[1]).abs() < 1e-12, "{:?} vs {:?}", r1.scores, r2.scores);
        assert!((r1.scores[1] - r2.scores[0]).abs() < 1e-12, "{:?} vs {:?}", r1.scores, r2.scores);
    }
}
