//! Point-prediction sources: a minimal gradient-boosted regression-tree
//! learner (squared error, exact greedy splits) and ingestion of externally
//! computed predictions.
//!
//! The learner trades speed for determinism: splits scan every midpoint of
//! consecutive sorted feature values, gain ties break toward the lowest
//! feature index and lowest threshold, and fitting is single-threaded. That
//! makes every model reproducible and lets tests check stumps against a
//! brute-force oracle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::InteractionTable;
use crate::error::{Error, Result};
use crate::exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbmLoss {
    SquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbmConfig {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub loss: GbmLoss,
}

impl Default for GbmConfig {
    /// 500 stages, learning rate 0.05, depth 6, squared error.
    fn default() -> Self {
        GbmConfig {
            n_stages: 500,
            learning_rate: 0.05,
            max_depth: 6,
            min_samples_leaf: 1,
            loss: GbmLoss::SquaredError,
        }
    }
}

impl GbmConfig {
    fn validate(&self) -> Result<()> {
        if self.n_stages == 0 {
            return Err(Error::Config("n_stages must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Config(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Config("min_samples_leaf must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary regression tree stored as a flat node array; node 0 is the root,
/// rows with `x[feature] <= threshold` descend left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

impl RegressionTree {
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut node = 0usize;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    /// Training-label mean; no shrinkage is applied to it.
    pub init_value: f64,
    pub trees: Vec<RegressionTree>,
    pub config: GbmConfig,
    pub n_features: usize,
}

struct SplitCandidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct TreeBuilder<'a> {
    features: &'a [Vec<f64>],
    targets: &'a [f64],
    max_depth: usize,
    min_samples_leaf: usize,
    nodes: Vec<TreeNode>,
}

impl<'a> TreeBuilder<'a> {
    /// Best exact-greedy split of `rows`, or `None` when no split strictly
    /// reduces the squared error. Gain is the variance-reduction form
    /// `(Σ_L)²/n_L + (Σ_R)²/n_R - (Σ)²/n`; candidates are midpoints of
    /// consecutive distinct sorted values. Lowest feature index and lowest
    /// threshold win exact ties because strict improvement is required.
    fn best_split(&self, rows: &[usize]) -> Option<SplitCandidate> {
        let n = rows.len();
        if n < 2 * self.min_samples_leaf {
            return None;
        }
        let total: f64 = rows.iter().map(|&r| self.targets[r]).sum();
        let parent_term = total * total / n as f64;

        let dim = self.features[0].len();
        let mut best: Option<SplitCandidate> = None;
        let mut order: Vec<usize> = rows.to_vec();
        for feature in 0..dim {
            order.sort_by(|&a, &b| {
                self.features[a][feature]
                    .total_cmp(&self.features[b][feature])
                    .then(a.cmp(&b))
            });
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += self.targets[order[i]];
                let a = self.features[order[i]][feature];
                let b = self.features[order[i + 1]][feature];
                if a == b {
                    continue;
                }
                let n_left = i + 1;
                let n_right = n - n_left;
                if n_left < self.min_samples_leaf || n_right < self.min_samples_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / n_left as f64
                    + right_sum * right_sum / n_right as f64
                    - parent_term;
                if best.as_ref().is_none_or(|c| gain > c.gain) {
                    let mut threshold = 0.5 * (a + b);
                    // Guard against the midpoint rounding up onto `b`, which
                    // would leak equal values to the left.
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(SplitCandidate {
                        gain,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best.filter(|c| c.gain > 0.0)
    }

    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let mean = rows.iter().map(|&r| self.targets[r]).sum::<f64>() / rows.len() as f64;
        if depth >= self.max_depth {
            self.nodes.push(TreeNode::Leaf { value: mean });
            return self.nodes.len() - 1;
        }
        let Some(split) = self.best_split(rows) else {
            self.nodes.push(TreeNode::Leaf { value: mean });
            return self.nodes.len() - 1;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| self.features[r][split.feature] <= split.threshold);
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let index = self.nodes.len();
        self.nodes.push(TreeNode::Leaf { value: 0.0 }); // placeholder
        let left = self.build(&left_rows, depth + 1);
        let right = self.build(&right_rows, depth + 1);
        self.nodes[index] = TreeNode::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        index
    }
}

fn fit_tree(
    features: &[Vec<f64>],
    targets: &[f64],
    max_depth: usize,
    min_samples_leaf: usize,
) -> RegressionTree {
    let mut builder = TreeBuilder {
        features,
        targets,
        max_depth,
        min_samples_leaf,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..targets.len()).collect();
    let root = builder.build(&rows, 0);
    debug_assert_eq!(root, 0);
    RegressionTree {
        nodes: builder.nodes,
    }
}

/// Fits squared-error gradient boosting: stage `t` fits a least-squares tree
/// to the residuals `y - F_{t-1}(x)` and is added with the learning rate.
pub fn fit_gbm(features: &[Vec<f64>], labels: &[f64], config: &GbmConfig) -> Result<GbmModel> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::Validation("no training rows".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} feature rows but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let dim = features[0].len();
    for (i, row) in features.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Validation(format!(
                "feature row {i} has dimension {}, expected {dim}",
                row.len()
            )));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("non-finite feature in row {i}")));
        }
    }
    if labels.iter().any(|y| !y.is_finite()) {
        return Err(Error::Validation("non-finite label".into()));
    }

    let init_value = labels.iter().sum::<f64>() / labels.len() as f64;
    let mut residuals: Vec<f64> = labels.iter().map(|y| y - init_value).collect();
    let mut trees = Vec::with_capacity(config.n_stages);
    for _ in 0..config.n_stages {
        let tree = fit_tree(features, &residuals, config.max_depth, config.min_samples_leaf);
        for (r, x) in residuals.iter_mut().zip(features) {
            *r -= config.learning_rate * tree.evaluate(x);
        }
        trees.push(tree);
    }
    Ok(GbmModel {
        init_value,
        trees,
        config: *config,
        n_features: dim,
    })
}

impl GbmModel {
    fn check_dim(&self, features: &[Vec<f64>]) -> Result<()> {
        for (i, row) in features.iter().enumerate() {
            if row.len() != self.n_features {
                return Err(Error::Validation(format!(
                    "feature row {i} has dimension {}, model expects {}",
                    row.len(),
                    self.n_features
                )));
            }
        }
        Ok(())
    }

    pub fn predict_one(&self, x: &[f64]) -> f64 {
        self.init_value
            + self.config.learning_rate * self.trees.iter().map(|t| t.evaluate(x)).sum::<f64>()
    }

    /// Prediction using only the first `stages` trees.
    pub fn predict_one_staged(&self, x: &[f64], stages: usize) -> f64 {
        self.init_value
            + self.config.learning_rate
                * self.trees[..stages.min(self.trees.len())]
                    .iter()
                    .map(|t| t.evaluate(x))
                    .sum::<f64>()
    }
}

/// Batch prediction, parallel across rows with output in input order.
pub fn predict(model: &GbmModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    model.check_dim(features)?;
    Ok(exec::map_ordered(features, |x| model.predict_one(x)))
}

/// Attaches externally computed predictions to every record of `table`.
///
/// Every row without a prediction must be covered by `predictions` (the
/// first 10 missing pairs are listed otherwise). Rows that already carry a
/// prediction are only overwritten when `overwrite` is set; supplying a new
/// value for them without the flag is refused.
pub fn attach_external_predictions(
    table: &InteractionTable,
    predictions: &BTreeMap<(String, String), f64>,
    overwrite: bool,
) -> Result<InteractionTable> {
    let mut missing: Vec<String> = Vec::new();
    let mut would_overwrite: Vec<String> = Vec::new();
    for rec in table.records() {
        let key = (rec.drug.token.clone(), rec.protein.token.clone());
        let supplied = predictions.contains_key(&key);
        match (rec.prediction.is_some(), supplied) {
            (false, false) => missing.push(format!("({}, {})", key.0, key.1)),
            (true, true) if !overwrite => {
                would_overwrite.push(format!("({}, {})", key.0, key.1))
            }
            _ => {}
        }
    }
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(10).cloned().collect();
        return Err(Error::Validation(format!(
            "predictions file misses {} pair(s), first {}: {}",
            missing.len(),
            shown.len(),
            shown.join(", ")
        )));
    }
    if !would_overwrite.is_empty() {
        return Err(Error::Validation(format!(
            "{} row(s) already have predictions (first: {}); pass the overwrite flag to replace them",
            would_overwrite.len(),
            would_overwrite[0]
        )));
    }

    let records = table
        .records()
        .iter()
        .map(|rec| {
            let mut rec = rec.clone();
            let key = (rec.drug.token.clone(), rec.protein.token.clone());
            if let Some(&value) = predictions.get(&key) {
                if rec.prediction.is_none() || overwrite {
                    rec.prediction = Some(value);
                }
            }
            rec
        })
        .collect();
    InteractionTable::new(records)
}

#[cfg(test)]
mod tests {
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::data::InteractionRecord;

    use super::*;

    fn small_config(stages: usize, lr: f64, depth: usize) -> GbmConfig {
        GbmConfig {
            n_stages: stages,
            learning_rate: lr,
            max_depth: depth,
            ..GbmConfig::default()
        }
    }

    #[test]
    fn defaults_match_reference_configuration() {
        let c = GbmConfig::default();
        assert_eq!(c.n_stages, 500);
        assert_eq!(c.learning_rate, 0.05);
        assert_eq!(c.max_depth, 6);
        assert_eq!(c.min_samples_leaf, 1);
        assert_eq!(c.loss, GbmLoss::SquaredError);
    }

    #[test]
    fn constant_labels_predict_the_constant_exactly() {
        let features = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let labels = vec![2.5; 4];
        let model = fit_gbm(&features, &labels, &small_config(10, 0.05, 3)).unwrap();
        for p in predict(&model, &features).unwrap() {
            assert_eq!(p, 2.5);
        }
    }

    #[test]
    fn hand_computed_stump() {
        let features = vec![vec![0.0], vec![1.0]];
        let labels = vec![0.0, 1.0];
        let model = fit_gbm(&features, &labels, &small_config(1, 1.0, 1)).unwrap();
        assert_eq!(model.init_value, 0.5);
        assert_eq!(predict(&model, &features).unwrap(), vec![0.0, 1.0]);

        let shrunk = fit_gbm(&features, &labels, &small_config(1, 0.05, 1)).unwrap();
        assert_eq!(predict(&shrunk, &features).unwrap(), vec![0.475, 0.525]);
    }

    #[test]
    fn stage_mse_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 80;
        let features: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        let labels: Vec<f64> = features
            .iter()
            .map(|x| x[0] * 3.0 + x[1] * x[1] + 0.1 * rng.random::<f64>())
            .collect();
        let config = small_config(40, 0.1, 3);
        let model = fit_gbm(&features, &labels, &config).unwrap();
        let mut last = f64::INFINITY;
        for stage in 0..=config.n_stages {
            let mse: f64 = features
                .iter()
                .zip(&labels)
                .map(|(x, y)| {
                    let p = model.predict_one_staged(x, stage);
                    (y - p) * (y - p)
                })
                .sum::<f64>()
                / n as f64;
            assert!(
                mse <= last * (1.0 + 1e-12) + 1e-15,
                "MSE rose at stage {stage}: {last} -> {mse}"
            );
            last = mse;
        }
    }

    /// Brute-force best stump: scans every (feature, midpoint) pair, computes
    /// both sides' SSE directly, and applies the same tie rule.
    fn oracle_stump(features: &[Vec<f64>], targets: &[f64]) -> (usize, f64, f64, f64) {
        let n = features.len();
        let dim = features[0].len();
        let sse = |rows: &[usize]| -> f64 {
            let mean = rows.iter().map(|&r| targets[r]).sum::<f64>() / rows.len() as f64;
            rows.iter().map(|&r| (targets[r] - mean).powi(2)).sum()
        };
        let all: Vec<usize> = (0..n).collect();
        let parent = sse(&all);
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..dim {
            let mut values: Vec<f64> = features.iter().map(|x| x[f]).collect();
            values.sort_unstable_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let mut t = 0.5 * (w[0] + w[1]);
                if t >= w[1] {
                    t = w[0];
                }
                let left: Vec<usize> = (0..n).filter(|&r| features[r][f] <= t).collect();
                let right: Vec<usize> = (0..n).filter(|&r| features[r][f] > t).collect();
                if left.is_empty() || right.is_empty() {
                    continue;
                }
                let gain = parent - sse(&left) - sse(&right);
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, t));
                }
            }
        }
        let (_, f, t) = best.expect("some split exists");
        let left: Vec<usize> = (0..n).filter(|&r| features[r][f] <= t).collect();
        let right: Vec<usize> = (0..n).filter(|&r| features[r][f] > t).collect();
        let mean = |rows: &[usize]| rows.iter().map(|&r| targets[r]).sum::<f64>() / rows.len() as f64;
        (f, t, mean(&left), mean(&right))
    }

    #[test]
    fn depth1_single_stage_matches_brute_force_stump() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..10 {
            let n = rng.random_range(8..=64usize);
            let dim = rng.random_range(1..=4usize);
            let features: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random::<f64>() * 10.0).collect())
                .collect();
            let labels: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 5.0).collect();

            let model = fit_gbm(&features, &labels, &small_config(1, 1.0, 1)).unwrap();
            let tree = &model.trees[0];
            let TreeNode::Internal {
                feature, threshold, ..
            } = tree.nodes[0]
            else {
                panic!("trial {trial}: expected a split at the root");
            };
            let (of, ot, ol, or) = oracle_stump(
                &features,
                &labels.iter().map(|y| y - model.init_value).collect::<Vec<_>>(),
            );
            assert_eq!(feature, of, "trial {trial}");
            assert_eq!(threshold, ot, "trial {trial}");
            // Leaf means agree with independently computed per-side means.
            for (x, y) in features.iter().zip(&labels) {
                let side_mean = if x[of] <= ot { ol } else { or };
                let expected = model.init_value + side_mean;
                let got = model.predict_one(x);
                assert!((got - expected).abs() < 1e-12, "trial {trial}: {got} vs {expected} (y={y})");
            }
        }
    }

    #[test]
    fn validation_errors() {
        assert!(fit_gbm(&[], &[], &GbmConfig::default()).is_err());
        assert!(fit_gbm(
            &[vec![f64::NAN]],
            &[1.0],
            &small_config(1, 0.5, 1)
        )
        .is_err());
        let model = fit_gbm(&[vec![0.0], vec![1.0]], &[0.0, 1.0], &small_config(1, 1.0, 1)).unwrap();
        assert!(predict(&model, &[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn fitting_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let features: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..3).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let config = small_config(20, 0.1, 4);
        let a = fit_gbm(&features, &labels, &config).unwrap();
        let b = fit_gbm(&features, &labels, &config).unwrap();
        assert_eq!(a, b);
    }

    fn table_with_predictions() -> InteractionTable {
        InteractionTable::new(vec![
            InteractionRecord::new("d1", "p1", 1.0),
            InteractionRecord::new("d2", "p1", 2.0).with_prediction(0.5),
        ])
        .unwrap()
    }

    #[test]
    fn attach_covers_all_missing_rows() {
        let table = table_with_predictions();
        let mut preds = BTreeMap::new();
        preds.insert(("d1".to_string(), "p1".to_string()), 1.25);
        let out = attach_external_predictions(&table, &preds, false).unwrap();
        assert_eq!(out.record(0).prediction, Some(1.25));
        assert_eq!(out.record(1).prediction, Some(0.5));
    }

    #[test]
    fn attach_missing_pair_is_named() {
        let table = table_with_predictions();
        let preds = BTreeMap::new();
        let err = attach_external_predictions(&table, &preds, false).unwrap_err();
        assert!(err.to_string().contains("(d1, p1)"), "{err}");
    }

    #[test]
    fn attach_refuses_silent_overwrite() {
        let table = table_with_predictions();
        let mut preds = BTreeMap::new();
        preds.insert(("d1".to_string(), "p1".to_string()), 1.25);
        preds.insert(("d2".to_string(), "p1".to_string()), 9.0);
        let err = attach_external_predictions(&table, &preds, false).unwrap_err();
        assert!(err.to_string().contains("overwrite"), "{err}");

        let out = attach_external_predictions(&table, &preds, true).unwrap();
        assert_eq!(out.record(1).prediction, Some(9.0));
    }
}
