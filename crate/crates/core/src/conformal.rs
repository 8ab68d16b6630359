//! Split conformal prediction: nonconformity scores, the conformal quantile,
//! marginal calibration (MCP), and group-conditioned calibration (GCP) with
//! per-drug / per-protein Mondrian categories and a fallback ladder.
//!
//! The quantile threshold is the `⌈(1-α)(n+1)⌉`-th smallest calibration
//! score. When that index exceeds `n` (tiny or empty calibration sets) the
//! threshold is `+∞` and the interval is the whole real line; clamping to the
//! largest score would silently void the finite-sample guarantee.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::InteractionTable;
use crate::error::{Error, Result};
use crate::exec;

/// Nonconformity score family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    /// `s = |y - ŷ|`
    AbsoluteResidual,
    /// `s = |y - ŷ| / σ(x)` with a caller-supplied positive scale.
    NormalizedResidual,
}

/// Nonconformity score of one labelled prediction.
pub fn score(y: f64, y_hat: f64, kind: ScoreKind, sigma: Option<f64>) -> Result<f64> {
    let abs = (y - y_hat).abs();
    match kind {
        ScoreKind::AbsoluteResidual => Ok(abs),
        ScoreKind::NormalizedResidual => {
            let sigma = sigma.ok_or_else(|| {
                Error::Config("normalized score requires a sigma estimate".into())
            })?;
            if !sigma.is_finite() || sigma <= 0.0 {
                return Err(Error::Domain(format!(
                    "sigma must be positive and finite, got {sigma}"
                )));
            }
            Ok(abs / sigma)
        }
    }
}

/// Conformal quantile threshold together with the sample size it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileThreshold {
    /// The selected order statistic, or `+∞` when the index exceeds `n_cal`.
    pub value: f64,
    pub n_cal: usize,
    pub alpha: f64,
}

impl QuantileThreshold {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// 1-based order-statistic index `⌈(1-α)(n+1)⌉`.
pub fn quantile_index(n: usize, alpha: f64) -> usize {
    ((1.0 - alpha) * (n as f64 + 1.0)).ceil() as usize
}

/// The `⌈(1-α)(n+1)⌉`-th smallest score, or `+∞` when out of range.
///
/// `alpha` must lie in (0, 1); scores may be empty (yielding `+∞`).
pub fn conformal_quantile(scores: &[f64], alpha: f64) -> QuantileThreshold {
    assert!(
        alpha > 0.0 && alpha < 1.0,
        "alpha must lie in (0, 1), got {alpha}"
    );
    let n = scores.len();
    let k = quantile_index(n, alpha);
    let value = if k > n {
        f64::INFINITY
    } else {
        let mut sorted = scores.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        sorted[k - 1]
    };
    QuantileThreshold {
        value,
        n_cal: n,
        alpha,
    }
}

/// Symmetric prediction interval around a point prediction.
///
/// The half-width is stored explicitly so that the width is exactly twice
/// the selected threshold; the endpoints are derived views.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    center: f64,
    half_width: f64,
}

impl PredictionInterval {
    pub fn symmetric(center: f64, half_width: f64) -> Self {
        debug_assert!(half_width >= 0.0, "negative half-width {half_width}");
        PredictionInterval { center, half_width }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    /// Exactly `2 * half_width`; never recomputed from the endpoints.
    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn is_unbounded(&self) -> bool {
        self.half_width.is_infinite()
    }

    /// Closed-interval membership: endpoints count as covered.
    pub fn covers(&self, y: f64) -> bool {
        self.lower() <= y && y <= self.upper()
    }
}

/// Builds the interval for one prediction. For absolute scores the half-width
/// is the threshold itself; for normalized scores it is `threshold * sigma`.
pub fn mcp_interval(
    y_hat: f64,
    threshold: &QuantileThreshold,
    kind: ScoreKind,
    sigma: Option<f64>,
) -> Result<PredictionInterval> {
    let half_width = match (kind, sigma) {
        (ScoreKind::AbsoluteResidual, None) => threshold.value,
        (ScoreKind::NormalizedResidual, Some(sigma)) => {
            if !sigma.is_finite() || sigma <= 0.0 {
                return Err(Error::Domain(format!(
                    "sigma must be positive and finite, got {sigma}"
                )));
            }
            threshold.value * sigma
        }
        (ScoreKind::AbsoluteResidual, Some(_)) => {
            return Err(Error::Config(
                "sigma supplied but calibration used absolute residuals".into(),
            ))
        }
        (ScoreKind::NormalizedResidual, None) => {
            return Err(Error::Config(
                "calibration used normalized residuals but no sigma supplied".into(),
            ))
        }
    };
    Ok(PredictionInterval::symmetric(y_hat, half_width))
}

/// Marginal conformal calibration: one global score multiset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McpCalibration {
    /// Calibration scores, sorted ascending.
    pub scores: Vec<f64>,
    pub alpha: f64,
    pub kind: ScoreKind,
}

/// Computes calibration scores for `cal_rows` of `table`. All rows must carry
/// predictions; `sigmas` (aligned with `cal_rows`) is required iff `kind` is
/// normalized.
fn scores_for_rows(
    table: &InteractionTable,
    cal_rows: &[usize],
    kind: ScoreKind,
    sigmas: Option<&[f64]>,
) -> Result<Vec<f64>> {
    table.require_predictions(cal_rows)?;
    if let Some(s) = sigmas {
        if s.len() != cal_rows.len() {
            return Err(Error::Validation(format!(
                "sigma count {} does not match calibration row count {}",
                s.len(),
                cal_rows.len()
            )));
        }
    } else if kind == ScoreKind::NormalizedResidual {
        return Err(Error::Config(
            "normalized calibration requires per-row sigmas".into(),
        ));
    }
    cal_rows
        .iter()
        .enumerate()
        .map(|(i, &row)| {
            let rec = table.record(row);
            score(
                rec.label,
                rec.prediction.expect("checked above"),
                kind,
                sigmas.map(|s| s[i]),
            )
        })
        .collect()
}

pub fn calibrate_mcp(
    table: &InteractionTable,
    cal_rows: &[usize],
    alpha: f64,
    kind: ScoreKind,
    sigmas: Option<&[f64]>,
) -> Result<McpCalibration> {
    let mut scores = scores_for_rows(table, cal_rows, kind, sigmas)?;
    scores.sort_unstable_by(f64::total_cmp);
    Ok(McpCalibration {
        scores,
        alpha,
        kind,
    })
}

impl McpCalibration {
    /// Threshold at the calibration's own miscoverage level.
    pub fn threshold(&self) -> QuantileThreshold {
        self.threshold_at(self.alpha)
    }

    /// Threshold at an arbitrary level; used by reliability curves, which
    /// reuse one calibration across levels.
    pub fn threshold_at(&self, alpha: f64) -> QuantileThreshold {
        conformal_quantile(&self.scores, alpha)
    }
}

/// Per-row MCP intervals, in input order. `sigmas` aligns with `y_hats`.
pub fn predict_intervals_mcp(
    y_hats: &[f64],
    calibration: &McpCalibration,
    alpha: f64,
    sigmas: Option<&[f64]>,
) -> Result<Vec<PredictionInterval>> {
    let threshold = calibration.threshold_at(alpha);
    if let Some(s) = sigmas {
        if s.len() != y_hats.len() {
            return Err(Error::Validation(format!(
                "sigma count {} does not match prediction count {}",
                s.len(),
                y_hats.len()
            )));
        }
    }
    let rows: Vec<(f64, Option<f64>)> = y_hats
        .iter()
        .enumerate()
        .map(|(i, &y)| (y, sigmas.map(|s| s[i])))
        .collect();
    exec::map_ordered(&rows, |&(y_hat, sigma)| {
        mcp_interval(y_hat, &threshold, calibration.kind, sigma)
    })
    .into_iter()
    .collect()
}

/// Group-conditioned (Mondrian) calibration: every drug and every protein is
/// its own category, with the fallback ladder of the combined-quantile rule.
///
/// Buckets store positions into `scores` (one score per calibration row, in
/// calibration order), so the union of a drug bucket and a protein bucket
/// counts a doubly-matching row once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCalibration {
    per_drug: BTreeMap<String, Vec<usize>>,
    per_protein: BTreeMap<String, Vec<usize>>,
    /// Score of each calibration row, in calibration-row order.
    scores: Vec<f64>,
    pub alpha: f64,
    pub kind: ScoreKind,
}

pub fn build_group_calibration(
    table: &InteractionTable,
    cal_rows: &[usize],
    alpha: f64,
    kind: ScoreKind,
    sigmas: Option<&[f64]>,
) -> Result<GroupCalibration> {
    let scores = scores_for_rows(table, cal_rows, kind, sigmas)?;
    let mut per_drug: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut per_protein: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (pos, &row) in cal_rows.iter().enumerate() {
        let rec = table.record(row);
        per_drug
            .entry(rec.drug.token.clone())
            .or_default()
            .push(pos);
        per_protein
            .entry(rec.protein.token.clone())
            .or_default()
            .push(pos);
    }
    Ok(GroupCalibration {
        per_drug,
        per_protein,
        scores,
        alpha,
        kind,
    })
}

impl GroupCalibration {
    pub fn n_cal(&self) -> usize {
        self.scores.len()
    }

    pub fn drug_scores(&self, token: &str) -> Option<Vec<f64>> {
        self.per_drug
            .get(token)
            .map(|rows| rows.iter().map(|&i| self.scores[i]).collect())
    }

    pub fn protein_scores(&self, token: &str) -> Option<Vec<f64>> {
        self.per_protein
            .get(token)
            .map(|rows| rows.iter().map(|&i| self.scores[i]).collect())
    }

    pub fn global_scores(&self) -> &[f64] {
        &self.scores
    }

    /// Threshold selection ladder at the calibration's own level.
    pub fn threshold(&self, test_drug: &str, test_protein: &str) -> QuantileThreshold {
        self.threshold_at(test_drug, test_protein, self.alpha)
    }

    /// Same ladder at an arbitrary level.
    ///
    /// Both entities present: quantile of the deduplicated union of their
    /// score sets. One present: that group's quantile. Neither: the global
    /// quantile.
    pub fn threshold_at(&self, test_drug: &str, test_protein: &str, alpha: f64) -> QuantileThreshold {
        let drug_rows = self.per_drug.get(test_drug);
        let protein_rows = self.per_protein.get(test_protein);
        match (drug_rows, protein_rows) {
            (Some(d), Some(p)) => {
                let mut rows: Vec<usize> = d.iter().chain(p.iter()).copied().collect();
                rows.sort_unstable();
                rows.dedup();
                let union: Vec<f64> = rows.iter().map(|&i| self.scores[i]).collect();
                conformal_quantile(&union, alpha)
            }
            (Some(d), None) => {
                let scores: Vec<f64> = d.iter().map(|&i| self.scores[i]).collect();
                conformal_quantile(&scores, alpha)
            }
            (None, Some(p)) => {
                let scores: Vec<f64> = p.iter().map(|&i| self.scores[i]).collect();
                conformal_quantile(&scores, alpha)
            }
            (None, None) => conformal_quantile(&self.scores, alpha),
        }
    }
}

/// A prediction interval together with the threshold that produced it, as
/// emitted to intervals CSVs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowInterval {
    pub interval: PredictionInterval,
    pub threshold: f64,
}

/// Per-row GCP intervals for `test_rows` of `table`, in input order.
/// Absolute residuals only; all test rows must carry predictions.
pub fn predict_intervals_gcp(
    table: &InteractionTable,
    test_rows: &[usize],
    calibration: &GroupCalibration,
    alpha: f64,
) -> Result<Vec<RowInterval>> {
    if calibration.kind != ScoreKind::AbsoluteResidual {
        return Err(Error::Config(
            "group-conditioned intervals support absolute residuals only".into(),
        ));
    }
    table.require_predictions(test_rows)?;
    Ok(exec::map_ordered(test_rows, |&row| {
        let rec = table.record(row);
        let q = calibration.threshold_at(&rec.drug.token, &rec.protein.token, alpha);
        RowInterval {
            interval: PredictionInterval::symmetric(rec.prediction.unwrap(), q.value),
            threshold: q.value,
        }
    }))
}

#[cfg(test)]
mod tests {
    use crate::data::InteractionRecord;

    use super::*;

    /// Independent oracle: smallest score q with |{s <= q}| >= ⌈(1-α)(n+1)⌉,
    /// found by scanning candidates rather than sorting and indexing.
    fn brute_force_quantile(scores: &[f64], alpha: f64) -> f64 {
        let k = ((1.0 - alpha) * (scores.len() as f64 + 1.0)).ceil() as usize;
        let mut best = f64::INFINITY;
        for &q in scores {
            let count = scores.iter().filter(|&&s| s <= q).count();
            if count >= k && q < best {
                best = q;
            }
        }
        best
    }

    #[test]
    fn quantile_reference_cases() {
        let scores: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        assert_eq!(conformal_quantile(&scores, 0.1).value, 10.0);

        assert_eq!(conformal_quantile(&[5.0], 0.1).value, f64::INFINITY);

        let scores = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(conformal_quantile(&scores, 0.5).value, 3.0);

        assert_eq!(conformal_quantile(&[], 0.5).value, f64::INFINITY);
    }

    #[test]
    fn quantile_matches_brute_force_on_random_multisets() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let n = rng.random_range(0..200usize);
            let scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
            let alpha = rng.random::<f64>() * 0.49 + 0.01;
            let ours = conformal_quantile(&scores, alpha).value;
            let oracle = brute_force_quantile(&scores, alpha);
            assert_eq!(ours, oracle, "n={n} alpha={alpha}");
        }
    }

    #[test]
    fn threshold_non_increasing_in_alpha() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let scores: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let mut last = f64::INFINITY;
        for i in 1..100 {
            let alpha = i as f64 / 100.0;
            let q = conformal_quantile(&scores, alpha).value;
            assert!(q <= last, "threshold rose from {last} to {q} at alpha={alpha}");
            last = q;
        }
    }

    #[test]
    fn score_reference_cases() {
        assert_eq!(
            score(1.0, 1.0, ScoreKind::AbsoluteResidual, None).unwrap(),
            0.0
        );
        assert_eq!(
            score(3.0, 1.0, ScoreKind::AbsoluteResidual, None).unwrap(),
            2.0
        );
        assert_eq!(
            score(3.0, 1.0, ScoreKind::NormalizedResidual, Some(2.0)).unwrap(),
            1.0
        );
        assert!(score(3.0, 1.0, ScoreKind::NormalizedResidual, Some(0.0)).is_err());
        assert!(score(3.0, 1.0, ScoreKind::NormalizedResidual, None).is_err());
    }

    #[test]
    fn interval_construction_cases() {
        let q = QuantileThreshold {
            value: 1.0,
            n_cal: 9,
            alpha: 0.1,
        };
        let iv = mcp_interval(0.0, &q, ScoreKind::AbsoluteResidual, None).unwrap();
        assert_eq!((iv.lower(), iv.upper()), (-1.0, 1.0));

        let q_inf = QuantileThreshold {
            value: f64::INFINITY,
            n_cal: 0,
            alpha: 0.1,
        };
        let iv = mcp_interval(2.0, &q_inf, ScoreKind::AbsoluteResidual, None).unwrap();
        assert!(iv.is_unbounded());
        assert_eq!(iv.lower(), f64::NEG_INFINITY);
        assert_eq!(iv.upper(), f64::INFINITY);
        assert!(iv.covers(1.0e308) && iv.covers(-1.0e308));

        let q = QuantileThreshold {
            value: 0.5,
            n_cal: 9,
            alpha: 0.1,
        };
        let iv = mcp_interval(1.0, &q, ScoreKind::NormalizedResidual, Some(2.0)).unwrap();
        assert_eq!((iv.lower(), iv.upper()), (0.0, 2.0));

        // Kind/sigma mismatches are configuration errors.
        assert!(mcp_interval(1.0, &q, ScoreKind::AbsoluteResidual, Some(2.0)).is_err());
        assert!(mcp_interval(1.0, &q, ScoreKind::NormalizedResidual, None).is_err());
    }

    #[test]
    fn width_is_exactly_twice_threshold_even_at_extreme_centers() {
        // (center+q) - (center-q) would not equal 2q here; the stored
        // half-width keeps the identity exact.
        let q = QuantileThreshold {
            value: 1.0,
            n_cal: 99,
            alpha: 0.1,
        };
        let iv = mcp_interval(1.0e17, &q, ScoreKind::AbsoluteResidual, None).unwrap();
        assert_eq!(iv.width(), 2.0);
    }

    fn toy_table() -> InteractionTable {
        InteractionTable::new(vec![
            InteractionRecord::new("d1", "p1", 1.0).with_prediction(0.0),
            InteractionRecord::new("d1", "p2", -2.0).with_prediction(0.0),
        ])
        .unwrap()
    }

    #[test]
    fn group_calibration_shapes_and_conservation() {
        let table = toy_table();
        let calib =
            build_group_calibration(&table, &[0, 1], 0.1, ScoreKind::AbsoluteResidual, None)
                .unwrap();
        assert_eq!(calib.drug_scores("d1").unwrap(), vec![1.0, 2.0]);
        assert_eq!(calib.protein_scores("p1").unwrap(), vec![1.0]);
        assert_eq!(calib.protein_scores("p2").unwrap(), vec![2.0]);
        assert_eq!(calib.n_cal(), 2);

        let drug_total: usize = ["d1"]
            .iter()
            .map(|d| calib.drug_scores(d).unwrap().len())
            .sum();
        let protein_total: usize = ["p1", "p2"]
            .iter()
            .map(|p| calib.protein_scores(p).unwrap().len())
            .sum();
        assert_eq!(drug_total, calib.n_cal());
        assert_eq!(protein_total, calib.n_cal());

        let empty =
            build_group_calibration(&table, &[], 0.1, ScoreKind::AbsoluteResidual, None).unwrap();
        assert_eq!(empty.n_cal(), 0);
        assert!(empty.drug_scores("d1").is_none());
    }

    fn calib_from_scores(
        drug_scores: &[(&str, f64)],
        protein_scores: &[(&str, f64)],
        alpha: f64,
    ) -> GroupCalibration {
        // Rows are (drug, protein) pairs with |label - prediction| = score.
        let mut records = Vec::new();
        for (i, &(d, s)) in drug_scores.iter().enumerate() {
            records.push(InteractionRecord::new(d, format!("q{i}"), s).with_prediction(0.0));
        }
        for (i, &(p, s)) in protein_scores.iter().enumerate() {
            records.push(InteractionRecord::new(format!("e{i}"), p, s).with_prediction(0.0));
        }
        let table = InteractionTable::new(records).unwrap();
        let rows: Vec<usize> = (0..table.len()).collect();
        build_group_calibration(&table, &rows, alpha, ScoreKind::AbsoluteResidual, None).unwrap()
    }

    #[test]
    fn gcp_fallback_ladder() {
        // Drug present with scores {1,2,3}, protein absent, alpha = 0.5 -> 2.
        let calib = calib_from_scores(&[("dx", 1.0), ("dx", 2.0), ("dx", 3.0)], &[], 0.5);
        assert_eq!(calib.threshold("dx", "nowhere").value, 2.0);

        // Neither present -> global quantile.
        let global = conformal_quantile(calib.global_scores(), 0.5).value;
        assert_eq!(calib.threshold("absent", "nowhere").value, global);

        // Both present with disjoint rows: union {1,2,3,4} at alpha=0.2 -> 4.
        let calib = calib_from_scores(&[("dx", 1.0), ("dx", 2.0)], &[("py", 3.0), ("py", 4.0)], 0.2);
        assert_eq!(calib.threshold("dx", "py").value, 4.0);
    }

    #[test]
    fn gcp_union_counts_shared_rows_once() {
        // One row matches both the drug and the protein; it must enter the
        // union exactly once: {5} ∪ {5, 1} = {5, 1}, so alpha=0.5 with n=2
        // gives index ⌈0.5·3⌉ = 2 -> 5 (with multiplicity 3 it would differ).
        let table = InteractionTable::new(vec![
            InteractionRecord::new("dx", "py", 5.0).with_prediction(0.0),
            InteractionRecord::new("dz", "py", 1.0).with_prediction(0.0),
        ])
        .unwrap();
        let calib =
            build_group_calibration(&table, &[0, 1], 0.5, ScoreKind::AbsoluteResidual, None)
                .unwrap();
        let q = calib.threshold("dx", "py");
        assert_eq!(q.n_cal, 2);
        assert_eq!(q.value, 5.0);
    }

    #[test]
    fn single_group_gcp_equals_mcp() {
        let mut records = Vec::new();
        for i in 0..40 {
            records.push(
                InteractionRecord::new("d0", format!("p{i}"), i as f64 * 0.1)
                    .with_prediction(0.0),
            );
        }
        let table = InteractionTable::new(records).unwrap();
        let rows: Vec<usize> = (0..table.len()).collect();
        let (cal_rows, test_rows) = rows.split_at(20);

        let alpha = 0.1;
        let mcp = calibrate_mcp(&table, cal_rows, alpha, ScoreKind::AbsoluteResidual, None).unwrap();
        let gcp =
            build_group_calibration(&table, cal_rows, alpha, ScoreKind::AbsoluteResidual, None)
                .unwrap();

        let y_hats: Vec<f64> = test_rows
            .iter()
            .map(|&r| table.record(r).prediction.unwrap())
            .collect();
        let mcp_ivs = predict_intervals_mcp(&y_hats, &mcp, alpha, None).unwrap();
        let gcp_ivs = predict_intervals_gcp(&table, test_rows, &gcp, alpha).unwrap();
        for (a, b) in mcp_ivs.iter().zip(&gcp_ivs) {
            // Single-group data: every test protein is distinct, but the drug
            // group covers all calibration rows, so the union equals the
            // global multiset and the intervals coincide exactly.
            assert_eq!(a, &b.interval);
        }
    }

    #[test]
    fn intervals_nest_across_alpha() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut records = Vec::new();
        for i in 0..60 {
            let y = rng.random::<f64>() * 4.0 - 2.0;
            records.push(
                InteractionRecord::new(format!("d{}", i % 5), format!("p{i}"), y)
                    .with_prediction(0.0),
            );
        }
        let table = InteractionTable::new(records).unwrap();
        let rows: Vec<usize> = (0..table.len()).collect();
        let (cal_rows, test_rows) = rows.split_at(40);
        let gcp =
            build_group_calibration(&table, cal_rows, 0.1, ScoreKind::AbsoluteResidual, None)
                .unwrap();
        let wide = predict_intervals_gcp(&table, test_rows, &gcp, 0.1).unwrap();
        let narrow = predict_intervals_gcp(&table, test_rows, &gcp, 0.2).unwrap();
        for (w, n) in wide.iter().zip(&narrow) {
            assert!(w.interval.lower() <= n.interval.lower());
            assert!(w.interval.upper() >= n.interval.upper());
        }
    }
}
