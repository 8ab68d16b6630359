//! Validity and efficiency metrics: empirical coverage, mean interval width,
//! per-subgroup coverage, the mean absolute coverage gap (MACG), and
//! reliability-curve data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conformal::PredictionInterval;
use crate::error::{Error, Result};

/// Fraction of labels inside their (closed) intervals.
pub fn coverage(intervals: &[PredictionInterval], labels: &[f64]) -> Result<f64> {
    if intervals.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} intervals but {} labels",
            intervals.len(),
            labels.len()
        )));
    }
    if intervals.is_empty() {
        return Err(Error::DegenerateInput("coverage of an empty test set".into()));
    }
    let covered = intervals
        .iter()
        .zip(labels)
        .filter(|(iv, &y)| iv.covers(y))
        .count();
    Ok(covered as f64 / intervals.len() as f64)
}

/// Mean interval width; `+∞` (with a count) as soon as any interval is
/// unbounded. Unbounded intervals still count normally toward coverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanWidth {
    pub value: f64,
    pub n_unbounded: usize,
}

pub fn mean_width(intervals: &[PredictionInterval]) -> Result<MeanWidth> {
    if intervals.is_empty() {
        return Err(Error::DegenerateInput("mean width of an empty set".into()));
    }
    let n_unbounded = intervals.iter().filter(|iv| iv.is_unbounded()).count();
    let value = if n_unbounded > 0 {
        f64::INFINITY
    } else {
        intervals.iter().map(PredictionInterval::width).sum::<f64>() / intervals.len() as f64
    };
    Ok(MeanWidth { value, n_unbounded })
}

/// Per-subgroup sample count and coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCoverage {
    pub n: usize,
    pub covered: usize,
}

impl SubgroupCoverage {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.n as f64
    }
}

/// Groups rows by `group_of(row_index)` and reports per-subgroup coverage.
pub fn subgroup_coverage<K: Ord, F: Fn(usize) -> K>(
    intervals: &[PredictionInterval],
    labels: &[f64],
    group_of: F,
) -> Result<BTreeMap<K, SubgroupCoverage>> {
    if intervals.len() != labels.len() {
        return Err(Error::Validation(format!(
            "{} intervals but {} labels",
            intervals.len(),
            labels.len()
        )));
    }
    let mut out: BTreeMap<K, SubgroupCoverage> = BTreeMap::new();
    for (i, (iv, &y)) in intervals.iter().zip(labels).enumerate() {
        let entry = out.entry(group_of(i)).or_insert(SubgroupCoverage {
            n: 0,
            covered: 0,
        });
        entry.n += 1;
        if iv.covers(y) {
            entry.covered += 1;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupKind {
    Drug,
    Protein,
    Cluster,
}

/// How the spread of absolute coverage gaps is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdMode {
    Population,
    Sample,
}

/// Mean absolute coverage gap over subgroups at level `1-α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacgReport {
    pub subgroup_kind: SubgroupKind,
    pub alpha: f64,
    pub macg: f64,
    /// Standard deviation of the absolute gaps (population by default).
    pub std_gap: f64,
    /// Number of subgroups that entered the mean.
    pub d: usize,
}

/// Unweighted mean of `|coverage_i - (1-α)|` over all subgroups (no minimum
/// size filter), with population-standard-deviation error bars.
pub fn macg<K: Ord>(
    per_subgroup: &BTreeMap<K, SubgroupCoverage>,
    alpha: f64,
    kind: SubgroupKind,
) -> Result<MacgReport> {
    macg_with(per_subgroup, alpha, kind, StdMode::Population, 1)
}

/// MACG with a configurable minimum subgroup size and std convention.
pub fn macg_with<K: Ord>(
    per_subgroup: &BTreeMap<K, SubgroupCoverage>,
    alpha: f64,
    kind: SubgroupKind,
    std_mode: StdMode,
    min_size: usize,
) -> Result<MacgReport> {
    let target = 1.0 - alpha;
    let gaps: Vec<f64> = per_subgroup
        .values()
        .filter(|sg| sg.n >= min_size)
        .map(|sg| (sg.coverage() - target).abs())
        .collect();
    let d = gaps.len();
    if d == 0 {
        return Err(Error::DegenerateInput(
            "MACG needs at least one subgroup".into(),
        ));
    }
    let mean = gaps.iter().sum::<f64>() / d as f64;
    let ss: f64 = gaps.iter().map(|g| (g - mean) * (g - mean)).sum();
    let std_gap = match std_mode {
        StdMode::Population => (ss / d as f64).sqrt(),
        StdMode::Sample => {
            if d > 1 {
                (ss / (d as f64 - 1.0)).sqrt()
            } else {
                0.0
            }
        }
    };
    Ok(MacgReport {
        subgroup_kind: kind,
        alpha,
        macg: mean,
        std_gap,
        d,
    })
}

/// `(MACG_drug + MACG_protein) / 2`; both reports must target the same level.
pub fn combined_macg(drug: &MacgReport, protein: &MacgReport) -> Result<f64> {
    if drug.alpha != protein.alpha {
        return Err(Error::Validation(format!(
            "MACG reports at different levels: {} vs {}",
            drug.alpha, protein.alpha
        )));
    }
    Ok(0.5 * (drug.macg + protein.macg))
}

/// One point of an observed-vs-expected coverage curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPoint {
    pub alpha: f64,
    pub expected: f64,
    pub observed: f64,
}

/// Evaluates `observed_coverage_at(α)` for each level, reusing whatever
/// split and calibration the closure captured.
pub fn reliability_curve<F>(alphas: &[f64], mut observed_coverage_at: F) -> Result<Vec<ReliabilityPoint>>
where
    F: FnMut(f64) -> Result<f64>,
{
    if alphas.is_empty() {
        return Err(Error::DegenerateInput(
            "reliability curve needs at least one alpha".into(),
        ));
    }
    alphas
        .iter()
        .map(|&alpha| {
            Ok(ReliabilityPoint {
                alpha,
                expected: 1.0 - alpha,
                observed: observed_coverage_at(alpha)?,
            })
        })
        .collect()
}

/// Point-prediction accuracy: RMSE and coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub rmse: f64,
    pub r2: f64,
    pub n: usize,
}

pub fn regression_metrics(labels: &[f64], predictions: &[f64]) -> Result<RegressionMetrics> {
    if labels.len() != predictions.len() {
        return Err(Error::Validation(format!(
            "{} labels but {} predictions",
            labels.len(),
            predictions.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::DegenerateInput("regression metrics of an empty set".into()));
    }
    let n = labels.len() as f64;
    let sse: f64 = labels
        .iter()
        .zip(predictions)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    let mean = labels.iter().sum::<f64>() / n;
    let sst: f64 = labels.iter().map(|y| (y - mean) * (y - mean)).sum();
    let r2 = if sst > 0.0 { 1.0 - sse / sst } else { 0.0 };
    Ok(RegressionMetrics {
        rmse: (sse / n).sqrt(),
        r2,
        n: labels.len(),
    })
}
