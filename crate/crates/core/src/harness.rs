//! End-to-end experiment orchestration.
//!
//! One run = (data → optional label transform → split → point predictions →
//! per-method calibration → intervals per α → reports and reliability
//! curves), repeated over `n_seeds` consecutive seeds and aggregated.
//!
//! Output layout, per seed (the `seed=<s>` level is dropped when `n_seeds`
//! is 1):
//!
//! ```text
//! {output_dir}/[seed=<s>/]{split}/split/{train,cal,test}_rows.txt, provenance.json
//! {output_dir}/[seed=<s>/]{split}/regression.json
//! {output_dir}/[seed=<s>/]{split}/{method}/alpha=<a>/intervals.csv, report.json
//! {output_dir}/[seed=<s>/]{split}/{method}/reliability.csv
//! {output_dir}/[seed=<s>/]{split}/{method}/grid_alpha=<a>.csv      (tuned runs)
//! {output_dir}/[seed=<s>/]summary.csv
//! {output_dir}/manifest.json, aggregate.csv (multi-seed)
//! ```
//!
//! Interval construction never reads test labels: calibration consumes
//! calibration rows, prediction consumes point predictions, and labels enter
//! again only at the evaluation stage.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    calibrate_method, predict_rows, CalibrationModel, CcpSettings, MethodContext, MethodName,
};
use crate::ccp::CcpMethod;
use crate::clustering::{binarize_features, BinaryFeatureTable};
use crate::conformal::RowInterval;
use crate::data::{EntityKind, FeatureTable, InteractionRecord, InteractionTable};
use crate::error::{Error, Result};
use crate::io::{
    fmt_f64, load_features, load_interactions, load_predictions, write_cluster_assignments,
    write_intervals, write_row_indices, IntervalRow,
};
use crate::metrics::{
    combined_macg, coverage, macg, mean_width, regression_metrics, reliability_curve,
    subgroup_coverage, MacgReport, RegressionMetrics, ReliabilityPoint, SubgroupCoverage,
    SubgroupKind,
};
use crate::predictor::{attach_external_predictions, fit_gbm, predict, GbmConfig};
use crate::splits::{split, SplitKind, SplitResult, SplitStrategy};
use crate::synth::{generate_synthetic, SyntheticSpec};
use crate::transform::{fit_boxcox_lambda, transform_affinity, TransformKind, TransformSpec};
use crate::tune::{grid_search, write_grid_csv, GridSearchInputs, GridSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    /// Generated in-process; the per-run seed overrides the spec's seed.
    Synthetic(SyntheticSpec),
    Files {
        interactions: PathBuf,
        #[serde(default)]
        drug_features: Option<PathBuf>,
        #[serde(default)]
        protein_features: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorSpec {
    /// Train the built-in gradient boosting model on the training rows.
    Builtin(GbmConfig),
    /// Attach predictions computed elsewhere (CSV `drug_id,protein_id,prediction`;
    /// values must be on the same scale as the transformed labels).
    External {
        path: PathBuf,
        #[serde(default)]
        overwrite: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneEval {
    /// Score grid cells on a held-out slice of the calibration set (leakage-free).
    Holdout,
    /// Score grid cells on the test set (matches reporting "best" configurations).
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningSpec {
    pub gammas: Vec<f64>,
    pub ks: Vec<usize>,
    pub evaluate_on: TuneEval,
    /// Fraction of calibration rows held out for tuning in `Holdout` mode.
    pub holdout_fraction: f64,
}

impl Default for TuningSpec {
    fn default() -> Self {
        let grid = GridSpec::default();
        TuningSpec {
            gammas: grid.gammas,
            ks: grid.ks,
            evaluate_on: TuneEval::Holdout,
            holdout_fraction: 0.25,
        }
    }
}

fn default_n_seeds() -> usize {
    20
}

fn default_reliability_alphas() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.05).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Consecutive seeds `seed..seed+n_seeds` are run and aggregated.
    #[serde(default = "default_n_seeds")]
    pub n_seeds: usize,
    pub output_dir: PathBuf,
    pub data: DataSource,
    pub split: SplitKind,
    pub methods: Vec<MethodName>,
    pub alphas: Vec<f64>,
    /// Absent: the interactions table must already carry predictions.
    #[serde(default)]
    pub predictor: Option<PredictorSpec>,
    /// Applied to labels at ingestion; a Box–Cox spec without `lambda` is
    /// fitted on the training labels after the split.
    #[serde(default)]
    pub label_transform: Option<TransformSpec>,
    #[serde(default)]
    pub ccp: CcpSettings,
    #[serde(default)]
    pub tuning: Option<TuningSpec>,
    #[serde(default = "default_reliability_alphas")]
    pub reliability_alphas: Vec<f64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.alphas.is_empty() {
            return Err(Error::Config("at least one alpha is required".into()));
        }
        for &a in self.alphas.iter().chain(&self.reliability_alphas) {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Config(format!("alpha {a} outside (0, 1)")));
            }
        }
        if self.n_seeds == 0 {
            return Err(Error::Config("n_seeds must be at least 1".into()));
        }
        if let Some(t) = &self.tuning {
            if t.gammas.is_empty() || t.ks.is_empty() {
                return Err(Error::Config("tuning grid must be non-empty".into()));
            }
            if !(t.holdout_fraction > 0.0 && t.holdout_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "holdout_fraction {} outside (0, 1)",
                    t.holdout_fraction
                )));
            }
        }
        Ok(())
    }

    fn sorted_methods(&self) -> Vec<MethodName> {
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        methods
    }

    fn sorted_alphas(&self) -> Vec<f64> {
        let mut alphas = self.alphas.clone();
        alphas.sort_by(f64::total_cmp);
        alphas.dedup();
        alphas
    }
}

/// Tuned hyperparameters recorded per (method, alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChosenCcp {
    pub gamma: f64,
    pub n_clusters: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedManifest {
    pub seed: u64,
    pub data_fingerprint: String,
    pub split_sizes: (usize, usize, usize),
    pub discarded_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxcox_lambda: Option<f64>,
    /// Keyed by `"{method}@{alpha}"`.
    pub chosen_ccp: BTreeMap<String, ChosenCcp>,
    pub stage_ms: BTreeMap<String, u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub crate_version: String,
    pub seeds: Vec<SeedManifest>,
    pub total_ms: u128,
}

/// Per-(method, alpha) evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub split: String,
    pub method: String,
    pub alpha: f64,
    pub n_test: usize,
    pub coverage: f64,
    /// `None` when any interval is unbounded (mean width is then infinite).
    pub mean_width: Option<f64>,
    pub n_unbounded: usize,
    pub macg_drug: MacgReport,
    pub macg_protein: MacgReport,
    pub combined_macg: f64,
    pub per_drug: BTreeMap<String, SubgroupCoverage>,
    pub per_protein: BTreeMap<String, SubgroupCoverage>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

/// Loads or generates the input tables. Synthetic data replaces the spec's
/// seed with `seed` so multi-seed runs draw fresh datasets.
pub fn load_data(
    source: &DataSource,
    seed: u64,
) -> Result<(InteractionTable, Option<FeatureTable>, Option<FeatureTable>, String)> {
    match source {
        DataSource::Synthetic(spec) => {
            let spec = SyntheticSpec {
                seed,
                ..spec.clone()
            };
            let fingerprint = format!("synthetic:{:016x}", fnv1a(serde_json::to_string(&spec)?.as_bytes()));
            let data = generate_synthetic(&spec)?;
            Ok((
                data.table,
                Some(data.drug_features),
                Some(data.protein_features),
                fingerprint,
            ))
        }
        DataSource::Files {
            interactions,
            drug_features,
            protein_features,
        } => {
            let bytes = std::fs::read(interactions).map_err(|e| Error::io(interactions, e))?;
            let fingerprint = format!("file:{:016x}", fnv1a(&bytes));
            let table = load_interactions(interactions)?;
            let drug = drug_features
                .as_ref()
                .map(|p| load_features(p, EntityKind::Drug))
                .transpose()?;
            let protein = protein_features
                .as_ref()
                .map(|p| load_features(p, EntityKind::Protein))
                .transpose()?;
            Ok((table, drug, protein, fingerprint))
        }
    }
}

fn transform_labels(table: &InteractionTable, spec: &TransformSpec) -> Result<InteractionTable> {
    let records: Vec<InteractionRecord> = table
        .records()
        .iter()
        .map(|rec| {
            let mut rec = rec.clone();
            rec.label = transform_affinity(rec.label, spec)?;
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    InteractionTable::new(records)
}

/// Builds the design matrix rows `concat(drug_features, protein_features)`.
fn design_matrix(
    table: &InteractionTable,
    rows: &[usize],
    drug_features: &FeatureTable,
    protein_features: &FeatureTable,
) -> Result<Vec<Vec<f64>>> {
    drug_features.require_coverage(table)?;
    protein_features.require_coverage(table)?;
    Ok(rows
        .iter()
        .map(|&row| {
            let rec = table.record(row);
            let mut x = drug_features.get(&rec.drug).unwrap().to_vec();
            x.extend_from_slice(protein_features.get(&rec.protein).unwrap());
            x
        })
        .collect())
}

fn labels_of(table: &InteractionTable, rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&r| table.record(r).label).collect()
}

fn predictions_of(table: &InteractionTable, rows: &[usize]) -> Vec<f64> {
    rows.iter()
        .map(|&r| table.record(r).prediction.expect("predictions checked"))
        .collect()
}

/// Evaluates intervals against test labels and subgroup structure.
pub fn build_report(
    table: &InteractionTable,
    test_rows: &[usize],
    intervals: &[RowInterval],
    split_kind: SplitKind,
    method: MethodName,
    alpha: f64,
) -> Result<MethodReport> {
    let ivs: Vec<_> = intervals.iter().map(|r| r.interval).collect();
    let labels = labels_of(table, test_rows);
    let cov = coverage(&ivs, &labels)?;
    let width = mean_width(&ivs)?;
    let per_drug = subgroup_coverage(&ivs, &labels, |i| {
        table.record(test_rows[i]).drug.token.clone()
    })?;
    let per_protein = subgroup_coverage(&ivs, &labels, |i| {
        table.record(test_rows[i]).protein.token.clone()
    })?;
    let macg_drug = macg(&per_drug, alpha, SubgroupKind::Drug)?;
    let macg_protein = macg(&per_protein, alpha, SubgroupKind::Protein)?;
    let combined = combined_macg(&macg_drug, &macg_protein)?;
    Ok(MethodReport {
        split: split_kind.as_str().to_string(),
        method: method.as_str().to_string(),
        alpha,
        n_test: test_rows.len(),
        coverage: cov,
        mean_width: width.value.is_finite().then_some(width.value),
        n_unbounded: width.n_unbounded,
        macg_drug,
        macg_protein,
        combined_macg: combined,
        per_drug,
        per_protein,
    })
}

fn interval_rows(
    table: &InteractionTable,
    test_rows: &[usize],
    intervals: &[RowInterval],
    method: MethodName,
    alpha: f64,
) -> Vec<IntervalRow> {
    test_rows
        .iter()
        .zip(intervals)
        .map(|(&row, ri)| {
            let rec = table.record(row);
            IntervalRow {
                drug: rec.drug.token.clone(),
                protein: rec.protein.token.clone(),
                prediction: rec.prediction.unwrap(),
                lower: ri.interval.lower(),
                upper: ri.interval.upper(),
                threshold: ri.threshold,
                method: method.as_str().to_string(),
                alpha,
            }
        })
        .collect()
}

pub fn write_reliability_csv(
    points: &[ReliabilityPoint],
    method: MethodName,
    split_kind: SplitKind,
    path: &Path,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(["alpha", "expected", "observed", "method", "split"])
        .map_err(|e| Error::Validation(e.to_string()))?;
    for p in points {
        writer
            .write_record([
                fmt_f64(p.alpha).as_str(),
                fmt_f64(p.expected).as_str(),
                fmt_f64(p.observed).as_str(),
                method.as_str(),
                split_kind.as_str(),
            ])
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Flat one-row-per-(method, alpha) form of a set of reports.
pub fn write_reports_csv(reports: &[MethodReport], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record([
            "split",
            "method",
            "alpha",
            "n_test",
            "coverage",
            "mean_width",
            "n_unbounded",
            "macg_drug",
            "macg_drug_std",
            "macg_protein",
            "macg_protein_std",
            "combined_macg",
        ])
        .map_err(|e| Error::Validation(e.to_string()))?;
    for r in reports {
        writer
            .write_record([
                r.split.as_str(),
                r.method.as_str(),
                fmt_f64(r.alpha).as_str(),
                r.n_test.to_string().as_str(),
                fmt_f64(r.coverage).as_str(),
                fmt_f64(r.mean_width.unwrap_or(f64::INFINITY)).as_str(),
                r.n_unbounded.to_string().as_str(),
                fmt_f64(r.macg_drug.macg).as_str(),
                fmt_f64(r.macg_drug.std_gap).as_str(),
                fmt_f64(r.macg_protein.macg).as_str(),
                fmt_f64(r.macg_protein.std_gap).as_str(),
                fmt_f64(r.combined_macg).as_str(),
            ])
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct SplitProvenance<'a> {
    strategy: &'a SplitStrategy,
    seed: u64,
    sizes: (usize, usize, usize),
    discarded: usize,
}

pub fn write_split_files(result: &SplitResult, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    write_row_indices(&result.train_rows, dir.join("train_rows.txt"))?;
    write_row_indices(&result.cal_rows, dir.join("cal_rows.txt"))?;
    write_row_indices(&result.test_rows, dir.join("test_rows.txt"))?;
    write_json(
        &SplitProvenance {
            strategy: &result.strategy,
            seed: result.strategy.seed,
            sizes: result.sizes(),
            discarded: result.discarded_rows.len(),
        },
        &dir.join("provenance.json"),
    )
}

struct SeedOutcome {
    manifest: SeedManifest,
    reports: Vec<MethodReport>,
}

fn run_seed(config: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedOutcome> {
    create_dir(dir)?;
    let mut stage_ms: BTreeMap<String, u128> = BTreeMap::new();
    let mut timer = Instant::now();
    let tick = |stage_ms: &mut BTreeMap<String, u128>, name: &str, timer: &mut Instant| {
        stage_ms.insert(name.to_string(), timer.elapsed().as_millis());
        *timer = Instant::now();
    };

    // Data.
    let (mut table, drug_features, protein_features, data_fingerprint) =
        load_data(&config.data, seed)?;
    tick(&mut stage_ms, "data", &mut timer);

    // Fixed label transforms happen at ingestion; a Box–Cox fit waits for
    // the training labels.
    let mut boxcox_lambda = None;
    let mut deferred_boxcox = false;
    if let Some(spec) = &config.label_transform {
        if spec.kind == TransformKind::BoxCox && spec.lambda.is_none() {
            deferred_boxcox = true;
        } else if spec.kind != TransformKind::Identity {
            table = transform_labels(&table, spec)?;
            boxcox_lambda = spec.lambda;
        }
    }

    // Split.
    let strategy = SplitStrategy {
        kind: config.split,
        seed,
    };
    let split_result = split(&table, strategy)?;
    let split_dir = dir.join(config.split.as_str());
    write_split_files(&split_result, &split_dir.join("split"))?;
    tick(&mut stage_ms, "split", &mut timer);

    if deferred_boxcox {
        let train_labels = labels_of(&table, &split_result.train_rows);
        let lambda = fit_boxcox_lambda(&train_labels)?;
        table = transform_labels(&table, &TransformSpec::box_cox(lambda))?;
        boxcox_lambda = Some(lambda);
    }

    // Point predictions.
    match &config.predictor {
        Some(PredictorSpec::Builtin(gbm_config)) => {
            let drug_f = drug_features
                .as_ref()
                .ok_or_else(|| Error::Config("builtin predictor requires drug features".into()))?;
            let protein_f = protein_features.as_ref().ok_or_else(|| {
                Error::Config("builtin predictor requires protein features".into())
            })?;
            let x_train = design_matrix(&table, &split_result.train_rows, drug_f, protein_f)?;
            let y_train = labels_of(&table, &split_result.train_rows);
            let model = fit_gbm(&x_train, &y_train, gbm_config)?;
            let all_rows: Vec<usize> = (0..table.len()).collect();
            let x_all = design_matrix(&table, &all_rows, drug_f, protein_f)?;
            let predictions = predict(&model, &x_all)?;
            table = table.with_predictions(&predictions)?;
        }
        Some(PredictorSpec::External { path, overwrite }) => {
            let predictions = load_predictions(path)?;
            table = attach_external_predictions(&table, &predictions, *overwrite)?;
        }
        None => {
            let all_rows: Vec<usize> = (0..table.len()).collect();
            table.require_predictions(&all_rows)?;
        }
    }
    tick(&mut stage_ms, "predict", &mut timer);

    // Regression quality of the point predictor on the test rows.
    let regression: RegressionMetrics = regression_metrics(
        &labels_of(&table, &split_result.test_rows),
        &predictions_of(&table, &split_result.test_rows),
    )?;
    write_json(&regression, &split_dir.join("regression.json"))?;

    // Binary profiles are shared by every NN calibration of this seed.
    let methods = config.sorted_methods();
    let needs_bits = methods.contains(&MethodName::CcpNn);
    let bits: Option<(BinaryFeatureTable, BinaryFeatureTable)> = if needs_bits {
        let drug_f = drug_features
            .as_ref()
            .ok_or_else(|| Error::Config("ccp_nn requires drug features".into()))?;
        let protein_f = protein_features
            .as_ref()
            .ok_or_else(|| Error::Config("ccp_nn requires protein features".into()))?;
        Some((binarize_features(drug_f)?, binarize_features(protein_f)?))
    } else {
        None
    };

    let alphas = config.sorted_alphas();
    let mut chosen_ccp: BTreeMap<String, ChosenCcp> = BTreeMap::new();
    let mut reports: Vec<MethodReport> = Vec::new();

    for method in &methods {
        let method_dir = split_dir.join(method.as_str());
        create_dir(&method_dir)?;
        let ctx = MethodContext {
            table: &table,
            cal_rows: &split_result.cal_rows,
            drug_features: drug_features.as_ref(),
            protein_features: protein_features.as_ref(),
            drug_bits: bits.as_ref().map(|(d, _)| d),
            protein_bits: bits.as_ref().map(|(_, p)| p),
        };

        let mut curve_model: Option<CalibrationModel> = None;
        for &alpha in &alphas {
            let settings = tuned_settings(
                config,
                method,
                &table,
                &split_result,
                drug_features.as_ref(),
                protein_features.as_ref(),
                alpha,
                seed,
                &method_dir,
                &mut chosen_ccp,
            )?;
            let model = calibrate_method(*method, &ctx, &settings, alpha, seed)?;
            let intervals = predict_rows(
                &model,
                &table,
                &split_result.test_rows,
                drug_features.as_ref(),
                protein_features.as_ref(),
                alpha,
            )?;

            let alpha_dir = method_dir.join(format!("alpha={alpha}"));
            create_dir(&alpha_dir)?;
            write_intervals(
                &interval_rows(&table, &split_result.test_rows, &intervals, *method, alpha),
                alpha_dir.join("intervals.csv"),
            )?;
            let report = build_report(
                &table,
                &split_result.test_rows,
                &intervals,
                config.split,
                *method,
                alpha,
            )?;
            write_json(&report, &alpha_dir.join("report.json"))?;
            reports.push(report);

            if let (CalibrationModel::CcpNc(m) | CalibrationModel::CcpFc(m), true) =
                (&model, curve_model.is_none())
            {
                write_cluster_assignments(
                    &m.drug_cluster_of,
                    method_dir.join("clusters_drug.csv"),
                )?;
                write_cluster_assignments(
                    &m.protein_cluster_of,
                    method_dir.join("clusters_protein.csv"),
                )?;
            }
            if curve_model.is_none() {
                curve_model = Some(model);
            }
        }

        // Reliability curve: one model (the smallest-alpha calibration),
        // thresholds re-derived per level.
        let model = curve_model.expect("at least one alpha");
        let points = reliability_curve(&config.reliability_alphas, |alpha| {
            let intervals = predict_rows(
                &model,
                &table,
                &split_result.test_rows,
                drug_features.as_ref(),
                protein_features.as_ref(),
                alpha,
            )?;
            let ivs: Vec<_> = intervals.iter().map(|r| r.interval).collect();
            coverage(&ivs, &labels_of(&table, &split_result.test_rows))
        })?;
        write_reliability_csv(&points, *method, config.split, &method_dir.join("reliability.csv"))?;
    }
    tick(&mut stage_ms, "methods", &mut timer);

    write_reports_csv(&reports, &dir.join("summary.csv"))?;

    Ok(SeedOutcome {
        manifest: SeedManifest {
            seed,
            data_fingerprint,
            split_sizes: split_result.sizes(),
            discarded_rows: split_result.discarded_rows.len(),
            boxcox_lambda,
            chosen_ccp,
            stage_ms,
        },
        reports,
    })
}

/// Resolves the CCP hyperparameters for one (method, alpha), running the
/// grid search when tuning is configured.
#[allow(clippy::too_many_arguments)]
fn tuned_settings(
    config: &ExperimentConfig,
    method: &MethodName,
    table: &InteractionTable,
    split_result: &SplitResult,
    drug_features: Option<&FeatureTable>,
    protein_features: Option<&FeatureTable>,
    alpha: f64,
    seed: u64,
    method_dir: &Path,
    chosen: &mut BTreeMap<String, ChosenCcp>,
) -> Result<CcpSettings> {
    let ccp_method = match method {
        MethodName::CcpNc => CcpMethod::Nc,
        MethodName::CcpFc => CcpMethod::Fc,
        _ => return Ok(config.ccp),
    };
    let Some(tuning) = &config.tuning else {
        return Ok(config.ccp);
    };

    let (tune_cal, tune_eval): (Vec<usize>, Vec<usize>) = match tuning.evaluate_on {
        TuneEval::Test => (
            split_result.cal_rows.clone(),
            split_result.test_rows.clone(),
        ),
        TuneEval::Holdout => {
            let mut rows = split_result.cal_rows.clone();
            if rows.len() < 2 {
                return Err(Error::DegenerateInput(
                    "holdout tuning needs at least 2 calibration rows".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rows.shuffle(&mut rng);
            let holdout = ((tuning.holdout_fraction * rows.len() as f64).floor() as usize)
                .clamp(1, rows.len() - 1);
            let eval: Vec<usize> = rows[..holdout].to_vec();
            let cal: Vec<usize> = rows[holdout..].to_vec();
            (cal, eval)
        }
    };

    let inputs = GridSearchInputs {
        table,
        cal_rows: &tune_cal,
        eval_rows: &tune_eval,
        method: ccp_method,
        drug_features,
        protein_features,
        alpha,
        seed,
    };
    let grid = GridSpec {
        gammas: tuning.gammas.clone(),
        ks: tuning.ks.clone(),
    };
    let result = grid_search(&inputs, &grid)?;
    write_grid_csv(&result, method_dir.join(format!("grid_alpha={alpha}.csv")))?;
    chosen.insert(
        format!("{method}@{alpha}"),
        ChosenCcp {
            gamma: result.best_gamma,
            n_clusters: result.best_k,
            objective: result.objective,
        },
    );
    Ok(CcpSettings {
        gamma: result.best_gamma,
        n_clusters: result.best_k,
        n_neighbors: config.ccp.n_neighbors,
        allow_any_gamma: true,
    })
}

fn write_aggregate_csv(
    all_reports: &[(u64, Vec<MethodReport>)],
    path: &Path,
) -> Result<()> {
    // Group by (split, method, alpha) across seeds.
    let mut grouped: BTreeMap<(String, String, String), Vec<&MethodReport>> = BTreeMap::new();
    for (_, reports) in all_reports {
        for r in reports {
            grouped
                .entry((r.split.clone(), r.method.clone(), fmt_f64(r.alpha)))
                .or_default()
                .push(r);
        }
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record([
            "split",
            "method",
            "alpha",
            "n_seeds",
            "mean_coverage",
            "std_coverage",
            "mean_width",
            "mean_combined_macg",
            "std_combined_macg",
        ])
        .map_err(|e| Error::Validation(e.to_string()))?;
    for ((split_name, method, alpha), reports) in grouped {
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&MethodReport) -> f64| -> f64 {
            reports.iter().map(|r| f(r)).sum::<f64>() / n
        };
        let std = |f: &dyn Fn(&MethodReport) -> f64, mu: f64| -> f64 {
            (reports.iter().map(|r| (f(r) - mu).powi(2)).sum::<f64>() / n).sqrt()
        };
        let cov_fn: &dyn Fn(&MethodReport) -> f64 = &|r| r.coverage;
        let width_fn: &dyn Fn(&MethodReport) -> f64 =
            &|r| r.mean_width.unwrap_or(f64::INFINITY);
        let macg_fn: &dyn Fn(&MethodReport) -> f64 = &|r| r.combined_macg;
        let mean_cov = mean(cov_fn);
        let mean_macg = mean(macg_fn);
        writer
            .write_record([
                split_name.as_str(),
                method.as_str(),
                alpha.as_str(),
                reports.len().to_string().as_str(),
                fmt_f64(mean_cov).as_str(),
                fmt_f64(std(cov_fn, mean_cov)).as_str(),
                fmt_f64(mean(width_fn)).as_str(),
                fmt_f64(mean_macg).as_str(),
                fmt_f64(std(macg_fn, mean_macg)).as_str(),
            ])
            .map_err(|e| Error::Validation(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Runs the full pipeline for `n_seeds` consecutive seeds and writes every
/// artifact under the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    config.validate()?;
    let started = Instant::now();
    create_dir(&config.output_dir)?;
    let config_hash = format!("{:016x}", fnv1a(serde_json::to_string(config)?.as_bytes()));

    let mut seeds = Vec::with_capacity(config.n_seeds);
    let mut all_reports: Vec<(u64, Vec<MethodReport>)> = Vec::new();
    for i in 0..config.n_seeds {
        let seed = config.seed.wrapping_add(i as u64);
        let dir = if config.n_seeds == 1 {
            config.output_dir.clone()
        } else {
            config.output_dir.join(format!("seed={seed}"))
        };
        let outcome = run_seed(config, seed, &dir)?;
        seeds.push(outcome.manifest);
        all_reports.push((seed, outcome.reports));
    }

    if config.n_seeds > 1 {
        write_aggregate_csv(&all_reports, &config.output_dir.join("aggregate.csv"))?;
    }
    let manifest = RunManifest {
        config_hash,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        seeds,
        total_ms: started.elapsed().as_millis(),
    };
    write_json(&manifest, &config.output_dir.join("manifest.json"))?;
    Ok(manifest)
}
