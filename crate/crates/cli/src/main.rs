//! `bicp` — conformal prediction intervals for bipartite interaction tables.
//!
//! Subcommands cover the full pipeline piecewise (`synth`, `split`, `fit`,
//! `attach-preds`, `calibrate`, `predict-intervals`, `evaluate`, `tune`,
//! `report`) and end-to-end (`run`). Exit codes: 0 ok, 2 validation/config
//! error, 3 infeasible split, 4 I/O error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bicp_core::calibration::{
    calibrate_method, load_model, predict_rows, save_gbm, save_model, CcpSettings, MethodContext,
    MethodName,
};
use bicp_core::clustering::binarize_features;
use bicp_core::data::{EntityKind, FeatureTable, InteractionTable};
use bicp_core::error::Error;
use bicp_core::harness::{build_report, run_experiment, write_split_files, ExperimentConfig};
use bicp_core::io::{
    load_features, load_interactions, load_intervals, load_predictions, load_row_indices,
    write_features, write_interactions, write_intervals, write_predictions, IntervalRow,
};
use bicp_core::predictor::{attach_external_predictions, fit_gbm, predict, GbmConfig};
use bicp_core::splits::{split, SplitKind, SplitStrategy};
use bicp_core::synth::{generate_synthetic, SyntheticSpec};
use bicp_core::tune::{grid_search, write_grid_csv, GridSearchInputs, GridSpec};
use bicp_core::Result;

#[derive(Parser)]
#[command(name = "bicp", version, about = "Conformal prediction for bipartite interaction regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic interaction table with per-entity features.
    Synth(SynthArgs),
    /// Split an interaction table into train/calibration/test row sets.
    Split(SplitArgs),
    /// Train the gradient-boosting point predictor and emit predictions.
    Fit(FitArgs),
    /// Attach externally computed predictions to an interaction table.
    AttachPreds(AttachArgs),
    /// Calibrate a conformal method and save its model.
    Calibrate(CalibrateArgs),
    /// Produce prediction intervals from a saved calibration model.
    PredictIntervals(PredictArgs),
    /// Evaluate an intervals file against the labels of its table.
    Evaluate(EvaluateArgs),
    /// Grid-search (gamma, n_clusters) for a cluster-conditioned method.
    Tune(TuneArgs),
    /// Merge the per-seed summaries of a run directory into one CSV.
    Report(ReportArgs),
    /// Run the full experiment pipeline from a JSON config.
    Run(RunArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// JSON file holding a synthetic-data spec; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_drugs: Option<usize>,
    #[arg(long)]
    n_proteins: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    latent_dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for interactions.csv and the two feature CSVs.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    interactions: PathBuf,
    /// random | cold-drug | cold-protein | double-cold
    #[arg(long)]
    strategy: String,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long)]
    drug_features: PathBuf,
    #[arg(long)]
    protein_features: PathBuf,
    /// Row-index file to train on (default: all rows).
    #[arg(long)]
    train_rows: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    stages: usize,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    #[arg(long, default_value_t = 6)]
    max_depth: usize,
    #[arg(long)]
    model_out: PathBuf,
    /// Also write predictions for --rows (default: all rows).
    #[arg(long)]
    predictions_out: Option<PathBuf>,
    #[arg(long)]
    rows: Option<PathBuf>,
}

#[derive(Args)]
struct AttachArgs {
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Replace predictions already present in the table.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Interactions CSV whose calibration rows carry predictions.
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long)]
    cal_rows: PathBuf,
    /// mcp | gcp | ccp-nc | ccp-fc | ccp-nn
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 10)]
    n_clusters: usize,
    #[arg(long, default_value_t = 20)]
    n_neighbors: usize,
    /// Accept gamma values outside {0.25, 0.5, 0.75}.
    #[arg(long)]
    allow_any_gamma: bool,
    #[arg(long)]
    drug_features: Option<PathBuf>,
    #[arg(long)]
    protein_features: Option<PathBuf>,
    #[arg(long)]
    model_out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    interactions: PathBuf,
    /// Row-index file of the test rows (default: all rows).
    #[arg(long)]
    rows: Option<PathBuf>,
    /// Miscoverage level (default: the model's configured level).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    drug_features: Option<PathBuf>,
    #[arg(long)]
    protein_features: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    intervals: PathBuf,
    /// Interactions CSV providing the labels.
    #[arg(long)]
    interactions: PathBuf,
    /// Split name recorded in the report (metadata only).
    #[arg(long, default_value = "unspecified")]
    split: String,
    #[arg(long)]
    out_json: PathBuf,
    /// Optional flat one-row CSV form of the same report.
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long)]
    cal_rows: PathBuf,
    /// Labelled, predicted rows the grid cells are scored on.
    #[arg(long)]
    eval_rows: PathBuf,
    /// ccp-nc | ccp-fc
    #[arg(long)]
    method: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    #[arg(long)]
    drug_features: Option<PathBuf>,
    #[arg(long)]
    protein_features: Option<PathBuf>,
    #[arg(long)]
    grid_out: PathBuf,
    #[arg(long)]
    best_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    run_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON; any field can be overridden with --set.
    #[arg(long)]
    config: PathBuf,
    /// Base seed (mandatory; overrides the config).
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    n_seeds: Option<usize>,
    /// Dotted-path override, e.g. --set split=cold_drug --set ccp.n_clusters=25.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn load_rows_or_all(path: &Option<PathBuf>, table: &InteractionTable) -> Result<Vec<usize>> {
    match path {
        Some(p) => {
            let rows = load_row_indices(p)?;
            for &r in &rows {
                if r >= table.len() {
                    return Err(Error::Validation(format!(
                        "row index {r} out of bounds for a table of {} rows",
                        table.len()
                    )));
                }
            }
            Ok(rows)
        }
        None => Ok((0..table.len()).collect()),
    }
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut spec: SyntheticSpec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)?
        }
        None => SyntheticSpec::default(),
    };
    if let Some(v) = args.n_drugs {
        spec.n_drugs = v;
    }
    if let Some(v) = args.n_proteins {
        spec.n_proteins = v;
    }
    if let Some(v) = args.density {
        spec.density = v;
    }
    if let Some(v) = args.latent_dim {
        spec.latent_dim = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    let data = generate_synthetic(&spec)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    write_interactions(&data.table, args.out_dir.join("interactions.csv"))?;
    write_features(&data.drug_features, args.out_dir.join("drug_features.csv"))?;
    write_features(
        &data.protein_features,
        args.out_dir.join("protein_features.csv"),
    )?;
    println!(
        "wrote {} interactions ({} drugs x {} proteins) to {}",
        data.table.len(),
        spec.n_drugs,
        spec.n_proteins,
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let table = load_interactions(&args.interactions)?;
    let kind: SplitKind = args.strategy.parse()?;
    let result = split(
        &table,
        SplitStrategy {
            kind,
            seed: args.seed,
        },
    )?;
    write_split_files(&result, &args.out_dir)?;
    let (train, cal, test) = result.sizes();
    println!(
        "{kind}: train={train} cal={cal} test={test} discarded={}",
        result.discarded_rows.len()
    );
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let table = load_interactions(&args.interactions)?;
    let drug_features = load_features(&args.drug_features, EntityKind::Drug)?;
    let protein_features = load_features(&args.protein_features, EntityKind::Protein)?;
    drug_features.require_coverage(&table)?;
    protein_features.require_coverage(&table)?;

    let design = |rows: &[usize]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|&r| {
                let rec = table.record(r);
                let mut x = drug_features.get(&rec.drug).unwrap().to_vec();
                x.extend_from_slice(protein_features.get(&rec.protein).unwrap());
                x
            })
            .collect()
    };

    let train_rows = load_rows_or_all(&args.train_rows, &table)?;
    let labels: Vec<f64> = train_rows.iter().map(|&r| table.record(r).label).collect();
    let config = GbmConfig {
        n_stages: args.stages,
        learning_rate: args.learning_rate,
        max_depth: args.max_depth,
        ..GbmConfig::default()
    };
    let model = fit_gbm(&design(&train_rows), &labels, &config)?;
    save_gbm(&model, &args.model_out)?;
    println!(
        "trained {} stages on {} rows -> {}",
        config.n_stages,
        train_rows.len(),
        args.model_out.display()
    );

    if let Some(out) = &args.predictions_out {
        let rows = load_rows_or_all(&args.rows, &table)?;
        let preds = predict(&model, &design(&rows))?;
        write_predictions(
            rows.iter().zip(&preds).map(|(&r, &p)| {
                let rec = table.record(r);
                (rec.drug.token.clone(), rec.protein.token.clone(), p)
            }),
            out,
        )?;
        println!("wrote {} predictions to {}", rows.len(), out.display());
    }
    Ok(())
}

fn cmd_attach(args: AttachArgs) -> Result<()> {
    let table = load_interactions(&args.interactions)?;
    let predictions = load_predictions(&args.predictions)?;
    let out = attach_external_predictions(&table, &predictions, args.overwrite)?;
    write_interactions(&out, &args.out)?;
    println!("attached predictions for {} rows -> {}", out.len(), args.out.display());
    Ok(())
}

fn load_feature_pair(
    drug: &Option<PathBuf>,
    protein: &Option<PathBuf>,
) -> Result<(Option<FeatureTable>, Option<FeatureTable>)> {
    let drug = drug
        .as_ref()
        .map(|p| load_features(p, EntityKind::Drug))
        .transpose()?;
    let protein = protein
        .as_ref()
        .map(|p| load_features(p, EntityKind::Protein))
        .transpose()?;
    Ok((drug, protein))
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let table = load_interactions(&args.interactions)?;
    let cal_rows = load_row_indices(&args.cal_rows)?;
    let method: MethodName = args.method.parse()?;
    let (drug_features, protein_features) =
        load_feature_pair(&args.drug_features, &args.protein_features)?;

    let bits = if method == MethodName::CcpNn {
        let d = drug_features
            .as_ref()
            .ok_or_else(|| Error::Config("ccp-nn requires --drug-features".into()))?;
        let p = protein_features
            .as_ref()
            .ok_or_else(|| Error::Config("ccp-nn requires --protein-features".into()))?;
        Some((binarize_features(d)?, binarize_features(p)?))
    } else {
        None
    };

    let ctx = MethodContext {
        table: &table,
        cal_rows: &cal_rows,
        drug_features: drug_features.as_ref(),
        protein_features: protein_features.as_ref(),
        drug_bits: bits.as_ref().map(|(d, _)| d),
        protein_bits: bits.as_ref().map(|(_, p)| p),
    };
    let settings = CcpSettings {
        gamma: args.gamma,
        n_clusters: args.n_clusters,
        n_neighbors: args.n_neighbors,
        allow_any_gamma: args.allow_any_gamma,
    };
    let model = calibrate_method(method, &ctx, &settings, args.alpha, args.seed)?;
    save_model(&model, &args.model_out)?;
    println!(
        "calibrated {method} on {} rows at alpha={} -> {}",
        cal_rows.len(),
        args.alpha,
        args.model_out.display()
    );
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = load_model(&args.model)?;
    let table = load_interactions(&args.interactions)?;
    let rows = load_rows_or_all(&args.rows, &table)?;
    let (drug_features, protein_features) =
        load_feature_pair(&args.drug_features, &args.protein_features)?;
    let alpha = args.alpha.unwrap_or_else(|| model.alpha());
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
    }
    let intervals = predict_rows(
        &model,
        &table,
        &rows,
        drug_features.as_ref(),
        protein_features.as_ref(),
        alpha,
    )?;
    let out_rows: Vec<IntervalRow> = rows
        .iter()
        .zip(&intervals)
        .map(|(&r, ri)| {
            let rec = table.record(r);
            IntervalRow {
                drug: rec.drug.token.clone(),
                protein: rec.protein.token.clone(),
                prediction: rec.prediction.unwrap(),
                lower: ri.interval.lower(),
                upper: ri.interval.upper(),
                threshold: ri.threshold,
                method: model.method().as_str().to_string(),
                alpha,
            }
        })
        .collect();
    write_intervals(&out_rows, &args.out)?;
    println!("wrote {} intervals to {}", out_rows.len(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<()> {
    let rows = load_intervals(&args.intervals)?;
    if rows.is_empty() {
        return Err(Error::DegenerateInput("intervals file is empty".into()));
    }
    let alpha = rows[0].alpha;
    let method: MethodName = rows[0].method.parse()?;
    for r in &rows {
        if r.alpha != alpha || r.method != rows[0].method {
            return Err(Error::Validation(
                "intervals file mixes methods or alpha levels".into(),
            ));
        }
    }
    let table = load_interactions(&args.interactions)?;
    let mut row_of: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (i, rec) in table.records().iter().enumerate() {
        row_of.insert((rec.drug.token.as_str(), rec.protein.token.as_str()), i);
    }
    let mut table_rows = Vec::with_capacity(rows.len());
    let mut intervals = Vec::with_capacity(rows.len());
    for r in &rows {
        let &row = row_of
            .get(&(r.drug.as_str(), r.protein.as_str()))
            .ok_or_else(|| {
                Error::Validation(format!(
                    "pair ({}, {}) from the intervals file is not in the table",
                    r.drug, r.protein
                ))
            })?;
        table_rows.push(row);
        // CLI methods are absolute-residual: half-width equals the threshold.
        intervals.push(bicp_core::conformal::RowInterval {
            interval: bicp_core::conformal::PredictionInterval::symmetric(r.prediction, r.threshold),
            threshold: r.threshold,
        });
    }
    let split_kind = args.split.parse().unwrap_or(SplitKind::Random);
    let mut report = build_report(&table, &table_rows, &intervals, split_kind, method, alpha)?;
    report.split = args.split.clone();
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(&args.out_json, &json).map_err(|e| Error::io(&args.out_json, e))?;
    if let Some(csv_path) = &args.out_csv {
        bicp_core::harness::write_reports_csv(std::slice::from_ref(&report), csv_path)?;
    }
    println!(
        "coverage={:.4} mean_width={} combined_macg={:.4} -> {}",
        report.coverage,
        report
            .mean_width
            .map(|w| format!("{w:.4}"))
            .unwrap_or_else(|| "inf".into()),
        report.combined_macg,
        args.out_json.display()
    );
    Ok(())
}

fn cmd_tune(args: TuneArgs) -> Result<()> {
    let table = load_interactions(&args.interactions)?;
    let cal_rows = load_row_indices(&args.cal_rows)?;
    let eval_rows = load_row_indices(&args.eval_rows)?;
    let method: MethodName = args.method.parse()?;
    let ccp_method = match method {
        MethodName::CcpNc => bicp_core::ccp::CcpMethod::Nc,
        MethodName::CcpFc => bicp_core::ccp::CcpMethod::Fc,
        _ => {
            return Err(Error::Config(
                "tune applies to ccp-nc and ccp-fc only".into(),
            ))
        }
    };
    let (drug_features, protein_features) =
        load_feature_pair(&args.drug_features, &args.protein_features)?;
    let default_grid = GridSpec::default();
    let grid = GridSpec {
        gammas: args.gammas.unwrap_or(default_grid.gammas),
        ks: args.ks.unwrap_or(default_grid.ks),
    };
    let inputs = GridSearchInputs {
        table: &table,
        cal_rows: &cal_rows,
        eval_rows: &eval_rows,
        method: ccp_method,
        drug_features: drug_features.as_ref(),
        protein_features: protein_features.as_ref(),
        alpha: args.alpha,
        seed: args.seed,
    };
    let result = grid_search(&inputs, &grid)?;
    write_grid_csv(&result, &args.grid_out)?;
    if let Some(best_out) = &args.best_out {
        let json = serde_json::to_string_pretty(&serde_json::json!({
            "gamma": result.best_gamma,
            "n_clusters": result.best_k,
            "objective": result.objective,
        }))?;
        std::fs::write(best_out, json).map_err(|e| Error::io(best_out, e))?;
    }
    println!(
        "evaluated {} cells; best gamma={} k={} objective={:.6}",
        result.evaluated.len(),
        result.best_gamma,
        result.best_k,
        result.objective
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    // Collect summary.csv files: either {run_dir}/summary.csv (single seed)
    // or {run_dir}/seed=*/summary.csv.
    let mut summaries: Vec<(String, PathBuf)> = Vec::new();
    let single = args.run_dir.join("summary.csv");
    if single.exists() {
        summaries.push(("0".into(), single));
    } else {
        let entries =
            std::fs::read_dir(&args.run_dir).map_err(|e| Error::io(&args.run_dir, e))?;
        let mut dirs: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_dir()
                    && p.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("seed="))
            })
            .collect();
        dirs.sort();
        for dir in dirs {
            let seed = dir
                .file_name()
                .and_then(|n| n.to_str())
                .and_then(|n| n.strip_prefix("seed="))
                .unwrap_or("?")
                .to_string();
            let path = dir.join("summary.csv");
            if path.exists() {
                summaries.push((seed, path));
            }
        }
    }
    if summaries.is_empty() {
        return Err(Error::Validation(format!(
            "no summary.csv found under {}",
            args.run_dir.display()
        )));
    }
    let mut out = String::new();
    for (i, (seed, path)) in summaries.iter().enumerate() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (j, line) in text.lines().enumerate() {
            if j == 0 {
                if i == 0 {
                    out.push_str("seed,");
                    out.push_str(line);
                    out.push('\n');
                }
                continue;
            }
            out.push_str(seed);
            out.push(',');
            out.push_str(line);
            out.push('\n');
        }
    }
    std::fs::write(&args.out, out).map_err(|e| Error::io(&args.out, e))?;
    println!(
        "merged {} summaries -> {}",
        summaries.len(),
        args.out.display()
    );
    Ok(())
}

/// Applies `key=value` to a JSON tree by dotted path; the value is parsed as
/// JSON when possible and falls back to a plain string.
fn apply_override(root: &mut serde_json::Value, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        Error::Config(format!("override {spec:?} is not of the form key=value"))
    })?;
    let value: serde_json::Value = serde_json::from_str(raw)
        .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let map = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!("override path {path:?} walks through a non-object"))
        })?;
        if i + 1 == parts.len() {
            map.insert((*part).to_string(), value);
            return Ok(());
        }
        node = map
            .entry((*part).to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("paths have at least one segment")
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::io(&args.config, e))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    for spec in &args.sets {
        apply_override(&mut value, spec)?;
    }
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Config("config root must be a JSON object".into()))?;
    obj.insert("seed".into(), serde_json::json!(args.seed));
    if let Some(dir) = &args.output_dir {
        obj.insert("output_dir".into(), serde_json::json!(dir));
    }
    if let Some(n) = args.n_seeds {
        obj.insert("n_seeds".into(), serde_json::json!(n));
    }
    let config: ExperimentConfig = serde_json::from_value(value)?;
    let manifest = run_experiment(&config)?;
    println!(
        "run complete: {} seed(s), config hash {}, outputs in {}",
        manifest.seeds.len(),
        manifest.config_hash,
        config.output_dir.display()
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Split(args) => cmd_split(args),
        Command::Fit(args) => cmd_fit(args),
        Command::AttachPreds(args) => cmd_attach(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::PredictIntervals(args) => cmd_predict(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Report(args) => cmd_report(args),
        Command::Run(args) => cmd_run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
