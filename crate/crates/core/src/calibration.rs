//! Per-method frozen calibration state, with one serialized file format for
//! all five methods.
//!
//! Models store score multisets rather than precomputed thresholds, so one
//! calibration can answer any miscoverage level — reliability curves reuse a
//! single model across levels. The `alpha` recorded in the model is the
//! level it was configured for.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ccp::{
    calibrate_ccp_fc, calibrate_ccp_nc, calibrate_ccp_nn, predict_intervals_ccp,
    predict_intervals_ccp_nn, CcpConfig, CcpMethod, CcpModel, CcpNnCalibration,
    DEFAULT_N_NEIGHBORS,
};
use crate::clustering::BinaryFeatureTable;
use crate::conformal::{
    build_group_calibration, calibrate_mcp, mcp_interval, predict_intervals_gcp, GroupCalibration,
    McpCalibration, RowInterval, ScoreKind,
};
use crate::data::{FeatureTable, InteractionTable};
use crate::error::{Error, Result};
use crate::predictor::GbmModel;

/// The five calibration methods of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Mcp,
    Gcp,
    CcpNc,
    CcpFc,
    CcpNn,
}

impl MethodName {
    pub const ALL: [MethodName; 5] = [
        MethodName::Mcp,
        MethodName::Gcp,
        MethodName::CcpNc,
        MethodName::CcpFc,
        MethodName::CcpNn,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Mcp => "mcp",
            MethodName::Gcp => "gcp",
            MethodName::CcpNc => "ccp_nc",
            MethodName::CcpFc => "ccp_fc",
            MethodName::CcpNn => "ccp_nn",
        }
    }
}

impl std::fmt::Display for MethodName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MethodName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mcp" => Ok(MethodName::Mcp),
            "gcp" => Ok(MethodName::Gcp),
            "ccp_nc" | "ccp-nc" => Ok(MethodName::CcpNc),
            "ccp_fc" | "ccp-fc" => Ok(MethodName::CcpFc),
            "ccp_nn" | "ccp-nn" => Ok(MethodName::CcpNn),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Cluster-conditioned hyperparameters used when no tuner runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcpSettings {
    pub gamma: f64,
    pub n_clusters: usize,
    pub n_neighbors: usize,
    pub allow_any_gamma: bool,
}

impl Default for CcpSettings {
    fn default() -> Self {
        CcpSettings {
            gamma: 0.5,
            n_clusters: 10,
            n_neighbors: DEFAULT_N_NEIGHBORS,
            allow_any_gamma: false,
        }
    }
}

/// Nearest-neighbor model bundled with the binary profiles of every entity
/// it may be asked about, so prediction needs no re-binarization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcpNnModel {
    pub calibration: CcpNnCalibration,
    pub drug_bits: BinaryFeatureTable,
    pub protein_bits: BinaryFeatureTable,
}

// Externally tagged (the JSON object's single key names the method); internal
// tagging would buffer the payload and lose integer map keys on the way back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationModel {
    Mcp(McpCalibration),
    Gcp(GroupCalibration),
    CcpNc(CcpModel),
    CcpFc(CcpModel),
    CcpNn(CcpNnModel),
}

/// Everything a calibration might need: the table (with predictions on the
/// calibration rows), per-side features for FC, and binary profiles for NN.
#[derive(Debug, Clone, Copy)]
pub struct MethodContext<'a> {
    pub table: &'a InteractionTable,
    pub cal_rows: &'a [usize],
    pub drug_features: Option<&'a FeatureTable>,
    pub protein_features: Option<&'a FeatureTable>,
    pub drug_bits: Option<&'a BinaryFeatureTable>,
    pub protein_bits: Option<&'a BinaryFeatureTable>,
}

impl CalibrationModel {
    pub fn method(&self) -> MethodName {
        match self {
            CalibrationModel::Mcp(_) => MethodName::Mcp,
            CalibrationModel::Gcp(_) => MethodName::Gcp,
            CalibrationModel::CcpNc(_) => MethodName::CcpNc,
            CalibrationModel::CcpFc(_) => MethodName::CcpFc,
            CalibrationModel::CcpNn(_) => MethodName::CcpNn,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            CalibrationModel::Mcp(m) => m.alpha,
            CalibrationModel::Gcp(m) => m.alpha,
            CalibrationModel::CcpNc(m) | CalibrationModel::CcpFc(m) => m.alpha,
            CalibrationModel::CcpNn(m) => m.calibration.alpha,
        }
    }
}

/// Calibrates `method` on the context's calibration rows.
pub fn calibrate_method(
    method: MethodName,
    ctx: &MethodContext,
    settings: &CcpSettings,
    alpha: f64,
    seed: u64,
) -> Result<CalibrationModel> {
    match method {
        MethodName::Mcp => Ok(CalibrationModel::Mcp(calibrate_mcp(
            ctx.table,
            ctx.cal_rows,
            alpha,
            ScoreKind::AbsoluteResidual,
            None,
        )?)),
        MethodName::Gcp => Ok(CalibrationModel::Gcp(build_group_calibration(
            ctx.table,
            ctx.cal_rows,
            alpha,
            ScoreKind::AbsoluteResidual,
            None,
        )?)),
        MethodName::CcpNc => {
            let config = CcpConfig {
                method: CcpMethod::Nc,
                gamma: settings.gamma,
                n_clusters: settings.n_clusters,
                n_neighbors: settings.n_neighbors,
                alpha,
                seed,
                allow_any_gamma: settings.allow_any_gamma,
            };
            Ok(CalibrationModel::CcpNc(calibrate_ccp_nc(
                ctx.table,
                ctx.cal_rows,
                &config,
            )?))
        }
        MethodName::CcpFc => {
            let drug_features = ctx
                .drug_features
                .ok_or_else(|| Error::Config("ccp_fc requires drug features".into()))?;
            let protein_features = ctx
                .protein_features
                .ok_or_else(|| Error::Config("ccp_fc requires protein features".into()))?;
            let config = CcpConfig {
                method: CcpMethod::Fc,
                gamma: settings.gamma,
                n_clusters: settings.n_clusters,
                n_neighbors: settings.n_neighbors,
                alpha,
                seed,
                allow_any_gamma: settings.allow_any_gamma,
            };
            Ok(CalibrationModel::CcpFc(calibrate_ccp_fc(
                ctx.table,
                ctx.cal_rows,
                drug_features,
                protein_features,
                &config,
            )?))
        }
        MethodName::CcpNn => {
            let drug_bits = ctx
                .drug_bits
                .ok_or_else(|| Error::Config("ccp_nn requires drug binary profiles".into()))?;
            let protein_bits = ctx
                .protein_bits
                .ok_or_else(|| Error::Config("ccp_nn requires protein binary profiles".into()))?;
            let calibration = calibrate_ccp_nn(
                ctx.table,
                ctx.cal_rows,
                drug_bits,
                protein_bits,
                alpha,
                settings.n_neighbors,
            )?;
            Ok(CalibrationModel::CcpNn(CcpNnModel {
                calibration,
                drug_bits: drug_bits.clone(),
                protein_bits: protein_bits.clone(),
            }))
        }
    }
}

/// Per-row intervals for `test_rows` at level `alpha` (which may differ from
/// the model's configured level; reliability curves rely on that).
pub fn predict_rows(
    model: &CalibrationModel,
    table: &InteractionTable,
    test_rows: &[usize],
    drug_features: Option<&FeatureTable>,
    protein_features: Option<&FeatureTable>,
    alpha: f64,
) -> Result<Vec<RowInterval>> {
    match model {
        CalibrationModel::Mcp(m) => {
            if m.kind != ScoreKind::AbsoluteResidual {
                return Err(Error::Config(
                    "normalized-score models need per-row sigmas; use the library API".into(),
                ));
            }
            table.require_predictions(test_rows)?;
            let q = m.threshold_at(alpha);
            test_rows
                .iter()
                .map(|&row| {
                    let y_hat = table.record(row).prediction.unwrap();
                    Ok(RowInterval {
                        interval: mcp_interval(y_hat, &q, m.kind, None)?,
                        threshold: q.value,
                    })
                })
                .collect()
        }
        CalibrationModel::Gcp(m) => predict_intervals_gcp(table, test_rows, m, alpha),
        CalibrationModel::CcpNc(m) | CalibrationModel::CcpFc(m) => predict_intervals_ccp(
            table,
            test_rows,
            m,
            drug_features,
            protein_features,
            alpha,
        ),
        CalibrationModel::CcpNn(m) => predict_intervals_ccp_nn(
            table,
            test_rows,
            &m.calibration,
            &m.drug_bits,
            &m.protein_bits,
            alpha,
        ),
    }
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct VersionedFile<T> {
    format_version: u32,
    payload: T,
}

fn save_versioned<T: Serialize>(payload: &T, path: &Path) -> Result<()> {
    let file = VersionedFile {
        format_version: MODEL_FORMAT_VERSION,
        payload,
    };
    let json = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, json).map_err(|e| Error::io(path, e))
}

fn load_versioned<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: VersionedFile<T> = serde_json::from_str(&text)?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "{} has format version {}, expected {MODEL_FORMAT_VERSION}",
            path.display(),
            file.format_version
        )));
    }
    Ok(file.payload)
}

pub fn save_model(model: &CalibrationModel, path: impl AsRef<Path>) -> Result<()> {
    save_versioned(model, path.as_ref())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CalibrationModel> {
    load_versioned(path.as_ref())
}

pub fn save_gbm(model: &GbmModel, path: impl AsRef<Path>) -> Result<()> {
    save_versioned(model, path.as_ref())
}

pub fn load_gbm(path: impl AsRef<Path>) -> Result<GbmModel> {
    load_versioned(path.as_ref())
}

#[cfg(test)]
mod tests {
    use crate::data::InteractionRecord;

    use super::*;

    fn fixture() -> InteractionTable {
        let mut records = Vec::new();
        for d in 0..6 {
            for p in 0..6 {
                let y = (d as f64 - p as f64) * 0.25;
                records.push(
                    InteractionRecord::new(format!("d{d}"), format!("p{p}"), y)
                        .with_prediction(0.0),
                );
            }
        }
        InteractionTable::new(records).unwrap()
    }

    #[test]
    fn model_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let table = fixture();
        let rows: Vec<usize> = (0..table.len()).collect();
        let (cal, test) = rows.split_at(24);
        let ctx = MethodContext {
            table: &table,
            cal_rows: cal,
            drug_features: None,
            protein_features: None,
            drug_bits: None,
            protein_bits: None,
        };
        for method in [MethodName::Mcp, MethodName::Gcp, MethodName::CcpNc] {
            let model =
                calibrate_method(method, &ctx, &CcpSettings::default(), 0.2, 3).unwrap();
            let path = dir.path().join(format!("{method}.json"));
            save_model(&model, &path).unwrap();
            let loaded = load_model(&path).unwrap();
            assert_eq!(loaded, model);
            let a = predict_rows(&model, &table, test, None, None, 0.2).unwrap();
            let b = predict_rows(&loaded, &table, test, None, None, 0.2).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"format_version":99,"payload":{"mcp":{"scores":[],"alpha":0.1,"kind":"absolute_residual"}}}"#).unwrap();
        assert!(load_model(&path).is_err());
    }

    #[test]
    fn method_names_parse() {
        for m in MethodName::ALL {
            assert_eq!(m.as_str().parse::<MethodName>().unwrap(), m);
        }
        assert!("ccp-nn".parse::<MethodName>().is_ok());
        assert!("bogus".parse::<MethodName>().is_err());
    }
}
