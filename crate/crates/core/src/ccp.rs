//! Cluster-conditioned conformal prediction.
//!
//! Three calibration variants share one interval rule:
//!
//! * **NC** — entities are clustered by decile embeddings of their
//!   nonconformity-score distributions (a k-means per side).
//! * **FC** — entities are clustered by their input feature vectors.
//! * **NN** — no clusters at all; each test pair gets a dynamic calibration
//!   set from the interactions among its top-k Tanimoto neighbors on both
//!   sides.
//!
//! For NC and FC the calibration set is first partitioned by a γ-split: a
//! fraction γ of rows feeds the clustering, the remainder feeds quantile
//! estimation. Quantile multisets are drawn from the quantile subset only;
//! reusing clustering rows would bias the thresholds.
//!
//! Threshold selection resolves a drug-side and a protein-side cluster for
//! the test pair and then walks a fallback ladder: both sides resolvable →
//! quantile of the deduplicated union of the two cluster buckets; one side →
//! that cluster's quantile; neither → the global quantile of the whole
//! quantile subset. A cluster with no quantile-subset rows counts as
//! unresolvable, which is the only executable reading of "a cluster not
//! represented in the quantile estimation subset defaults to the global
//! threshold".

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    ecdf_embedding, kmeans_assign, kmeans_fit, rank_by_tanimoto, BinaryFeatureTable, KMeansModel,
};
use crate::conformal::{conformal_quantile, PredictionInterval, QuantileThreshold, RowInterval};
use crate::data::{EntityKind, FeatureTable, InteractionTable};
use crate::error::{Error, Result};
use crate::exec;

/// Which cluster-conditioned variant is in use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CcpMethod {
    Nc,
    Fc,
    Nn,
}

impl CcpMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CcpMethod::Nc => "ccp_nc",
            CcpMethod::Fc => "ccp_fc",
            CcpMethod::Nn => "ccp_nn",
        }
    }
}

/// The γ grid the tuner searches over.
pub const GAMMA_GRID: [f64; 3] = [0.25, 0.5, 0.75];

/// The cluster-count grid the tuner searches over.
pub const CLUSTER_GRID: [usize; 11] = [1, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50];

/// Default neighbor count for the NN variant.
pub const DEFAULT_N_NEIGHBORS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcpConfig {
    pub method: CcpMethod,
    /// Fraction of calibration rows used for clustering (NC/FC).
    pub gamma: f64,
    /// Requested cluster count per side (NC/FC).
    pub n_clusters: usize,
    /// Neighbor count per side (NN).
    pub n_neighbors: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Permits γ outside the standard grid.
    pub allow_any_gamma: bool,
}

impl CcpConfig {
    pub fn new(method: CcpMethod, gamma: f64, n_clusters: usize, alpha: f64, seed: u64) -> Self {
        CcpConfig {
            method,
            gamma,
            n_clusters,
            n_neighbors: DEFAULT_N_NEIGHBORS,
            alpha,
            seed,
            allow_any_gamma: false,
        }
    }

    fn validate_gamma(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::Config(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if !self.allow_any_gamma && !GAMMA_GRID.contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma {} is outside the standard grid {GAMMA_GRID:?}; set allow_any_gamma to override",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Splits calibration rows into a clustering subset (`⌊γ·n⌋` rows after a
/// seeded shuffle) and a quantile-estimation subset (the rest). Disjoint and
/// exhaustive; both subsets are returned sorted.
pub fn gamma_split(cal_rows: &[usize], gamma: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = cal_rows.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "gamma split needs at least 2 calibration rows, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = cal_rows.to_vec();
    shuffled.shuffle(&mut rng);
    let cluster_len = (gamma * n as f64).floor() as usize;
    let mut quantile = shuffled.split_off(cluster_len);
    let mut cluster = shuffled;
    if cluster.is_empty() || quantile.is_empty() {
        return Err(Error::DegenerateInput(format!(
            "gamma {gamma} leaves an empty subset for {n} calibration rows"
        )));
    }
    cluster.sort_unstable();
    quantile.sort_unstable();
    Ok((cluster, quantile))
}

/// One quantile-subset entry: the originating calibration row and its score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredRow {
    pub cal_row: usize,
    pub score: f64,
}

/// Frozen state of an NC or FC calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcpModel {
    pub method: CcpMethod,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    /// Cluster assignment of every calibration entity that could be embedded.
    pub drug_cluster_of: BTreeMap<String, usize>,
    pub protein_cluster_of: BTreeMap<String, usize>,
    pub drug_kmeans: KMeansModel,
    pub protein_kmeans: KMeansModel,
    /// Quantile-subset scores with row provenance; the global multiset.
    pub quantile_scores: Vec<ScoredRow>,
    /// Positions into `quantile_scores`, bucketed by drug cluster.
    pub drug_cluster_buckets: BTreeMap<usize, Vec<usize>>,
    /// Positions into `quantile_scores`, bucketed by protein cluster.
    pub protein_cluster_buckets: BTreeMap<usize, Vec<usize>>,
    /// Calibration rows consumed by clustering (kept for leakage audits).
    pub cluster_subset_rows: Vec<usize>,
}

fn absolute_scores(table: &InteractionTable, rows: &[usize]) -> Result<BTreeMap<usize, f64>> {
    table.require_predictions(rows)?;
    Ok(rows
        .iter()
        .map(|&row| {
            let rec = table.record(row);
            (row, (rec.label - rec.prediction.unwrap()).abs())
        })
        .collect())
}

/// Groups scores of `rows` by entity token on one side.
fn scores_by_entity(
    table: &InteractionTable,
    rows: &[usize],
    scores: &BTreeMap<usize, f64>,
    side: EntityKind,
) -> BTreeMap<String, Vec<f64>> {
    let mut grouped: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for &row in rows {
        let rec = table.record(row);
        let token = match side {
            EntityKind::Drug => &rec.drug.token,
            EntityKind::Protein => &rec.protein.token,
        };
        grouped.entry(token.clone()).or_default().push(scores[&row]);
    }
    grouped
}

/// Fits one side of an NC calibration: k-means over the decile embeddings of
/// the cluster-subset score distributions, then assignment of every entity
/// that has scores anywhere in calibration (cluster subset first, quantile
/// subset for the rest).
fn fit_nc_side(
    cluster_scores: &BTreeMap<String, Vec<f64>>,
    quantile_scores: &BTreeMap<String, Vec<f64>>,
    k: usize,
    seed: u64,
) -> Result<(KMeansModel, BTreeMap<String, usize>)> {
    let tokens: Vec<&String> = cluster_scores.keys().collect();
    let embeddings: Vec<Vec<f64>> = tokens
        .iter()
        .map(|t| Ok(ecdf_embedding(&cluster_scores[*t])?.values))
        .collect::<Result<_>>()?;
    let model = kmeans_fit(&embeddings, k, seed)?;

    let mut assignment = BTreeMap::new();
    for (token, embedding) in tokens.iter().zip(&embeddings) {
        assignment.insert((*token).clone(), kmeans_assign(&model, embedding)?);
    }
    for (token, scores) in quantile_scores {
        if !assignment.contains_key(token) {
            let embedding = ecdf_embedding(scores)?.values;
            assignment.insert(token.clone(), kmeans_assign(&model, &embedding)?);
        }
    }
    Ok((model, assignment))
}

/// Fits one side of an FC calibration: k-means over the feature vectors of
/// the distinct cluster-subset entities, then assignment of every
/// calibration entity by its features.
fn fit_fc_side(
    cluster_tokens: &BTreeSet<String>,
    all_tokens: &BTreeSet<String>,
    features: &FeatureTable,
    k: usize,
    seed: u64,
) -> Result<(KMeansModel, BTreeMap<String, usize>)> {
    let kind = features.entity_kind;
    let feature_of = |token: &str| -> Result<&[f64]> {
        let id = crate::data::EntityId {
            kind,
            token: token.to_string(),
        };
        features.get(&id).ok_or_else(|| {
            Error::Validation(format!("missing feature vector for {kind} {token}"))
        })
    };
    let points: Vec<Vec<f64>> = cluster_tokens
        .iter()
        .map(|t| Ok(feature_of(t)?.to_vec()))
        .collect::<Result<_>>()?;
    let model = kmeans_fit(&points, k, seed)?;
    let mut assignment = BTreeMap::new();
    for token in all_tokens {
        assignment.insert(token.clone(), kmeans_assign(&model, feature_of(token)?)?);
    }
    Ok((model, assignment))
}

fn bucket_quantile_rows(
    table: &InteractionTable,
    quantile_scores: &[ScoredRow],
    assignment: &BTreeMap<String, usize>,
    side: EntityKind,
) -> BTreeMap<usize, Vec<usize>> {
    let mut buckets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (pos, entry) in quantile_scores.iter().enumerate() {
        let rec = table.record(entry.cal_row);
        let token = match side {
            EntityKind::Drug => &rec.drug.token,
            EntityKind::Protein => &rec.protein.token,
        };
        // Every quantile-subset entity has scores there, so it was assigned.
        let cluster = assignment[token];
        buckets.entry(cluster).or_default().push(pos);
    }
    buckets
}

/// Nonconformity-based clustering (NC) calibration.
pub fn calibrate_ccp_nc(
    table: &InteractionTable,
    cal_rows: &[usize],
    config: &CcpConfig,
) -> Result<CcpModel> {
    if config.method != CcpMethod::Nc {
        return Err(Error::Config("calibrate_ccp_nc requires method NC".into()));
    }
    config.validate_gamma()?;
    let scores = absolute_scores(table, cal_rows)?;
    let (cluster_rows, quantile_rows) = gamma_split(cal_rows, config.gamma, config.seed)?;

    let drug_cluster = scores_by_entity(table, &cluster_rows, &scores, EntityKind::Drug);
    let drug_quantile = scores_by_entity(table, &quantile_rows, &scores, EntityKind::Drug);
    let protein_cluster = scores_by_entity(table, &cluster_rows, &scores, EntityKind::Protein);
    let protein_quantile = scores_by_entity(table, &quantile_rows, &scores, EntityKind::Protein);

    let (drug_kmeans, drug_cluster_of) =
        fit_nc_side(&drug_cluster, &drug_quantile, config.n_clusters, config.seed)?;
    let (protein_kmeans, protein_cluster_of) = fit_nc_side(
        &protein_cluster,
        &protein_quantile,
        config.n_clusters,
        config.seed,
    )?;

    let quantile_scores: Vec<ScoredRow> = quantile_rows
        .iter()
        .map(|&row| ScoredRow {
            cal_row: row,
            score: scores[&row],
        })
        .collect();
    let drug_cluster_buckets =
        bucket_quantile_rows(table, &quantile_scores, &drug_cluster_of, EntityKind::Drug);
    let protein_cluster_buckets = bucket_quantile_rows(
        table,
        &quantile_scores,
        &protein_cluster_of,
        EntityKind::Protein,
    );

    Ok(CcpModel {
        method: CcpMethod::Nc,
        alpha: config.alpha,
        gamma: config.gamma,
        seed: config.seed,
        drug_cluster_of,
        protein_cluster_of,
        drug_kmeans,
        protein_kmeans,
        quantile_scores,
        drug_cluster_buckets,
        protein_cluster_buckets,
        cluster_subset_rows: cluster_rows,
    })
}

/// Feature-based clustering (FC) calibration. Every calibration entity must
/// have a feature vector.
pub fn calibrate_ccp_fc(
    table: &InteractionTable,
    cal_rows: &[usize],
    drug_features: &FeatureTable,
    protein_features: &FeatureTable,
    config: &CcpConfig,
) -> Result<CcpModel> {
    if config.method != CcpMethod::Fc {
        return Err(Error::Config("calibrate_ccp_fc requires method FC".into()));
    }
    config.validate_gamma()?;
    let scores = absolute_scores(table, cal_rows)?;
    let (cluster_rows, quantile_rows) = gamma_split(cal_rows, config.gamma, config.seed)?;

    let tokens_of = |rows: &[usize], side: EntityKind| -> BTreeSet<String> {
        rows.iter()
            .map(|&row| {
                let rec = table.record(row);
                match side {
                    EntityKind::Drug => rec.drug.token.clone(),
                    EntityKind::Protein => rec.protein.token.clone(),
                }
            })
            .collect()
    };
    let all_drugs = tokens_of(cal_rows, EntityKind::Drug);
    let all_proteins = tokens_of(cal_rows, EntityKind::Protein);
    let cluster_drugs = tokens_of(&cluster_rows, EntityKind::Drug);
    let cluster_proteins = tokens_of(&cluster_rows, EntityKind::Protein);

    let (drug_kmeans, drug_cluster_of) = fit_fc_side(
        &cluster_drugs,
        &all_drugs,
        drug_features,
        config.n_clusters,
        config.seed,
    )?;
    let (protein_kmeans, protein_cluster_of) = fit_fc_side(
        &cluster_proteins,
        &all_proteins,
        protein_features,
        config.n_clusters,
        config.seed,
    )?;

    let quantile_scores: Vec<ScoredRow> = quantile_rows
        .iter()
        .map(|&row| ScoredRow {
            cal_row: row,
            score: scores[&row],
        })
        .collect();
    let drug_cluster_buckets =
        bucket_quantile_rows(table, &quantile_scores, &drug_cluster_of, EntityKind::Drug);
    let protein_cluster_buckets = bucket_quantile_rows(
        table,
        &quantile_scores,
        &protein_cluster_of,
        EntityKind::Protein,
    );

    Ok(CcpModel {
        method: CcpMethod::Fc,
        alpha: config.alpha,
        gamma: config.gamma,
        seed: config.seed,
        drug_cluster_of,
        protein_cluster_of,
        drug_kmeans,
        protein_kmeans,
        quantile_scores,
        drug_cluster_buckets,
        protein_cluster_buckets,
        cluster_subset_rows: cluster_rows,
    })
}

impl CcpModel {
    /// Resolves the drug-side cluster of a test entity, or `None` when the
    /// fallback ladder should skip this side. NC can only resolve entities
    /// seen in calibration; FC additionally assigns any entity with features.
    /// A cluster with an empty quantile bucket is treated as unresolvable.
    pub fn resolve_drug_cluster(&self, token: &str, feature: Option<&[f64]>) -> Option<usize> {
        let cluster = match self.drug_cluster_of.get(token) {
            Some(&c) => Some(c),
            None => match (self.method, feature) {
                (CcpMethod::Fc, Some(f)) => kmeans_assign(&self.drug_kmeans, f).ok(),
                _ => None,
            },
        }?;
        self.drug_cluster_buckets
            .get(&cluster)
            .filter(|rows| !rows.is_empty())
            .map(|_| cluster)
    }

    /// Protein-side analogue of [`CcpModel::resolve_drug_cluster`].
    pub fn resolve_protein_cluster(&self, token: &str, feature: Option<&[f64]>) -> Option<usize> {
        let cluster = match self.protein_cluster_of.get(token) {
            Some(&c) => Some(c),
            None => match (self.method, feature) {
                (CcpMethod::Fc, Some(f)) => kmeans_assign(&self.protein_kmeans, f).ok(),
                _ => None,
            },
        }?;
        self.protein_cluster_buckets
            .get(&cluster)
            .filter(|rows| !rows.is_empty())
            .map(|_| cluster)
    }

    /// All quantile-subset scores (the global fallback multiset).
    pub fn global_quantile_scores(&self) -> Vec<f64> {
        self.quantile_scores.iter().map(|e| e.score).collect()
    }

    /// Threshold for a resolved cluster pair at level `alpha`, following the
    /// fallback ladder.
    pub fn threshold_for_clusters(
        &self,
        drug_cluster: Option<usize>,
        protein_cluster: Option<usize>,
        alpha: f64,
    ) -> QuantileThreshold {
        let scores_at = |positions: &[usize]| -> Vec<f64> {
            positions
                .iter()
                .map(|&p| self.quantile_scores[p].score)
                .collect()
        };
        match (drug_cluster, protein_cluster) {
            (Some(d), Some(p)) => {
                let drug_rows = &self.drug_cluster_buckets[&d];
                let protein_rows = &self.protein_cluster_buckets[&p];
                let mut union: Vec<usize> =
                    drug_rows.iter().chain(protein_rows.iter()).copied().collect();
                union.sort_unstable();
                union.dedup();
                conformal_quantile(&scores_at(&union), alpha)
            }
            (Some(d), None) => conformal_quantile(&scores_at(&self.drug_cluster_buckets[&d]), alpha),
            (None, Some(p)) => {
                conformal_quantile(&scores_at(&self.protein_cluster_buckets[&p]), alpha)
            }
            (None, None) => conformal_quantile(&self.global_quantile_scores(), alpha),
        }
    }
}

/// Threshold for one test pair. Features are consulted only by FC, and only
/// for entities unseen in calibration.
pub fn ccp_threshold(
    model: &CcpModel,
    test_drug: &str,
    test_protein: &str,
    drug_feature: Option<&[f64]>,
    protein_feature: Option<&[f64]>,
    alpha: f64,
) -> QuantileThreshold {
    let d = model.resolve_drug_cluster(test_drug, drug_feature);
    let p = model.resolve_protein_cluster(test_protein, protein_feature);
    model.threshold_for_clusters(d, p, alpha)
}

/// Per-row NC/FC intervals for `test_rows`, in input order. Thresholds are
/// computed once per distinct cluster pair and shared across rows.
pub fn predict_intervals_ccp(
    table: &InteractionTable,
    test_rows: &[usize],
    model: &CcpModel,
    drug_features: Option<&FeatureTable>,
    protein_features: Option<&FeatureTable>,
    alpha: f64,
) -> Result<Vec<RowInterval>> {
    table.require_predictions(test_rows)?;
    fn feature_of<'a>(
        features: Option<&'a FeatureTable>,
        kind: EntityKind,
        token: &str,
    ) -> Option<&'a [f64]> {
        features.and_then(|f| {
            f.get(&crate::data::EntityId {
                kind,
                token: token.to_string(),
            })
        })
    }

    let keys: Vec<(Option<usize>, Option<usize>)> = test_rows
        .iter()
        .map(|&row| {
            let rec = table.record(row);
            let d = model.resolve_drug_cluster(
                &rec.drug.token,
                feature_of(drug_features, EntityKind::Drug, &rec.drug.token),
            );
            let p = model.resolve_protein_cluster(
                &rec.protein.token,
                feature_of(protein_features, EntityKind::Protein, &rec.protein.token),
            );
            (d, p)
        })
        .collect();

    let distinct: Vec<(Option<usize>, Option<usize>)> =
        keys.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let thresholds: Vec<QuantileThreshold> = exec::map_ordered(&distinct, |&(d, p)| {
        model.threshold_for_clusters(d, p, alpha)
    });
    let threshold_of: BTreeMap<(Option<usize>, Option<usize>), QuantileThreshold> =
        distinct.into_iter().zip(thresholds).collect();

    Ok(test_rows
        .iter()
        .zip(&keys)
        .map(|(&row, key)| {
            let q = threshold_of[key];
            let y_hat = table.record(row).prediction.unwrap();
            RowInterval {
                interval: PredictionInterval::symmetric(y_hat, q.value),
                threshold: q.value,
            }
        })
        .collect())
}

/// Frozen state of a nearest-neighbor calibration: the full calibration set
/// acts as the neighbor pool (no γ-split), with per-entity binary profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcpNnCalibration {
    pub alpha: f64,
    pub n_neighbors: usize,
    /// One entry per calibration row: drug token, protein token, score.
    pub cal_entries: Vec<(String, String, f64)>,
    /// Binary profiles of the calibration drugs / proteins.
    pub drug_bits: BTreeMap<String, Vec<bool>>,
    pub protein_bits: BTreeMap<String, Vec<bool>>,
}

/// Builds the NN neighbor pool from calibration rows and binarized profiles.
pub fn calibrate_ccp_nn(
    table: &InteractionTable,
    cal_rows: &[usize],
    drug_bits: &BinaryFeatureTable,
    protein_bits: &BinaryFeatureTable,
    alpha: f64,
    n_neighbors: usize,
) -> Result<CcpNnCalibration> {
    if n_neighbors == 0 {
        return Err(Error::Config("neighbor count must be at least 1".into()));
    }
    let scores = absolute_scores(table, cal_rows)?;
    let mut cal_entries = Vec::with_capacity(cal_rows.len());
    let mut drugs: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    let mut proteins: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for &row in cal_rows {
        let rec = table.record(row);
        let d_bits = drug_bits.get(&rec.drug).ok_or_else(|| {
            Error::Validation(format!("missing binary profile for drug {}", rec.drug.token))
        })?;
        let p_bits = protein_bits.get(&rec.protein).ok_or_else(|| {
            Error::Validation(format!(
                "missing binary profile for protein {}",
                rec.protein.token
            ))
        })?;
        drugs.entry(rec.drug.token.clone()).or_insert_with(|| d_bits.to_vec());
        proteins
            .entry(rec.protein.token.clone())
            .or_insert_with(|| p_bits.to_vec());
        cal_entries.push((rec.drug.token.clone(), rec.protein.token.clone(), scores[&row]));
    }
    Ok(CcpNnCalibration {
        alpha,
        n_neighbors,
        cal_entries,
        drug_bits: drugs,
        protein_bits: proteins,
    })
}

impl CcpNnCalibration {
    pub fn global_scores(&self) -> Vec<f64> {
        self.cal_entries.iter().map(|(_, _, s)| *s).collect()
    }
}

/// Scores of the dynamic neighborhood of one test pair: calibration rows
/// whose drug is among the top-k drug neighbors AND whose protein is among
/// the top-k protein neighbors. May be empty.
pub fn ccp_nn_local_scores(
    calib: &CcpNnCalibration,
    test_drug_bits: &[bool],
    test_protein_bits: &[bool],
    k: usize,
) -> Result<Vec<f64>> {
    let drug_nn: BTreeSet<&String> =
        rank_by_tanimoto(test_drug_bits, calib.drug_bits.iter(), k)?
            .into_iter()
            .map(|(token, _)| token)
            .collect();
    let protein_nn: BTreeSet<&String> =
        rank_by_tanimoto(test_protein_bits, calib.protein_bits.iter(), k)?
            .into_iter()
            .map(|(token, _)| token)
            .collect();
    Ok(calib
        .cal_entries
        .iter()
        .filter(|(d, p, _)| drug_nn.contains(d) && protein_nn.contains(p))
        .map(|(_, _, s)| *s)
        .collect())
}

/// Per-row NN intervals. An empty neighborhood falls back to the global
/// calibration quantile; a small but non-empty one can yield an unbounded
/// interval through the `⌈(1-α)(n+1)⌉ > n` rule.
pub fn predict_intervals_ccp_nn(
    table: &InteractionTable,
    test_rows: &[usize],
    calib: &CcpNnCalibration,
    drug_bits: &BinaryFeatureTable,
    protein_bits: &BinaryFeatureTable,
    alpha: f64,
) -> Result<Vec<RowInterval>> {
    table.require_predictions(test_rows)?;
    let global = conformal_quantile(&calib.global_scores(), alpha);

    // Neighbor sets depend only on the entity, not the row.
    let mut test_drugs: Vec<&str> = Vec::new();
    let mut test_proteins: Vec<&str> = Vec::new();
    for &row in test_rows {
        let rec = table.record(row);
        test_drugs.push(&rec.drug.token);
        test_proteins.push(&rec.protein.token);
    }
    test_drugs.sort_unstable();
    test_drugs.dedup();
    test_proteins.sort_unstable();
    test_proteins.dedup();

    let bits_of = |bits: &BinaryFeatureTable, kind: EntityKind, token: &str| -> Result<Vec<bool>> {
        bits.get(&crate::data::EntityId {
            kind,
            token: token.to_string(),
        })
        .map(<[bool]>::to_vec)
        .ok_or_else(|| Error::Validation(format!("missing binary profile for {kind} {token}")))
    };

    let drug_nn: BTreeMap<&str, BTreeSet<&String>> = test_drugs
        .iter()
        .map(|&token| {
            let bits = bits_of(drug_bits, EntityKind::Drug, token)?;
            let nn = rank_by_tanimoto(&bits, calib.drug_bits.iter(), calib.n_neighbors)?
                .into_iter()
                .map(|(t, _)| t)
                .collect();
            Ok((token, nn))
        })
        .collect::<Result<_>>()?;
    let protein_nn: BTreeMap<&str, BTreeSet<&String>> = test_proteins
        .iter()
        .map(|&token| {
            let bits = bits_of(protein_bits, EntityKind::Protein, token)?;
            let nn = rank_by_tanimoto(&bits, calib.protein_bits.iter(), calib.n_neighbors)?
                .into_iter()
                .map(|(t, _)| t)
                .collect();
            Ok((token, nn))
        })
        .collect::<Result<_>>()?;

    let outputs = exec::map_ordered(test_rows, |&row| {
        let rec = table.record(row);
        let d_nn = &drug_nn[rec.drug.token.as_str()];
        let p_nn = &protein_nn[rec.protein.token.as_str()];
        let local: Vec<f64> = calib
            .cal_entries
            .iter()
            .filter(|(d, p, _)| d_nn.contains(d) && p_nn.contains(p))
            .map(|(_, _, s)| *s)
            .collect();
        let q = if local.is_empty() {
            global
        } else {
            conformal_quantile(&local, alpha)
        };
        RowInterval {
            interval: PredictionInterval::symmetric(rec.prediction.unwrap(), q.value),
            threshold: q.value,
        }
    });
    Ok(outputs)
}
