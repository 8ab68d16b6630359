//! Synthetic bipartite interaction data.
//!
//! Labels follow a low-rank latent model: `y(d, t) = ⟨u_d, v_t⟩ + ε` with
//! `ε ~ Normal(0, σ_d · σ_t)`, where each entity's noise scale comes from its
//! configured noise cluster. Features are the latent vectors plus small
//! independent noise, padded with noise dimensions up to the requested width.
//! Everything is drawn from a single `ChaCha8Rng` stream in a fixed order,
//! so a seed fully determines the output.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{EntityId, EntityKind, FeatureTable, InteractionRecord, InteractionTable};
use crate::error::{Error, Result};
use crate::rngutil::standard_normal;

/// Standard deviation of the feature noise around the latent coordinates.
const FEATURE_NOISE_STD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseCluster {
    /// Fraction of entities on this side assigned to the cluster.
    pub fraction: f64,
    /// Residual noise scale of those entities.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_drugs: usize,
    pub n_proteins: usize,
    /// Fraction of the full drug × protein grid that is observed.
    pub density: f64,
    pub latent_dim: usize,
    pub drug_noise_clusters: Vec<NoiseCluster>,
    pub protein_noise_clusters: Vec<NoiseCluster>,
    pub feature_dim_drug: usize,
    pub feature_dim_protein: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_drugs: 60,
            n_proteins: 40,
            density: 0.6,
            latent_dim: 8,
            drug_noise_clusters: vec![NoiseCluster {
                fraction: 1.0,
                scale: 1.0,
            }],
            protein_noise_clusters: vec![NoiseCluster {
                fraction: 1.0,
                scale: 1.0,
            }],
            feature_dim_drug: 8,
            feature_dim_protein: 8,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        if self.n_drugs == 0 || self.n_proteins == 0 {
            return Err(Error::Config("entity counts must be positive".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::Config(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        if self.latent_dim == 0 {
            return Err(Error::Config("latent_dim must be positive".into()));
        }
        if self.feature_dim_drug < self.latent_dim || self.feature_dim_protein < self.latent_dim {
            return Err(Error::Config(
                "feature dimensions must be at least latent_dim".into(),
            ));
        }
        for (side, clusters) in [
            ("drug", &self.drug_noise_clusters),
            ("protein", &self.protein_noise_clusters),
        ] {
            if clusters.is_empty() {
                return Err(Error::Config(format!("{side} noise clusters are empty")));
            }
            let total: f64 = clusters.iter().map(|c| c.fraction).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{side} noise-cluster fractions sum to {total}, expected 1"
                )));
            }
            for c in clusters {
                if !c.scale.is_finite() || c.scale < 0.0 {
                    return Err(Error::Config(format!(
                        "{side} noise scale must be non-negative and finite, got {}",
                        c.scale
                    )));
                }
                if c.fraction.is_nan() || c.fraction < 0.0 {
                    return Err(Error::Config("noise-cluster fractions must be non-negative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Generated tables plus the ground truth behind them: the noiseless signal
/// per record and the generating noise-cluster label per entity.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub table: InteractionTable,
    pub drug_features: FeatureTable,
    pub protein_features: FeatureTable,
    /// `⟨u_d, v_t⟩` for each record, in table order.
    pub signal: Vec<f64>,
    pub drug_noise_cluster: BTreeMap<String, usize>,
    pub protein_noise_cluster: BTreeMap<String, usize>,
}

impl SyntheticData {
    /// The table with the noiseless signal attached as predictions — an
    /// oracle point predictor whose residuals are exactly the label noise.
    pub fn table_with_oracle_predictions(&self) -> InteractionTable {
        self.table
            .with_predictions(&self.signal)
            .expect("signal aligns with records")
    }
}

fn entity_token(prefix: &str, index: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len().max(1);
    format!("{prefix}{index:0width$}")
}

/// Contiguous index blocks sized by the cluster fractions; the last cluster
/// absorbs rounding remainders.
fn cluster_of_index(clusters: &[NoiseCluster], n: usize) -> Vec<usize> {
    let mut assignment = vec![clusters.len() - 1; n];
    let mut start = 0usize;
    let mut cumulative = 0.0;
    for (ci, cluster) in clusters.iter().enumerate() {
        cumulative += cluster.fraction;
        let end = if ci + 1 == clusters.len() {
            n
        } else {
            ((cumulative * n as f64).floor() as usize).min(n)
        };
        for a in assignment.iter_mut().take(end).skip(start) {
            *a = ci;
        }
        start = end;
    }
    assignment
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let draw_latents = |rng: &mut ChaCha8Rng, n: usize, dim: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..dim).map(|_| standard_normal(rng)).collect())
            .collect()
    };
    let drug_latents = draw_latents(&mut rng, spec.n_drugs, spec.latent_dim);
    let protein_latents = draw_latents(&mut rng, spec.n_proteins, spec.latent_dim);

    let features_from_latents = |rng: &mut ChaCha8Rng,
                                 latents: &[Vec<f64>],
                                 dim: usize|
     -> Vec<Vec<f64>> {
        latents
            .iter()
            .map(|u| {
                (0..dim)
                    .map(|j| {
                        let base = if j < u.len() { u[j] } else { 0.0 };
                        base + FEATURE_NOISE_STD * standard_normal(rng)
                    })
                    .collect()
            })
            .collect()
    };
    let drug_feature_rows = features_from_latents(&mut rng, &drug_latents, spec.feature_dim_drug);
    let protein_feature_rows =
        features_from_latents(&mut rng, &protein_latents, spec.feature_dim_protein);

    let drug_cluster = cluster_of_index(&spec.drug_noise_clusters, spec.n_drugs);
    let protein_cluster = cluster_of_index(&spec.protein_noise_clusters, spec.n_proteins);

    // Density subsampling with an exact row count.
    let total = spec.n_drugs * spec.n_proteins;
    let keep = ((spec.density * total as f64).floor() as usize).min(total);
    if keep < 8 {
        return Err(Error::DegenerateInput(format!(
            "density {} over a {}x{} grid yields {keep} rows; at least 8 are required",
            spec.density, spec.n_drugs, spec.n_proteins
        )));
    }
    let mut pairs: Vec<(usize, usize)> = (0..spec.n_drugs)
        .flat_map(|d| (0..spec.n_proteins).map(move |p| (d, p)))
        .collect();
    pairs.shuffle(&mut rng);
    pairs.truncate(keep);
    pairs.sort_unstable();

    let mut records = Vec::with_capacity(keep);
    let mut signal = Vec::with_capacity(keep);
    for &(d, p) in &pairs {
        let mean: f64 = drug_latents[d]
            .iter()
            .zip(&protein_latents[p])
            .map(|(a, b)| a * b)
            .sum();
        let sigma = spec.drug_noise_clusters[drug_cluster[d]].scale
            * spec.protein_noise_clusters[protein_cluster[p]].scale;
        let label = mean + sigma * standard_normal(&mut rng);
        records.push(InteractionRecord::new(
            entity_token("d", d, spec.n_drugs),
            entity_token("p", p, spec.n_proteins),
            label,
        ));
        signal.push(mean);
    }
    let table = InteractionTable::new(records)?;

    let build_features = |kind: EntityKind,
                          prefix: &str,
                          rows: Vec<Vec<f64>>,
                          count: usize,
                          dim: usize|
     -> Result<FeatureTable> {
        let vectors: BTreeMap<EntityId, Vec<f64>> = rows
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                (
                    EntityId {
                        kind,
                        token: entity_token(prefix, i, count),
                    },
                    v,
                )
            })
            .collect();
        FeatureTable::new(kind, dim, vectors)
    };
    let drug_features = build_features(
        EntityKind::Drug,
        "d",
        drug_feature_rows,
        spec.n_drugs,
        spec.feature_dim_drug,
    )?;
    let protein_features = build_features(
        EntityKind::Protein,
        "p",
        protein_feature_rows,
        spec.n_proteins,
        spec.feature_dim_protein,
    )?;

    let cluster_map = |prefix: &str, count: usize, assignment: &[usize]| {
        assignment
            .iter()
            .enumerate()
            .map(|(i, &c)| (entity_token(prefix, i, count), c))
            .collect()
    };
    Ok(SyntheticData {
        table,
        drug_features,
        protein_features,
        signal,
        drug_noise_cluster: cluster_map("d", spec.n_drugs, &drug_cluster),
        protein_noise_cluster: cluster_map("p", spec.n_proteins, &protein_cluster),
    })
}
