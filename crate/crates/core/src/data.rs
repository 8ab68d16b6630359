//! Canonical data model for bipartite interaction tables.
//!
//! An [`InteractionTable`] holds one row per unique (drug, protein) pair with
//! a real-valued label and an optional point prediction. Tables are immutable
//! after construction and safe to share across threads; all mutation happens
//! through constructors that re-validate.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which side of the bipartite interaction an entity lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Drug,
    Protein,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityKind::Drug => write!(f, "drug"),
            EntityKind::Protein => write!(f, "protein"),
        }
    }
}

/// Identifier of a drug or protein. `(kind, token)` is unique within a dataset.
///
/// Serializes as the string `"drug:<token>"` / `"protein:<token>"` so it can
/// key JSON maps inside serialized models.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId {
    pub kind: EntityKind,
    pub token: String,
}

impl Serialize for EntityId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{}:{}", self.kind, self.token))
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        let (kind, token) = raw
            .split_once(':')
            .ok_or_else(|| serde::de::Error::custom(format!("bad entity id {raw:?}")))?;
        let kind = match kind {
            "drug" => EntityKind::Drug,
            "protein" => EntityKind::Protein,
            other => return Err(serde::de::Error::custom(format!("bad entity kind {other:?}"))),
        };
        Ok(EntityId {
            kind,
            token: token.to_string(),
        })
    }
}

impl EntityId {
    pub fn drug(token: impl Into<String>) -> Self {
        EntityId {
            kind: EntityKind::Drug,
            token: token.into(),
        }
    }

    pub fn protein(token: impl Into<String>) -> Self {
        EntityId {
            kind: EntityKind::Protein,
            token: token.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.token.is_empty() {
            return Err(Error::Validation(format!(
                "empty {} identifier token",
                self.kind
            )));
        }
        Ok(())
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.token)
    }
}

/// One labelled interaction. `label` is the transformed affinity; `prediction`
/// is filled by the predictor stage (or an external predictions file).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub drug: EntityId,
    pub protein: EntityId,
    pub label: f64,
    pub prediction: Option<f64>,
}

impl InteractionRecord {
    pub fn new(drug: impl Into<String>, protein: impl Into<String>, label: f64) -> Self {
        InteractionRecord {
            drug: EntityId::drug(drug),
            protein: EntityId::protein(protein),
            label,
            prediction: None,
        }
    }

    pub fn with_prediction(mut self, prediction: f64) -> Self {
        self.prediction = Some(prediction);
        self
    }
}

/// Immutable table of interactions with per-entity row indices.
///
/// Row order is the construction order and is stable across save/load
/// round-trips. Entity indices iterate in sorted token order, which keeps
/// every downstream seeded operation platform-independent.
#[derive(Debug, Clone)]
pub struct InteractionTable {
    records: Vec<InteractionRecord>,
    drug_index: BTreeMap<EntityId, Vec<usize>>,
    protein_index: BTreeMap<EntityId, Vec<usize>>,
}

impl InteractionTable {
    /// Builds a table, rejecting duplicate (drug, protein) pairs, non-finite
    /// labels, empty tokens, and entity ids on the wrong side.
    pub fn new(records: Vec<InteractionRecord>) -> Result<Self> {
        let mut drug_index: BTreeMap<EntityId, Vec<usize>> = BTreeMap::new();
        let mut protein_index: BTreeMap<EntityId, Vec<usize>> = BTreeMap::new();
        let mut seen: BTreeMap<(EntityId, EntityId), usize> = BTreeMap::new();

        for (row, rec) in records.iter().enumerate() {
            rec.drug.validate()?;
            rec.protein.validate()?;
            if rec.drug.kind != EntityKind::Drug {
                return Err(Error::Validation(format!(
                    "row {row}: drug column holds a {} id",
                    rec.drug.kind
                )));
            }
            if rec.protein.kind != EntityKind::Protein {
                return Err(Error::Validation(format!(
                    "row {row}: protein column holds a {} id",
                    rec.protein.kind
                )));
            }
            if !rec.label.is_finite() {
                return Err(Error::Validation(format!(
                    "row {row}: non-finite label for ({}, {})",
                    rec.drug.token, rec.protein.token
                )));
            }
            match seen.entry((rec.drug.clone(), rec.protein.clone())) {
                Entry::Vacant(e) => {
                    e.insert(row);
                }
                Entry::Occupied(e) => {
                    return Err(Error::Validation(format!(
                        "duplicate pair ({}, {}) at rows {} and {row}",
                        rec.drug.token,
                        rec.protein.token,
                        e.get()
                    )));
                }
            }
            drug_index.entry(rec.drug.clone()).or_default().push(row);
            protein_index
                .entry(rec.protein.clone())
                .or_default()
                .push(row);
        }

        Ok(InteractionTable {
            records,
            drug_index,
            protein_index,
        })
    }

    pub fn records(&self) -> &[InteractionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, row: usize) -> &InteractionRecord {
        &self.records[row]
    }

    /// Unique drugs in sorted token order.
    pub fn drugs(&self) -> impl Iterator<Item = &EntityId> {
        self.drug_index.keys()
    }

    /// Unique proteins in sorted token order.
    pub fn proteins(&self) -> impl Iterator<Item = &EntityId> {
        self.protein_index.keys()
    }

    pub fn n_drugs(&self) -> usize {
        self.drug_index.len()
    }

    pub fn n_proteins(&self) -> usize {
        self.protein_index.len()
    }

    pub fn rows_of_drug(&self, id: &EntityId) -> &[usize] {
        self.drug_index.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rows_of_protein(&self, id: &EntityId) -> &[usize] {
        self.protein_index.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Returns a new table containing the same records with predictions
    /// replaced by `predictions` (one per row).
    pub fn with_predictions(&self, predictions: &[f64]) -> Result<InteractionTable> {
        if predictions.len() != self.len() {
            return Err(Error::Validation(format!(
                "prediction count {} does not match row count {}",
                predictions.len(),
                self.len()
            )));
        }
        let records = self
            .records
            .iter()
            .zip(predictions)
            .map(|(rec, &p)| {
                let mut rec = rec.clone();
                rec.prediction = Some(p);
                rec
            })
            .collect();
        InteractionTable::new(records)
    }

    /// All rows of `rows` must carry a prediction; returns the first offender otherwise.
    pub fn require_predictions(&self, rows: &[usize]) -> Result<()> {
        for &row in rows {
            let rec = &self.records[row];
            if rec.prediction.is_none() {
                return Err(Error::Validation(format!(
                    "row {row} ({}, {}) has no prediction",
                    rec.drug.token, rec.protein.token
                )));
            }
        }
        Ok(())
    }
}

/// Per-entity feature vectors of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub entity_kind: EntityKind,
    pub dimension: usize,
    vectors: BTreeMap<EntityId, Vec<f64>>,
}

impl FeatureTable {
    pub fn new(
        entity_kind: EntityKind,
        dimension: usize,
        vectors: BTreeMap<EntityId, Vec<f64>>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Validation("feature dimension must be positive".into()));
        }
        for (id, v) in &vectors {
            id.validate()?;
            if id.kind != entity_kind {
                return Err(Error::Validation(format!(
                    "feature table of {entity_kind}s contains {} id {}",
                    id.kind, id.token
                )));
            }
            if v.len() != dimension {
                return Err(Error::Validation(format!(
                    "feature vector for {} has length {}, expected {dimension}",
                    id.token,
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "non-finite feature value for {}",
                    id.token
                )));
            }
        }
        Ok(FeatureTable {
            entity_kind,
            dimension,
            vectors,
        })
    }

    pub fn get(&self, id: &EntityId) -> Option<&[f64]> {
        self.vectors.get(id).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Entities in sorted token order.
    pub fn entities(&self) -> impl Iterator<Item = &EntityId> {
        self.vectors.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityId, &[f64])> {
        self.vectors.iter().map(|(id, v)| (id, v.as_slice()))
    }

    /// Checks that every entity of `self.entity_kind` referenced by `table`
    /// has a vector; names the first missing entity otherwise.
    pub fn require_coverage(&self, table: &InteractionTable) -> Result<()> {
        let mut missing: Vec<&EntityId> = Vec::new();
        match self.entity_kind {
            EntityKind::Drug => {
                for id in table.drugs() {
                    if !self.vectors.contains_key(id) {
                        missing.push(id);
                    }
                }
            }
            EntityKind::Protein => {
                for id in table.proteins() {
                    if !self.vectors.contains_key(id) {
                        missing.push(id);
                    }
                }
            }
        }
        if let Some(first) = missing.first() {
            return Err(Error::Validation(format!(
                "missing feature vector for {} {} ({} missing in total)",
                self.entity_kind,
                first.token,
                missing.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(d: &str, p: &str, y: f64) -> InteractionRecord {
        InteractionRecord::new(d, p, y)
    }

    #[test]
    fn duplicate_pair_is_named_in_error() {
        let err = InteractionTable::new(vec![
            rec("d1", "p1", 0.5),
            rec("d2", "p1", 0.1),
            rec("d1", "p1", 0.9),
        ])
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("d1") && msg.contains("p1"), "{msg}");
        assert!(msg.contains("rows 0 and 2"), "{msg}");
    }

    #[test]
    fn indices_are_consistent_with_records() {
        let t = InteractionTable::new(vec![
            rec("d1", "p1", 1.0),
            rec("d1", "p2", 2.0),
            rec("d2", "p1", 3.0),
        ])
        .unwrap();
        assert_eq!(t.rows_of_drug(&EntityId::drug("d1")), &[0, 1]);
        assert_eq!(t.rows_of_protein(&EntityId::protein("p1")), &[0, 2]);
        assert_eq!(t.n_drugs(), 2);
        assert_eq!(t.n_proteins(), 2);
    }

    #[test]
    fn non_finite_label_rejected() {
        let err = InteractionTable::new(vec![rec("d", "p", f64::NAN)]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn empty_token_rejected() {
        let err = InteractionTable::new(vec![rec("", "p", 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn feature_table_checks_dimensions_and_coverage() {
        let mut vectors = BTreeMap::new();
        vectors.insert(EntityId::drug("d1"), vec![1.0, 2.0]);
        let feats = FeatureTable::new(EntityKind::Drug, 2, vectors).unwrap();

        let t = InteractionTable::new(vec![rec("d1", "p1", 1.0), rec("d2", "p1", 2.0)]).unwrap();
        let err = feats.require_coverage(&t).unwrap_err();
        assert!(err.to_string().contains("d2"), "{err}");

        let mut bad = BTreeMap::new();
        bad.insert(EntityId::drug("d1"), vec![1.0]);
        assert!(FeatureTable::new(EntityKind::Drug, 2, bad).is_err());
    }
}
