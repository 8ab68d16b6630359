//! Dataset splitting strategies for bipartite interaction tables.
//!
//! Every strategy partitions rows into disjoint train / calibration / test
//! sets at a 50%–25%–25% ratio. The cold variants operate at the entity
//! level so that held-out drugs and/or proteins never appear in training.
//! Calibration and test are always drawn from one shuffled pool, keeping
//! them exchangeable by construction.
//!
//! All randomness comes from a `ChaCha8Rng` seeded with the split seed, so
//! identical seeds reproduce identical splits on every platform and thread
//! count. Unique entities are visited in sorted token order before
//! shuffling, which removes any dependence on hash-map iteration.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::data::{EntityId, EntityKind, InteractionTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    /// Interaction-level uniform split.
    Random,
    /// Half the drugs train; held-out drugs are divided between cal and test.
    ColdDrug,
    /// Half the proteins train; held-out proteins are divided between cal and test.
    ColdProtein,
    /// Both sides cold; rows mixing a train entity with a held-out entity are discarded.
    DoubleCold,
}

impl SplitKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitKind::Random => "random",
            SplitKind::ColdDrug => "cold_drug",
            SplitKind::ColdProtein => "cold_protein",
            SplitKind::DoubleCold => "double_cold",
        }
    }
}

impl std::fmt::Display for SplitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SplitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SplitKind::Random),
            "cold_drug" | "cold-drug" => Ok(SplitKind::ColdDrug),
            "cold_protein" | "cold-protein" => Ok(SplitKind::ColdProtein),
            "double_cold" | "double-cold" => Ok(SplitKind::DoubleCold),
            other => Err(Error::Config(format!("unknown split kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitStrategy {
    pub kind: SplitKind,
    pub seed: u64,
}

/// Disjoint row-index sets into an [`InteractionTable`]. Indices are sorted
/// ascending, so equal splits serialize identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitResult {
    pub strategy: SplitStrategy,
    pub train_rows: Vec<usize>,
    pub cal_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// Rows dropped by the double-cold filter (empty for other strategies).
    pub discarded_rows: Vec<usize>,
}

impl SplitResult {
    fn new(
        strategy: SplitStrategy,
        mut train: Vec<usize>,
        mut cal: Vec<usize>,
        mut test: Vec<usize>,
        mut discarded: Vec<usize>,
    ) -> Self {
        train.sort_unstable();
        cal.sort_unstable();
        test.sort_unstable();
        discarded.sort_unstable();
        SplitResult {
            strategy,
            train_rows: train,
            cal_rows: cal,
            test_rows: test,
            discarded_rows: discarded,
        }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (
            self.train_rows.len(),
            self.cal_rows.len(),
            self.test_rows.len(),
        )
    }
}

/// Dispatch on the strategy kind.
pub fn split(table: &InteractionTable, strategy: SplitStrategy) -> Result<SplitResult> {
    match strategy.kind {
        SplitKind::Random => split_random(table, strategy.seed),
        SplitKind::ColdDrug => split_cold_entity(table, EntityKind::Drug, strategy.seed),
        SplitKind::ColdProtein => split_cold_entity(table, EntityKind::Protein, strategy.seed),
        SplitKind::DoubleCold => split_double_cold(table, strategy.seed),
    }
}

/// Splits the pool that remains after removing training items: calibration
/// takes the extra element when the pool is odd.
fn halve_pool<T>(mut pool: Vec<T>) -> (Vec<T>, Vec<T>) {
    let cal_len = pool.len() - pool.len() / 2;
    let test = pool.split_off(cal_len);
    (pool, test)
}

pub fn split_random(table: &InteractionTable, seed: u64) -> Result<SplitResult> {
    let n = table.len();
    if n < 4 {
        return Err(Error::DegenerateInput(format!(
            "random split needs at least 4 rows, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    let rest = rows.split_off(n / 2);
    let (cal, test) = halve_pool(rest);
    Ok(SplitResult::new(
        SplitStrategy {
            kind: SplitKind::Random,
            seed,
        },
        rows,
        cal,
        test,
        Vec::new(),
    ))
}

/// Cold split on one side: no entity of `kind` appears in more than one
/// subset; the opposite side may be shared between subsets.
pub fn split_cold_entity(
    table: &InteractionTable,
    kind: EntityKind,
    seed: u64,
) -> Result<SplitResult> {
    let mut entities: Vec<EntityId> = match kind {
        EntityKind::Drug => table.drugs().cloned().collect(),
        EntityKind::Protein => table.proteins().cloned().collect(),
    };
    let m = entities.len();
    if m < 4 {
        return Err(Error::DegenerateInput(format!(
            "cold {kind} split needs at least 4 unique {kind}s, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    entities.shuffle(&mut rng);
    let held_out = entities.split_off(m / 2);
    let (cal_entities, test_entities) = halve_pool(held_out);

    let rows_of = |id: &EntityId| -> &[usize] {
        match kind {
            EntityKind::Drug => table.rows_of_drug(id),
            EntityKind::Protein => table.rows_of_protein(id),
        }
    };
    let collect = |ids: &[EntityId]| -> Vec<usize> {
        ids.iter().flat_map(|id| rows_of(id).iter().copied()).collect()
    };

    let strategy_kind = match kind {
        EntityKind::Drug => SplitKind::ColdDrug,
        EntityKind::Protein => SplitKind::ColdProtein,
    };
    Ok(SplitResult::new(
        SplitStrategy {
            kind: strategy_kind,
            seed,
        },
        collect(&entities),
        collect(&cal_entities),
        collect(&test_entities),
        Vec::new(),
    ))
}

/// Double-cold split: half the drugs and half the proteins form the train
/// pools; a row trains only if both of its entities are in-pool, and is
/// held out only if neither is. Mixed rows are discarded and reported.
pub fn split_double_cold(table: &InteractionTable, seed: u64) -> Result<SplitResult> {
    let drugs: Vec<EntityId> = table.drugs().cloned().collect();
    let proteins: Vec<EntityId> = table.proteins().cloned().collect();
    if drugs.len() < 4 || proteins.len() < 4 {
        return Err(Error::DegenerateInput(format!(
            "double-cold split needs at least 4 unique drugs and proteins, got {} and {}",
            drugs.len(),
            proteins.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut shuffled_drugs = drugs;
    shuffled_drugs.shuffle(&mut rng);
    shuffled_drugs.truncate(shuffled_drugs.len() / 2);
    let train_drugs: BTreeSet<EntityId> = shuffled_drugs.into_iter().collect();

    let mut shuffled_proteins = proteins;
    shuffled_proteins.shuffle(&mut rng);
    shuffled_proteins.truncate(shuffled_proteins.len() / 2);
    let train_proteins: BTreeSet<EntityId> = shuffled_proteins.into_iter().collect();

    let mut train = Vec::new();
    let mut held_out = Vec::new();
    let mut discarded = Vec::new();
    for (row, rec) in table.records().iter().enumerate() {
        let drug_in = train_drugs.contains(&rec.drug);
        let protein_in = train_proteins.contains(&rec.protein);
        match (drug_in, protein_in) {
            (true, true) => train.push(row),
            (false, false) => held_out.push(row),
            _ => discarded.push(row),
        }
    }
    if train.is_empty() || held_out.is_empty() {
        return Err(Error::InfeasibleSplit(format!(
            "double-cold split with seed {seed} left train={} and held-out={} rows; try another seed",
            train.len(),
            held_out.len()
        )));
    }
    held_out.shuffle(&mut rng);
    let (cal, test) = halve_pool(held_out);
    if cal.is_empty() || test.is_empty() {
        return Err(Error::InfeasibleSplit(format!(
            "double-cold split with seed {seed} cannot fill both calibration and test; try another seed"
        )));
    }
    Ok(SplitResult::new(
        SplitStrategy {
            kind: SplitKind::DoubleCold,
            seed,
        },
        train,
        cal,
        test,
        discarded,
    ))
}
