//! Unsupervised machinery shared by the cluster-conditioned calibrators:
//! percentile (ECDF) embeddings of score multisets, seeded k-means with
//! k-means++ initialization, Tanimoto similarity on binary profiles, and
//! top-k neighbor selection.
//!
//! Everything here is deterministic given `(input order, k, seed)`: the RNG
//! is a `ChaCha8Rng`, and every tie (assignment, neighbor ordering, split of
//! equal similarities) breaks toward the lowest index or id.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{EntityId, EntityKind, FeatureTable};
use crate::error::{Error, Result};

/// The nine decile levels used for score-distribution embeddings.
pub const ECDF_DECILES: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

/// Fixed-length percentile embedding of a score multiset (10th–90th deciles).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfEmbedding {
    pub values: Vec<f64>,
}

/// Percentile by linear interpolation between order statistics: the value at
/// zero-based rank `r = p/100 * (n-1)`, interpolating between the bracketing
/// ranks when `r` is fractional.
pub fn percentiles(scores: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::DegenerateInput(
            "percentiles of an empty multiset".into(),
        ));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let mut out = Vec::with_capacity(levels.len());
    for &p in levels {
        let rank = p / 100.0 * (n as f64 - 1.0);
        let lo = rank.floor() as usize;
        let hi = rank.ceil() as usize;
        let value = if lo == hi {
            sorted[lo]
        } else {
            let frac = rank - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        };
        out.push(value);
    }
    Ok(out)
}

/// Decile embedding of a non-empty score multiset.
pub fn ecdf_embedding(scores: &[f64]) -> Result<EcdfEmbedding> {
    Ok(EcdfEmbedding {
        values: percentiles(scores, &ECDF_DECILES)?,
    })
}

/// Fitted k-means model. `k` is the effective cluster count, reduced from
/// `requested_k` when there were fewer distinct points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub requested_k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub seed: u64,
    pub inertia: f64,
    /// Within-cluster sum of squares after each Lloyd iteration.
    pub inertia_trace: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_dist = sq_dist(point, &centroids[0]);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best_dist {
            best = i;
            best_dist = d;
        }
    }
    best
}

fn kmeanspp_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..points.len());
    centroids.push(points[first].clone());
    let mut weights: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &w) in weights.iter().enumerate() {
                if w <= 0.0 {
                    continue;
                }
                if target < w {
                    chosen = Some(i);
                    break;
                }
                target -= w;
            }
            // Rounding can exhaust the scan; fall back to the last positive weight.
            chosen.unwrap_or_else(|| {
                weights
                    .iter()
                    .rposition(|&w| w > 0.0)
                    .expect("total > 0 implies a positive weight")
            })
        } else {
            // All remaining points coincide with chosen centroids; the caller
            // guarantees k <= #distinct points, so this is unreachable, but
            // pick the first point to stay total.
            0
        };
        centroids.push(points[next].clone());
        for (i, p) in points.iter().enumerate() {
            let d = sq_dist(p, centroids.last().unwrap());
            if d < weights[i] {
                weights[i] = d;
            }
        }
    }
    centroids
}

fn assignments_of(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    crate::exec::map_ordered(points, |p| nearest_centroid(p, centroids))
}

fn inertia_of(points: &[Vec<f64>], centroids: &[Vec<f64>], assign: &[usize]) -> f64 {
    points
        .iter()
        .zip(assign)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum()
}

/// Moves each empty cluster's centroid onto the point farthest from it, then
/// refreshes assignments. A point closest to an empty centroid would have
/// been assigned to it, so reseeding never increases the objective.
fn fix_empty_clusters(
    points: &[Vec<f64>],
    centroids: &mut [Vec<f64>],
    assign: &mut Vec<usize>,
) {
    for _ in 0..centroids.len() {
        let mut counts = vec![0usize; centroids.len()];
        for &a in assign.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let farthest = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, sq_dist(p, &centroids[empty])))
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("points non-empty");
        centroids[empty] = points[farthest].clone();
        *assign = assignments_of(points, centroids);
    }
}

/// Lloyd's algorithm with k-means++ initialization.
///
/// Runs until the assignment reaches a fixpoint or 300 iterations. If `k`
/// exceeds the number of distinct points it is reduced (and recorded in
/// `requested_k`).
pub fn kmeans_fit(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansModel> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::DegenerateInput("k-means on an empty point set".into()));
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::Validation(format!(
                "point {i} has dimension {}, expected {dim}",
                p.len()
            )));
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Validation(format!("point {i} has non-finite values")));
        }
    }

    let mut distinct: Vec<&Vec<f64>> = points.iter().collect();
    distinct.sort_unstable_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    distinct.dedup();
    let effective_k = k.min(distinct.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeanspp_init(points, effective_k, &mut rng);
    let mut assign = assignments_of(points, &centroids);
    fix_empty_clusters(points, &mut centroids, &mut assign);
    let mut trace = vec![inertia_of(points, &centroids, &assign)];

    for _ in 1..300 {
        // Update step: each centroid moves to the mean of its members.
        let mut sums = vec![vec![0.0; dim]; effective_k];
        let mut counts = vec![0usize; effective_k];
        for (p, &a) in points.iter().zip(&assign) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        let new_centroids: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .zip(&centroids)
            .map(|((sum, &count), old)| {
                if count == 0 {
                    old.clone()
                } else {
                    sum.into_iter().map(|s| s / count as f64).collect()
                }
            })
            .collect();

        let mut new_assign = assignments_of(points, &new_centroids);
        centroids = new_centroids;
        fix_empty_clusters(points, &mut centroids, &mut new_assign);
        trace.push(inertia_of(points, &centroids, &new_assign));

        let converged = new_assign == assign;
        assign = new_assign;
        if converged {
            break;
        }
    }

    let inertia = *trace.last().unwrap();
    Ok(KMeansModel {
        k: effective_k,
        requested_k: k,
        centroids,
        seed,
        inertia,
        inertia_trace: trace,
    })
}

/// Index of the nearest centroid (squared Euclidean); ties go to the lowest index.
pub fn kmeans_assign(model: &KMeansModel, point: &[f64]) -> Result<usize> {
    let dim = model.centroids[0].len();
    if point.len() != dim {
        return Err(Error::Validation(format!(
            "point has dimension {}, model expects {dim}",
            point.len()
        )));
    }
    Ok(nearest_centroid(point, &model.centroids))
}

/// Tanimoto similarity `|a ∧ b| / |a ∨ b|`. Two all-zero vectors are
/// identically empty and score 1.0 by convention.
pub fn tanimoto(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Validation(format!(
            "binary vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut intersection = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x && y {
            intersection += 1;
        }
        if x || y {
            union += 1;
        }
    }
    if union == 0 {
        Ok(1.0)
    } else {
        Ok(intersection as f64 / union as f64)
    }
}

/// Per-entity binary profiles with uniform dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryFeatureTable {
    pub entity_kind: EntityKind,
    pub dimension: usize,
    pub vectors: BTreeMap<EntityId, Vec<bool>>,
}

impl BinaryFeatureTable {
    pub fn get(&self, id: &EntityId) -> Option<&[bool]> {
        self.vectors.get(id).map(Vec::as_slice)
    }
}

/// Thresholds each feature at its median across entities: strictly above the
/// median maps to 1, everything else to 0. Constant features therefore map
/// to all zeros, and re-binarizing a binarized table leaves the support
/// pattern unchanged.
pub fn binarize_features(features: &FeatureTable) -> Result<BinaryFeatureTable> {
    let n = features.len();
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "binarization needs at least 2 entities, got {n}"
        )));
    }
    let dim = features.dimension;
    let mut medians = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut column: Vec<f64> = features.iter().map(|(_, v)| v[j]).collect();
        column.sort_unstable_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            column[n / 2]
        } else {
            0.5 * (column[n / 2 - 1] + column[n / 2])
        };
        medians.push(median);
    }
    let vectors = features
        .iter()
        .map(|(id, v)| {
            let bits = v.iter().zip(&medians).map(|(&x, &m)| x > m).collect();
            (id.clone(), bits)
        })
        .collect();
    Ok(BinaryFeatureTable {
        entity_kind: features.entity_kind,
        dimension: dim,
        vectors,
    })
}

/// Nearest neighbors of a query profile, ordered by similarity.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSet {
    pub query: EntityId,
    /// `(id, similarity)` sorted by similarity descending, then id ascending.
    pub neighbors: Vec<(EntityId, f64)>,
}

impl NeighborSet {
    pub fn ids(&self) -> impl Iterator<Item = &EntityId> {
        self.neighbors.iter().map(|(id, _)| id)
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.neighbors.iter().any(|(n, _)| n == id)
    }
}

/// Ranks candidates by Tanimoto similarity to `query_vec`, descending, with
/// ties broken by key ascending; keeps the top `min(k, #candidates)`.
pub(crate) fn rank_by_tanimoto<'a, K: Ord>(
    query_vec: &[bool],
    candidates: impl Iterator<Item = (&'a K, &'a Vec<bool>)>,
    k: usize,
) -> Result<Vec<(&'a K, f64)>> {
    if k == 0 {
        return Err(Error::Config("neighbor count k must be at least 1".into()));
    }
    let mut scored: Vec<(&K, f64)> = Vec::new();
    for (id, bits) in candidates {
        scored.push((id, tanimoto(query_vec, bits)?));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    scored.truncate(k);
    Ok(scored)
}

/// The `min(k, #candidates)` most similar candidates by Tanimoto similarity.
/// The query's own id, if present among the candidates, participates like any
/// other candidate (and ranks first with similarity 1).
pub fn top_k_neighbors(
    query: &EntityId,
    query_vec: &[bool],
    candidates: &BTreeMap<EntityId, Vec<bool>>,
    k: usize,
) -> Result<NeighborSet> {
    let scored = rank_by_tanimoto(query_vec, candidates.iter(), k)?;
    Ok(NeighborSet {
        query: query.clone(),
        neighbors: scored.into_iter().map(|(id, s)| (id.clone(), s)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_reference_cases() {
        let e = ecdf_embedding(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(e.values, vec![3.0; 9]);

        let e = ecdf_embedding(&[0.0, 1.0]).unwrap();
        let expected: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        for (a, b) in e.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15, "{:?}", e.values);
        }

        let e = ecdf_embedding(&[7.0]).unwrap();
        assert_eq!(e.values, vec![7.0; 9]);

        assert!(matches!(
            ecdf_embedding(&[]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn ecdf_monotone_and_permutation_invariant() {
        use rand::{RngExt, SeedableRng};
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let n = rng.random_range(1..40usize);
            let mut scores: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 5.0).collect();
            let e1 = ecdf_embedding(&scores).unwrap();
            for w in e1.values.windows(2) {
                assert!(w[0] <= w[1], "{:?}", e1.values);
            }
            scores.shuffle(&mut rng);
            let e2 = ecdf_embedding(&scores).unwrap();
            assert_eq!(e1, e2);
        }
    }

    #[test]
    fn kmeans_k1_is_the_mean() {
        let points = vec![
            vec![1.0, 2.0],
            vec![3.0, 4.0],
            vec![5.0, 0.0],
            vec![-1.0, 2.0],
        ];
        let model = kmeans_fit(&points, 1, 0).unwrap();
        assert_eq!(model.k, 1);
        let mean = [2.0, 2.0];
        for (c, m) in model.centroids[0].iter().zip(&mean) {
            assert!((c - m).abs() < 1e-12, "{:?}", model.centroids);
        }
    }

    #[test]
    fn kmeans_two_blobs() {
        use rand::{RngExt, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut points = Vec::new();
        let mut blob = |cx: f64, cy: f64, points: &mut Vec<Vec<f64>>| -> Vec<f64> {
            let mut sum = [0.0, 0.0];
            for _ in 0..30 {
                let p = vec![cx + rng.random::<f64>() - 0.5, cy + rng.random::<f64>() - 0.5];
                sum[0] += p[0];
                sum[1] += p[1];
                points.push(p);
            }
            vec![sum[0] / 30.0, sum[1] / 30.0]
        };
        let mean_a = blob(0.0, 0.0, &mut points);
        let mean_b = blob(100.0, 100.0, &mut points);

        let model = kmeans_fit(&points, 2, 7).unwrap();
        let radius = 1.0;
        let close = |c: &Vec<f64>, m: &Vec<f64>| sq_dist(c, m).sqrt() < radius;
        let hit_a = model.centroids.iter().filter(|c| close(c, &mean_a)).count();
        let hit_b = model.centroids.iter().filter(|c| close(c, &mean_b)).count();
        assert_eq!((hit_a, hit_b), (1, 1), "{:?}", model.centroids);
    }

    #[test]
    fn kmeans_k_equals_points_gives_zero_inertia() {
        let points = vec![vec![0.0], vec![1.0], vec![2.0], vec![5.0]];
        let model = kmeans_fit(&points, 4, 3).unwrap();
        assert_eq!(model.k, 4);
        assert_eq!(model.inertia, 0.0);
    }

    #[test]
    fn kmeans_reduces_k_over_distinct_points() {
        let points = vec![vec![1.0], vec![1.0], vec![2.0]];
        let model = kmeans_fit(&points, 5, 0).unwrap();
        assert_eq!(model.k, 2);
        assert_eq!(model.requested_k, 5);
    }

    #[test]
    fn kmeans_deterministic_and_monotone() {
        use rand::{RngExt, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let points: Vec<Vec<f64>> = (0..120)
            .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
            .collect();
        let a = kmeans_fit(&points, 6, 11).unwrap();
        let b = kmeans_fit(&points, 6, 11).unwrap();
        assert_eq!(a, b);
        for w in a.inertia_trace.windows(2) {
            assert!(
                w[1] <= w[0] * (1.0 + 1e-9) + 1e-12,
                "inertia rose: {:?}",
                a.inertia_trace
            );
        }
        // Assignment of any training point reproduces the final partition.
        for p in &points {
            let c = kmeans_assign(&a, p).unwrap();
            assert!(c < a.k);
        }
    }

    #[test]
    fn assign_reference_cases() {
        let model = KMeansModel {
            k: 3,
            requested_k: 3,
            centroids: vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![5.0, 5.0]],
            seed: 0,
            inertia: 0.0,
            inertia_trace: vec![0.0],
        };
        assert_eq!(kmeans_assign(&model, &[5.0, 5.0]).unwrap(), 2);
        // Equidistant to centroids 0 and 1 -> lowest index wins.
        assert_eq!(kmeans_assign(&model, &[1.0, 0.0]).unwrap(), 0);
        assert!(kmeans_assign(&model, &[1.0]).is_err());

        let mut wider = model.clone();
        wider.centroids.push(vec![1000.0, 1000.0]);
        wider.k = 4;
        assert_eq!(kmeans_assign(&wider, &[1.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn tanimoto_reference_cases() {
        let a = [true, true, false];
        let b = [true, false, true];
        assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
        assert!((tanimoto(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            tanimoto(&[true, false], &[false, true]).unwrap(),
            0.0
        );
        assert_eq!(tanimoto(&[false, false], &[false, false]).unwrap(), 1.0);
        assert!(tanimoto(&[true], &[true, false]).is_err());
    }

    #[test]
    fn tanimoto_symmetric_and_bounded() {
        use rand::{RngExt, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let n = rng.random_range(1..64usize);
            let a: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
            let b: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < 0.5).collect();
            let ab = tanimoto(&a, &b).unwrap();
            let ba = tanimoto(&b, &a).unwrap();
            assert_eq!(ab, ba);
            assert!((0.0..=1.0).contains(&ab));
            if a.iter().any(|&x| x) {
                assert_eq!(tanimoto(&a, &a).unwrap(), 1.0);
            }
        }
    }

    fn feature_table(rows: &[(&str, Vec<f64>)]) -> FeatureTable {
        let dim = rows[0].1.len();
        let vectors = rows
            .iter()
            .map(|(t, v)| (EntityId::drug(*t), v.clone()))
            .collect();
        FeatureTable::new(EntityKind::Drug, dim, vectors).unwrap()
    }

    #[test]
    fn binarize_median_rule() {
        let table = feature_table(&[
            ("a", vec![1.0, 5.0, 2.0]),
            ("b", vec![2.0, 5.0, 4.0]),
        ]);
        let bits = binarize_features(&table).unwrap();
        // Per feature: exactly one entity above the median unless equal.
        assert_eq!(bits.get(&EntityId::drug("a")).unwrap(), &[false, false, false]);
        assert_eq!(bits.get(&EntityId::drug("b")).unwrap(), &[true, false, true]);
    }

    #[test]
    fn binarize_support_is_idempotent() {
        use rand::{RngExt, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<(String, Vec<f64>)> = (0..9)
            .map(|i| {
                (
                    format!("e{i}"),
                    (0..6).map(|_| (rng.random::<f64>() * 4.0).round()).collect(),
                )
            })
            .collect();
        let refs: Vec<(&str, Vec<f64>)> =
            rows.iter().map(|(t, v)| (t.as_str(), v.clone())).collect();
        let table = feature_table(&refs);
        let once = binarize_features(&table).unwrap();
        let as_floats: Vec<(&str, Vec<f64>)> = rows
            .iter()
            .map(|(t, _)| {
                let bits = once.get(&EntityId::drug(t.as_str())).unwrap();
                (
                    t.as_str(),
                    bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
                )
            })
            .collect();
        let twice = binarize_features(&feature_table(&as_floats)).unwrap();
        assert_eq!(once.vectors.values().collect::<Vec<_>>(),
                   twice.vectors.values().collect::<Vec<_>>());
    }

    fn candidates(items: &[(&str, &[bool])]) -> BTreeMap<EntityId, Vec<bool>> {
        items
            .iter()
            .map(|(t, v)| (EntityId::drug(*t), v.to_vec()))
            .collect()
    }

    #[test]
    fn top_k_reference_cases() {
        let query = EntityId::drug("q");
        let qv = [true, true, false, false];

        let single = candidates(&[("only", &[false, false, false, true])]);
        let ns = top_k_neighbors(&query, &qv, &single, 20).unwrap();
        assert_eq!(ns.neighbors.len(), 1);
        assert_eq!(ns.neighbors[0].0.token, "only");

        let with_self = candidates(&[
            ("far", &[false, false, true, true]),
            ("q", &[true, true, false, false]),
        ]);
        let ns = top_k_neighbors(&query, &qv, &with_self, 20).unwrap();
        assert_eq!(ns.neighbors[0], (EntityId::drug("q"), 1.0));

        // Equal similarity -> id order decides.
        let tied = candidates(&[
            ("zz", &[true, false, false, false]),
            ("aa", &[false, true, false, false]),
        ]);
        let ns = top_k_neighbors(&query, &qv, &tied, 20).unwrap();
        assert_eq!(ns.neighbors[0].0.token, "aa");
        assert_eq!(ns.neighbors[1].0.token, "zz");

        assert!(top_k_neighbors(&query, &qv, &tied, 0).is_err());
        let empty = candidates(&[]);
        assert!(top_k_neighbors(&query, &qv, &empty, 5)
            .unwrap()
            .neighbors
            .is_empty());
    }

    #[test]
    fn top_k_is_prefix_of_full_ranking() {
        use rand::{RngExt, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let cands: BTreeMap<EntityId, Vec<bool>> = (0..30)
            .map(|i| {
                let v: Vec<bool> = (0..16).map(|_| rng.random::<f64>() < 0.5).collect();
                (EntityId::drug(format!("c{i:02}")), v)
            })
            .collect();
        let qv: Vec<bool> = (0..16).map(|_| rng.random::<f64>() < 0.5).collect();
        let query = EntityId::drug("q");
        let full = top_k_neighbors(&query, &qv, &cands, cands.len()).unwrap();
        for k in [1usize, 5, 10, 20] {
            let top = top_k_neighbors(&query, &qv, &cands, k).unwrap();
            assert_eq!(top.neighbors.as_slice(), &full.neighbors[..k.min(cands.len())]);
        }
    }
}
