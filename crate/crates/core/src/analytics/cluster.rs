//! Query clustering with spherical k-means over mean term vectors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;

/// Id of the bucket holding queries whose terms are all out of vocabulary.
pub const UNCLUSTERED_ID: &str = "unclustered";

/// Mean of the in-vocabulary term vectors, renormalized. `None` when every
/// term is OOV or the mean vanishes.
pub fn query_vector(terms: &[String], table: &EmbeddingTable) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; table.dimension()];
    let mut found = 0usize;
    for tv in terms.iter().filter_map(|t| table.lookup(t)) {
        for (s, c) in sum.iter_mut().zip(&tv.vector) {
            *s += c;
        }
        found += 1;
    }
    if found == 0 {
        return None;
    }
    for s in &mut sum {
        *s /= found as f64;
    }
    normalize(sum)
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    for c in &mut v {
        *c /= norm;
    }
    Some(v)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `max(2, ceil(sqrt(q / 2)))`, never more than `q`.
pub fn default_cluster_count(clusterable: usize) -> usize {
    let k = ((clusterable as f64 / 2.0).sqrt().ceil() as usize).max(2);
    k.min(clusterable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansOutcome {
    /// Cluster index per input point.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster cosine cost after each Lloyd iteration.
    pub cost_trace: Vec<f64>,
    pub converged: bool,
}

/// Sum of `1 - x . centroid` over all points.
pub fn within_cluster_cost(points: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| 1.0 - dot(p, &centroids[a]))
        .sum()
}

/// Spherical k-means on unit vectors: k-means++ seeding from a ChaCha RNG,
/// then Lloyd iterations until the assignment is stable or
/// [`MAX_ITERATIONS`] is reached.
pub fn spherical_kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeansOutcome> {
    if k == 0 {
        return Err(Error::contract("k-means needs k >= 1"));
    }
    if points.len() < k {
        return Err(Error::contract(format!(
            "cannot form {k} clusters from {} vectors",
            points.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = kmeans_plus_plus(points, k, &mut rng);
    let mut assignments = assign(points, &centroids);
    let mut cost_trace = Vec::new();
    let mut converged = false;

    for iteration in 0..MAX_ITERATIONS {
        reseed_empty(points, &mut assignments, &mut centroids);
        update_centroids(points, &assignments, &mut centroids);
        cost_trace.push(within_cluster_cost(points, &assignments, &centroids));

        let next = assign(points, &centroids);
        if next == assignments {
            converged = true;
            break;
        }
        if iteration + 1 == MAX_ITERATIONS {
            break;
        }
        assignments = next;
    }

    Ok(KMeansOutcome {
        assignments,
        centroids,
        cost_trace,
        converged,
    })
}

fn kmeans_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut chosen = vec![rng.random_range(0..points.len())];
    let mut nearest: Vec<f64> = points.iter().map(|p| 1.0 - dot(p, &points[chosen[0]])).collect();

    while chosen.len() < k {
        let weights: Vec<f64> = nearest.iter().map(|d| d.max(0.0).powi(2)).collect();
        let total: f64 = weights.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            weights
                .iter()
                .position(|w| {
                    acc += w;
                    acc > target
                })
                .unwrap_or_else(|| weights.iter().rposition(|w| *w > 0.0).unwrap_or(0))
        } else {
            // Every remaining point coincides with a chosen center.
            (0..points.len()).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(1.0 - dot(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Nearest centroid by cosine; ties go to the lowest index.
fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let mut best = 0;
            let mut best_sim = f64::NEG_INFINITY;
            for (c, centroid) in centroids.iter().enumerate() {
                let sim = dot(p, centroid);
                if sim > best_sim {
                    best = c;
                    best_sim = sim;
                }
            }
            best
        })
        .collect()
}

/// Gives every empty cluster the point farthest from its own centroid,
/// taken from a cluster that can spare it.
fn reseed_empty(points: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = points
            .iter()
            .enumerate()
            .filter(|(i, _)| sizes[assignments[*i]] > 1)
            .map(|(i, p)| (i, 1.0 - dot(p, &centroids[assignments[i]])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = donor {
            sizes[assignments[i]] -= 1;
            sizes[empty] = 1;
            assignments[i] = empty;
            centroids[empty] = points[i].clone();
        }
    }
}

fn update_centroids(points: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = points.first().map_or(0, Vec::len);
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    for (p, &a) in points.iter().zip(assignments) {
        for (s, c) in sums[a].iter_mut().zip(p) {
            *s += c;
        }
    }
    for (centroid, sum) in centroids.iter_mut().zip(sums) {
        // A zero sum leaves the old centroid; every unit vector costs the same there.
        if let Some(unit) = normalize(sum) {
            *centroid = unit;
        }
    }
}

/// A set of queries grouped together by k-means.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryGroup {
    pub cluster_id: String,
    pub members: Vec<String>,
}

/// Clusters query vectors. Queries are processed in id order, so identical
/// inputs and seed give identical groups. Cluster ids are `c1..ck`.
pub fn cluster_queries(vectors: &BTreeMap<String, Vec<f64>>, k: usize, seed: u64) -> Result<Vec<QueryGroup>> {
    let ids: Vec<&String> = vectors.keys().collect();
    let points: Vec<Vec<f64>> = vectors.values().cloned().collect();
    let outcome = spherical_kmeans(&points, k, seed)?;

    let mut groups: Vec<QueryGroup> = (0..k)
        .map(|c| QueryGroup {
            cluster_id: format!("c{}", c + 1),
            members: Vec::new(),
        })
        .collect();
    for (id, &a) in ids.iter().zip(&outcome.assignments) {
        groups[a].members.push((*id).clone());
    }
    groups.retain(|g| !g.members.is_empty());
    Ok(groups)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Cluster {
    pub cluster_id: String,
    pub title: String,
    pub member_query_ids: Vec<String>,
    /// `None` when the median first-relevant rank is unfound.
    pub median_first_relevant_rank: Option<f64>,
    /// Median over the members with a defined delta.
    pub median_delta: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn query_vector_examples() {
        let t = EmbeddingTable::load_str("a 1 0\nb 0 1").unwrap();
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(query_vector(&s(&["a"]), &t), Some(vec![1.0, 0.0]));
        let v = query_vector(&s(&["a", "b"]), &t).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-15 && (v[1] - h).abs() < 1e-15);
        assert_eq!(query_vector(&s(&["zzz"]), &t), None);
        assert_eq!(query_vector(&s(&["a", "zzz"]), &t), Some(vec![1.0, 0.0]));
    }

    #[test]
    fn default_k() {
        assert_eq!(default_cluster_count(20), 4);
        assert_eq!(default_cluster_count(8), 2);
        assert_eq!(default_cluster_count(1), 1);
        assert_eq!(default_cluster_count(0), 0);
        assert_eq!(default_cluster_count(6980), 60);
    }

    #[test]
    fn too_few_points() {
        assert!(spherical_kmeans(&[vec![1.0, 0.0]], 2, 1).is_err());
        assert!(spherical_kmeans(&[vec![1.0, 0.0]], 0, 1).is_err());
    }

    #[test]
    fn k_one_takes_everything() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]];
        let out = spherical_kmeans(&pts, 1, 9).unwrap();
        assert_eq!(out.assignments, vec![0, 0, 0]);
        assert!(out.converged);
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let pts = vec![vec![1.0, 0.0]; 4];
        let out = spherical_kmeans(&pts, 3, 5).unwrap();
        let mut used = out.assignments.clone();
        used.sort();
        used.dedup();
        assert_eq!(used, vec![0, 1, 2]);
    }
}
