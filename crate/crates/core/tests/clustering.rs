mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rerank_explorer::analytics::{cluster_queries, spherical_kmeans, within_cluster_cost, UNCLUSTERED_ID};
use rerank_explorer::ingest::build_snapshot;

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.iter().map(|c| c / n).collect()
}

/// Exhaustive search over every assignment of points to `k` labels; returns
/// the minimum within-cluster cosine cost over partitions that use all k.
fn brute_force_best(points: &[Vec<f64>], k: usize) -> (f64, Vec<usize>) {
    let n = points.len();
    let mut best = (f64::INFINITY, Vec::new());
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut labels = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            labels.push(c % k);
            c /= k;
        }
        if (0..k).any(|l| !labels.contains(&l)) {
            continue;
        }
        let mut cost = 0.0;
        for l in 0..k {
            let dim = points[0].len();
            let mut sum = vec![0.0; dim];
            for (p, _) in points.iter().zip(&labels).filter(|(_, &x)| x == l) {
                for t in 0..dim {
                    sum[t] += p[t];
                }
            }
            let norm = sum.iter().map(|c| c * c).sum::<f64>().sqrt();
            for (p, _) in points.iter().zip(&labels).filter(|(_, &x)| x == l) {
                let dot: f64 = p.iter().zip(&sum).map(|(a, b)| a * b).sum();
                cost += 1.0 - if norm > 0.0 { dot / norm } else { 0.0 };
            }
        }
        if cost < best.0 {
            best = (cost, labels);
        }
    }
    best
}

fn partition_of(assignments: &[usize]) -> BTreeSet<BTreeSet<usize>> {
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, &a) in assignments.iter().enumerate() {
        groups.entry(a).or_default().insert(i);
    }
    groups.into_values().collect()
}

fn two_groups() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0],
        vec![1.0, 0.0],
        vec![1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
        vec![0.0, 1.0],
    ]
}

#[test]
fn planted_two_groups_recovered_for_every_seed() {
    let points = two_groups();
    let (_, oracle_labels) = brute_force_best(&points, 2);
    let planted = partition_of(&oracle_labels);
    assert_eq!(planted, partition_of(&[0, 0, 0, 1, 1, 1]));
    for seed in 1..=20 {
        let out = spherical_kmeans(&points, 2, seed).unwrap();
        assert_eq!(partition_of(&out.assignments), planted, "seed {seed}");
    }
}

#[test]
fn k_equal_to_n_gives_singletons_at_zero_cost() {
    let points: Vec<Vec<f64>> = [[1.0, 0.2, 0.0], [0.1, 1.0, 0.3], [0.0, 0.4, 1.0], [0.7, 0.7, 0.1]]
        .iter()
        .map(|v| normalize(v))
        .collect();
    let (oracle_cost, _) = brute_force_best(&points, 4);
    let out = spherical_kmeans(&points, 4, 3).unwrap();
    let cost = within_cluster_cost(&points, &out.assignments, &out.centroids);
    assert!(cost.abs() < 1e-12 && oracle_cost.abs() < 1e-12);
    assert_eq!(partition_of(&out.assignments).len(), 4);
}

#[test]
fn cluster_queries_partitions_ids() {
    let vectors: BTreeMap<String, Vec<f64>> = two_groups()
        .into_iter()
        .enumerate()
        .map(|(i, v)| (format!("q{i}"), v))
        .collect();
    let groups = cluster_queries(&vectors, 2, 11).unwrap();
    let mut all: Vec<String> = groups.iter().flat_map(|g| g.members.clone()).collect();
    all.sort();
    assert_eq!(all, vectors.keys().cloned().collect::<Vec<_>>());
    assert!(cluster_queries(&vectors, 7, 1).is_err());
}

#[test]
fn desk_snapshot_clusters_partition_queries() {
    let snap = build_snapshot(&common::desk_files(), &common::desk_options()).unwrap();
    let mut seen = BTreeMap::new();
    for cluster in &snap.clusters {
        assert!(!cluster.member_query_ids.is_empty());
        for q in &cluster.member_query_ids {
            assert!(seen.insert(q.clone(), cluster.cluster_id.clone()).is_none(), "{q} twice");
        }
    }
    assert_eq!(seen.len(), snap.queries.len());
    assert_eq!(seen["q20"], UNCLUSTERED_ID);
}

fn unit_points() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6).prop_flat_map(|d| {
        prop::collection::vec(
            prop::collection::vec(-1.0f64..1.0, d).prop_filter("nonzero", |v| v.iter().any(|c| c.abs() > 0.05)),
            3..25,
        )
        .prop_map(|pts| pts.iter().map(|p| normalize(p)).collect())
    })
}

proptest! {
    #[test]
    fn lloyd_cost_never_increases(points in unit_points(), k in 1usize..4, seed in any::<u64>()) {
        prop_assume!(points.len() >= k);
        let out = spherical_kmeans(&points, k, seed).unwrap();
        for w in out.cost_trace.windows(2) {
            prop_assert!(w[1] <= w[0], "cost rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn same_seed_same_assignment(points in unit_points(), seed in any::<u64>()) {
        let a = spherical_kmeans(&points, 2, seed).unwrap();
        let b = spherical_kmeans(&points, 2, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
