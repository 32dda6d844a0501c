mod common;

use common::random_graph;
use mgk::gram::{
    compute_gram, load_gram_bin, load_gram_csv, normalize_gram, save_gram_bin, save_gram_csv,
    schedule_pairs, GraphStats,
};
use mgk::io::{gen_ba, gen_nws, Sampler};
use mgk::operator::KernelConfig;
use mgk::reorder::ReorderMethod;
use mgk::solver::{kernel, SolverConfig};
use mgk::LabeledGraph;

fn small_dataset(seed: u64, count: usize) -> Vec<LabeledGraph> {
    let mut rng = Sampler::new(seed);
    (0..count)
        .map(|_| {
            let n = 3 + rng.below(25) as usize;
            random_graph(&mut rng, n, 0.25, false)
        })
        .collect()
}

#[test]
fn matches_individual_kernel_calls() {
    let data = small_dataset(3, 3);
    let k = KernelConfig::unlabeled();
    let cfg = SolverConfig {
        reorder: ReorderMethod::Pbr,
        ..SolverConfig::default()
    };
    let r = compute_gram(&data, &k, &cfg, 2).unwrap();
    for a in 0..3 {
        for b in a..3 {
            let single = kernel(&data[a], &data[b], &k, &cfg).unwrap().value;
            assert_eq!(r.get(a, b).to_bits(), single.to_bits());
            assert_eq!(r.get(b, a).to_bits(), single.to_bits());
        }
    }
    assert!(r.all_converged());
    assert!(r.failures.is_empty());
}

#[test]
fn worker_count_does_not_change_values() {
    let data = small_dataset(11, 9);
    let k = KernelConfig::unlabeled();
    for deterministic in [true, false] {
        let cfg = SolverConfig {
            deterministic,
            ..SolverConfig::default()
        };
        let one = compute_gram(&data, &k, &cfg, 1).unwrap();
        let eight = compute_gram(&data, &k, &cfg, 8).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&one.values), bits(&eight.values));
        assert_eq!(one.iterations, eight.iterations);
        assert_eq!(one.order, eight.order);
    }
}

#[test]
fn schedule_covers_every_pair_once_largest_first() {
    let mut data = small_dataset(5, 5);
    data.insert(2, gen_ba(300, 4, 1).unwrap());
    let stats: Vec<GraphStats> = data.iter().map(GraphStats::of).collect();
    let order = schedule_pairs(&stats);
    assert_eq!(order.len(), 6 * 7 / 2);
    let mut seen = order.clone();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), order.len());
    let cost = |&(a, b): &(usize, usize)| stats[a].nnz as u128 * stats[b].nnz as u128;
    assert!(order.windows(2).all(|w| cost(&w[0]) >= cost(&w[1])));
    assert_eq!(order[0], (2, 2));
}

#[test]
fn unconverged_pairs_are_flagged_not_fatal() {
    let data = vec![gen_nws(40, 3, 0.1, 1).unwrap(), gen_nws(24, 2, 0.1, 2).unwrap()];
    let cfg = SolverConfig {
        max_iterations: Some(2),
        ..SolverConfig::default()
    };
    let r = compute_gram(&data, &KernelConfig::unlabeled(), &cfg, 2).unwrap();
    assert!(!r.all_converged());
    assert!(r.values.iter().all(|v| v.is_nan()));
    let norm = normalize_gram(&r.values, 2).unwrap();
    assert!(norm.iter().all(|v| v.is_nan()));
}

#[test]
fn identical_graphs_normalize_to_ones() {
    let g = gen_ba(30, 3, 9).unwrap();
    let r = compute_gram(&[g.clone(), g.clone(), g], &KernelConfig::unlabeled(), &SolverConfig::default(), 3)
        .unwrap();
    let n = normalize_gram(&r.values, 3).unwrap();
    assert!(n.iter().all(|v| (v - 1.0).abs() <= 1e-10));
}

#[test]
fn persisted_matrices_round_trip() {
    let data = small_dataset(21, 4);
    let r = compute_gram(&data, &KernelConfig::unlabeled(), &SolverConfig::default(), 2).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("k.gram");
    save_gram_bin(&bin, &r.values, r.size).unwrap();
    let (size, values) = load_gram_bin(&bin).unwrap();
    assert_eq!(size, 4);
    assert_eq!(values, r.values);
    let bytes = std::fs::read(&bin).unwrap();
    assert_eq!(&bytes[..4], b"GRAM");
    assert_eq!(bytes[4], 1);
    assert_eq!(u64::from_le_bytes(bytes[5..13].try_into().unwrap()), 4);
    assert_eq!(f64::from_le_bytes(bytes[13..21].try_into().unwrap()), r.get(0, 0));
    assert_eq!(bytes.len(), 13 + 16 * 8);

    let csv = dir.path().join("k.csv");
    let ids: Vec<String> = (0..4).map(|k| format!("g{k}")).collect();
    save_gram_csv(&csv, &ids, &r.values).unwrap();
    let (back_ids, back) = load_gram_csv(&csv).unwrap();
    assert_eq!(back_ids, ids);
    assert_eq!(back, r.values);
}
