mod common;

use proptest::prelude::*;
use rand::Rng;
use socialrank::evaluation::{accuracy, kfold, roc_auc, spearman, trapezoid};
use socialrank::NodeId;

fn pairwise_auc(scores: &[f64], pos: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if pos[i] && !pos[j] {
                pairs += 1.0;
                wins += if si > sj {
                    1.0
                } else if si == sj {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    wins / pairs
}

/// Ranks by counting: smaller values plus half of the other equal values, plus one.
fn counting_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&a| {
            let less = x.iter().filter(|&&b| b < a).count() as f64;
            let equal = x.iter().filter(|&&b| b == a).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn auc_matches_pairwise_oracle() {
    let mut r = common::rng(5);
    for _ in 0..200 {
        let k = 8;
        // Coarse scores so that ties occur.
        let scores: Vec<f64> = (0..k).map(|_| r.random_range(0..5) as f64 / 4.0).collect();
        let mut pos: Vec<bool> = (0..k).map(|_| r.random()).collect();
        pos[0] = true;
        pos[1] = false;
        let opt: Vec<Option<f64>> = scores.iter().map(|&s| Some(s)).collect();
        let roc = roc_auc(&opt, &pos).unwrap();
        assert!((roc.auc - pairwise_auc(&scores, &pos)).abs() < 1e-12);
        assert!((trapezoid(&roc.points) - roc.auc).abs() < 1e-12);
        assert!(roc
            .points
            .windows(2)
            .all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
    }
}

#[test]
fn spearman_matches_rank_then_pearson() {
    let mut r = common::rng(8);
    for _ in 0..50 {
        let x: Vec<f64> = (0..34).map(|_| r.random_range(0..20) as f64).collect();
        let y: Vec<f64> = (0..34).map(|_| r.random::<f64>()).collect();
        let ox: Vec<Option<f64>> = x.iter().map(|&v| Some(v)).collect();
        let oy: Vec<Option<f64>> = y.iter().map(|&v| Some(v)).collect();
        let ours = spearman(&ox, &oy).unwrap().unwrap();
        let oracle = pearson(&counting_ranks(&x), &counting_ranks(&y));
        assert!((ours - oracle).abs() < 1e-12);
    }
}

#[test]
fn accuracy_matches_recount() {
    let labels = common::random_labels(300, 5, 0.7, 77);
    let mut r = common::rng(78);
    let pred: Vec<usize> = (0..300).map(|_| r.random_range(0..5)).collect();
    let eval: Vec<NodeId> = labels.labeled_nodes();
    let a = accuracy(&pred, &labels, &eval).unwrap();
    let correct = eval
        .iter()
        .filter(|u| labels.groups(**u).contains(&pred[u.index()]))
        .count();
    assert_eq!(a.accuracy, correct as f64 / eval.len() as f64);
    for h in 0..5 {
        let members: Vec<&NodeId> = eval.iter().filter(|u| labels.has_group(**u, h)).collect();
        let hits = members
            .iter()
            .filter(|u| labels.groups(***u).contains(&pred[u.index()]))
            .count();
        assert_eq!(a.per_group[h], Some(hits as f64 / members.len() as f64));
    }
}

#[test]
fn folds_keep_group_proportions() {
    let labels = common::random_labels(500, 4, 1.0, 3);
    let nodes = labels.labeled_nodes();
    let kf = kfold(&labels, &nodes, 10, 1).unwrap();
    let total: Vec<usize> = (0..4)
        .map(|h| {
            nodes
                .iter()
                .filter(|u| labels.primary(**u) == Some(h))
                .count()
        })
        .collect();
    for f in &kf.folds {
        for (h, &t) in total.iter().enumerate() {
            let c = f
                .test
                .iter()
                .filter(|u| labels.primary(**u) == Some(h))
                .count() as f64;
            assert!((c - t as f64 / 10.0).abs() <= 1.0);
        }
    }
}

proptest! {
    #[test]
    fn auc_is_invariant_under_increasing_maps(
        raw in proptest::collection::vec((0u8..6, any::<bool>()), 4..30),
        shift in -5.0f64..5.0,
    ) {
        let mut pos: Vec<bool> = raw.iter().map(|x| x.1).collect();
        pos[0] = true;
        pos[1] = false;
        let s: Vec<Option<f64>> = raw.iter().map(|x| Some(x.0 as f64)).collect();
        let t: Vec<Option<f64>> = raw.iter().map(|x| Some((x.0 as f64).exp() + shift)).collect();
        prop_assert!((roc_auc(&s, &pos).unwrap().auc - roc_auc(&t, &pos).unwrap().auc).abs() < 1e-12);
    }

    #[test]
    fn spearman_of_itself_is_one(x in proptest::collection::vec(-100.0f64..100.0, 3..40)) {
        let ox: Vec<Option<f64>> = x.iter().map(|&v| Some(v)).collect();
        match spearman(&ox, &ox).unwrap() {
            Some(rho) => prop_assert!((rho - 1.0).abs() < 1e-12),
            None => prop_assert!(x.iter().all(|&v| v == x[0])),
        }
    }

    #[test]
    fn folds_partition_the_labeled_set(n in 10usize..120, k in 2usize..10, seed in any::<u64>()) {
        let labels = common::random_labels(n, 3, 1.0, seed);
        let nodes = labels.labeled_nodes();
        prop_assume!(nodes.len() >= k);
        let kf = kfold(&labels, &nodes, k, seed).unwrap();
        let mut all: Vec<NodeId> = kf.folds.iter().flat_map(|f| f.test.iter().copied()).collect();
        all.sort_unstable();
        prop_assert_eq!(&all, &nodes);
        for f in &kf.folds {
            prop_assert_eq!(f.train.len() + f.test.len(), nodes.len());
        }
    }
}
