//! Accuracy, cross-validation folds, ROC/AUC and rank correlation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::labels::Labels;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Accuracy {
    /// Share of evaluated nodes whose prediction is one of their groups.
    pub accuracy: f64,
    /// Mean of the defined per-group accuracies.
    pub balanced: f64,
    /// `None` for groups with no evaluated member.
    pub per_group: Vec<Option<f64>>,
    pub evaluated: usize,
}

/// Scores `pred` against `truth` on `eval_set`.
///
/// A multi-group node counts once towards plain accuracy and once for each
/// of its groups towards the per-group accuracies.
pub fn accuracy(pred: &[usize], truth: &Labels, eval_set: &[NodeId]) -> Result<Accuracy> {
    if eval_set.is_empty() {
        return Err(Error::Domain(
            "accuracy over an empty evaluation set".into(),
        ));
    }
    if pred.len() != truth.node_count() {
        return Err(Error::Validation(format!(
            "{} predictions for {} nodes",
            pred.len(),
            truth.node_count()
        )));
    }
    let m = truth.group_count();
    let mut hits = vec![0usize; m];
    let mut totals = vec![0usize; m];
    let mut correct = 0usize;
    for &u in eval_set {
        if u.index() >= pred.len() {
            return Err(Error::OutOfBounds {
                index: u.index(),
                len: pred.len(),
            });
        }
        let groups = truth.groups(u);
        if groups.is_empty() {
            return Err(Error::Validation(format!(
                "node {u} in the evaluation set has no label"
            )));
        }
        let ok = groups.contains(&pred[u.index()]);
        correct += ok as usize;
        for &g in groups {
            totals[g] += 1;
            hits[g] += ok as usize;
        }
    }
    let per_group: Vec<Option<f64>> = hits
        .iter()
        .zip(&totals)
        .map(|(&h, &t)| (t > 0).then(|| h as f64 / t as f64))
        .collect();
    let defined: Vec<f64> = per_group.iter().flatten().copied().collect();
    Ok(Accuracy {
        accuracy: correct as f64 / eval_set.len() as f64,
        balanced: defined.iter().sum::<f64>() / defined.len() as f64,
        per_group,
        evaluated: eval_set.len(),
    })
}

/// Share of the most common primary group among `eval_set`, i.e. the accuracy
/// of always predicting that group.
pub fn majority_baseline(truth: &Labels, train: &[NodeId], eval_set: &[NodeId]) -> Result<f64> {
    let mut counts = vec![0usize; truth.group_count()];
    for &u in train {
        for &g in truth.groups(u) {
            counts[g] += 1;
        }
    }
    let best = (0..counts.len())
        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
        .unwrap_or(0);
    let pred = vec![best; truth.node_count()];
    Ok(accuracy(&pred, truth, eval_set)?.accuracy)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<NodeId>,
    pub test: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KFold {
    pub folds: Vec<Fold>,
    /// Groups with fewer than `k` members, dealt without stratification.
    pub unstratified_groups: Vec<usize>,
}

/// Random `k`-way partition of `nodes`, stratified by primary group.
///
/// Members of each group are shuffled and dealt round-robin, continuing the
/// deal from one group to the next so that fold sizes differ by at most one.
/// Groups smaller than `k` are pooled and dealt last.
pub fn kfold(labels: &Labels, nodes: &[NodeId], k: usize, seed: u64) -> Result<KFold> {
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let mut nodes = nodes.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.len() < k {
        return Err(Error::Domain(format!(
            "{} nodes cannot fill {k} folds",
            nodes.len()
        )));
    }
    let mut strata: Vec<Vec<NodeId>> = vec![Vec::new(); labels.group_count()];
    for &u in &nodes {
        let g = labels
            .primary(u)
            .ok_or_else(|| Error::Validation(format!("node {u} has no label")))?;
        strata[g].push(u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pooled = Vec::new();
    let mut unstratified_groups = Vec::new();
    let mut order = Vec::with_capacity(nodes.len());
    for (g, mut members) in strata.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < k {
            unstratified_groups.push(g);
            pooled.append(&mut members);
            continue;
        }
        members.shuffle(&mut rng);
        order.append(&mut members);
    }
    pooled.shuffle(&mut rng);
    order.append(&mut pooled);

    let mut tests = vec![Vec::new(); k];
    for (i, u) in order.into_iter().enumerate() {
        tests[i % k].push(u);
    }
    let folds = tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = nodes
                .iter()
                .copied()
                .filter(|u| test.binary_search(u).is_err())
                .collect();
            Fold { train, test }
        })
        .collect();
    Ok(KFold {
        folds,
        unstratified_groups,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Roc {
    pub auc: f64,
    /// `(FPR, TPR)` from `(0, 0)` to `(1, 1)`; tied scores form one diagonal step.
    pub points: Vec<(f64, f64)>,
    /// Items skipped for lacking a score.
    pub excluded: usize,
}

/// ROC curve and AUC for ranking `positives` by descending score.
///
/// The AUC is the probability that a random positive outscores a random
/// negative, with ties counting one half.
pub fn roc_auc(scores: &[Option<f64>], positives: &[bool]) -> Result<Roc> {
    if scores.len() != positives.len() {
        return Err(Error::Validation(format!(
            "{} scores for {} indicators",
            scores.len(),
            positives.len()
        )));
    }
    let mut items: Vec<(f64, bool)> = Vec::with_capacity(scores.len());
    let mut excluded = 0;
    for (s, &p) in scores.iter().zip(positives) {
        match s {
            Some(s) if s.is_finite() => items.push((*s, p)),
            _ => excluded += 1,
        }
    }
    let n_pos = items.iter().filter(|x| x.1).count();
    let n_neg = items.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Domain(format!(
            "ROC needs positives and negatives, got {n_pos} and {n_neg}"
        )));
    }
    items.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    // Positive/negative pairs where the negative scores higher, ties counting half.
    let mut losses = 0.0;
    let mut i = 0;
    while i < items.len() {
        let mut j = i;
        let (mut dp, mut dn) = (0usize, 0usize);
        while j < items.len() && items[j].0 == items[i].0 {
            if items[j].1 {
                dp += 1;
            } else {
                dn += 1;
            }
            j += 1;
        }
        losses += dp as f64 * fp as f64 + 0.5 * dp as f64 * dn as f64;
        tp += dp;
        fp += dn;
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
        i = j;
    }
    let auc = 1.0 - losses / (n_pos as f64 * n_neg as f64);
    Ok(Roc {
        auc,
        points,
        excluded,
    })
}

/// Trapezoidal area under a piecewise-linear curve.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

/// 1-based ranks with ties given their average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman correlation over pairs where both values are defined.
///
/// `Ok(None)` when either side is constant.
pub fn spearman(x: &[Option<f64>], y: &[Option<f64>]) -> Result<Option<f64>> {
    if x.len() != y.len() {
        return Err(Error::Validation(format!(
            "{} values against {}",
            x.len(),
            y.len()
        )));
    }
    let (a, b): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => Some((*a, *b)),
            _ => None,
        })
        .unzip();
    if a.len() < 3 {
        return Err(Error::Domain(format!(
            "Spearman needs 3 defined pairs, got {}",
            a.len()
        )));
    }
    Ok(pearson(&average_ranks(&a), &average_ranks(&b)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub balanced: f64,
}

/// Collected evaluation output of one run; absent parts are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: Option<f64>,
    pub balanced_accuracy: Option<f64>,
    pub per_group_accuracy: Option<Vec<Option<f64>>>,
    /// Accuracy of always predicting the largest training group.
    pub majority_baseline: Option<f64>,
    pub fold_results: Vec<FoldResult>,
    pub auc: Option<f64>,
    pub roc_points: Option<Vec<(f64, f64)>>,
    pub spearman: Option<f64>,
}

impl EvalReport {
    /// Folds the per-fold results into the headline accuracy fields as
    /// per-fold means.
    pub fn summarize_folds(&mut self) {
        if self.fold_results.is_empty() {
            return;
        }
        let k = self.fold_results.len() as f64;
        self.accuracy = Some(self.fold_results.iter().map(|f| f.accuracy).sum::<f64>() / k);
        self.balanced_accuracy =
            Some(self.fold_results.iter().map(|f| f.balanced).sum::<f64>() / k);
    }
}

pub fn write_roc_csv<W: std::io::Write>(points: &[(f64, f64)], mut out: W) -> std::io::Result<()> {
    writeln!(out, "fpr,tpr")?;
    for (x, y) in points {
        writeln!(out, "{x},{y}")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::GroupCatalog;

    fn labels(m: usize, sets: Vec<Vec<usize>>) -> Labels {
        let names = (0..m).map(|i| format!("h{i}")).collect();
        Labels::new(GroupCatalog::new(names).unwrap(), sets).unwrap()
    }

    fn all(n: usize) -> Vec<NodeId> {
        (0..n).map(NodeId::from).collect()
    }

    #[test]
    fn three_of_four() {
        let l = labels(2, vec![vec![0], vec![0], vec![1], vec![1]]);
        let a = accuracy(&[0, 0, 1, 0], &l, &all(4)).unwrap();
        assert_eq!(a.accuracy, 0.75);
        assert_eq!(a.per_group, [Some(1.0), Some(0.5)]);
    }

    #[test]
    fn imbalance_illustration() {
        let mut sets = vec![vec![0]; 9];
        sets.push(vec![1]);
        let a = accuracy(&[0; 10], &labels(2, sets), &all(10)).unwrap();
        assert!((a.accuracy - 0.9).abs() < 1e-15);
        assert_eq!(a.balanced, 0.5);
    }

    #[test]
    fn multi_group_counts_once_for_accuracy() {
        let l = labels(3, vec![vec![0, 1], vec![2]]);
        let a = accuracy(&[1, 0], &l, &all(2)).unwrap();
        assert_eq!(a.accuracy, 0.5);
        assert_eq!(a.per_group, [Some(1.0), Some(1.0), Some(0.0)]);
        assert!((a.balanced - 2.0 / 3.0).abs() < 1e-15);
        assert!(accuracy(&[0, 0], &l, &[]).is_err());
    }

    #[test]
    fn folds_partition() {
        let l = labels(3, (0..100).map(|i| vec![i % 3]).collect());
        let kf = kfold(&l, &all(100), 10, 5).unwrap();
        assert_eq!(kf.folds.len(), 10);
        let mut seen: Vec<NodeId> = kf.folds.iter().flat_map(|f| f.test.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, all(100));
        for f in &kf.folds {
            assert_eq!(f.test.len(), 10);
            assert_eq!(f.train.len(), 90);
        }
        assert_eq!(kf, kfold(&l, &all(100), 10, 5).unwrap());
        assert_ne!(kf, kfold(&l, &all(100), 10, 6).unwrap());
    }

    #[test]
    fn small_groups_fall_back() {
        let mut sets: Vec<Vec<usize>> = (0..20).map(|_| vec![0]).collect();
        sets.push(vec![1]);
        let kf = kfold(&labels(2, sets), &all(21), 5, 0).unwrap();
        assert_eq!(kf.unstratified_groups, [1]);
        assert!(kfold(&labels(1, vec![vec![0]; 3]), &all(3), 5, 0).is_err());
    }

    #[test]
    fn auc_extremes() {
        let s = [Some(0.9), Some(0.8), Some(0.2), Some(0.1)];
        let r = roc_auc(&s, &[true, true, false, false]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
        let r = roc_auc(&[Some(1.0); 4], &[true, false, true, false]).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.points, [(0.0, 0.0), (1.0, 1.0)]);
        assert!(roc_auc(&[Some(1.0), None], &[true, false]).is_err());
    }

    #[test]
    fn auc_skips_undefined_and_matches_area() {
        let s = [Some(0.3), None, Some(0.5), Some(0.3), Some(0.1)];
        let r = roc_auc(&s, &[true, true, false, false, true]).unwrap();
        assert_eq!(r.excluded, 1);
        // positives 0.3, 0.1; negatives 0.5, 0.3 → (0 + 0.5 + 0 + 0) / 4.
        assert!((r.auc - 0.125).abs() < 1e-15);
        assert!((trapezoid(&r.points) - r.auc).abs() < 1e-15);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[10.0, 20.0, 10.0, 5.0]),
            [2.5, 4.0, 2.5, 1.0]
        );
    }

    #[test]
    fn spearman_extremes() {
        let x: Vec<_> = (0..5).map(|i| Some(i as f64)).collect();
        let rev: Vec<_> = (0..5).map(|i| Some(-(i as f64).powi(3))).collect();
        assert_eq!(spearman(&x, &x).unwrap(), Some(1.0));
        assert_eq!(spearman(&x, &rev).unwrap(), Some(-1.0));
        assert_eq!(spearman(&x, &[Some(2.0); 5]).unwrap(), None);
        assert!(spearman(&x[..2], &x[..2]).is_err());
    }
}
