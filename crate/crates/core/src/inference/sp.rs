//! Supervised propagation: learning tie-strength weights jointly with the
//! membership strengths of unknown and target nodes.
//!
//! The objective over weights `w` and free rows of `Q` is
//!
//! ```text
//! L(w, Q) = ½ Σ_{u ∈ V_T} ‖q̂_u − Q⁰_u‖² + (λ/2) Σ_{u ∈ V⁻} ‖q̂_u − q_u‖² + (μ/2) ‖w‖²
//! ```
//!
//! with `q̂_u` the strength-weighted mean of the friends' rows. Only nodes
//! with at least one friend contribute a term. Seed rows are clamped to
//! their indicator rows and are not part of the consistency sum.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::propagation::{edge_strengths, propagate, PropagationOptions};
use super::{MembershipTable, NodeRole};
use crate::error::{Error, Result};
use crate::features::{EdgeFeatures, FeatureRow, FEATURE_DIM};
use crate::graph::{NodeId, SocialGraph};
use crate::labels::Labels;

/// Learned weight vector of the logistic tie-strength model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieWeights {
    pub w: FeatureRow,
    /// Loss before training followed by the loss after every accepted step.
    pub training_log: Vec<f64>,
}

impl TieWeights {
    pub fn zero() -> Self {
        TieWeights {
            w: [0.0; FEATURE_DIM],
            training_log: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpConfig {
    /// Weight of the propagation-consistency term.
    pub lambda: f64,
    /// L2 regularization of the weights.
    pub mu: f64,
    /// Initial step size; halved whenever a step would increase the loss.
    pub learning_rate: f64,
    /// Stop once a step improves the loss by less than this fraction.
    pub rel_improvement: f64,
    pub max_iter: usize,
    /// Loss terms per update; `None` uses the full gradient.
    pub batch_size: Option<usize>,
    /// Weights start uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
    /// Start free rows from a propagation under the initial weights rather
    /// than from the prior.
    pub warm_start: bool,
    /// Give up once the step size falls below this.
    pub min_learning_rate: f64,
    pub propagation: PropagationOptions,
    pub seed: u64,
}

impl Default for SpConfig {
    fn default() -> Self {
        SpConfig {
            lambda: 1.0,
            mu: 1.0,
            learning_rate: 0.1,
            rel_improvement: 0.01,
            max_iter: 200,
            batch_size: None,
            init_scale: 0.1,
            warm_start: true,
            min_learning_rate: 1e-10,
            propagation: PropagationOptions::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    RelativeImprovement,
    MaxIterations,
    StepUnderflow,
    ZeroLoss,
}

#[derive(Debug, Clone)]
pub struct SpTraining {
    pub weights: TieWeights,
    /// Jointly optimized membership table (seeds clamped, targets free).
    pub table: MembershipTable,
    pub iterations: usize,
    pub stop: StopReason,
    pub final_learning_rate: f64,
    pub halvings: usize,
}

/// Random split of the known nodes into seeds and targets.
///
/// The seed count is `round(seed_fraction · |known|)`, kept within
/// `1..|known|` so that both sides are non-empty when possible.
pub fn split_known(known: &[NodeId], seed_fraction: f64, seed: u64) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut shuffled = known.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut n_seeds = (seed_fraction * known.len() as f64).round() as usize;
    if known.len() >= 2 {
        n_seeds = n_seeds.clamp(1, known.len() - 1);
    }
    let targets = shuffled.split_off(n_seeds.min(shuffled.len()));
    shuffled.sort_unstable();
    let mut targets = targets;
    targets.sort_unstable();
    (shuffled, targets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TermKind {
    Error,
    Consistency,
}

/// The training loss and its analytic gradient.
pub struct SpObjective<'a> {
    g: &'a SocialGraph,
    feat: &'a EdgeFeatures,
    free: Vec<bool>,
    /// Indicator rows of target nodes, indexed like the table.
    truth: Vec<f64>,
    terms: Vec<(NodeId, TermKind)>,
    groups: usize,
    lambda: f64,
    mu: f64,
}

impl<'a> SpObjective<'a> {
    /// `table` fixes node roles; `labels` supplies the target indicator rows.
    pub fn new(
        g: &'a SocialGraph,
        feat: &'a EdgeFeatures,
        table: &MembershipTable,
        labels: &Labels,
        lambda: f64,
        mu: f64,
    ) -> Result<Self> {
        if table.node_count() != g.node_count() || labels.node_count() != g.node_count() {
            return Err(Error::Validation(
                "table, labels and graph differ in size".into(),
            ));
        }
        if feat.len() != g.friend_entry_count() {
            return Err(Error::Validation(
                "edge features do not belong to this graph".into(),
            ));
        }
        let m = table.group_count();
        let mut truth = vec![0.0; g.node_count() * m];
        let mut terms = Vec::new();
        for u in g.nodes() {
            let has_friends = !g.friends(u).is_empty();
            match table.role(u) {
                NodeRole::Target => {
                    for &h in labels.groups(u) {
                        truth[u.index() * m + h] = 1.0;
                    }
                    if has_friends {
                        terms.push((u, TermKind::Error));
                    }
                }
                NodeRole::Unknown if has_friends && lambda != 0.0 => {
                    terms.push((u, TermKind::Consistency))
                }
                _ => {}
            }
        }
        Ok(SpObjective {
            g,
            feat,
            free: table.roles().iter().map(|&r| r != NodeRole::Seed).collect(),
            truth,
            terms,
            groups: m,
            lambda,
            mu,
        })
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn error_term_count(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, k)| *k == TermKind::Error)
            .count()
    }

    /// Whether the table row of `u` is an optimization variable.
    pub fn is_free(&self, u: NodeId) -> bool {
        self.free[u.index()]
    }

    /// `q̂_u` into `out`; returns the strength total `F_u`.
    fn estimate(&self, strength: &[f64], q: &[f64], u: NodeId, out: &mut [f64]) -> f64 {
        let m = self.groups;
        let offset = self.g.friend_adjacency().offset(u);
        out.fill(0.0);
        let mut total = 0.0;
        for (j, &v) in self.g.friends(u).iter().enumerate() {
            let f = strength[offset + j];
            total += f;
            for (acc, &x) in out.iter_mut().zip(&q[v.index() * m..(v.index() + 1) * m]) {
                *acc += f * x;
            }
        }
        out.iter_mut().for_each(|x| *x /= total);
        total
    }

    /// Residual of one loss term, already scaled by its weight.
    fn residual(&self, kind: TermKind, u: NodeId, q: &[f64], qhat: &[f64], out: &mut [f64]) {
        let m = self.groups;
        let (other, scale) = match kind {
            TermKind::Error => (&self.truth[u.index() * m..(u.index() + 1) * m], 1.0),
            TermKind::Consistency => (&q[u.index() * m..(u.index() + 1) * m], self.lambda),
        };
        for ((r, &a), &b) in out.iter_mut().zip(qhat).zip(other) {
            *r = scale * (a - b);
        }
    }

    pub fn loss(&self, w: &FeatureRow, q: &[f64]) -> f64 {
        let strength = edge_strengths(self.feat, w);
        let m = self.groups;
        let mut qhat = vec![0.0; m];
        let mut total = 0.0;
        for &(u, kind) in &self.terms {
            self.estimate(&strength, q, u, &mut qhat);
            let (other, scale) = match kind {
                TermKind::Error => (&self.truth[u.index() * m..(u.index() + 1) * m], 1.0),
                TermKind::Consistency => (&q[u.index() * m..(u.index() + 1) * m], self.lambda),
            };
            let sq: f64 = qhat.iter().zip(other).map(|(a, b)| (a - b) * (a - b)).sum();
            total += 0.5 * scale * sq;
        }
        total + 0.5 * self.mu * w.iter().map(|x| x * x).sum::<f64>()
    }

    /// Full analytic gradient `(∂L/∂w, ∂L/∂Q)`; entries of clamped rows are zero.
    pub fn gradient(&self, w: &FeatureRow, q: &[f64]) -> (FeatureRow, Vec<f64>) {
        let all: Vec<usize> = (0..self.terms.len()).collect();
        self.partial_gradient(w, q, &all, 1.0)
    }

    /// Gradient of the listed terms plus `reg_share` of the regularizer.
    fn partial_gradient(
        &self,
        w: &FeatureRow,
        q: &[f64],
        terms: &[usize],
        reg_share: f64,
    ) -> (FeatureRow, Vec<f64>) {
        let strength = edge_strengths(self.feat, w);
        let m = self.groups;
        let adj = self.g.friend_adjacency();
        let mut gw = [0.0; FEATURE_DIM];
        let mut gq = vec![0.0; q.len()];
        let mut qhat = vec![0.0; m];
        let mut e = vec![0.0; m];
        for &t in terms {
            let (u, kind) = self.terms[t];
            let total = self.estimate(&strength, q, u, &mut qhat);
            self.residual(kind, u, q, &qhat, &mut e);
            let offset = adj.offset(u);
            for (j, &v) in self.g.friends(u).iter().enumerate() {
                let f = strength[offset + j];
                let qv = &q[v.index() * m..(v.index() + 1) * m];
                if self.free[v.index()] {
                    let a = f / total;
                    for (gi, ei) in gq[v.index() * m..(v.index() + 1) * m].iter_mut().zip(&e) {
                        *gi += ei * a;
                    }
                }
                let spread: f64 = e
                    .iter()
                    .zip(qv)
                    .zip(&qhat)
                    .map(|((ei, x), h)| ei * (x - h))
                    .sum();
                let coef = spread * f * (1.0 - f) / total;
                for (gk, xk) in gw.iter_mut().zip(self.feat.row(offset + j)) {
                    *gk += coef * xk;
                }
            }
            if kind == TermKind::Consistency {
                for (gi, ei) in gq[u.index() * m..(u.index() + 1) * m].iter_mut().zip(&e) {
                    *gi -= ei;
                }
            }
        }
        for (gk, wk) in gw.iter_mut().zip(w) {
            *gk += reg_share * self.mu * wk;
        }
        (gw, gq)
    }
}

fn descend(
    w: &mut FeatureRow,
    q: &mut [f64],
    gw: &FeatureRow,
    gq: &[f64],
    free: &[bool],
    m: usize,
    step: f64,
) {
    for (wk, gk) in w.iter_mut().zip(gw) {
        *wk -= step * gk;
    }
    for (u, row) in q.chunks_mut(m).enumerate() {
        if !free[u] {
            continue;
        }
        for (x, g) in row.iter_mut().zip(&gq[u * m..(u + 1) * m]) {
            *x = (*x - step * g).clamp(0.0, 1.0);
        }
    }
}

/// Trains tie-strength weights by gradient descent on the joint loss.
///
/// `labels` holds the known membership of seeds and targets. Weights and
/// free rows move together each iteration. A step that would raise the loss
/// is rejected and retried at half the step size, so the logged loss never
/// increases. Training stops once an accepted step improves the loss by less
/// than `rel_improvement`.
pub fn train_sp(
    g: &SocialGraph,
    feat: &EdgeFeatures,
    labels: &Labels,
    seeds: &[NodeId],
    targets: &[NodeId],
    cfg: &SpConfig,
) -> Result<SpTraining> {
    if targets.is_empty() {
        return Err(Error::Domain(
            "supervised propagation needs at least one target node".into(),
        ));
    }
    if seeds.iter().chain(targets).any(|&u| !labels.is_labeled(u)) {
        return Err(Error::Validation(
            "seed and target nodes must be labeled".into(),
        ));
    }
    let mut in_seeds = vec![false; g.node_count()];
    seeds.iter().for_each(|u| in_seeds[u.index()] = true);
    if targets.iter().any(|u| in_seeds[u.index()]) {
        return Err(Error::Validation("seed and target sets overlap".into()));
    }
    if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 {
        return Err(Error::Parameter("learning rate must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = [0.0; FEATURE_DIM];
    for wk in &mut w {
        *wk = rng.random_range(-cfg.init_scale..=cfg.init_scale);
    }
    let mut table = MembershipTable::for_training(labels, seeds, targets);
    if cfg.warm_start && !seeds.is_empty() {
        let strength = edge_strengths(feat, &w);
        table = propagate(g, &table, &strength, &cfg.propagation).table;
    }
    let objective = SpObjective::new(g, feat, &table, labels, cfg.lambda, cfg.mu)?;
    if objective.error_term_count() == 0 {
        return Err(Error::Domain(
            "no target node has a friend to learn from".into(),
        ));
    }

    let m = table.group_count();
    let free = objective.free.clone();
    let mut q = table.values().to_vec();
    let mut loss = objective.loss(&w, &q);
    if !loss.is_finite() {
        return Err(Error::Diverged { iteration: 0, loss });
    }
    let mut log = vec![loss];
    let mut step = cfg.learning_rate;
    let mut halvings = 0;
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..objective.term_count()).collect();
    let stop = loop {
        if loss == 0.0 {
            break StopReason::ZeroLoss;
        }
        if iterations >= cfg.max_iter {
            break StopReason::MaxIterations;
        }
        iterations += 1;
        let full = match cfg.batch_size {
            Some(b) if b < order.len() && b > 0 => None,
            _ => Some(objective.gradient(&w, &q)),
        };
        if let Some((gw, gq)) = &full {
            if !gw.iter().chain(gq.iter()).all(|x| x.is_finite()) {
                return Err(Error::Diverged {
                    iteration: iterations,
                    loss,
                });
            }
        }
        let accepted = loop {
            let mut w_try = w;
            let mut q_try = q.clone();
            match &full {
                Some((gw, gq)) => descend(&mut w_try, &mut q_try, gw, gq, &free, m, step),
                None => {
                    let batch = cfg.batch_size.unwrap_or(order.len());
                    order.shuffle(&mut rng);
                    for chunk in order.chunks(batch) {
                        let share = chunk.len() as f64 / order.len() as f64;
                        let (gw, gq) = objective.partial_gradient(&w_try, &q_try, chunk, share);
                        descend(&mut w_try, &mut q_try, &gw, &gq, &free, m, step);
                    }
                }
            }
            let trial = objective.loss(&w_try, &q_try);
            if trial.is_finite() && trial <= loss {
                break Some((w_try, q_try, trial));
            }
            step *= 0.5;
            halvings += 1;
            if step < cfg.min_learning_rate {
                break None;
            }
        };
        let Some((w_new, q_new, trial)) = accepted else {
            break StopReason::StepUnderflow;
        };
        let improvement = (loss - trial) / loss;
        w = w_new;
        q = q_new;
        loss = trial;
        log.push(loss);
        if improvement < cfg.rel_improvement {
            break StopReason::RelativeImprovement;
        }
    };

    let table = MembershipTable::new(m, q, table.roles().to_vec())?;
    Ok(SpTraining {
        weights: TieWeights {
            w,
            training_log: log,
        },
        table,
        iterations,
        stop,
        final_learning_rate: step,
        halvings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::GroupCatalog;

    fn mutual(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
        pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect()
    }

    fn labels(m: usize, sets: Vec<Vec<usize>>) -> Labels {
        let names = (0..m).map(|i| format!("h{i}")).collect();
        Labels::new(GroupCatalog::new(names).unwrap(), sets).unwrap()
    }

    #[test]
    fn split_is_reproducible_and_disjoint() {
        let known: Vec<NodeId> = (0..50).map(NodeId::from).collect();
        let (s1, t1) = split_known(&known, 0.8, 9);
        let (s2, t2) = split_known(&known, 0.8, 9);
        assert_eq!((s1.len(), t1.len()), (40, 10));
        assert_eq!((&s1, &t1), (&s2, &t2));
        assert!(s1.iter().all(|u| !t1.contains(u)));
        let (s, t) = split_known(&known[..2], 0.99, 1);
        assert_eq!((s.len(), t.len()), (1, 1));
    }

    #[test]
    fn empty_target_set_is_rejected() {
        let g = SocialGraph::from_index_edges(2, &mutual(&[(0, 1)])).unwrap();
        let feat = EdgeFeatures::from_rows(&g, vec![[0.0; FEATURE_DIM]; 2]).unwrap();
        let l = labels(2, vec![vec![0], vec![1]]);
        let err = train_sp(
            &g,
            &feat,
            &l,
            &[NodeId(0), NodeId(1)],
            &[],
            &SpConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn single_seed_friend_without_consistency() {
        // Target 1 has only seed 0 as a friend, so q̂_1 = Q⁰_0 whatever w is.
        let g = SocialGraph::from_index_edges(2, &mutual(&[(0, 1)])).unwrap();
        let rows = vec![[0.3, -1.0, 0.2, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, -0.4, 0.0]; 2];
        let feat = EdgeFeatures::from_rows(&g, rows).unwrap();
        let l = labels(3, vec![vec![0], vec![0, 2]]);
        let cfg = SpConfig {
            lambda: 0.0,
            rel_improvement: 1e-12,
            max_iter: 200,
            ..Default::default()
        };
        let trained = train_sp(&g, &feat, &l, &[NodeId(0)], &[NodeId(1)], &cfg).unwrap();
        let w2: f64 = trained.weights.w.iter().map(|x| x * x).sum();
        let last = *trained.weights.training_log.last().unwrap();
        // ‖(1,0,0) − (1,0,1)‖² / 2
        assert!((last - 0.5 * cfg.mu * w2 - 0.5).abs() < 1e-12);
        assert!(w2 < 1e-6, "weights should decay to zero, got {w2}");
    }

    #[test]
    fn loss_log_never_increases() {
        let pairs = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 0),
            (1, 3),
            (2, 5),
            (5, 6),
            (6, 0),
        ];
        let g = SocialGraph::from_index_edges(7, &mutual(&pairs)).unwrap();
        let rows = (0..g.friend_entry_count())
            .map(|s| {
                let mut r = [0.0; FEATURE_DIM];
                r.iter_mut()
                    .enumerate()
                    .for_each(|(k, x)| *x = ((s * 7 + k * 3) % 5) as f64 - 2.0);
                r
            })
            .collect();
        let feat = EdgeFeatures::from_rows(&g, rows).unwrap();
        let l = labels(
            2,
            vec![vec![0], vec![0], vec![1], vec![], vec![1], vec![], vec![0]],
        );
        let cfg = SpConfig {
            learning_rate: 5.0,
            rel_improvement: 1e-6,
            ..Default::default()
        };
        let t = train_sp(
            &g,
            &feat,
            &l,
            &[NodeId(0), NodeId(2)],
            &[NodeId(1), NodeId(4), NodeId(6)],
            &cfg,
        )
        .unwrap();
        let log = &t.weights.training_log;
        assert!(log.windows(2).all(|p| p[1] <= p[0]));
        assert!(t.halvings > 0);
        assert!(t.table.values().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn mini_batches_also_descend() {
        let pairs = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 0),
            (0, 2),
            (3, 4),
            (4, 5),
            (5, 1),
        ];
        let g = SocialGraph::from_index_edges(6, &mutual(&pairs)).unwrap();
        let rows = (0..g.friend_entry_count())
            .map(|s| {
                let mut r = [0.0; FEATURE_DIM];
                r[10] = (s % 3) as f64 - 1.0;
                r
            })
            .collect();
        let feat = EdgeFeatures::from_rows(&g, rows).unwrap();
        let l = labels(2, vec![vec![0], vec![1], vec![0], vec![1], vec![], vec![]]);
        let cfg = SpConfig {
            batch_size: Some(1),
            rel_improvement: 1e-4,
            ..Default::default()
        };
        let a = train_sp(
            &g,
            &feat,
            &l,
            &[NodeId(0), NodeId(1)],
            &[NodeId(2), NodeId(3)],
            &cfg,
        )
        .unwrap();
        let b = train_sp(
            &g,
            &feat,
            &l,
            &[NodeId(0), NodeId(1)],
            &[NodeId(2), NodeId(3)],
            &cfg,
        )
        .unwrap();
        assert_eq!(a.weights, b.weights);
        let log = &a.weights.training_log;
        assert!(log.windows(2).all(|p| p[1] <= p[0]));
    }
}
