//! End-to-end runs: status scores, membership inference and group status.

use serde::{Deserialize, Serialize};

use crate::centrality::{
    eigenvector_centrality, follower_count, pagerank, reversed_pagerank, EigenvectorOptions,
    Measure, PageRankOptions, StatusScores,
};
use crate::error::{Error, Result};
use crate::features::{extract_features, EdgeFeatures, FeatureRow, NormParams};
use crate::graph::SocialGraph;
use crate::inference::{
    infer_lp, infer_sp, infer_up, split_known, train_sp, LpOptions, MembershipTable, NodeRole,
    PropagationOptions, SpConfig, StopReason, PRIOR,
};
use crate::labels::Labels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sp,
    Up,
    Lp,
}

/// Which membership table SP reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QSource {
    /// The table optimized jointly with the weights, targets left free.
    Optimized,
    /// A fresh propagation under the learned weights with every known node clamped.
    Repropagated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceSettings {
    pub algorithm: Algorithm,
    pub sp: SpConfig,
    pub propagation: PropagationOptions,
    pub lp: LpOptions,
    /// Share of known nodes used as seeds when training SP.
    pub seed_fraction: f64,
    pub q_source: QSource,
    pub pagerank: PageRankOptions,
}

impl Default for InferenceSettings {
    fn default() -> Self {
        InferenceSettings {
            algorithm: Algorithm::Sp,
            sp: SpConfig::default(),
            propagation: PropagationOptions::default(),
            lp: LpOptions::default(),
            seed_fraction: 0.8,
            q_source: QSource::Repropagated,
            pagerank: PageRankOptions::default(),
        }
    }
}

/// Learned tie-strength model, enough to re-run SP inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub w: FeatureRow,
    pub norm_params: NormParams,
    pub training_log: Vec<f64>,
    pub iterations: usize,
    pub stop: StopReason,
    pub halvings: usize,
    pub seeds: usize,
    pub targets: usize,
}

#[derive(Debug, Clone)]
pub struct Inferred {
    pub table: MembershipTable,
    pub predictions: Vec<usize>,
    pub model: Option<TrainedModel>,
    /// Propagation sweeps, or LP rounds.
    pub iterations: usize,
    pub converged: bool,
}

pub fn status_scores(
    g: &SocialGraph,
    measure: Measure,
    pr: &PageRankOptions,
) -> Result<StatusScores> {
    match measure {
        Measure::Followers => Ok(follower_count(g)),
        Measure::PageRank => pagerank(g, pr),
        Measure::ReversedPageRank => reversed_pagerank(g, pr),
        Measure::Eigenvector => eigenvector_centrality(g, &EigenvectorOptions::default()),
    }
}

/// Raw edge features normalized over every friend slot.
pub fn normalized_features(g: &SocialGraph, pr_opts: &PageRankOptions) -> Result<EdgeFeatures> {
    let pr = pagerank(g, pr_opts)?;
    let rpr = reversed_pagerank(g, pr_opts)?;
    let raw = extract_features(g, &pr, &rpr)?;
    let all: Vec<usize> = (0..raw.len()).collect();
    if all.is_empty() {
        return Err(Error::Domain(
            "the graph has no friend ties to learn from".into(),
        ));
    }
    NormParams::fit(&raw, &all)?.apply(&raw)
}

/// Infers memberships of every node from the `known` labels.
pub fn infer(g: &SocialGraph, known: &Labels, settings: &InferenceSettings) -> Result<Inferred> {
    if known.node_count() != g.node_count() {
        return Err(Error::Validation(format!(
            "labels cover {} nodes, graph has {}",
            known.node_count(),
            g.node_count()
        )));
    }
    let q0 = MembershipTable::from_labels(known);
    match settings.algorithm {
        Algorithm::Up => {
            let p = infer_up(g, &q0, &settings.propagation)?;
            Ok(Inferred {
                predictions: p.table.predictions(),
                table: p.table,
                model: None,
                iterations: p.iterations,
                converged: p.converged,
            })
        }
        Algorithm::Lp => {
            let r = infer_lp(g, known, &settings.lp)?;
            let m = known.group_count();
            let mut q = vec![0.0; g.node_count() * m];
            for u in g.nodes() {
                if known.is_labeled(u) {
                    for &h in known.groups(u) {
                        q[u.index() * m + h] = 1.0;
                    }
                } else if let Some(h) = r.label(u) {
                    q[u.index() * m + h] = 1.0;
                } else {
                    q[u.index() * m..(u.index() + 1) * m].fill(PRIOR);
                }
            }
            let roles = g
                .nodes()
                .map(|u| {
                    if known.is_labeled(u) {
                        NodeRole::Seed
                    } else {
                        NodeRole::Unknown
                    }
                })
                .collect();
            Ok(Inferred {
                table: MembershipTable::new(m, q, roles)?,
                predictions: r.predictions(),
                model: None,
                iterations: r.iterations,
                converged: r.converged,
            })
        }
        Algorithm::Sp => {
            let feat = normalized_features(g, &settings.pagerank)?;
            let labeled = known.labeled_nodes();
            let (seeds, targets) = split_known(&labeled, settings.seed_fraction, settings.sp.seed);
            let training = train_sp(g, &feat, known, &seeds, &targets, &settings.sp)?;
            let model = TrainedModel {
                w: training.weights.w,
                norm_params: feat
                    .norm_params()
                    .cloned()
                    .expect("features are normalized"),
                training_log: training.weights.training_log.clone(),
                iterations: training.iterations,
                stop: training.stop,
                halvings: training.halvings,
                seeds: seeds.len(),
                targets: targets.len(),
            };
            let (table, iterations, converged) = match settings.q_source {
                QSource::Optimized => (training.table, training.iterations, true),
                QSource::Repropagated => {
                    let p = infer_sp(g, &feat, &model.w, &q0, &settings.propagation)?;
                    (p.table, p.iterations, p.converged)
                }
            };
            Ok(Inferred {
                predictions: table.predictions(),
                table,
                model: Some(model),
                iterations,
                converged,
            })
        }
    }
}
