use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::MembershipTable;
use crate::error::{Error, Result};
use crate::features::{EdgeFeatures, FeatureRow};
use crate::graph::{NodeId, SocialGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationOptions {
    /// Stop once no entry moves by this much in one step.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        PropagationOptions {
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Propagation {
    pub table: MembershipTable,
    pub iterations: usize,
    pub max_change: f64,
    pub converged: bool,
}

#[inline]
pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[inline]
pub(crate) fn dot(x: &FeatureRow, w: &FeatureRow) -> f64 {
    x.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Tie strength `f(u, v) = 1 / (1 + exp(-X_uv · w))`.
pub fn tie_strength(
    g: &SocialGraph,
    feat: &EdgeFeatures,
    w: &FeatureRow,
    u: NodeId,
    v: NodeId,
) -> Result<f64> {
    Ok(logistic(dot(feat.get(g, u, v)?, w)))
}

/// Tie strength of every friend slot.
pub fn edge_strengths(feat: &EdgeFeatures, w: &FeatureRow) -> Vec<f64> {
    feat.rows()
        .par_iter()
        .map(|x| logistic(dot(x, w)))
        .collect()
}

/// One Jacobi step of weighted propagation.
///
/// Every non-clamped node with at least one friend takes the
/// strength-weighted mean of its friends' rows in the previous table. Clamped
/// and friendless nodes keep their rows. `strength` is indexed by friend slot.
pub fn propagate_step(g: &SocialGraph, q: &MembershipTable, strength: &[f64]) -> MembershipTable {
    debug_assert_eq!(strength.len(), g.friend_entry_count());
    let m = q.group_count();
    let adj = g.friend_adjacency();
    let mut next = q.clone();
    next.values_mut()
        .par_chunks_mut(m)
        .enumerate()
        .for_each(|(u, row)| {
            let u = NodeId::from(u);
            let friends = g.friends(u);
            if friends.is_empty() || q.is_clamped(u) {
                return;
            }
            let offset = adj.offset(u);
            row.fill(0.0);
            let mut total = 0.0;
            for (j, &v) in friends.iter().enumerate() {
                let f = strength[offset + j];
                total += f;
                for (acc, &x) in row.iter_mut().zip(q.row(v)) {
                    *acc += f * x;
                }
            }
            row.iter_mut().for_each(|x| *x /= total);
        });
    next
}

/// Repeats [`propagate_step`] until the largest entry change drops below `tol`.
pub fn propagate(
    g: &SocialGraph,
    q0: &MembershipTable,
    strength: &[f64],
    opts: &PropagationOptions,
) -> Propagation {
    let has_free = g
        .nodes()
        .any(|u| !q0.is_clamped(u) && !g.friends(u).is_empty());
    let mut table = q0.clone();
    if !has_free {
        return Propagation {
            table,
            iterations: 0,
            max_change: 0.0,
            converged: true,
        };
    }
    let mut max_change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = propagate_step(g, &table, strength);
        max_change = next.max_abs_diff(&table);
        table = next;
        iterations += 1;
        if max_change < opts.tol {
            break;
        }
    }
    Propagation {
        table,
        iterations,
        max_change,
        converged: max_change < opts.tol,
    }
}

fn check_inputs(g: &SocialGraph, q0: &MembershipTable) -> Result<()> {
    if q0.node_count() != g.node_count() {
        return Err(Error::Validation(format!(
            "membership table has {} rows for {} nodes",
            q0.node_count(),
            g.node_count()
        )));
    }
    if !q0.known_mask().into_iter().any(|k| k) {
        return Err(Error::Domain(
            "propagation needs at least one known node".into(),
        ));
    }
    Ok(())
}

/// Uniform propagation: every tie has the same strength.
pub fn infer_up(
    g: &SocialGraph,
    q0: &MembershipTable,
    opts: &PropagationOptions,
) -> Result<Propagation> {
    check_inputs(g, q0)?;
    let strength = vec![1.0; g.friend_entry_count()];
    Ok(propagate(g, q0, &strength, opts))
}

/// Propagation with learned tie strengths.
pub fn infer_sp(
    g: &SocialGraph,
    feat: &EdgeFeatures,
    w: &FeatureRow,
    q0: &MembershipTable,
    opts: &PropagationOptions,
) -> Result<Propagation> {
    check_inputs(g, q0)?;
    if feat.len() != g.friend_entry_count() {
        return Err(Error::Validation(
            "edge features do not belong to this graph".into(),
        ));
    }
    let strength = edge_strengths(feat, w);
    Ok(propagate(g, q0, &strength, opts))
}
