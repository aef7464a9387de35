//! Node status scores: follower count, eigenvector centrality and PageRank.
//!
//! Iterations are Jacobi style: every new score is computed from the
//! previous iterate, and each node sums its in-neighbors in ascending index
//! order, so results do not depend on the worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SocialGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Followers,
    Eigenvector,
    PageRank,
    ReversedPageRank,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::Followers => "followers",
            Measure::Eigenvector => "eigenvector",
            Measure::PageRank => "pagerank",
            Measure::ReversedPageRank => "reversed_pagerank",
        }
    }
}

/// Per-node status scores `P` with convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatusScores {
    pub measure: Measure,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Size of the last update (L1 for PageRank, L2 for eigenvector).
    pub residual: f64,
    pub converged: bool,
    /// Rayleigh quotient of the result, eigenvector centrality only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalue: Option<f64>,
}

impl StatusScores {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankOptions {
    pub damping: f64,
    /// Per-node tolerance; the run stops once the L1 change drops below
    /// `tol * |V|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankOptions {
    fn default() -> Self {
        PageRankOptions {
            damping: 0.85,
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvectorOptions {
    /// Stop once successive normalized iterates are closer than this in L2.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenvectorOptions {
    fn default() -> Self {
        EigenvectorOptions {
            tol: 1e-9,
            max_iter: 1000,
        }
    }
}

pub fn follower_count(g: &SocialGraph) -> StatusScores {
    StatusScores {
        measure: Measure::Followers,
        values: g.nodes().map(|v| g.followers(v).len() as f64).collect(),
        iterations: 0,
        residual: 0.0,
        converged: true,
        eigenvalue: None,
    }
}

/// One PageRank update. Mass sitting on nodes without followees is spread
/// uniformly, so a distribution summing to one maps to one summing to one.
pub fn pagerank_step(g: &SocialGraph, prev: &[f64], damping: f64) -> Vec<f64> {
    let n = g.node_count();
    debug_assert_eq!(prev.len(), n);
    let inv_n = 1.0 / n as f64;
    let dangling: f64 = g
        .nodes()
        .filter(|&u| g.followees(u).is_empty())
        .map(|u| prev[u.index()])
        .sum();
    let base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
    let out = g.out_adjacency();
    (0..n)
        .into_par_iter()
        .map(|v| {
            let inflow: f64 = g
                .followers(v.into())
                .iter()
                .map(|&u| prev[u.index()] / out.degree(u) as f64)
                .sum();
            damping * inflow + base
        })
        .collect()
}

pub fn pagerank(g: &SocialGraph, opts: &PageRankOptions) -> Result<StatusScores> {
    if !(opts.damping > 0.0 && opts.damping < 1.0) {
        return Err(Error::Parameter(format!(
            "damping factor must lie in (0, 1), got {}",
            opts.damping
        )));
    }
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Domain("PageRank of an empty graph".into()));
    }
    let threshold = opts.tol * n as f64;
    let mut scores = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let next = pagerank_step(g, &scores, opts.damping);
        residual = l1_distance(&next, &scores);
        scores = next;
        iterations += 1;
        if residual < threshold {
            break;
        }
    }
    Ok(StatusScores {
        measure: Measure::PageRank,
        values: scores,
        iterations,
        residual,
        converged: residual < threshold,
        eigenvalue: None,
    })
}

/// PageRank on the graph with every edge reversed.
pub fn reversed_pagerank(g: &SocialGraph, opts: &PageRankOptions) -> Result<StatusScores> {
    let mut scores = pagerank(&g.transpose(), opts)?;
    scores.measure = Measure::ReversedPageRank;
    Ok(scores)
}

/// Principal eigenvector of `Aᵀ`, L2-normalized.
///
/// Iterates with `I + Aᵀ`, which has the same eigenvectors but no periodic
/// oscillation on bipartite or cyclic structure.
pub fn eigenvector_centrality(g: &SocialGraph, opts: &EigenvectorOptions) -> Result<StatusScores> {
    if g.edge_count() == 0 {
        return Err(Error::Domain(
            "eigenvector centrality of an edgeless graph".into(),
        ));
    }
    let n = g.node_count();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let mut next = transpose_product(g, &x);
        for (y, xi) in next.iter_mut().zip(&x) {
            *y += xi;
        }
        let norm = l2_norm(&next);
        if norm == 0.0 {
            return Err(Error::Domain(
                "eigenvector iteration collapsed to zero".into(),
            ));
        }
        next.iter_mut().for_each(|y| *y /= norm);
        residual = next
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x = next;
        iterations += 1;
        if residual < opts.tol {
            break;
        }
    }
    let ax = transpose_product(g, &x);
    let eigenvalue = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
    Ok(StatusScores {
        measure: Measure::Eigenvector,
        values: x,
        iterations,
        residual,
        converged: residual < opts.tol,
        eigenvalue: Some(eigenvalue),
    })
}

/// `(Aᵀ x)_v = Σ_{u ∈ N_I(v)} x_u`.
pub fn transpose_product(g: &SocialGraph, x: &[f64]) -> Vec<f64> {
    (0..g.node_count())
        .into_par_iter()
        .map(|v| g.followers(v.into()).iter().map(|&u| x[u.index()]).sum())
        .collect()
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn l2_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// CSV `node_id,score`, highest score first; ties in node index order.
pub fn write_scores_csv<W: Write>(
    g: &SocialGraph,
    scores: &StatusScores,
    mut out: W,
) -> std::io::Result<()> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores.values[b]
            .total_cmp(&scores.values[a])
            .then(a.cmp(&b))
    });
    writeln!(out, "node_id,score")?;
    for u in order {
        writeln!(out, "{},{}", g.ids()[u], scores.values[u])?;
    }
    out.flush()
}
