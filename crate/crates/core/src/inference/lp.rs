use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};
use crate::labels::Labels;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpOptions {
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iter: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult {
    /// Group per node; `None` for nodes no label ever reached.
    pub labels: Vec<Option<usize>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Synchronous label propagation over friend ties.
///
/// Known nodes keep their labels and vote for every group they belong to.
/// Each initially unlabeled node adopts the most frequent label among its
/// currently labeled friends. A node already holding one of the most
/// frequent labels keeps it; otherwise ties are broken uniformly at random.
pub fn infer_lp(g: &SocialGraph, labels: &Labels, opts: &LpOptions) -> Result<LpResult> {
    let n = g.node_count();
    if labels.node_count() != n {
        return Err(Error::Validation(format!(
            "labels cover {} nodes, graph has {n}",
            labels.node_count()
        )));
    }
    if labels.labeled_count() == 0 {
        return Err(Error::Domain(
            "label propagation needs at least one labeled node".into(),
        ));
    }
    let known: Vec<bool> = g.nodes().map(|u| labels.is_labeled(u)).collect();
    let mut current: Vec<Option<usize>> = g.nodes().map(|u| labels.primary(u)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut counts = vec![0u32; labels.group_count()];
    let mut touched = Vec::new();
    let mut tied = Vec::new();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut next = current.clone();
        let mut changed = false;
        for u in g.nodes() {
            if known[u.index()] {
                continue;
            }
            for &v in g.friends(u) {
                let votes: &[usize] = if known[v.index()] {
                    labels.groups(v)
                } else {
                    match &current[v.index()] {
                        Some(l) => std::slice::from_ref(l),
                        None => &[],
                    }
                };
                for &l in votes {
                    if counts[l] == 0 {
                        touched.push(l);
                    }
                    counts[l] += 1;
                }
            }
            if touched.is_empty() {
                continue;
            }
            touched.sort_unstable();
            let best = touched.iter().map(|&l| counts[l]).max().unwrap_or(0);
            tied.clear();
            tied.extend(touched.iter().copied().filter(|&l| counts[l] == best));
            let pick = match current[u.index()] {
                Some(l) if tied.contains(&l) => l,
                _ if tied.len() == 1 => tied[0],
                _ => tied[rng.random_range(0..tied.len())],
            };
            for &l in &touched {
                counts[l] = 0;
            }
            touched.clear();
            if current[u.index()] != Some(pick) {
                changed = true;
            }
            next[u.index()] = Some(pick);
        }
        current = next;
        if !changed {
            converged = true;
            break;
        }
    }
    Ok(LpResult {
        labels: current,
        iterations,
        converged,
    })
}

impl LpResult {
    /// Predicted group per node, falling back to group 0 where nothing arrived.
    pub fn predictions(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.unwrap_or(0)).collect()
    }

    pub fn label(&self, u: NodeId) -> Option<usize> {
        self.labels[u.index()]
    }
}
