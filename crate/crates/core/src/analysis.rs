//! Structural evidence: homophily by tie type, status triads and follow-back.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{intersection_count, NodeId, SocialGraph};
use crate::labels::Labels;

/// Share of node pairs in one tie class that have a group in common.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEstimate {
    /// `None` when the class has no pairs.
    pub probability: Option<f64>,
    pub pairs: u64,
    pub shared: u64,
    /// Binomial standard error `sqrt(p (1 - p) / pairs)`.
    pub standard_error: Option<f64>,
    pub sampled: bool,
}

impl ClassEstimate {
    fn new(shared: u64, pairs: u64, sampled: bool) -> Self {
        let probability = (pairs > 0).then(|| shared as f64 / pairs as f64);
        ClassEstimate {
            probability,
            pairs,
            shared,
            standard_error: probability.map(|p| (p * (1.0 - p) / pairs as f64).sqrt()),
            sampled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomophilyReport {
    pub reciprocal: ClassEstimate,
    pub one_way: ClassEstimate,
    pub disconnected: ClassEstimate,
}

fn share_group(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

const SAMPLES_PER_STREAM: u64 = 1 << 18;

/// Probability that two labeled users share a group, for friend pairs,
/// one-way pairs and unconnected pairs.
///
/// Connected classes are enumerated exactly. The unconnected class is
/// estimated from `disconnected_samples` uniformly drawn labeled pairs that
/// have no edge in either direction.
pub fn homophily(
    g: &SocialGraph,
    labels: &Labels,
    disconnected_samples: u64,
    seed: u64,
) -> Result<HomophilyReport> {
    if labels.node_count() != g.node_count() {
        return Err(Error::Validation("labels do not match the graph".into()));
    }
    let labeled = labels.labeled_nodes();
    if labeled.len() < 2 {
        return Err(Error::Domain(
            "homophily needs at least two labeled nodes".into(),
        ));
    }

    let (mut recip, mut recip_shared, mut oneway, mut oneway_shared) = (0u64, 0u64, 0u64, 0u64);
    for &u in &labeled {
        for &v in g.friends(u) {
            if v > u && labels.is_labeled(v) {
                recip += 1;
                recip_shared += share_group(labels.groups(u), labels.groups(v)) as u64;
            }
        }
        for &v in g.followees(u) {
            if labels.is_labeled(v) && !g.has_edge(v, u) {
                oneway += 1;
                oneway_shared += share_group(labels.groups(u), labels.groups(v)) as u64;
            }
        }
    }

    let streams = disconnected_samples.div_ceil(SAMPLES_PER_STREAM);
    let (disc, disc_shared) = (0..streams)
        .into_par_iter()
        .map(|stream| {
            let want = SAMPLES_PER_STREAM.min(disconnected_samples - stream * SAMPLES_PER_STREAM);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            sample_disconnected(g, labels, &labeled, want, &mut rng)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, 0), |(a, b), (c, d)| (a + c, b + d));

    Ok(HomophilyReport {
        reciprocal: ClassEstimate::new(recip_shared, recip, false),
        one_way: ClassEstimate::new(oneway_shared, oneway, false),
        disconnected: ClassEstimate::new(disc_shared, disc, true),
    })
}

fn sample_disconnected(
    g: &SocialGraph,
    labels: &Labels,
    labeled: &[NodeId],
    want: u64,
    rng: &mut ChaCha8Rng,
) -> (u64, u64) {
    let k = labeled.len();
    let max_draws = want.saturating_mul(1000).max(1000);
    let (mut got, mut shared, mut draws) = (0u64, 0u64, 0u64);
    while got < want && draws < max_draws {
        draws += 1;
        let i = rng.random_range(0..k);
        let mut j = rng.random_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        let (u, v) = (labeled[i], labeled[j]);
        if g.has_edge(u, v) || g.has_edge(v, u) {
            continue;
        }
        got += 1;
        shared += share_group(labels.groups(u), labels.groups(v)) as u64;
    }
    (got, shared)
}

/// Triads with exactly three directed edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriangleCensus {
    /// Transitive triangles: `(u, v), (v, w), (u, w)`.
    pub type_i: u64,
    /// Directed 3-cycles.
    pub type_ii: u64,
    /// Three edges forming a friend pair plus one more edge, which is
    /// isomorphic to neither triangle.
    pub other: u64,
}

impl TriangleCensus {
    pub fn ratio(&self) -> Option<f64> {
        (self.type_ii > 0).then(|| self.type_i as f64 / self.type_ii as f64)
    }
}

fn undirected_neighbors(g: &SocialGraph, u: NodeId) -> Vec<NodeId> {
    let (a, b) = (g.followees(u), g.followers(u));
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

pub fn triangle_census(g: &SocialGraph) -> TriangleCensus {
    let undirected: Vec<Vec<NodeId>> = (0..g.node_count())
        .into_par_iter()
        .map(|u| undirected_neighbors(g, NodeId::from(u)))
        .collect();
    // One-way neighbors of each node: adjacent but not friends.
    let single: Vec<Vec<NodeId>> = (0..g.node_count())
        .into_par_iter()
        .map(|u| {
            let friends = g.friends(NodeId::from(u));
            undirected[u]
                .iter()
                .copied()
                .filter(|v| friends.binary_search(v).is_err())
                .collect()
        })
        .collect();

    let tallies: Vec<(u64, u64, u64)> = (0..g.node_count())
        .into_par_iter()
        .map(|ui| {
            let u = NodeId::from(ui);
            let (mut t1, mut t2, mut other) = (0u64, 0u64, 0u64);
            let nu = &undirected[ui];
            for &v in nu.iter().filter(|&&v| v > u) {
                let nv = &undirected[v.index()];
                let (mut i, mut j) = (0, 0);
                while i < nu.len() && j < nv.len() {
                    match nu[i].cmp(&nv[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            let w = nu[i];
                            if w > v {
                                match classify(g, u, v, w) {
                                    Some(true) => t1 += 1,
                                    Some(false) => t2 += 1,
                                    None => {}
                                }
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
            // Friend pair (a, u) plus a one-way tie (u, b) with a and b unlinked.
            for &a in g.friends(u) {
                other += (single[ui].len()
                    - intersection_count(&single[ui], &undirected[a.index()]))
                    as u64;
            }
            (t1, t2, other)
        })
        .collect();

    let (type_i, type_ii, other) = tallies
        .into_iter()
        .fold((0, 0, 0), |(a, b, c), (x, y, z)| (a + x, b + y, c + z));
    TriangleCensus {
        type_i,
        type_ii,
        other,
    }
}

/// For a fully linked triple: `Some(true)` transitive, `Some(false)` cyclic,
/// `None` when it carries more than three edges.
fn classify(g: &SocialGraph, u: NodeId, v: NodeId, w: NodeId) -> Option<bool> {
    let (uv, vu) = (g.has_edge(u, v), g.has_edge(v, u));
    let (vw, wv) = (g.has_edge(v, w), g.has_edge(w, v));
    let (uw, wu) = (g.has_edge(u, w), g.has_edge(w, u));
    let edges = [uv, vu, vw, wv, uw, wu].iter().filter(|&&e| e).count();
    if edges != 3 {
        return None;
    }
    let cyclic = (uv && vw && wu) || (vu && wv && uw);
    Some(!cyclic)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FollowBack {
    /// Mean of `|N_R(u)| / |N_I(u)|`; `None` if no node qualified.
    pub ratio: Option<f64>,
    pub included: usize,
    /// Nodes skipped for having no followers.
    pub excluded: usize,
}

/// Average share of followers that a node follows back.
pub fn follow_back_ratio(g: &SocialGraph, nodes: &[NodeId]) -> Result<FollowBack> {
    let mut sum = 0.0;
    let (mut included, mut excluded) = (0, 0);
    for &u in nodes {
        g.check(u)?;
        let followers = g.followers(u).len();
        if followers == 0 {
            excluded += 1;
            continue;
        }
        included += 1;
        sum += g.friends(u).len() as f64 / followers as f64;
    }
    Ok(FollowBack {
        ratio: (included > 0).then(|| sum / included as f64),
        included,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::GroupCatalog;

    fn labels(m: usize, sets: Vec<Vec<usize>>) -> Labels {
        let names = (0..m).map(|i| format!("h{i}")).collect();
        Labels::new(GroupCatalog::new(names).unwrap(), sets).unwrap()
    }

    #[test]
    fn friends_in_same_group() {
        let g = SocialGraph::from_index_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let r = homophily(&g, &labels(2, vec![vec![1], vec![0, 1]]), 100, 0).unwrap();
        assert_eq!(r.reciprocal.probability, Some(1.0));
        assert_eq!(r.reciprocal.pairs, 1);
        assert_eq!(r.one_way.probability, None);
        assert_eq!(r.disconnected.pairs, 0);
        assert_eq!(r.disconnected.probability, None);
    }

    #[test]
    fn classes_are_separated() {
        // 0<->1 friends, 2->0 one way, 3 isolated.
        let g = SocialGraph::from_index_edges(4, &[(0, 1), (1, 0), (2, 0)]).unwrap();
        let l = labels(2, vec![vec![0], vec![0], vec![1], vec![0]]);
        let r = homophily(&g, &l, 10_000, 3).unwrap();
        assert_eq!((r.reciprocal.shared, r.reciprocal.pairs), (1, 1));
        assert_eq!((r.one_way.shared, r.one_way.pairs), (0, 1));
        // Unlinked pairs: {0,3} {1,3} share, {1,2} {2,3} do not.
        let p = r.disconnected.probability.unwrap();
        assert_eq!(r.disconnected.pairs, 10_000);
        assert!((p - 0.5).abs() < 4.0 * r.disconnected.standard_error.unwrap());
        let again = homophily(&g, &l, 10_000, 3).unwrap();
        assert_eq!(r, again);
    }

    #[test]
    fn too_few_labels() {
        let g = SocialGraph::from_index_edges(2, &[]).unwrap();
        assert!(homophily(&g, &labels(1, vec![vec![0], vec![]]), 10, 0).is_err());
    }

    #[test]
    fn census_small_cases() {
        let cycle = SocialGraph::from_index_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let c = triangle_census(&cycle);
        assert_eq!((c.type_i, c.type_ii, c.other), (0, 1, 0));
        assert_eq!(c.ratio(), Some(0.0));

        let full =
            SocialGraph::from_index_edges(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)])
                .unwrap();
        let c = triangle_census(&full);
        assert_eq!((c.type_i, c.type_ii), (0, 0));
        assert_eq!(c.ratio(), None);

        let trans = SocialGraph::from_index_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(triangle_census(&trans).type_i, 1);

        let open = SocialGraph::from_index_edges(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        let c = triangle_census(&open);
        assert_eq!((c.type_i, c.type_ii, c.other), (0, 0, 1));
    }

    #[test]
    fn follow_back_counts() {
        // followers of 0: 1 and 2; 0 follows back 1.
        let g = SocialGraph::from_index_edges(3, &[(1, 0), (2, 0), (0, 1)]).unwrap();
        let r = follow_back_ratio(&g, &[NodeId(0)]).unwrap();
        assert_eq!(r.ratio, Some(0.5));
        let r = follow_back_ratio(&g, &[NodeId(2)]).unwrap();
        assert_eq!((r.ratio, r.excluded), (None, 1));
        assert!(follow_back_ratio(&g, &[NodeId(7)]).is_err());
    }
}
