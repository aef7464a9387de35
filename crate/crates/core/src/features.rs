//! Edge features for every ordered friend pair.
//!
//! Column layout, for the pair `(u, v)`:
//!
//! | column | value |
//! |---|---|
//! | 0..5 | followers, followees, friends, PageRank, reversed PageRank of `u` |
//! | 5..10 | the same five quantities for `v` |
//! | 10 | number of common friends |
//!
//! Rows are stored in the order of the graph's flattened friend adjacency,
//! so [`SocialGraph::friend_slot`] gives the row of a pair.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::StatusScores;
use crate::error::{Error, Result};
use crate::graph::{intersection_count, NodeId, SocialGraph};

pub const FEATURE_DIM: usize = 11;

pub type FeatureRow = [f64; FEATURE_DIM];

pub const FEATURE_NAMES: [&str; FEATURE_DIM] = [
    "followers_u",
    "followees_u",
    "friends_u",
    "pagerank_u",
    "rev_pagerank_u",
    "followers_v",
    "followees_v",
    "friends_v",
    "pagerank_v",
    "rev_pagerank_v",
    "common_friends",
];

/// Count-valued columns, which get a `log(1 + x)` transform before scaling.
pub const COUNT_COLUMNS: [bool; FEATURE_DIM] = [
    true, true, true, false, false, true, true, true, false, false, true,
];

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFeatures {
    pairs: Vec<(NodeId, NodeId)>,
    rows: Vec<FeatureRow>,
    norm: Option<NormParams>,
}

impl EdgeFeatures {
    /// Wraps caller-supplied raw rows, one per ordered friend pair in slot order.
    pub fn from_rows(g: &SocialGraph, rows: Vec<FeatureRow>) -> Result<Self> {
        if rows.len() != g.friend_entry_count() {
            return Err(Error::Validation(format!(
                "{} feature rows for {} friend pairs",
                rows.len(),
                g.friend_entry_count()
            )));
        }
        Ok(EdgeFeatures {
            pairs: friend_pairs(g),
            rows,
            norm: None,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[FeatureRow] {
        &self.rows
    }

    pub fn row(&self, slot: usize) -> &FeatureRow {
        &self.rows[slot]
    }

    pub fn pairs(&self) -> &[(NodeId, NodeId)] {
        &self.pairs
    }

    pub fn get(&self, g: &SocialGraph, u: NodeId, v: NodeId) -> Result<&FeatureRow> {
        g.friend_slot(u, v)
            .filter(|&s| s < self.rows.len())
            .map(|s| &self.rows[s])
            .ok_or(Error::MissingEdge(u.index(), v.index()))
    }

    pub fn is_normalized(&self) -> bool {
        self.norm.is_some()
    }

    pub fn norm_params(&self) -> Option<&NormParams> {
        self.norm.as_ref()
    }
}

fn friend_pairs(g: &SocialGraph) -> Vec<(NodeId, NodeId)> {
    g.nodes()
        .flat_map(|u| g.friends(u).iter().map(move |&v| (u, v)))
        .collect()
}

pub fn extract_features(
    g: &SocialGraph,
    pr: &StatusScores,
    rpr: &StatusScores,
) -> Result<EdgeFeatures> {
    let n = g.node_count();
    if pr.len() != n || rpr.len() != n {
        return Err(Error::Validation(format!(
            "score vectors of length {} and {} for a graph with {n} nodes",
            pr.len(),
            rpr.len()
        )));
    }
    let node_part = |u: NodeId| {
        [
            g.followers(u).len() as f64,
            g.followees(u).len() as f64,
            g.friends(u).len() as f64,
            pr.values[u.index()],
            rpr.values[u.index()],
        ]
    };
    let per_node: Vec<Vec<FeatureRow>> = (0..n)
        .into_par_iter()
        .map(|u| {
            let u = NodeId::from(u);
            let mine = node_part(u);
            g.friends(u)
                .iter()
                .map(|&v| {
                    let theirs = node_part(v);
                    let mut row = [0.0; FEATURE_DIM];
                    row[..5].copy_from_slice(&mine);
                    row[5..10].copy_from_slice(&theirs);
                    row[10] = intersection_count(g.friends(u), g.friends(v)) as f64;
                    row
                })
                .collect()
        })
        .collect();
    Ok(EdgeFeatures {
        pairs: friend_pairs(g),
        rows: per_node.into_iter().flatten().collect(),
        norm: None,
    })
}

/// Per-column transform: optional `log(1 + x)`, then `(x - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub log1p: [bool; FEATURE_DIM],
    pub shift: FeatureRow,
    pub scale: FeatureRow,
    /// Columns with zero variance on the fitting rows; they map to 0.
    pub degenerate: Vec<usize>,
    pub fitted_rows: usize,
}

impl NormParams {
    /// Fits shift and scale on the rows listed in `fit_on` of raw features.
    pub fn fit(feat: &EdgeFeatures, fit_on: &[usize]) -> Result<Self> {
        if feat.is_normalized() {
            return Err(Error::Validation("features are already normalized".into()));
        }
        if fit_on.is_empty() {
            return Err(Error::Domain(
                "cannot fit normalization on zero edges".into(),
            ));
        }
        if let Some(&bad) = fit_on.iter().find(|&&s| s >= feat.len()) {
            return Err(Error::OutOfBounds {
                index: bad,
                len: feat.len(),
            });
        }
        let log1p = COUNT_COLUMNS;
        let count = fit_on.len() as f64;
        let mut shift = [0.0; FEATURE_DIM];
        let mut scale = [1.0; FEATURE_DIM];
        let mut degenerate = Vec::new();
        for k in 0..FEATURE_DIM {
            let value = |s: usize| transform(feat.rows[s][k], log1p[k]);
            let mean = fit_on.iter().map(|&s| value(s)).sum::<f64>() / count;
            let var = fit_on
                .iter()
                .map(|&s| (value(s) - mean).powi(2))
                .sum::<f64>()
                / count;
            let std = var.sqrt();
            shift[k] = mean;
            if std > 1e-12 * (1.0 + mean.abs()) {
                scale[k] = std;
            } else {
                degenerate.push(k);
            }
        }
        Ok(NormParams {
            log1p,
            shift,
            scale,
            degenerate,
            fitted_rows: fit_on.len(),
        })
    }

    pub fn transform_row(&self, raw: &FeatureRow) -> FeatureRow {
        let mut out = [0.0; FEATURE_DIM];
        for k in 0..FEATURE_DIM {
            if !self.degenerate.contains(&k) {
                out[k] = (transform(raw[k], self.log1p[k]) - self.shift[k]) / self.scale[k];
            }
        }
        out
    }

    /// Applies the stored transform to raw features.
    pub fn apply(&self, feat: &EdgeFeatures) -> Result<EdgeFeatures> {
        if feat.is_normalized() {
            return Err(Error::Validation("features are already normalized".into()));
        }
        Ok(EdgeFeatures {
            pairs: feat.pairs.clone(),
            rows: feat.rows.iter().map(|r| self.transform_row(r)).collect(),
            norm: Some(self.clone()),
        })
    }
}

#[inline]
fn transform(x: f64, log: bool) -> f64 {
    if log {
        x.ln_1p()
    } else {
        x
    }
}

/// Fits on `fit_on` and transforms every row.
pub fn normalize(feat: &EdgeFeatures, fit_on: &[usize]) -> Result<EdgeFeatures> {
    NormParams::fit(feat, fit_on)?.apply(feat)
}

/// CSV dump with header `u,v,x1..x11`.
pub fn write_features_csv<W: Write>(
    g: &SocialGraph,
    feat: &EdgeFeatures,
    mut out: W,
) -> std::io::Result<()> {
    write!(out, "u,v")?;
    for k in 1..=FEATURE_DIM {
        write!(out, ",x{k}")?;
    }
    writeln!(out)?;
    for (&(u, v), row) in feat.pairs.iter().zip(&feat.rows) {
        write!(out, "{},{}", g.external_id(u), g.external_id(v))?;
        for x in row {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{pagerank, reversed_pagerank, PageRankOptions};

    fn features(g: &SocialGraph) -> EdgeFeatures {
        let opts = PageRankOptions::default();
        let pr = pagerank(g, &opts).unwrap();
        let rpr = reversed_pagerank(g, &opts).unwrap();
        extract_features(g, &pr, &rpr).unwrap()
    }

    fn mutual(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
        pairs.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect()
    }

    #[test]
    fn triangle_common_friends() {
        let g = SocialGraph::from_index_edges(3, &mutual(&[(0, 1), (1, 2), (0, 2)])).unwrap();
        let f = features(&g);
        assert_eq!(f.len(), 6);
        assert_eq!(f.get(&g, NodeId(0), NodeId(1)).unwrap()[10], 1.0);
    }

    #[test]
    fn single_pair() {
        let g = SocialGraph::from_index_edges(2, &mutual(&[(0, 1)])).unwrap();
        let f = features(&g);
        let row = f.get(&g, NodeId(0), NodeId(1)).unwrap();
        assert_eq!((row[2], row[7], row[10]), (1.0, 1.0, 0.0));
    }

    #[test]
    fn missing_edge_lookup() {
        let g = SocialGraph::from_index_edges(3, &[(0, 1), (1, 0), (1, 2)]).unwrap();
        let f = features(&g);
        assert!(matches!(
            f.get(&g, NodeId(1), NodeId(2)),
            Err(Error::MissingEdge(1, 2))
        ));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let g = SocialGraph::from_index_edges(2, &mutual(&[(0, 1)])).unwrap();
        let other = SocialGraph::from_index_edges(3, &[]).unwrap();
        let pr = pagerank(&other, &PageRankOptions::default()).unwrap();
        assert!(matches!(
            extract_features(&g, &pr, &pr),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn constant_column_is_flagged_and_zeroed() {
        // Every node has exactly two friends in a mutual triangle.
        let g = SocialGraph::from_index_edges(3, &mutual(&[(0, 1), (1, 2), (0, 2)])).unwrap();
        let f = features(&g);
        let all: Vec<usize> = (0..f.len()).collect();
        let norm = normalize(&f, &all).unwrap();
        let params = norm.norm_params().unwrap();
        assert!(params.degenerate.contains(&2));
        assert!(params.degenerate.contains(&10));
        assert!(norm.rows().iter().all(|r| r[2] == 0.0 && r[10] == 0.0));
    }

    #[test]
    fn normalizing_twice_is_an_error() {
        let g = SocialGraph::from_index_edges(2, &mutual(&[(0, 1)])).unwrap();
        let f = features(&g);
        let once = normalize(&f, &[0, 1]).unwrap();
        assert!(once.is_normalized());
        assert!(normalize(&once, &[0, 1]).is_err());
        assert!(once.norm_params().unwrap().apply(&once).is_err());
        assert!(matches!(normalize(&f, &[]), Err(Error::Domain(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = SocialGraph::from_index_edges(2, &mutual(&[(0, 1)])).unwrap();
        let mut buf = Vec::new();
        write_features_csv(&g, &features(&g), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("u,v,x1,") && lines[0].ends_with(",x11"));
        assert!(lines[1].starts_with("0,1,1,1,1,"));
    }
}
