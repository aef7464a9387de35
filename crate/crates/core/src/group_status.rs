//! Group status: membership-weighted mean of node status scores.

use std::io::Write;

use serde::Serialize;

use crate::centrality::StatusScores;
use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::inference::MembershipTable;
use crate::labels::{GroupCatalog, Labels};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStatus {
    /// `None` for groups without any supporting membership mass.
    pub pi: Vec<Option<f64>>,
    /// Expected group size `Σ_v q_vi` over the contributing nodes.
    pub support: Vec<f64>,
    /// Defined groups by descending score, ties by ascending index.
    pub ranking: Vec<usize>,
}

impl GroupStatus {
    fn from_sums(weighted: Vec<f64>, support: Vec<f64>) -> Self {
        let pi: Vec<Option<f64>> = weighted
            .iter()
            .zip(&support)
            .map(|(&s, &z)| (z > 0.0).then(|| s / z))
            .collect();
        let mut ranking: Vec<usize> = (0..pi.len()).filter(|&i| pi[i].is_some()).collect();
        ranking.sort_by(|&a, &b| pi[b].partial_cmp(&pi[a]).unwrap().then(a.cmp(&b)));
        GroupStatus {
            pi,
            support,
            ranking,
        }
    }

    /// Scores with undefined groups mapped to `NaN`, for plotting and tests.
    pub fn scores_or_nan(&self) -> Vec<f64> {
        self.pi.iter().map(|p| p.unwrap_or(f64::NAN)).collect()
    }

    /// Position of each group in the ranking (0 = highest status).
    pub fn rank_of(&self, group: usize) -> Option<usize> {
        self.ranking.iter().position(|&g| g == group)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GroupStatusOptions<'a> {
    /// Only these nodes contribute, when set.
    pub restrict: Option<&'a [NodeId]>,
    /// Entries below this strength are ignored.
    pub min_strength: Option<f64>,
}

/// `π_i = Σ_v q_vi P_v / Σ_v q_vi`.
pub fn group_status(
    q: &MembershipTable,
    p: &StatusScores,
    opts: &GroupStatusOptions<'_>,
) -> Result<GroupStatus> {
    if q.node_count() != p.len() {
        return Err(Error::Validation(format!(
            "membership table has {} rows, status scores have {}",
            q.node_count(),
            p.len()
        )));
    }
    let m = q.group_count();
    let mut weighted = vec![0.0; m];
    let mut support = vec![0.0; m];
    let threshold = opts.min_strength.unwrap_or(0.0);
    let mut add = |u: NodeId| {
        let score = p.values[u.index()];
        for (i, &x) in q.row(u).iter().enumerate() {
            if x > 0.0 && x >= threshold {
                weighted[i] += x * score;
                support[i] += x;
            }
        }
    };
    match opts.restrict {
        Some(nodes) => {
            let mut nodes = nodes.to_vec();
            nodes.sort_unstable();
            nodes.dedup();
            for u in nodes {
                if u.index() >= q.node_count() {
                    return Err(Error::OutOfBounds {
                        index: u.index(),
                        len: q.node_count(),
                    });
                }
                add(u);
            }
        }
        None => (0..q.node_count()).map(NodeId::from).for_each(add),
    }
    Ok(GroupStatus::from_sums(weighted, support))
}

/// Average status of each group's known members, without any inference.
pub fn pr_baseline(known: &Labels, p: &StatusScores) -> Result<GroupStatus> {
    if known.node_count() != p.len() {
        return Err(Error::Validation(format!(
            "labels cover {} nodes, status scores have {}",
            known.node_count(),
            p.len()
        )));
    }
    let m = known.group_count();
    let mut weighted = vec![0.0; m];
    let mut support = vec![0.0; m];
    for u in 0..known.node_count() {
        let u = NodeId::from(u);
        for &g in known.groups(u) {
            weighted[g] += p.values[u.index()];
            support[g] += 1.0;
        }
    }
    Ok(GroupStatus::from_sums(weighted, support))
}

/// CSV `rank,group,pi,support`; undefined groups follow with an empty rank
/// and score.
pub fn write_group_status_csv<W: Write>(
    catalog: &GroupCatalog,
    status: &GroupStatus,
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "rank,group,pi,support")?;
    for (rank, &g) in status.ranking.iter().enumerate() {
        let pi = status.pi[g].expect("ranked groups are defined");
        writeln!(
            out,
            "{},{},{},{}",
            rank + 1,
            catalog.name(g),
            pi,
            status.support[g]
        )?;
    }
    for (g, pi) in status.pi.iter().enumerate() {
        if pi.is_none() {
            writeln!(out, ",{},,{}", catalog.name(g), status.support[g])?;
        }
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::Measure;
    use crate::inference::NodeRole;

    fn scores(values: Vec<f64>) -> StatusScores {
        StatusScores {
            measure: Measure::PageRank,
            values,
            iterations: 0,
            residual: 0.0,
            converged: true,
            eigenvalue: None,
        }
    }

    fn table(m: usize, q: Vec<f64>) -> MembershipTable {
        let n = q.len() / m;
        MembershipTable::new(m, q, vec![NodeRole::Unknown; n]).unwrap()
    }

    #[test]
    fn all_ones_is_the_mean() {
        let p = scores(vec![0.1, 0.5, 0.3, 0.7]);
        let s = group_status(&table(1, vec![1.0; 4]), &p, &Default::default()).unwrap();
        assert!((s.pi[0].unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(s.support, [4.0]);
    }

    #[test]
    fn exact_membership_means() {
        let p = scores(vec![1.0, 3.0, 10.0]);
        let q = table(2, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let s = group_status(&q, &p, &Default::default()).unwrap();
        assert_eq!(s.pi, [Some(2.0), Some(10.0)]);
        assert_eq!(s.ranking, [1, 0]);
    }

    #[test]
    fn baseline_and_undefined_groups() {
        let catalog = GroupCatalog::new(vec!["x".into(), "y".into()]).unwrap();
        let known = Labels::new(catalog.clone(), vec![vec![0], vec![0], vec![]]).unwrap();
        let s = pr_baseline(&known, &scores(vec![0.1, 0.3, 0.9])).unwrap();
        assert!((s.pi[0].unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(s.pi[1], None);
        assert_eq!(s.ranking, [0]);

        let mut buf = Vec::new();
        write_group_status_csv(&catalog, &s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "rank,group,pi,support");
        assert!(lines[1].starts_with("1,x,0.2"));
        assert_eq!(lines[2], ",y,,0");
    }

    #[test]
    fn min_strength_drops_weak_entries() {
        let p = scores(vec![1.0, 100.0]);
        let q = table(1, vec![1.0, 1e-3]);
        let loose = group_status(&q, &p, &Default::default()).unwrap();
        let strict = group_status(
            &q,
            &p,
            &GroupStatusOptions {
                min_strength: Some(0.01),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(loose.pi[0].unwrap() > 1.0);
        assert_eq!(strict.pi[0], Some(1.0));
    }

    #[test]
    fn mismatched_sizes() {
        let p = scores(vec![1.0]);
        assert!(group_status(&table(1, vec![1.0, 1.0]), &p, &Default::default()).is_err());
    }
}
