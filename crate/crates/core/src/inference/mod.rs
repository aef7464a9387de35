//! Membership inference: supervised propagation (SP), uniform propagation
//! (UP) and label propagation (LP).

mod lp;
mod propagation;
mod sp;

pub use lp::{infer_lp, LpOptions, LpResult};
pub use propagation::{
    edge_strengths, infer_sp, infer_up, logistic, propagate, propagate_step, tie_strength,
    Propagation, PropagationOptions,
};
pub use sp::{split_known, train_sp, SpConfig, SpObjective, SpTraining, StopReason, TieWeights};

use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};
use crate::labels::{GroupCatalog, Labels};

/// Initial strength of every unknown membership entry.
pub const PRIOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    /// Known and clamped to its indicator row.
    Seed,
    /// Known, but treated as unknown while training tie strengths.
    Target,
    Unknown,
}

/// Membership strengths `Q`, one row of `m` entries in `[0, 1]` per node.
///
/// Rows are independent per-group strengths and need not sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipTable {
    groups: usize,
    q: Vec<f64>,
    roles: Vec<NodeRole>,
}

impl MembershipTable {
    pub fn new(groups: usize, q: Vec<f64>, roles: Vec<NodeRole>) -> Result<Self> {
        if groups == 0 {
            return Err(Error::Validation(
                "membership table needs at least one group".into(),
            ));
        }
        if q.len() != roles.len() * groups {
            return Err(Error::Validation(format!(
                "{} entries for {} nodes x {groups} groups",
                q.len(),
                roles.len()
            )));
        }
        if let Some(x) = q.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Validation(format!(
                "membership strength {x} outside [0, 1]"
            )));
        }
        Ok(MembershipTable { groups, q, roles })
    }

    /// Every labeled node is a clamped seed; everything else starts at the prior.
    pub fn from_labels(labels: &Labels) -> Self {
        let known = labels.labeled_nodes();
        Self::with_roles(labels, &known, &[])
    }

    /// Seeds clamped to their labels, targets and unknown nodes at the prior.
    pub fn for_training(labels: &Labels, seeds: &[NodeId], targets: &[NodeId]) -> Self {
        Self::with_roles(labels, seeds, targets)
    }

    fn with_roles(labels: &Labels, seeds: &[NodeId], targets: &[NodeId]) -> Self {
        let n = labels.node_count();
        let m = labels.group_count();
        let mut q = vec![PRIOR; n * m];
        let mut roles = vec![NodeRole::Unknown; n];
        for &u in targets {
            roles[u.index()] = NodeRole::Target;
        }
        for &u in seeds {
            roles[u.index()] = NodeRole::Seed;
            let row = &mut q[u.index() * m..(u.index() + 1) * m];
            row.fill(0.0);
            for &g in labels.groups(u) {
                row[g] = 1.0;
            }
        }
        MembershipTable {
            groups: m,
            q,
            roles,
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    #[inline]
    pub fn row(&self, u: NodeId) -> &[f64] {
        let m = self.groups;
        &self.q[u.index() * m..(u.index() + 1) * m]
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }

    pub fn role(&self, u: NodeId) -> NodeRole {
        self.roles[u.index()]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    #[inline]
    pub fn is_clamped(&self, u: NodeId) -> bool {
        self.roles[u.index()] == NodeRole::Seed
    }

    pub fn known_mask(&self) -> Vec<bool> {
        self.roles.iter().map(|&r| r == NodeRole::Seed).collect()
    }

    /// Largest absolute entry-wise difference to another table of the same shape.
    pub fn max_abs_diff(&self, other: &MembershipTable) -> f64 {
        self.q
            .iter()
            .zip(&other.q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn predictions(&self) -> Vec<usize> {
        (0..self.node_count())
            .map(|u| argmax(self.row(NodeId::from(u))))
            .collect()
    }
}

/// Most probable group of `u`; ties go to the lowest group index.
pub fn predict_group(q: &MembershipTable, u: NodeId) -> usize {
    argmax(q.row(u))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate().skip(1) {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// CSV `node_id,<group>,...` with one row per node in index order.
pub fn write_membership_csv<W: Write>(
    g: &SocialGraph,
    catalog: &GroupCatalog,
    q: &MembershipTable,
    mut out: W,
) -> std::io::Result<()> {
    write!(out, "node_id")?;
    for name in catalog.names() {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for u in g.nodes() {
        write!(out, "{}", g.external_id(u))?;
        for x in q.row(u) {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Reads a table written by [`write_membership_csv`].
///
/// Columns are matched to `catalog` by name. Nodes missing from the file
/// keep the prior; every row is marked unknown.
pub fn read_membership_csv<R: BufRead>(
    reader: R,
    source: &Path,
    g: &SocialGraph,
    catalog: &GroupCatalog,
) -> Result<MembershipTable> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: source.to_owned(),
        line,
        message,
    };
    let m = catalog.len();
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(h) => h.map_err(|e| Error::io(format!("reading {}", source.display()), e))?,
        None => return Err(parse_err(1, "empty membership file".into())),
    };
    let mut columns = header.trim_end_matches('\r').split(',');
    if columns.next() != Some("node_id") {
        return Err(parse_err(1, "header must start with `node_id`".into()));
    }
    let mut column_group = Vec::new();
    for name in columns {
        let g = catalog
            .get(name)
            .ok_or_else(|| parse_err(1, format!("unknown group {name:?}")))?;
        column_group.push(g);
    }
    if column_group.len() != m {
        return Err(parse_err(
            1,
            format!("expected {m} group columns, found {}", column_group.len()),
        ));
    }
    let mut q = vec![PRIOR; g.node_count() * m];
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::io(format!("reading {}", source.display()), e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields.next().unwrap_or_default();
        let u = g
            .node(id)
            .ok_or_else(|| parse_err(lineno, format!("unknown node {id:?}")))?;
        let values: Vec<&str> = fields.collect();
        if values.len() != m {
            return Err(parse_err(
                lineno,
                format!("expected {m} values, found {}", values.len()),
            ));
        }
        for (&h, v) in column_group.iter().zip(values) {
            q[u.index() * m + h] = v
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad membership value {v:?}")))?;
        }
    }
    MembershipTable::new(m, q, vec![NodeRole::Unknown; g.node_count()])
}
