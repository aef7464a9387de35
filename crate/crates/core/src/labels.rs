//! Group catalog and per-node group membership sets.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{NodeId, SocialGraph};

/// Ordered, duplicate-free list of group names. Group indices refer to
/// positions in this list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupCatalog {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl GroupCatalog {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Validation(
                "a group catalog needs at least one group".into(),
            ));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate group name {name:?}")));
            }
        }
        Ok(GroupCatalog { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, group: usize) -> &str {
        &self.names[group]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

/// Known membership `H_u` for every node; unlabeled nodes have an empty set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    catalog: GroupCatalog,
    sets: Vec<Vec<usize>>,
}

impl Labels {
    pub fn new(catalog: GroupCatalog, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
            if let Some(&g) = set.last() {
                if g >= catalog.len() {
                    return Err(Error::Validation(format!(
                        "group index {g} out of range for {} groups",
                        catalog.len()
                    )));
                }
            }
        }
        Ok(Labels { catalog, sets })
    }

    pub fn catalog(&self) -> &GroupCatalog {
        &self.catalog
    }

    pub fn group_count(&self) -> usize {
        self.catalog.len()
    }

    pub fn node_count(&self) -> usize {
        self.sets.len()
    }

    pub fn groups(&self, u: NodeId) -> &[usize] {
        &self.sets[u.index()]
    }

    pub fn is_labeled(&self, u: NodeId) -> bool {
        !self.sets[u.index()].is_empty()
    }

    /// Lowest-index group of a labeled node.
    pub fn primary(&self, u: NodeId) -> Option<usize> {
        self.sets[u.index()].first().copied()
    }

    pub fn has_group(&self, u: NodeId, group: usize) -> bool {
        self.sets[u.index()].binary_search(&group).is_ok()
    }

    pub fn labeled_nodes(&self) -> Vec<NodeId> {
        (0..self.sets.len())
            .filter(|&i| !self.sets[i].is_empty())
            .map(NodeId::from)
            .collect()
    }

    pub fn labeled_count(&self) -> usize {
        self.sets.iter().filter(|s| !s.is_empty()).count()
    }

    /// Keeps the labels of nodes in `keep` and forgets everything else.
    pub fn restrict(&self, keep: &[NodeId]) -> Labels {
        let mut sets = vec![Vec::new(); self.sets.len()];
        for &u in keep {
            sets[u.index()] = self.sets[u.index()].clone();
        }
        Labels {
            catalog: self.catalog.clone(),
            sets,
        }
    }

    /// Number of labeled members per group.
    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.catalog.len()];
        for set in &self.sets {
            for &g in set {
                sizes[g] += 1;
            }
        }
        sizes
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LabelReport {
    pub lines: usize,
    /// Lines naming a node that is not in the graph.
    pub unknown_nodes: usize,
}

/// Reads `node_id<TAB>group_name` lines; repeated node lines add memberships.
///
/// Without a catalog, the catalog is the sorted set of group names in the
/// file. With one, every name must already be in it.
pub fn read_labels<R: BufRead>(
    reader: R,
    source: &Path,
    graph: &SocialGraph,
    catalog: Option<&GroupCatalog>,
) -> Result<(Labels, LabelReport)> {
    let mut report = LabelReport::default();
    let mut raw = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", source.display()), e))?;
        let lineno = lineno + 1;
        report.lines = lineno;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (node, group) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(g), None) if !n.is_empty() && !g.is_empty() => (n, g),
            _ => {
                return Err(Error::Parse {
                    path: source.to_owned(),
                    line: lineno,
                    message: format!("expected `node_id<TAB>group_name`, got {trimmed:?}"),
                })
            }
        };
        match graph.node(node) {
            Some(u) => raw.push((lineno, u, group.to_owned())),
            None => report.unknown_nodes += 1,
        }
    }

    let catalog = match catalog {
        Some(c) => c.clone(),
        None => {
            let names: BTreeSet<&str> = raw.iter().map(|(_, _, g)| g.as_str()).collect();
            GroupCatalog::new(names.into_iter().map(str::to_owned).collect())?
        }
    };
    let mut sets = vec![Vec::new(); graph.node_count()];
    for (lineno, u, group) in raw {
        let g = catalog.get(&group).ok_or_else(|| Error::Parse {
            path: source.to_owned(),
            line: lineno,
            message: format!("unknown group {group:?}"),
        })?;
        sets[u.index()].push(g);
    }
    Ok((Labels::new(catalog, sets)?, report))
}

pub fn load_labels(
    path: &Path,
    graph: &SocialGraph,
    catalog: Option<&GroupCatalog>,
) -> Result<(Labels, LabelReport)> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_labels(BufReader::new(file), path, graph, catalog)
}

/// Writes one line per (node, group) membership in node-index order.
pub fn write_labels<W: Write>(
    graph: &SocialGraph,
    labels: &Labels,
    mut out: W,
) -> std::io::Result<()> {
    for u in graph.nodes() {
        for &g in labels.groups(u) {
            writeln!(out, "{}\t{}", graph.external_id(u), labels.catalog.name(g))?;
        }
    }
    out.flush()
}
