//! Directed follower graph with followee, follower and friend adjacency.
//!
//! An edge `(u, v)` means `u` follows `v`. Friends are pairs that follow each
//! other. All three adjacency views are stored as compressed sorted lists so
//! that neighborhood intersections are linear merges.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index. External string labels live in [`SocialGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which neighborhood of a node to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Followees, `N_O(u)`.
    Out,
    /// Followers, `N_I(u)`.
    In,
    /// Friends, `N_O(u) ∩ N_I(u)`.
    Reciprocal,
}

/// Compressed sparse rows of sorted neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
}

impl Adjacency {
    fn from_lists(lists: Vec<Vec<NodeId>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let total = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        for list in lists {
            debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
            targets.extend(list);
            offsets.push(targets.len());
        }
        Adjacency { offsets, targets }
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let i = u.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        let i = u.index();
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Position of `u`'s first entry in the flattened target array.
    #[inline]
    pub fn offset(&self, u: NodeId) -> usize {
        self.offsets[u.index()]
    }

    /// Total number of stored entries.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    #[inline]
    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }
}

/// Immutable directed social graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SocialGraph {
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    out_adj: Adjacency,
    in_adj: Adjacency,
    recip_adj: Adjacency,
}

impl SocialGraph {
    /// Builds a graph from external ids and index pairs.
    ///
    /// Rejects self-loops, duplicate edges, out-of-range indices and
    /// repeated external ids.
    pub fn from_edges(ids: Vec<String>, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let n = ids.len();
        if u32::try_from(n).is_err() {
            return Err(Error::Validation(format!(
                "{n} nodes exceed the u32 index space"
            )));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), NodeId::from(i)).is_some() {
                return Err(Error::Validation(format!("duplicate node id {id:?}")));
            }
        }

        let mut out_lists = vec![Vec::new(); n];
        let mut in_lists = vec![Vec::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x.index() >= n {
                    return Err(Error::OutOfBounds {
                        index: x.index(),
                        len: n,
                    });
                }
            }
            if u == v {
                return Err(Error::Validation(format!(
                    "self-loop on {:?}",
                    ids[u.index()]
                )));
            }
            out_lists[u.index()].push(v);
            in_lists[v.index()].push(u);
        }
        for list in out_lists.iter_mut().chain(in_lists.iter_mut()) {
            list.sort_unstable();
        }
        for (u, list) in out_lists.iter().enumerate() {
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::Validation(format!(
                    "duplicate edge ({:?}, {:?})",
                    ids[u],
                    ids[w[0].index()]
                )));
            }
        }
        let recip_lists = out_lists
            .iter()
            .zip(&in_lists)
            .map(|(o, i)| sorted_intersection(o, i))
            .collect();

        Ok(SocialGraph {
            ids,
            index,
            out_adj: Adjacency::from_lists(out_lists),
            in_adj: Adjacency::from_lists(in_lists),
            recip_adj: Adjacency::from_lists(recip_lists),
        })
    }

    /// Graph with anonymous ids `"0"`, `"1"`, ... Handy for tests and generators.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let ids = (0..n).map(|i| i.to_string()).collect();
        let edges: Vec<_> = edges
            .iter()
            .map(|&(u, v)| (NodeId::from(u), NodeId::from(v)))
            .collect();
        Self::from_edges(ids, &edges)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adj.len()
    }

    /// Number of ordered friend pairs, i.e. twice the number of reciprocal ties.
    pub fn friend_entry_count(&self) -> usize {
        self.recip_adj.len()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = NodeId> + Clone {
        (0..self.ids.len() as u32).map(NodeId)
    }

    /// Bounds-checked neighborhood lookup.
    pub fn neighbors(&self, u: NodeId, kind: Direction) -> Result<&[NodeId]> {
        self.check(u)?;
        Ok(match kind {
            Direction::Out => self.out_adj.neighbors(u),
            Direction::In => self.in_adj.neighbors(u),
            Direction::Reciprocal => self.recip_adj.neighbors(u),
        })
    }

    pub fn check(&self, u: NodeId) -> Result<()> {
        if u.index() < self.node_count() {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                index: u.index(),
                len: self.node_count(),
            })
        }
    }

    #[inline]
    pub fn followees(&self, u: NodeId) -> &[NodeId] {
        self.out_adj.neighbors(u)
    }

    #[inline]
    pub fn followers(&self, u: NodeId) -> &[NodeId] {
        self.in_adj.neighbors(u)
    }

    #[inline]
    pub fn friends(&self, u: NodeId) -> &[NodeId] {
        self.recip_adj.neighbors(u)
    }

    pub fn out_adjacency(&self) -> &Adjacency {
        &self.out_adj
    }

    pub fn in_adjacency(&self) -> &Adjacency {
        &self.in_adj
    }

    pub fn friend_adjacency(&self) -> &Adjacency {
        &self.recip_adj
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj.contains(u, v)
    }

    /// Position of the ordered friend pair `(u, v)` in the flattened friend
    /// adjacency, which is also the row of its edge features.
    pub fn friend_slot(&self, u: NodeId, v: NodeId) -> Option<usize> {
        if u.index() >= self.node_count() {
            return None;
        }
        self.friends(u)
            .binary_search(&v)
            .ok()
            .map(|j| self.recip_adj.offset(u) + j)
    }

    /// All edges in ascending `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.followees(u).iter().map(move |&v| (u, v)))
    }

    pub fn external_id(&self, u: NodeId) -> &str {
        &self.ids[u.index()]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn node(&self, external_id: &str) -> Option<NodeId> {
        self.index.get(external_id).copied()
    }

    /// Same nodes with every edge reversed. Friend lists are unchanged.
    pub fn transpose(&self) -> SocialGraph {
        SocialGraph {
            ids: self.ids.clone(),
            index: self.index.clone(),
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
            recip_adj: self.recip_adj.clone(),
        }
    }
}

/// Merge-intersection of two ascending lists.
pub fn sorted_intersection(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Size of the intersection of two ascending lists.
pub fn intersection_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// What the loader dropped while reading an edge list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Interns external ids in order of first appearance.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    ids: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    seen: HashSet<(NodeId, NodeId)>,
    dedupe: bool,
    report: LoadReport,
}

impl GraphBuilder {
    pub fn new(dedupe: bool) -> Self {
        GraphBuilder {
            dedupe,
            ..Default::default()
        }
    }

    pub fn intern(&mut self, id: &str) -> NodeId {
        if let Some(&n) = self.index.get(id) {
            return n;
        }
        let n = NodeId::from(self.ids.len());
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), n);
        n
    }

    /// Adds `src -> dst`. Self-loops are counted and dropped; a repeated edge
    /// is dropped when deduplicating and rejected otherwise.
    pub fn add_edge(&mut self, src: &str, dst: &str) -> Result<()> {
        let u = self.intern(src);
        let v = self.intern(dst);
        if u == v {
            self.report.self_loops += 1;
            return Ok(());
        }
        if !self.seen.insert((u, v)) {
            if self.dedupe {
                self.report.duplicates += 1;
                return Ok(());
            }
            return Err(Error::Validation(format!(
                "duplicate edge ({src:?}, {dst:?})"
            )));
        }
        self.edges.push((u, v));
        Ok(())
    }

    pub fn build(self) -> Result<(SocialGraph, LoadReport)> {
        let graph = SocialGraph::from_edges(self.ids, &self.edges)?;
        Ok((graph, self.report))
    }
}

/// Reads a `src<TAB>dst` edge list. Blank lines and `#` comments are skipped.
pub fn read_graph<R: BufRead>(
    reader: R,
    source: &Path,
    dedupe: bool,
) -> Result<(SocialGraph, LoadReport)> {
    let mut builder = GraphBuilder::new(dedupe);
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", source.display()), e))?;
        let lineno = lineno + 1;
        builder.report.lines = lineno;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (src, dst) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(d), None) if !s.is_empty() && !d.is_empty() => (s, d),
            _ => {
                return Err(Error::Parse {
                    path: source.to_owned(),
                    line: lineno,
                    message: format!("expected `src<TAB>dst`, got {trimmed:?}"),
                })
            }
        };
        builder.add_edge(src, dst).map_err(|e| match e {
            Error::Validation(message) => Error::Parse {
                path: source.to_owned(),
                line: lineno,
                message,
            },
            other => other,
        })?;
    }
    builder.build()
}

pub fn load_graph(path: &Path, dedupe: bool) -> Result<(SocialGraph, LoadReport)> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_graph(BufReader::new(file), path, dedupe)
}

/// Writes the edge list in ascending `(src, dst)` index order.
pub fn write_edges<W: Write>(g: &SocialGraph, mut out: W) -> std::io::Result<()> {
    for (u, v) in g.edges() {
        writeln!(out, "{}\t{}", g.external_id(u), g.external_id(v))?;
    }
    out.flush()
}

pub fn save_graph(g: &SocialGraph, path: &Path) -> Result<()> {
    let file =
        File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    write_edges(g, BufWriter::new(file))
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}
