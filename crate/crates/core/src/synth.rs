//! Synthetic follower graphs with planted groups, homophily and status.
//!
//! Every unordered node pair independently becomes a friend pair, a one-way
//! pair or stays unlinked, with probabilities depending only on whether both
//! nodes share a group. A one-way tie points at the more popular endpoint
//! with probability `pop_v / (pop_u + pop_v)`, where popularity is the
//! group's planted status times a Pareto draw. This keeps the shared-group
//! rate of each tie class in closed form while in-degree grows with status.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{save_graph, NodeId, SocialGraph};
use crate::labels::{write_labels, GroupCatalog, Labels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasMode {
    Uniform,
    /// Nodes are observed with weight `popularity^bias_exponent`.
    PopularityBiased,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub m_groups: usize,
    pub group_sizes: Vec<usize>,
    /// Planted status per group; positive and distinct.
    pub planted_status: Vec<f64>,
    pub p_recip_within: f64,
    pub p_recip_cross: f64,
    pub p_oneway_within: f64,
    pub p_oneway_cross: f64,
    /// Pareto shape of the per-node popularity multiplier.
    pub popularity_exponent: f64,
    pub observed_fraction: f64,
    pub bias_mode: BiasMode,
    pub bias_exponent: f64,
    pub rng_seed: u64,
}

/// Shared-group probabilities of the three tie classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomophilyTargets {
    pub recip_p: f64,
    pub oneway_p: f64,
    pub disc_p: f64,
}

/// Region row of the published homophily table.
pub const REGION: HomophilyTargets = HomophilyTargets {
    recip_p: 0.530,
    oneway_p: 0.381,
    disc_p: 0.240,
};

/// `m` statuses `base^(m-1) > ... > 1`, so group 0 ranks highest.
pub fn status_gradient(m: usize, base: f64) -> Vec<f64> {
    (0..m).map(|i| base.powi((m - 1 - i) as i32)).collect()
}

pub fn default_status(m: usize) -> Vec<f64> {
    status_gradient(m, 1.5)
}

/// Sizes differing by at most one, larger groups first.
pub fn uniform_sizes(n: usize, m: usize) -> Vec<usize> {
    (0..m).map(|i| n / m + usize::from(i < n % m)).collect()
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn pair_count(n: usize) -> f64 {
    n as f64 * (n as f64 - 1.0) / 2.0
}

fn within_pairs(sizes: &[usize]) -> f64 {
    sizes.iter().map(|&s| pair_count(s)).sum()
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_groups == 0 {
            return Err(Error::Config("m_groups must be at least 1".into()));
        }
        if self.group_sizes.len() != self.m_groups || self.planted_status.len() != self.m_groups {
            return Err(Error::Config(format!(
                "{} groups need {0} sizes and {0} statuses, got {} and {}",
                self.m_groups,
                self.group_sizes.len(),
                self.planted_status.len()
            )));
        }
        if self.group_sizes.iter().sum::<usize>() != self.n_nodes {
            return Err(Error::Config(format!(
                "group sizes sum to {}, not n_nodes = {}",
                self.group_sizes.iter().sum::<usize>(),
                self.n_nodes
            )));
        }
        if self.group_sizes.contains(&0) {
            return Err(Error::Config("every group needs at least one node".into()));
        }
        if self
            .planted_status
            .iter()
            .any(|s| !s.is_finite() || *s <= 0.0)
        {
            return Err(Error::Config(
                "planted statuses must be positive and finite".into(),
            ));
        }
        let mut sorted = self.planted_status.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("planted statuses must be distinct".into()));
        }
        check_probability("p_recip_within", self.p_recip_within)?;
        check_probability("p_recip_cross", self.p_recip_cross)?;
        check_probability("p_oneway_within", self.p_oneway_within)?;
        check_probability("p_oneway_cross", self.p_oneway_cross)?;
        check_probability("observed_fraction", self.observed_fraction)?;
        if !(self.popularity_exponent.is_finite() && self.popularity_exponent > 0.0) {
            return Err(Error::Config("popularity_exponent must be positive".into()));
        }
        if !(self.bias_exponent.is_finite() && self.bias_exponent >= 0.0) {
            return Err(Error::Config("bias_exponent must be non-negative".into()));
        }
        Ok(())
    }

    /// Groups by descending planted status.
    pub fn planted_ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.m_groups).collect();
        order.sort_by(|&a, &b| {
            self.planted_status[b]
                .total_cmp(&self.planted_status[a])
                .then(a.cmp(&b))
        });
        order
    }

    /// Closed-form shared-group rates of the three tie classes.
    pub fn expected_homophily(&self) -> HomophilyTargets {
        let w = within_pairs(&self.group_sizes);
        let c = pair_count(self.n_nodes) - w;
        let class = |within: f64, cross: f64| {
            let total = within + cross;
            if total > 0.0 {
                within / total
            } else {
                f64::NAN
            }
        };
        let (rw, rc) = (w * self.p_recip_within, c * self.p_recip_cross);
        let (fw, fc) = (
            w * (1.0 - self.p_recip_within),
            c * (1.0 - self.p_recip_cross),
        );
        HomophilyTargets {
            recip_p: class(rw, rc),
            oneway_p: class(fw * self.p_oneway_within, fc * self.p_oneway_cross),
            disc_p: class(
                fw * (1.0 - self.p_oneway_within),
                fc * (1.0 - self.p_oneway_cross),
            ),
        }
    }

    /// Named starting points; see the README for what each is meant to show.
    pub fn preset(name: &str) -> Result<SynthConfig> {
        let shape = |n: usize, m: usize, sizes: SizeSpec| CalibrationShape {
            n_nodes: n,
            m_groups: m,
            mean_friends: 12.0,
            mean_oneway: 12.0,
            sizes,
        };
        let (shape, bias) = match name {
            "default" => (shape(2000, 4, SizeSpec::Uniform), BiasMode::Uniform),
            "region" => (shape(5000, 5, SizeSpec::Solve), BiasMode::Uniform),
            "status" => (shape(2000, 8, SizeSpec::Uniform), BiasMode::Uniform),
            "biased" => (
                shape(2000, 8, SizeSpec::Uniform),
                BiasMode::PopularityBiased,
            ),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?}; expected default, region, status or biased"
                )))
            }
        };
        let cal = calibrate_homophily(&REGION, &shape)?;
        let mut cfg = SynthConfig {
            n_nodes: 0,
            m_groups: 0,
            group_sizes: Vec::new(),
            planted_status: Vec::new(),
            p_recip_within: 0.0,
            p_recip_cross: 0.0,
            p_oneway_within: 0.0,
            p_oneway_cross: 0.0,
            popularity_exponent: 2.5,
            observed_fraction: 0.2,
            bias_mode: bias,
            bias_exponent: 1.0,
            rng_seed: 0,
        };
        cal.apply(&mut cfg);
        if bias == BiasMode::PopularityBiased {
            // Mild status gap between groups, strong preference for observing popular nodes.
            cfg.planted_status = status_gradient(cfg.m_groups, 1.2);
            cfg.bias_exponent = 3.0;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeSpec {
    Uniform,
    Fixed(Vec<usize>),
    /// Sizes chosen to hit the unconnected-pair target.
    Solve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationShape {
    pub n_nodes: usize,
    pub m_groups: usize,
    /// Expected friends per node.
    pub mean_friends: f64,
    /// Expected one-way ties per node, counting both directions.
    pub mean_oneway: f64,
    pub sizes: SizeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub group_sizes: Vec<usize>,
    pub p_recip_within: f64,
    pub p_recip_cross: f64,
    pub p_oneway_within: f64,
    pub p_oneway_cross: f64,
    /// Closed-form rates of the calibrated model.
    pub expected: HomophilyTargets,
    /// `expected - target` per class.
    pub residual: [f64; 3],
}

impl Calibration {
    /// Writes sizes and tie probabilities into `cfg`, resetting the planted
    /// statuses if the group count changed.
    pub fn apply(&self, cfg: &mut SynthConfig) {
        let m = self.group_sizes.len();
        cfg.n_nodes = self.group_sizes.iter().sum();
        if cfg.m_groups != m || cfg.planted_status.len() != m {
            cfg.planted_status = default_status(m);
        }
        cfg.m_groups = m;
        cfg.group_sizes = self.group_sizes.clone();
        cfg.p_recip_within = self.p_recip_within;
        cfg.p_recip_cross = self.p_recip_cross;
        cfg.p_oneway_within = self.p_oneway_within;
        cfg.p_oneway_cross = self.p_oneway_cross;
    }
}

/// Solves the block probabilities so the expected shared-group rates of
/// friend pairs and one-way pairs equal the targets at the requested
/// densities. With [`SizeSpec::Solve`] the group sizes are also chosen so the
/// unconnected rate matches; otherwise it follows from the sizes and is only
/// reported in the residual.
pub fn calibrate_homophily(
    targets: &HomophilyTargets,
    shape: &CalibrationShape,
) -> Result<Calibration> {
    for (name, p) in [
        ("recip_p", targets.recip_p),
        ("oneway_p", targets.oneway_p),
        ("disc_p", targets.disc_p),
    ] {
        check_probability(name, p)?;
    }
    let (n, m) = (shape.n_nodes, shape.m_groups);
    if m == 0 || n < m {
        return Err(Error::Config(format!(
            "cannot split {n} nodes into {m} non-empty groups"
        )));
    }
    let total = pair_count(n);
    let recip = n as f64 * shape.mean_friends / 2.0;
    let oneway = n as f64 * shape.mean_oneway / 2.0;
    if !(recip >= 0.0 && oneway >= 0.0 && recip + oneway <= total) {
        return Err(Error::Config(
            "requested densities exceed the number of node pairs".into(),
        ));
    }

    let sizes = match &shape.sizes {
        SizeSpec::Uniform => uniform_sizes(n, m),
        SizeSpec::Fixed(s) => {
            if s.len() != m || s.iter().sum::<usize>() != n || s.contains(&0) {
                return Err(Error::Config(format!(
                    "fixed sizes {s:?} do not split {n} nodes into {m} groups"
                )));
            }
            s.clone()
        }
        SizeSpec::Solve => {
            let want = targets.disc_p * (total - recip - oneway)
                + targets.recip_p * recip
                + targets.oneway_p * oneway;
            solve_sizes(n, m, want, targets.disc_p)?
        }
    };

    let w = within_pairs(&sizes);
    let c = total - w;
    let bound = |name: &str, p: f64| -> Result<f64> {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(Error::Config(format!(
                "{name} would need probability {p}; lower the density or move the target towards the base rate {:.4}",
                w / total
            )))
        }
    };
    let zero_safe = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    let p_recip_within = bound("p_recip_within", zero_safe(targets.recip_p * recip, w))?;
    let p_recip_cross = bound(
        "p_recip_cross",
        zero_safe((1.0 - targets.recip_p) * recip, c),
    )?;
    let p_oneway_within = bound(
        "p_oneway_within",
        zero_safe(targets.oneway_p * oneway, w * (1.0 - p_recip_within)),
    )?;
    let p_oneway_cross = bound(
        "p_oneway_cross",
        zero_safe((1.0 - targets.oneway_p) * oneway, c * (1.0 - p_recip_cross)),
    )?;

    let probe = SynthConfig {
        n_nodes: n,
        m_groups: m,
        group_sizes: sizes.clone(),
        planted_status: default_status(m),
        p_recip_within,
        p_recip_cross,
        p_oneway_within,
        p_oneway_cross,
        popularity_exponent: 1.0,
        observed_fraction: 1.0,
        bias_mode: BiasMode::Uniform,
        bias_exponent: 0.0,
        rng_seed: 0,
    };
    let expected = probe.expected_homophily();
    Ok(Calibration {
        group_sizes: sizes,
        p_recip_within,
        p_recip_cross,
        p_oneway_within,
        p_oneway_cross,
        expected,
        residual: [
            expected.recip_p - targets.recip_p,
            expected.oneway_p - targets.oneway_p,
            expected.disc_p - targets.disc_p,
        ],
    })
}

/// Integer sizes whose within-group pair count is as close as possible to
/// `want`, searched along geometric profiles `s_i ∝ a^i` and then refined by
/// single-node moves.
fn solve_sizes(n: usize, m: usize, want: f64, disc_target: f64) -> Result<Vec<usize>> {
    let total = pair_count(n);
    let lowest = within_pairs(&uniform_sizes(n, m));
    let mut highest = uniform_sizes(n, m);
    highest.fill(1);
    highest[0] = n - (m - 1);
    let highest_w = within_pairs(&highest);
    if want < lowest - 0.5 {
        return Err(Error::Config(format!(
            "disconnected target {disc_target} is below the base rate {:.4} of {m} equal groups over {n} nodes; use more groups",
            lowest / total
        )));
    }
    if want > highest_w + 0.5 {
        return Err(Error::Config(format!(
            "disconnected target {disc_target} is above the largest base rate {:.4} reachable with {m} groups",
            highest_w / total
        )));
    }
    let profile = |a: f64| -> Vec<f64> {
        let weights: Vec<f64> = (0..m).map(|i| a.powi(-(i as i32))).collect();
        let sum: f64 = weights.iter().sum();
        weights.iter().map(|w| w / sum * n as f64).collect()
    };
    let real_within = |s: &[f64]| s.iter().map(|x| x * (x - 1.0) / 2.0).sum::<f64>();
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while real_within(&profile(hi)) < want && hi < 1e12 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if real_within(&profile(mid)) < want {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Largest-remainder rounding, keeping every group non-empty.
    let real = profile(0.5 * (lo + hi));
    let mut sizes: Vec<usize> = real.iter().map(|x| (x.floor() as usize).max(1)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| (real[b] - real[b].floor()).total_cmp(&(real[a] - real[a].floor())));
    let mut i = 0;
    while sizes.iter().sum::<usize>() < n {
        sizes[order[i % m]] += 1;
        i += 1;
    }
    while sizes.iter().sum::<usize>() > n {
        let j = (0..m).max_by_key(|&j| sizes[j]).unwrap();
        sizes[j] -= 1;
    }
    // Moving one node from group a to group b changes the pair count by
    // s_b - s_a + 1.
    loop {
        let current = within_pairs(&sizes);
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..m {
            for b in 0..m {
                if a == b || sizes[a] <= 1 {
                    continue;
                }
                let after = current + sizes[b] as f64 - sizes[a] as f64 + 1.0;
                let gap = (after - want).abs();
                if gap < (current - want).abs() && best.is_none_or(|(_, _, g)| gap < g) {
                    best = Some((a, b, gap));
                }
            }
        }
        match best {
            Some((a, b, _)) => {
                sizes[a] -= 1;
                sizes[b] += 1;
            }
            None => break,
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sizes)
}

/// A generated graph together with its ground truth.
#[derive(Debug, Clone)]
pub struct SynthInstance {
    pub config: SynthConfig,
    pub graph: SocialGraph,
    pub full_labels: Labels,
    pub observed_labels: Labels,
    /// Sorted indices of the observed nodes.
    pub observed: Vec<NodeId>,
    pub popularity: Vec<f64>,
    pub planted_ranking: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundTruth<'a> {
    pub groups: &'a [String],
    pub planted_status: &'a [f64],
    pub planted_ranking: &'a [usize],
    pub expected_homophily: HomophilyTargets,
    pub nodes: Vec<TruthNode<'a>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruthNode<'a> {
    pub id: &'a str,
    pub group: &'a str,
    pub popularity: f64,
    pub observed: bool,
}

pub fn group_names(m: usize) -> Vec<String> {
    let width = (m.max(2) - 1).to_string().len();
    (0..m).map(|i| format!("g{i:0width$}")).collect()
}

/// Draws one instance. Generation is sequential, so the result depends on the
/// configuration and seed only.
pub fn generate(cfg: &SynthConfig) -> Result<SynthInstance> {
    cfg.validate()?;
    let (n, m) = (cfg.n_nodes, cfg.m_groups);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut group: Vec<usize> = cfg
        .group_sizes
        .iter()
        .enumerate()
        .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
        .collect();
    group.shuffle(&mut rng);

    let pareto =
        Pareto::new(1.0, cfg.popularity_exponent).map_err(|e| Error::Config(e.to_string()))?;
    let popularity: Vec<f64> = group
        .iter()
        .map(|&g| cfg.planted_status[g] * pareto.sample(&mut rng))
        .collect();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let within = group[u] == group[v];
            let (pr, po) = if within {
                (cfg.p_recip_within, cfg.p_oneway_within)
            } else {
                (cfg.p_recip_cross, cfg.p_oneway_cross)
            };
            let x: f64 = rng.random();
            if x < pr {
                edges.push((NodeId::from(u), NodeId::from(v)));
                edges.push((NodeId::from(v), NodeId::from(u)));
            } else if x < pr + (1.0 - pr) * po {
                let toward_v =
                    rng.random::<f64>() * (popularity[u] + popularity[v]) < popularity[v];
                edges.push(if toward_v {
                    (NodeId::from(u), NodeId::from(v))
                } else {
                    (NodeId::from(v), NodeId::from(u))
                });
            }
        }
    }
    let width = (n.max(2) - 1).to_string().len();
    let ids = (0..n).map(|i| format!("u{i:0width$}")).collect();
    let graph = SocialGraph::from_edges(ids, &edges)?;

    let catalog = GroupCatalog::new(group_names(m))?;
    let full_labels = Labels::new(catalog, group.iter().map(|&g| vec![g]).collect())?;

    let k = (cfg.observed_fraction * n as f64).round() as usize;
    let mut observed: Vec<NodeId> = match cfg.bias_mode {
        BiasMode::Uniform => rand::seq::index::sample(&mut rng, n, k)
            .into_iter()
            .map(NodeId::from)
            .collect(),
        BiasMode::PopularityBiased => {
            // Weighted sampling without replacement: keep the k largest ln(U) / w.
            let mut keys: Vec<(f64, usize)> = (0..n)
                .map(|u| {
                    let unit = 1.0 - rng.random::<f64>();
                    (unit.ln() / popularity[u].powf(cfg.bias_exponent), u)
                })
                .collect();
            keys.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            keys.into_iter()
                .take(k)
                .map(|(_, u)| NodeId::from(u))
                .collect()
        }
    };
    observed.sort_unstable();
    let observed_labels = full_labels.restrict(&observed);

    Ok(SynthInstance {
        planted_ranking: cfg.planted_ranking(),
        config: cfg.clone(),
        graph,
        full_labels,
        observed_labels,
        observed,
        popularity,
    })
}

impl SynthInstance {
    /// Indicator of the `k` highest-status groups.
    pub fn top_groups(&self, k: usize) -> Vec<bool> {
        let mut top = vec![false; self.config.m_groups];
        for &g in self.planted_ranking.iter().take(k) {
            top[g] = true;
        }
        top
    }

    /// Nodes whose label is hidden.
    pub fn hidden(&self) -> Vec<NodeId> {
        self.graph
            .nodes()
            .filter(|u| self.observed.binary_search(u).is_err())
            .collect()
    }

    pub fn ground_truth(&self) -> GroundTruth<'_> {
        let catalog = self.full_labels.catalog();
        GroundTruth {
            groups: catalog.names(),
            planted_status: &self.config.planted_status,
            planted_ranking: &self.planted_ranking,
            expected_homophily: self.config.expected_homophily(),
            nodes: self
                .graph
                .nodes()
                .map(|u| TruthNode {
                    id: self.graph.external_id(u),
                    group: catalog.name(self.full_labels.groups(u)[0]),
                    popularity: self.popularity[u.index()],
                    observed: self.observed.binary_search(&u).is_ok(),
                })
                .collect(),
        }
    }

    /// Writes `edges.tsv`, `labels.tsv` (observed), `truth_labels.tsv` and
    /// `ground_truth.json` into `dir`.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        save_graph(&self.graph, &dir.join("edges.tsv"))?;
        for (name, labels) in [
            ("labels.tsv", &self.observed_labels),
            ("truth_labels.tsv", &self.full_labels),
        ] {
            let path = dir.join(name);
            let file = fs::File::create(&path)
                .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
            write_labels(&self.graph, labels, BufWriter::new(file))
                .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        let path = dir.join("ground_truth.json");
        let mut text = serde_json::to_string_pretty(&self.ground_truth())?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::homophily;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            n_nodes: 200,
            m_groups: 2,
            group_sizes: vec![100, 100],
            planted_status: vec![2.0, 1.0],
            p_recip_within: 0.1,
            p_recip_cross: 0.0,
            p_oneway_within: 0.02,
            p_oneway_cross: 0.02,
            popularity_exponent: 2.5,
            observed_fraction: 0.3,
            bias_mode: BiasMode::Uniform,
            bias_exponent: 1.0,
            rng_seed: seed,
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate(&small(1)).unwrap();
        let b = generate(&small(1)).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.observed, b.observed);
        assert_ne!(generate(&small(2)).unwrap().graph, a.graph);
    }

    #[test]
    fn no_cross_friends_means_full_homophily() {
        let inst = generate(&small(3)).unwrap();
        let r = homophily(&inst.graph, &inst.full_labels, 1000, 0).unwrap();
        assert_eq!(r.reciprocal.probability, Some(1.0));
        assert_eq!(inst.observed.len(), 60);
    }

    #[test]
    fn full_observation() {
        let mut cfg = small(4);
        cfg.observed_fraction = 1.0;
        let inst = generate(&cfg).unwrap();
        assert_eq!(inst.observed_labels, inst.full_labels);
        assert!(inst.hidden().is_empty());
    }

    #[test]
    fn validation() {
        let mut cfg = small(0);
        cfg.planted_status = vec![1.0, 1.0];
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = small(0);
        cfg.group_sizes = vec![100, 99];
        assert!(cfg.validate().is_err());
        let mut cfg = small(0);
        cfg.p_oneway_cross = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn uniform_sizes_at_base_rate_need_no_homophily() {
        let shape = CalibrationShape {
            n_nodes: 1000,
            m_groups: 4,
            mean_friends: 10.0,
            mean_oneway: 10.0,
            sizes: SizeSpec::Uniform,
        };
        let base = 4.0 * pair_count(250) / pair_count(1000);
        let t = HomophilyTargets {
            recip_p: base,
            oneway_p: base,
            disc_p: base,
        };
        let cal = calibrate_homophily(&t, &shape).unwrap();
        assert!((cal.p_recip_within - cal.p_recip_cross).abs() < 1e-15);
        assert!(cal.residual.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn two_equal_groups_solve() {
        let shape = CalibrationShape {
            n_nodes: 100,
            m_groups: 2,
            mean_friends: 4.0,
            mean_oneway: 0.0,
            sizes: SizeSpec::Uniform,
        };
        let t = HomophilyTargets {
            recip_p: 0.75,
            oneway_p: 0.5,
            disc_p: 0.5,
        };
        let cal = calibrate_homophily(&t, &shape).unwrap();
        // 0.75 = W p_w / (W p_w + C p_c) with W = 2450, C = 2500.
        let (w, c) = (2450.0, 2500.0);
        assert!(
            (w * cal.p_recip_within / (w * cal.p_recip_within + c * cal.p_recip_cross) - 0.75)
                .abs()
                < 1e-12
        );
        assert!((w * cal.p_recip_within + c * cal.p_recip_cross - 200.0).abs() < 1e-9);
    }

    #[test]
    fn region_needs_unequal_groups_and_rejects_too_few() {
        let mut shape = CalibrationShape {
            n_nodes: 5000,
            m_groups: 5,
            mean_friends: 12.0,
            mean_oneway: 12.0,
            sizes: SizeSpec::Solve,
        };
        let cal = calibrate_homophily(&REGION, &shape).unwrap();
        assert!(
            cal.residual.iter().all(|r| r.abs() < 1e-4),
            "{:?}",
            cal.residual
        );
        assert_eq!(cal.group_sizes.iter().sum::<usize>(), 5000);
        shape.m_groups = 3;
        shape.sizes = SizeSpec::Solve;
        assert!(calibrate_homophily(&REGION, &shape).is_err());
    }

    #[test]
    fn presets_are_valid() {
        for name in ["default", "region", "status", "biased"] {
            SynthConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(SynthConfig::preset("nope").is_err());
    }

    #[test]
    fn group_names_sort_numerically() {
        let names = group_names(12);
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }
}
