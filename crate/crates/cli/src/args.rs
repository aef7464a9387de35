use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use socialrank::centrality::{EigenvectorOptions, Measure, PageRankOptions};
use socialrank::inference::{LpOptions, PropagationOptions, SpConfig};
use socialrank::pipeline::{Algorithm, InferenceSettings, QSource};
use socialrank::synth::BiasMode;

#[derive(Debug, Parser)]
#[command(
    name = "socialrank",
    version,
    about = "Group membership inference and group status ranking on follower graphs"
)]
pub struct Cli {
    /// Worker threads [default: all cores]. Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Artifact directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PageRank scores of every node.
    Pagerank(PagerankCmd),
    /// Any status measure: followers, eigenvector, pagerank, reversed-pagerank.
    Centrality(CentralityCmd),
    /// Infer group memberships from known labels (trains tie strengths for sp).
    Infer(InferCmd),
    /// Group status scores from an inferred membership table or known labels.
    GroupStatus(GroupStatusCmd),
    /// Accuracy, cross validation, ROC/AUC or Spearman evaluation.
    Eval(EvalCmd),
    /// Shared-group rates of reciprocal, one-way and disconnected pairs.
    Homophily(HomophilyCmd),
    /// Transitive versus cyclic triangle census.
    Triangles(GraphArgs),
    /// Mean share of followers that a node follows back.
    Followback(FollowbackCmd),
    /// Generate a synthetic graph with planted groups and status.
    Synth(SynthCmd),
    /// Synthesize or load, infer, score and evaluate in one run.
    Pipeline(PipelineCmd),
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge list, one `follower<TAB>followee` per line.
    #[arg(long)]
    pub graph: PathBuf,

    /// Drop duplicate edges instead of rejecting the file.
    #[arg(long, default_value_t = false)]
    pub dedupe: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PagerankArgs {
    /// PageRank damping factor.
    #[arg(long, default_value_t = 0.85)]
    pub damping: f64,

    /// PageRank stops when the L1 change falls below this times n.
    #[arg(long, default_value_t = 1e-12)]
    pub pr_tol: f64,

    #[arg(long, default_value_t = 200)]
    pub pr_max_iter: usize,
}

impl PagerankArgs {
    pub fn options(&self) -> PageRankOptions {
        PageRankOptions {
            damping: self.damping,
            tol: self.pr_tol,
            max_iter: self.pr_max_iter,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EigenvectorArgs {
    /// Eigenvector iteration stops when the L2 change falls below this.
    #[arg(long, default_value_t = 1e-9)]
    pub eig_tol: f64,

    #[arg(long, default_value_t = 1000)]
    pub eig_max_iter: usize,
}

impl EigenvectorArgs {
    pub fn options(&self) -> EigenvectorOptions {
        EigenvectorOptions {
            tol: self.eig_tol,
            max_iter: self.eig_max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Sp,
    Up,
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Pagerank,
    ReversedPagerank,
    Eigenvector,
    Followers,
}

impl From<MeasureArg> for Measure {
    fn from(m: MeasureArg) -> Measure {
        match m {
            MeasureArg::Pagerank => Measure::PageRank,
            MeasureArg::ReversedPagerank => Measure::ReversedPageRank,
            MeasureArg::Eigenvector => Measure::Eigenvector,
            MeasureArg::Followers => Measure::Followers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QSourceArg {
    /// Re-run propagation with every known node clamped.
    Repropagated,
    /// Keep the table optimized during training.
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BiasArg {
    Uniform,
    PopularityBiased,
}

#[derive(Debug, Clone, Args)]
pub struct InferArgs {
    #[arg(long, value_enum, default_value_t = AlgoArg::Sp)]
    pub algo: AlgoArg,

    /// Membership table reported by sp.
    #[arg(long, value_enum, default_value_t = QSourceArg::Repropagated)]
    pub q_source: QSourceArg,

    /// Weight of the propagation-consistency term.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    /// L2 penalty on the tie-strength weights.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,

    /// Initial training step size.
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,

    /// Training stops once a step improves the loss by less than this fraction.
    #[arg(long, default_value_t = 0.01)]
    pub rel_improvement: f64,

    #[arg(long, default_value_t = 200)]
    pub sp_max_iter: usize,

    /// Share of known nodes clamped as seeds while training.
    #[arg(long, default_value_t = 0.8)]
    pub seed_fraction: f64,

    /// Propagation stops once no entry moves by this much.
    #[arg(long, default_value_t = 1e-6)]
    pub prop_tol: f64,

    #[arg(long, default_value_t = 100)]
    pub prop_max_iter: usize,

    #[arg(long, default_value_t = 100)]
    pub lp_max_iter: usize,
}

impl InferArgs {
    pub fn settings(&self, pr: &PagerankArgs, seed: u64) -> InferenceSettings {
        let propagation = PropagationOptions {
            tol: self.prop_tol,
            max_iter: self.prop_max_iter,
        };
        InferenceSettings {
            algorithm: match self.algo {
                AlgoArg::Sp => Algorithm::Sp,
                AlgoArg::Up => Algorithm::Up,
                AlgoArg::Lp => Algorithm::Lp,
            },
            sp: SpConfig {
                lambda: self.lambda,
                mu: self.mu,
                learning_rate: self.eta,
                rel_improvement: self.rel_improvement,
                max_iter: self.sp_max_iter,
                propagation,
                seed,
                ..SpConfig::default()
            },
            propagation,
            lp: LpOptions {
                max_iter: self.lp_max_iter,
                seed,
            },
            seed_fraction: self.seed_fraction,
            q_source: match self.q_source {
                QSourceArg::Repropagated => QSource::Repropagated,
                QSourceArg::Optimized => QSource::Optimized,
            },
            pagerank: pr.options(),
        }
    }
}

#[derive(Debug, Args)]
pub struct PagerankCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub pagerank: PagerankArgs,

    /// Score the transposed graph instead.
    #[arg(long, default_value_t = false)]
    pub reversed: bool,
}

#[derive(Debug, Args)]
pub struct CentralityCmd {
    #[command(flatten)]
    pub graph: GraphArgs,

    #[arg(long, value_enum, default_value_t = MeasureArg::Pagerank)]
    pub measure: MeasureArg,

    #[command(flatten)]
    pub pagerank: PagerankArgs,
    #[command(flatten)]
    pub eigenvector: EigenvectorArgs,
}

#[derive(Debug, Args)]
pub struct InferCmd {
    #[command(flatten)]
    pub graph: GraphArgs,

    /// Known memberships, `node_id<TAB>group` per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Apply a saved sp model instead of training one.
    #[arg(long)]
    pub model: Option<PathBuf>,

    #[command(flatten)]
    pub infer: InferArgs,
    #[command(flatten)]
    pub pagerank: PagerankArgs,
}

#[derive(Debug, Args)]
pub struct GroupStatusCmd {
    #[command(flatten)]
    pub graph: GraphArgs,

    /// Known memberships; fixes the group list and feeds --pr-baseline.
    #[arg(long)]
    pub labels: Option<PathBuf>,

    /// Membership table written by `infer`.
    #[arg(long)]
    pub membership: Option<PathBuf>,

    /// Average over known members only, ignoring inferred memberships.
    #[arg(long, default_value_t = false)]
    pub pr_baseline: bool,

    /// Ignore membership entries below this strength.
    #[arg(long)]
    pub min_strength: Option<f64>,

    #[arg(long, value_enum, default_value_t = MeasureArg::Pagerank)]
    pub measure: MeasureArg,

    #[command(flatten)]
    pub pagerank: PagerankArgs,
    #[command(flatten)]
    pub eigenvector: EigenvectorArgs,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[command(subcommand)]
    pub kind: EvalKind,
}

#[derive(Debug, Subcommand)]
pub enum EvalKind {
    /// Accuracy of a membership table against true labels.
    Accuracy {
        #[command(flatten)]
        graph: GraphArgs,
        /// True memberships.
        #[arg(long)]
        truth: PathBuf,
        /// Membership table written by `infer`.
        #[arg(long)]
        membership: PathBuf,
        /// Observed labels; when given, only the other nodes are scored.
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Stratified k-fold cross validation of an inference algorithm.
    Cv {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[command(flatten)]
        infer: InferArgs,
        #[command(flatten)]
        pagerank: PagerankArgs,
    },
    /// ROC curve and AUC of group status scores for picking out positive groups.
    Auc {
        /// CSV written by `group-status`.
        #[arg(long)]
        group_status: PathBuf,
        /// Positive group names, comma separated.
        #[arg(long, value_delimiter = ',')]
        positives: Vec<String>,
        /// Ground-truth JSON from `synth`; positives are its top groups.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        /// Number of top planted groups counted as positive [default: a quarter of the groups, at least 1].
        #[arg(long)]
        top: Option<usize>,
    },
    /// Spearman correlation of group status scores with a reference.
    Spearman {
        /// CSV written by `group-status`.
        #[arg(long)]
        group_status: PathBuf,
        /// Ground-truth JSON from `synth`; the reference is its planted status.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        /// CSV `group,value` reference scores.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct HomophilyCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub labels: PathBuf,

    /// Sampled pairs for the disconnected class.
    #[arg(long, default_value_t = 1 << 20)]
    pub samples: u64,
}

#[derive(Debug, Args)]
pub struct FollowbackCmd {
    #[command(flatten)]
    pub graph: GraphArgs,

    /// Restrict to labeled nodes [default: every node].
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Preset name (default, region, status, biased) or a JSON config path.
    #[arg(long)]
    pub synth: Option<String>,

    #[arg(long)]
    pub observed_fraction: Option<f64>,

    #[arg(long, value_enum)]
    pub bias_mode: Option<BiasArg>,

    #[arg(long)]
    pub bias_exponent: Option<f64>,

    #[arg(long)]
    pub popularity_exponent: Option<f64>,
}

impl From<BiasArg> for BiasMode {
    fn from(b: BiasArg) -> BiasMode {
        match b {
            BiasArg::Uniform => BiasMode::Uniform,
            BiasArg::PopularityBiased => BiasMode::PopularityBiased,
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[command(flatten)]
    pub synth: SynthArgs,
}

#[derive(Debug, Args)]
pub struct PipelineCmd {
    #[command(flatten)]
    pub synth: SynthArgs,

    /// Edge list to load instead of synthesizing.
    #[arg(long, conflicts_with = "synth")]
    pub graph: Option<PathBuf>,

    #[arg(long, default_value_t = false)]
    pub dedupe: bool,

    /// Known memberships of the loaded graph.
    #[arg(long, conflicts_with = "synth")]
    pub labels: Option<PathBuf>,

    /// True memberships of the loaded graph, for accuracy.
    #[arg(long, conflicts_with = "synth")]
    pub truth: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = MeasureArg::Pagerank)]
    pub measure: MeasureArg,

    /// Ignore membership entries below this strength in group status.
    #[arg(long)]
    pub min_strength: Option<f64>,

    /// Planted top groups counted as positive for AUC [default: a quarter of the groups, at least 1].
    #[arg(long)]
    pub top: Option<usize>,

    #[command(flatten)]
    pub infer: InferArgs,
    #[command(flatten)]
    pub pagerank: PagerankArgs,
    #[command(flatten)]
    pub eigenvector: EigenvectorArgs,
}

/// Default count of planted top groups.
pub fn default_top(m: usize) -> usize {
    m.div_ceil(4).max(1)
}
