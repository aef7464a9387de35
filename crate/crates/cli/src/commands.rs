use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use socialrank::analysis::{follow_back_ratio, homophily, triangle_census};
use socialrank::centrality::{
    eigenvector_centrality, follower_count, pagerank, reversed_pagerank, write_scores_csv, Measure,
    StatusScores,
};
use socialrank::evaluation::{
    accuracy, kfold, majority_baseline, roc_auc, spearman, write_roc_csv, EvalReport, FoldResult,
};
use socialrank::features::extract_features;
use socialrank::graph::load_graph;
use socialrank::group_status::{
    group_status, pr_baseline, write_group_status_csv, GroupStatus, GroupStatusOptions,
};
use socialrank::inference::{infer_sp, read_membership_csv, write_membership_csv, MembershipTable};
use socialrank::labels::load_labels;
use socialrank::pipeline::{infer, Algorithm, InferenceSettings, Inferred, TrainedModel};
use socialrank::synth::{generate, SynthConfig, SynthInstance};
use socialrank::{GroupCatalog, Labels, NodeId, SocialGraph};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::output::{to_json, write_resolved_config, OutDir};

/// Saved SP model: learned weights plus the normalization they were trained under.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub config_digest: String,
    #[serde(flatten)]
    pub model: TrainedModel,
}

#[derive(Debug, Deserialize)]
struct TruthFile {
    groups: Vec<String>,
    planted_status: Vec<f64>,
    planted_ranking: Vec<usize>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    let out = OutDir::create(&cli.out)?;
    let seed = cli.seed;
    match cli.command {
        Command::Pagerank(c) => cmd_pagerank(&out, seed, c),
        Command::Centrality(c) => cmd_centrality(&out, seed, c),
        Command::Infer(c) => cmd_infer(&out, seed, c),
        Command::GroupStatus(c) => cmd_group_status(&out, seed, c),
        Command::Eval(c) => cmd_eval(&out, seed, c.kind),
        Command::Homophily(c) => cmd_homophily(&out, seed, c),
        Command::Triangles(c) => cmd_triangles(&out, seed, c),
        Command::Followback(c) => cmd_followback(&out, seed, c),
        Command::Synth(c) => cmd_synth(&out, seed, c),
        Command::Pipeline(c) => cmd_pipeline(&out, seed, c),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn opt_path(p: &Option<PathBuf>) -> serde_json::Value {
    p.as_deref()
        .map_or(serde_json::Value::Null, |p| json!(path_str(p)))
}

fn read_graph(args: &GraphArgs) -> CliResult<SocialGraph> {
    let (g, report) = load_graph(&args.graph, args.dedupe)?;
    if report.self_loops > 0 || report.duplicates > 0 {
        eprintln!(
            "note: {} dropped {} self-loops and {} duplicate edges",
            args.graph.display(),
            report.self_loops,
            report.duplicates
        );
    }
    Ok(g)
}

fn read_labels(path: &Path, g: &SocialGraph, catalog: Option<&GroupCatalog>) -> CliResult<Labels> {
    let (labels, report) = load_labels(path, g, catalog)?;
    if report.unknown_nodes > 0 {
        eprintln!(
            "note: {} lines of {} name nodes outside the graph",
            report.unknown_nodes,
            path.display()
        );
    }
    Ok(labels)
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> CliResult<&'a Path> {
    p.as_deref()
        .ok_or_else(|| CliError::Usage(format!("{what} is required")))
}

fn scores_for(
    g: &SocialGraph,
    measure: MeasureArg,
    pr: &PagerankArgs,
    eig: &EigenvectorArgs,
) -> CliResult<StatusScores> {
    Ok(match Measure::from(measure) {
        Measure::Followers => follower_count(g),
        Measure::PageRank => pagerank(g, &pr.options())?,
        Measure::ReversedPageRank => reversed_pagerank(g, &pr.options())?,
        Measure::Eigenvector => eigenvector_centrality(g, &eig.options())?,
    })
}

fn write_scores(out: &OutDir, g: &SocialGraph, s: &StatusScores) -> CliResult<()> {
    out.write_with("scores.csv", |w| write_scores_csv(g, s, w))?;
    out.write_json("scores.json", s)?;
    println!(
        "{}: {} nodes, {} iterations, residual {:e}, converged {}",
        s.measure.name(),
        s.len(),
        s.iterations,
        s.residual,
        s.converged
    );
    Ok(())
}

fn cmd_pagerank(out: &OutDir, seed: u64, c: PagerankCmd) -> CliResult<()> {
    write_resolved_config(
        out,
        &json!({
            "command": "pagerank",
            "seed": seed,
            "graph": path_str(&c.graph.graph),
            "dedupe": c.graph.dedupe,
            "reversed": c.reversed,
            "pagerank": c.pagerank.options(),
        }),
    )?;
    let g = read_graph(&c.graph)?;
    let s = if c.reversed {
        reversed_pagerank(&g, &c.pagerank.options())?
    } else {
        pagerank(&g, &c.pagerank.options())?
    };
    write_scores(out, &g, &s)
}

fn cmd_centrality(out: &OutDir, seed: u64, c: CentralityCmd) -> CliResult<()> {
    write_resolved_config(
        out,
        &json!({
            "command": "centrality",
            "seed": seed,
            "graph": path_str(&c.graph.graph),
            "dedupe": c.graph.dedupe,
            "measure": Measure::from(c.measure),
            "pagerank": c.pagerank.options(),
            "eigenvector": c.eigenvector.options(),
        }),
    )?;
    let g = read_graph(&c.graph)?;
    let s = scores_for(&g, c.measure, &c.pagerank, &c.eigenvector)?;
    write_scores(out, &g, &s)
}

/// Writes membership.csv, predictions.tsv, inference.json and, for sp, model.json.
fn write_inferred(
    out: &OutDir,
    g: &SocialGraph,
    known: &Labels,
    r: &Inferred,
    digest: &str,
) -> CliResult<()> {
    let catalog = known.catalog();
    out.write_with("membership.csv", |w| {
        write_membership_csv(g, catalog, &r.table, w)
    })?;
    out.write_with("predictions.tsv", |w| {
        for u in g.nodes() {
            writeln!(
                w,
                "{}\t{}",
                g.external_id(u),
                catalog.name(r.predictions[u.index()])
            )?;
        }
        Ok(())
    })?;
    out.write_json(
        "inference.json",
        &json!({
            "iterations": r.iterations,
            "converged": r.converged,
            "known_nodes": known.labeled_count(),
            "training": r.model.as_ref().map(|m| json!({
                "iterations": m.iterations,
                "stop": m.stop,
                "halvings": m.halvings,
                "seeds": m.seeds,
                "targets": m.targets,
                "final_loss": m.training_log.last(),
            })),
        }),
    )?;
    if let Some(model) = &r.model {
        let file = ModelFile {
            config_digest: digest.to_owned(),
            model: model.clone(),
        };
        out.write_json("model.json", &file)?;
    }
    Ok(())
}

fn run_saved_model(
    g: &SocialGraph,
    known: &Labels,
    path: &Path,
    settings: &InferenceSettings,
) -> CliResult<Inferred> {
    let text = fs::read_to_string(path).map_err(|e| socialrank::Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })?;
    let file: ModelFile = serde_json::from_str(&text).map_err(socialrank::Error::from)?;
    let pr = pagerank(g, &settings.pagerank)?;
    let rpr = reversed_pagerank(g, &settings.pagerank)?;
    let feat = file
        .model
        .norm_params
        .apply(&extract_features(g, &pr, &rpr)?)?;
    let q0 = MembershipTable::from_labels(known);
    let p = infer_sp(g, &feat, &file.model.w, &q0, &settings.propagation)?;
    Ok(Inferred {
        predictions: p.table.predictions(),
        table: p.table,
        model: None,
        iterations: p.iterations,
        converged: p.converged,
    })
}

fn cmd_infer(out: &OutDir, seed: u64, c: InferCmd) -> CliResult<()> {
    let labels_path = require(&c.labels, "--labels")?;
    if c.model.is_some() && c.infer.algo != AlgoArg::Sp {
        return Err(CliError::Usage("--model only applies to --algo sp".into()));
    }
    let settings = c.infer.settings(&c.pagerank, seed);
    let digest = write_resolved_config(
        out,
        &json!({
            "command": "infer",
            "seed": seed,
            "graph": path_str(&c.graph.graph),
            "dedupe": c.graph.dedupe,
            "labels": path_str(labels_path),
            "model": opt_path(&c.model),
            "settings": settings,
        }),
    )?;
    let g = read_graph(&c.graph)?;
    let known = read_labels(labels_path, &g, None)?;
    let r = match &c.model {
        Some(path) => run_saved_model(&g, &known, path, &settings)?,
        None => infer(&g, &known, &settings)?,
    };
    write_inferred(out, &g, &known, &r, &digest)?;
    println!(
        "{}: {} nodes, {} known, {} iterations, converged {}",
        algorithm_name(settings.algorithm),
        g.node_count(),
        known.labeled_count(),
        r.iterations,
        r.converged
    );
    Ok(())
}

fn print_status(catalog: &GroupCatalog, s: &GroupStatus) {
    println!(
        "{:>4}  {:<20} {:>14} {:>12}",
        "rank", "group", "pi", "support"
    );
    for (rank, &g) in s.ranking.iter().enumerate() {
        println!(
            "{:>4}  {:<20} {:>14.6e} {:>12.3}",
            rank + 1,
            catalog.name(g),
            s.pi[g].unwrap(),
            s.support[g]
        );
    }
    for (g, pi) in s.pi.iter().enumerate() {
        if pi.is_none() {
            println!(
                "{:>4}  {:<20} {:>14} {:>12.3}",
                "-",
                catalog.name(g),
                "undefined",
                s.support[g]
            );
        }
    }
}

fn write_status(
    out: &OutDir,
    name: &str,
    catalog: &GroupCatalog,
    s: &GroupStatus,
) -> CliResult<()> {
    out.write_with(&format!("{name}.csv"), |w| {
        write_group_status_csv(catalog, s, w)
    })?;
    out.write_json(&format!("{name}.json"), s)
}

fn cmd_group_status(out: &OutDir, seed: u64, c: GroupStatusCmd) -> CliResult<()> {
    let labels_path = require(&c.labels, "--labels")?;
    match (&c.membership, c.pr_baseline) {
        (Some(_), true) => {
            return Err(CliError::Usage(
                "--membership and --pr-baseline are exclusive".into(),
            ))
        }
        (None, false) => return Err(CliError::Usage("give --membership or --pr-baseline".into())),
        _ => {}
    }
    if c.pr_baseline && c.min_strength.is_some() {
        return Err(CliError::Usage(
            "--min-strength has no effect with --pr-baseline".into(),
        ));
    }
    write_resolved_config(
        out,
        &json!({
            "command": "group-status",
            "seed": seed,
            "graph": path_str(&c.graph.graph),
            "dedupe": c.graph.dedupe,
            "labels": path_str(labels_path),
            "membership": opt_path(&c.membership),
            "pr_baseline": c.pr_baseline,
            "min_strength": c.min_strength,
            "measure": Measure::from(c.measure),
            "pagerank": c.pagerank.options(),
            "eigenvector": c.eigenvector.options(),
        }),
    )?;
    let g = read_graph(&c.graph)?;
    let known = read_labels(labels_path, &g, None)?;
    let p = scores_for(&g, c.measure, &c.pagerank, &c.eigenvector)?;
    let status = match &c.membership {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| socialrank::Error::Io {
                context: format!("opening {}", path.display()),
                source: e,
            })?;
            let q = read_membership_csv(BufReader::new(file), path, &g, known.catalog())?;
            let opts = GroupStatusOptions {
                min_strength: c.min_strength,
                ..Default::default()
            };
            group_status(&q, &p, &opts)?
        }
        None => pr_baseline(&known, &p)?,
    };
    write_status(out, "group_status", known.catalog(), &status)?;
    print_status(known.catalog(), &status);
    Ok(())
}

/// Reads `rank,group,pi,support` rows into group name -> score.
fn read_group_status_csv(path: &Path) -> CliResult<BTreeMap<String, Option<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| socialrank::Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })?;
    let parse_err = |line: usize, message: String| socialrank::Error::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines();
    if lines.next() != Some("rank,group,pi,support") {
        return Err(parse_err(1, "expected header `rank,group,pi,support`".into()).into());
    }
    let mut scores = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(
                parse_err(i + 2, format!("expected 4 fields, got {}", fields.len())).into(),
            );
        }
        let pi = match fields[2] {
            "" => None,
            v => Some(
                v.parse()
                    .map_err(|_| parse_err(i + 2, format!("bad score {v:?}")))?,
            ),
        };
        scores.insert(fields[1].to_owned(), pi);
    }
    Ok(scores)
}

fn read_truth(path: &Path) -> CliResult<TruthFile> {
    let text = fs::read_to_string(path).map_err(|e| socialrank::Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })?;
    Ok(serde_json::from_str(&text).map_err(socialrank::Error::from)?)
}

fn read_reference_csv(path: &Path) -> CliResult<BTreeMap<String, f64>> {
    let file = fs::File::open(path).map_err(|e| socialrank::Error::Io {
        context: format!("opening {}", path.display()),
        source: e,
    })?;
    let mut map = BTreeMap::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| socialrank::Error::Io {
            context: format!("reading {}", path.display()),
            source: e,
        })?;
        let bad = || socialrank::Error::Parse {
            path: path.to_owned(),
            line: i + 1,
            message: "expected `group,value`".into(),
        };
        let (g, v) = line.split_once(',').ok_or_else(bad)?;
        match v.trim().parse::<f64>() {
            Ok(x) => {
                map.insert(g.to_owned(), x);
            }
            Err(_) if i == 0 => {}
            Err(_) => return Err(bad().into()),
        }
    }
    Ok(map)
}

fn top_names(truth: &TruthFile, k: usize) -> Vec<String> {
    truth
        .planted_ranking
        .iter()
        .take(k)
        .map(|&g| truth.groups[g].clone())
        .collect()
}

/// AUC of `scores` for telling `positives` apart from the other groups.
fn auc_report(
    report: &mut EvalReport,
    groups: &[String],
    scores: &[Option<f64>],
    positives: &[String],
) -> CliResult<()> {
    for p in positives {
        if !groups.contains(p) {
            return Err(CliError::Usage(format!(
                "positive group {p:?} has no status score"
            )));
        }
    }
    let pos: Vec<bool> = groups.iter().map(|g| positives.contains(g)).collect();
    let roc = roc_auc(scores, &pos)?;
    if roc.excluded > 0 {
        eprintln!(
            "note: {} groups without a defined score left out of the ROC",
            roc.excluded
        );
    }
    report.auc = Some(roc.auc);
    report.roc_points = Some(roc.points);
    Ok(())
}

fn cmd_eval(out: &OutDir, seed: u64, kind: EvalKind) -> CliResult<()> {
    let mut report = EvalReport::default();
    match kind {
        EvalKind::Accuracy {
            graph,
            truth,
            membership,
            labels,
        } => {
            write_resolved_config(
                out,
                &json!({
                    "command": "eval accuracy",
                    "seed": seed,
                    "graph": path_str(&graph.graph),
                    "dedupe": graph.dedupe,
                    "truth": path_str(&truth),
                    "membership": path_str(&membership),
                    "labels": opt_path(&labels),
                }),
            )?;
            let g = read_graph(&graph)?;
            let truth_labels = read_labels(&truth, &g, None)?;
            let file = fs::File::open(&membership).map_err(|e| socialrank::Error::Io {
                context: format!("opening {}", membership.display()),
                source: e,
            })?;
            let q = read_membership_csv(
                BufReader::new(file),
                &membership,
                &g,
                truth_labels.catalog(),
            )?;
            let (eval_set, train) = match &labels {
                Some(path) => {
                    let observed = read_labels(path, &g, Some(truth_labels.catalog()))?;
                    let hidden = truth_labels
                        .labeled_nodes()
                        .into_iter()
                        .filter(|&u| !observed.is_labeled(u))
                        .collect();
                    (hidden, observed.labeled_nodes())
                }
                None => (truth_labels.labeled_nodes(), truth_labels.labeled_nodes()),
            };
            let acc = accuracy(&q.predictions(), &truth_labels, &eval_set)?;
            report.accuracy = Some(acc.accuracy);
            report.balanced_accuracy = Some(acc.balanced);
            report.per_group_accuracy = Some(acc.per_group);
            report.majority_baseline = Some(majority_baseline(&truth_labels, &train, &eval_set)?);
        }
        EvalKind::Cv {
            graph,
            labels,
            folds,
            infer: infer_args,
            pagerank: pr,
        } => {
            let settings = infer_args.settings(&pr, seed);
            write_resolved_config(
                out,
                &json!({
                    "command": "eval cv",
                    "seed": seed,
                    "graph": path_str(&graph.graph),
                    "dedupe": graph.dedupe,
                    "labels": path_str(&labels),
                    "folds": folds,
                    "settings": settings,
                }),
            )?;
            let g = read_graph(&graph)?;
            let known = read_labels(&labels, &g, None)?;
            let split = kfold(&known, &known.labeled_nodes(), folds, seed)?;
            if !split.unstratified_groups.is_empty() {
                eprintln!(
                    "note: {} groups have fewer than {folds} members and were dealt unstratified",
                    split.unstratified_groups.len()
                );
            }
            let mut majority = 0.0;
            for (i, fold) in split.folds.iter().enumerate() {
                let r = infer(&g, &known.restrict(&fold.train), &settings)?;
                let acc = accuracy(&r.predictions, &known, &fold.test)?;
                majority += majority_baseline(&known, &fold.train, &fold.test)?;
                report.fold_results.push(FoldResult {
                    fold: i,
                    accuracy: acc.accuracy,
                    balanced: acc.balanced,
                });
            }
            report.majority_baseline = Some(majority / split.folds.len() as f64);
            report.summarize_folds();
        }
        EvalKind::Auc {
            group_status,
            positives,
            ground_truth,
            top,
        } => {
            write_resolved_config(
                out,
                &json!({
                    "command": "eval auc",
                    "seed": seed,
                    "group_status": path_str(&group_status),
                    "positives": positives,
                    "ground_truth": opt_path(&ground_truth),
                    "top": top,
                }),
            )?;
            let positives = match (&ground_truth, positives.is_empty()) {
                (Some(_), false) => {
                    return Err(CliError::Usage(
                        "--positives and --ground-truth are exclusive".into(),
                    ))
                }
                (None, true) => {
                    return Err(CliError::Usage("give --positives or --ground-truth".into()))
                }
                (Some(path), true) => {
                    let truth = read_truth(path)?;
                    let k = top.unwrap_or_else(|| default_top(truth.groups.len()));
                    top_names(&truth, k)
                }
                (None, false) => positives,
            };
            let scores = read_group_status_csv(&group_status)?;
            let groups: Vec<String> = scores.keys().cloned().collect();
            let values: Vec<Option<f64>> = scores.values().copied().collect();
            auc_report(&mut report, &groups, &values, &positives)?;
        }
        EvalKind::Spearman {
            group_status,
            ground_truth,
            reference,
        } => {
            write_resolved_config(
                out,
                &json!({
                    "command": "eval spearman",
                    "seed": seed,
                    "group_status": path_str(&group_status),
                    "ground_truth": opt_path(&ground_truth),
                    "reference": opt_path(&reference),
                }),
            )?;
            let reference = match (&ground_truth, &reference) {
                (Some(path), None) => {
                    let truth = read_truth(path)?;
                    truth.groups.into_iter().zip(truth.planted_status).collect()
                }
                (None, Some(path)) => read_reference_csv(path)?,
                _ => {
                    return Err(CliError::Usage(
                        "give exactly one of --ground-truth and --reference".into(),
                    ))
                }
            };
            let scores = read_group_status_csv(&group_status)?;
            let (x, y): (Vec<Option<f64>>, Vec<Option<f64>>) = scores
                .iter()
                .map(|(g, pi)| (*pi, reference.get(g).copied()))
                .unzip();
            report.spearman = spearman(&x, &y)?;
        }
    }
    finish_report(out, "eval_report", &report)
}

fn finish_report(out: &OutDir, name: &str, report: &EvalReport) -> CliResult<()> {
    out.write_json(&format!("{name}.json"), report)?;
    if let Some(points) = &report.roc_points {
        out.write_with(&format!("{name}_roc.csv"), |w| write_roc_csv(points, w))?;
    }
    let show = |label: &str, v: Option<f64>| {
        if let Some(v) = v {
            println!("{label:<18} {v:.4}");
        }
    };
    show("accuracy", report.accuracy);
    show("balanced accuracy", report.balanced_accuracy);
    show("majority baseline", report.majority_baseline);
    show("auc", report.auc);
    show("spearman", report.spearman);
    Ok(())
}

fn cmd_homophily(out: &OutDir, seed: u64, c: HomophilyCmd) -> CliResult<()> {
    write_resolved_config(
        out,
        &json!({
            "command": "homophily",
            "seed": seed,
            "graph": path_str(&c.graph.graph),
            "dedupe": c.graph.dedupe,
            "labels": path_str(&c.labels),
            "samples": c.samples,
        }),
    )?;
    let g = read_graph(&c.graph)?;
    let labels = read_labels(&c.labels, &g, None)?;
    let h = homophily(&g, &labels, c.samples, seed)?;
    out.write_json("homophily.json", &h)?;
    println!(
        "{:<14} {:>10} {:>14} {:>10}",
        "class", "p(shared)", "pairs", "se"
    );
    for (name, e) in [
        ("reciprocal", &h.reciprocal),
        ("one-way", &h.one_way),
        ("disconnected", &h.disconnected),
    ] {
        let fmt = |v: Option<f64>| v.map_or("-".to_owned(), |v| format!("{v:.4}"));
        println!(
            "{:<14} {:>10} {:>14} {:>10}",
            name,
            fmt(e.probability),
            e.pairs,
            fmt(e.standard_error)
        );
    }
    Ok(())
}

fn cmd_triangles(out: &OutDir, seed: u64, c: GraphArgs) -> CliResult<()> {
    write_resolved_config(
        out,
        &json!({
            "command": "triangles",
            "seed": seed,
            "graph": path_str(&c.graph),
            "dedupe": c.dedupe,
        }),
    )?;
    let g = read_graph(&c)?;
    let t = triangle_census(&g);
    out.write_json(
        "triangles.json",
        &json!({ "census": t, "ratio": t.ratio() }),
    )?;
    println!("transitive (type I)  {}", t.type_i);
    println!("cyclic (type II)     {}", t.type_ii);
    println!("other                {}", t.other);
    match t.ratio() {
        Some(r) => println!("ratio                {r:.3}"),
        None => println!("ratio                undefined"),
    }
    Ok(())
}

fn cmd_followback(out: &OutDir, seed: u64, c: FollowbackCmd) -> CliResult<()> {
    write_resolved_config(
        out,
        &json!({
            "command": "followback",
            "seed": seed,
            "graph": path_str(&c.graph.graph),
            "dedupe": c.graph.dedupe,
            "labels": opt_path(&c.labels),
        }),
    )?;
    let g = read_graph(&c.graph)?;
    let nodes: Vec<NodeId> = match &c.labels {
        Some(path) => read_labels(path, &g, None)?.labeled_nodes(),
        None => g.nodes().collect(),
    };
    let fb = follow_back_ratio(&g, &nodes)?;
    out.write_json("followback.json", &fb)?;
    match fb.ratio {
        Some(r) => println!(
            "follow-back ratio {r:.4} over {} nodes ({} without followers)",
            fb.included, fb.excluded
        ),
        None => println!(
            "follow-back ratio undefined: none of the {} nodes has followers",
            fb.excluded
        ),
    }
    Ok(())
}

fn resolve_synth(args: &SynthArgs, seed: u64) -> CliResult<SynthConfig> {
    let source = args
        .synth
        .as_deref()
        .ok_or_else(|| CliError::Usage("--synth is required".into()))?;
    let path = Path::new(source);
    let mut cfg = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| socialrank::Error::Io {
            context: format!("reading {}", path.display()),
            source: e,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| socialrank::Error::Config(format!("{}: {e}", path.display())))?
    } else if source.ends_with(".json") {
        return Err(CliError::Usage(format!(
            "synth config {source} does not exist"
        )));
    } else {
        SynthConfig::preset(source)?
    };
    if let Some(x) = args.observed_fraction {
        cfg.observed_fraction = x;
    }
    if let Some(x) = args.bias_mode {
        cfg.bias_mode = x.into();
    }
    if let Some(x) = args.bias_exponent {
        cfg.bias_exponent = x;
    }
    if let Some(x) = args.popularity_exponent {
        cfg.popularity_exponent = x;
    }
    cfg.rng_seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_synth(out: &OutDir, seed: u64, c: SynthCmd) -> CliResult<()> {
    let cfg = resolve_synth(&c.synth, seed)?;
    write_resolved_config(
        out,
        &json!({ "command": "synth", "seed": seed, "synth": cfg }),
    )?;
    let inst = generate(&cfg)?;
    inst.write_files(out.path())?;
    println!(
        "{} nodes, {} edges, {} groups, {} observed labels",
        inst.graph.node_count(),
        inst.graph.edge_count(),
        cfg.m_groups,
        inst.observed.len()
    );
    Ok(())
}

fn cmd_pipeline(out: &OutDir, seed: u64, c: PipelineCmd) -> CliResult<()> {
    let settings = c.infer.settings(&c.pagerank, seed);
    let synth = match (&c.synth.synth, &c.graph) {
        (Some(_), _) => Some(resolve_synth(&c.synth, seed)?),
        (None, Some(_)) => {
            require(&c.labels, "--labels")?;
            None
        }
        (None, None) => {
            return Err(CliError::Usage(
                "give --synth or --graph with --labels".into(),
            ))
        }
    };
    let digest = write_resolved_config(
        out,
        &json!({
            "command": "pipeline",
            "seed": seed,
            "synth": synth,
            "graph": opt_path(&c.graph),
            "dedupe": c.dedupe,
            "labels": opt_path(&c.labels),
            "truth": opt_path(&c.truth),
            "measure": Measure::from(c.measure),
            "min_strength": c.min_strength,
            "top": c.top,
            "settings": settings,
            "eigenvector": c.eigenvector.options(),
        }),
    )?;

    let (g, known, truth, inst): (SocialGraph, Labels, Option<Labels>, Option<SynthInstance>) =
        match synth {
            Some(cfg) => {
                let inst = generate(&cfg)?;
                inst.write_files(out.path())?;
                (
                    inst.graph.clone(),
                    inst.observed_labels.clone(),
                    Some(inst.full_labels.clone()),
                    Some(inst),
                )
            }
            None => {
                let graph_args = GraphArgs {
                    graph: c.graph.clone().expect("checked above"),
                    dedupe: c.dedupe,
                };
                let g = read_graph(&graph_args)?;
                let known = read_labels(require(&c.labels, "--labels")?, &g, None)?;
                let truth = match &c.truth {
                    Some(path) => Some(read_labels(path, &g, Some(known.catalog()))?),
                    None => None,
                };
                (g, known, truth, None)
            }
        };

    let r = infer(&g, &known, &settings)?;
    write_inferred(out, &g, &known, &r, &digest)?;
    let p = scores_for(&g, c.measure, &c.pagerank, &c.eigenvector)?;
    out.write_with("scores.csv", |w| write_scores_csv(&g, &p, w))?;
    out.write_json("scores.json", &p)?;
    let opts = GroupStatusOptions {
        min_strength: c.min_strength,
        ..Default::default()
    };
    let status = group_status(&r.table, &p, &opts)?;
    let baseline = pr_baseline(&known, &p)?;
    let catalog = known.catalog();
    write_status(out, "group_status", catalog, &status)?;
    write_status(out, "pr_baseline", catalog, &baseline)?;

    let mut report = EvalReport::default();
    let mut base_report = EvalReport::default();
    if let Some(truth) = &truth {
        let hidden: Vec<NodeId> = truth
            .labeled_nodes()
            .into_iter()
            .filter(|&u| !known.is_labeled(u))
            .collect();
        if !hidden.is_empty() {
            let acc = accuracy(&r.predictions, truth, &hidden)?;
            report.accuracy = Some(acc.accuracy);
            report.balanced_accuracy = Some(acc.balanced);
            report.per_group_accuracy = Some(acc.per_group);
            report.majority_baseline =
                Some(majority_baseline(truth, &known.labeled_nodes(), &hidden)?);
        }
    }
    if let Some(inst) = &inst {
        let names = catalog.names();
        let k = c.top.unwrap_or_else(|| default_top(names.len()));
        let positives: Vec<String> = inst
            .planted_ranking
            .iter()
            .take(k)
            .map(|&g| names[g].clone())
            .collect();
        let planted: Vec<Option<f64>> = inst
            .config
            .planted_status
            .iter()
            .map(|&s| Some(s))
            .collect();
        for (rep, s) in [(&mut report, &status), (&mut base_report, &baseline)] {
            if k < names.len() {
                auc_report(rep, names, &s.pi, &positives)?;
            }
            rep.spearman = spearman(&s.pi, &planted).unwrap_or(None);
        }
    }
    out.write_json("eval_report.json", &report)?;
    if let Some(points) = &report.roc_points {
        out.write_with("roc.csv", |w| write_roc_csv(points, w))?;
    }
    out.write_json("pr_baseline_report.json", &base_report)?;
    if let Some(points) = &base_report.roc_points {
        out.write_with("pr_baseline_roc.csv", |w| write_roc_csv(points, w))?;
    }

    print_status(catalog, &status);
    println!();
    println!(
        "{}",
        to_json(&json!({ "inferred": summary(&report), "pr_baseline": summary(&base_report) }))?
            .trim_end()
    );
    Ok(())
}

fn summary(r: &EvalReport) -> serde_json::Value {
    json!({
        "accuracy": r.accuracy,
        "balanced_accuracy": r.balanced_accuracy,
        "majority_baseline": r.majority_baseline,
        "auc": r.auc,
        "spearman": r.spearman,
    })
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Sp => "sp",
        Algorithm::Up => "up",
        Algorithm::Lp => "lp",
    }
}
