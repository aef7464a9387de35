use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn socialrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socialrank"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = socialrank(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pipeline_is_byte_identical_across_runs_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<_> = [("a", "1"), ("b", "1"), ("c", "4")]
        .iter()
        .map(|(name, threads)| {
            let dir = tmp.path().join(name);
            ok(&[
                "pipeline",
                "--synth",
                "default",
                "--algo",
                "up",
                "--measure",
                "pagerank",
                "--seed",
                "7",
                "--threads",
                threads,
                "--out",
                s(&dir),
            ]);
            dir_contents(&dir)
        })
        .collect();
    assert!(runs[0].contains_key("resolved-config.json"));
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn missing_labels_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    ok(&["synth", "--synth", "default", "--out", s(&data)]);
    let out = socialrank(&[
        "infer",
        "--graph",
        s(&data.join("edges.tsv")),
        "--algo",
        "sp",
        "--out",
        s(&tmp.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "usage");
}

#[test]
fn conflicting_and_bad_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    ok(&["synth", "--synth", "default", "--out", s(&data)]);
    let edges = data.join("edges.tsv");
    let labels = data.join("labels.tsv");
    let out = socialrank(&[
        "group-status",
        "--graph",
        s(&edges),
        "--labels",
        s(&labels),
        "--membership",
        s(&labels),
        "--pr-baseline",
        "--out",
        s(&tmp.path().join("x")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = socialrank(&[
        "infer",
        "--graph",
        s(&tmp.path().join("nope.tsv")),
        "--labels",
        s(&labels),
        "--out",
        s(&tmp.path().join("z")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        socialrank(&["pipeline", "--algo", "xx"]).status.code(),
        Some(2)
    );
    assert_eq!(
        socialrank(&[
            "synth",
            "--synth",
            "nope",
            "--out",
            s(&tmp.path().join("y"))
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn numeric_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("e.tsv");
    let labels = tmp.path().join("l.tsv");
    fs::write(&edges, "a\tb\nb\tc\n").unwrap();
    fs::write(&labels, "a\tx\n").unwrap();
    let out = socialrank(&[
        "homophily",
        "--graph",
        s(&edges),
        "--labels",
        s(&labels),
        "--out",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "numeric");
}

#[test]
fn help_lists_defaults() {
    let out = ok(&["pipeline", "--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for flag in [
        "--damping <DAMPING>",
        "[default: 0.85]",
        "--lambda",
        "--mu",
        "--eta",
        "[default: 0.1]",
        "--prop-tol",
        "[default: 0.000001]",
        "--sp-max-iter",
        "--seed",
        "--threads",
        "--out",
        "[default: sp]",
        "[default: repropagated]",
    ] {
        assert!(text.contains(flag), "missing {flag} in\n{text}");
    }
}

#[test]
fn model_records_config_digest_and_replays() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    ok(&[
        "pipeline",
        "--synth",
        "default",
        "--algo",
        "sp",
        "--out",
        s(&run),
    ]);
    let config = fs::read(run.join("resolved-config.json")).unwrap();
    let model: serde_json::Value =
        serde_json::from_slice(&fs::read(run.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["config_digest"], hex::encode(Sha256::digest(&config)));
    assert_eq!(model["w"].as_array().unwrap().len(), 11);

    let replay = tmp.path().join("replay");
    ok(&[
        "infer",
        "--graph",
        s(&run.join("edges.tsv")),
        "--labels",
        s(&run.join("labels.tsv")),
        "--model",
        s(&run.join("model.json")),
        "--out",
        s(&replay),
    ]);
    let read = |p: &Path| -> BTreeMap<String, Vec<f64>> {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let mut f = l.split(',');
                let id = f.next().unwrap().to_owned();
                (id, f.map(|x| x.parse().unwrap()).collect())
            })
            .collect()
    };
    let a = read(&run.join("membership.csv"));
    let b = read(&replay.join("membership.csv"));
    assert_eq!(a.len(), b.len());
    for (id, row) in &a {
        for (x, y) in row.iter().zip(&b[id]) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn resolved_config_replays_synthesis() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    ok(&["synth", "--synth", "biased", "--seed", "3", "--out", s(&a)]);
    let config: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("resolved-config.json")).unwrap()).unwrap();
    let cfg_path = tmp.path().join("cfg.json");
    fs::write(&cfg_path, config["synth"].to_string()).unwrap();
    let b = tmp.path().join("b");
    ok(&[
        "synth",
        "--synth",
        s(&cfg_path),
        "--seed",
        "3",
        "--out",
        s(&b),
    ]);
    assert_eq!(
        fs::read(a.join("edges.tsv")).unwrap(),
        fs::read(b.join("edges.tsv")).unwrap()
    );
    assert_eq!(
        fs::read(a.join("labels.tsv")).unwrap(),
        fs::read(b.join("labels.tsv")).unwrap()
    );
}

#[test]
fn sp_keeps_up_with_up_on_the_calibrated_instance() {
    let tmp = tempfile::tempdir().unwrap();
    let acc = |algo: &str| {
        let dir = tmp.path().join(algo);
        ok(&[
            "pipeline",
            "--synth",
            "default",
            "--algo",
            algo,
            "--out",
            s(&dir),
        ]);
        let r: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.join("eval_report.json")).unwrap()).unwrap();
        r["accuracy"].as_f64().unwrap()
    };
    let (sp, up) = (acc("sp"), acc("up"));
    assert!(sp >= up - 0.01, "sp {sp} up {up}");
}

#[test]
fn subcommands_chain_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().join("d");
    ok(&["synth", "--synth", "status", "--seed", "2", "--out", s(&d)]);
    let edges = d.join("edges.tsv");
    let labels = d.join("labels.tsv");
    let inf = tmp.path().join("inf");
    ok(&[
        "infer",
        "--graph",
        s(&edges),
        "--labels",
        s(&labels),
        "--algo",
        "up",
        "--out",
        s(&inf),
    ]);
    let gs = tmp.path().join("gs");
    ok(&[
        "group-status",
        "--graph",
        s(&edges),
        "--labels",
        s(&labels),
        "--membership",
        s(&inf.join("membership.csv")),
        "--out",
        s(&gs),
    ]);
    let csv = fs::read_to_string(gs.join("group_status.csv")).unwrap();
    assert!(csv.starts_with("rank,group,pi,support\n1,"));
    assert_eq!(csv.lines().count(), 9);

    let auc = tmp.path().join("auc");
    ok(&[
        "eval",
        "auc",
        "--group-status",
        s(&gs.join("group_status.csv")),
        "--ground-truth",
        s(&d.join("ground_truth.json")),
        "--out",
        s(&auc),
    ]);
    let r: serde_json::Value =
        serde_json::from_slice(&fs::read(auc.join("eval_report.json")).unwrap()).unwrap();
    assert!((0.0..=1.0).contains(&r["auc"].as_f64().unwrap()));
    assert!(auc.join("eval_report_roc.csv").exists());

    let acc = tmp.path().join("acc");
    ok(&[
        "eval",
        "accuracy",
        "--graph",
        s(&edges),
        "--truth",
        s(&d.join("truth_labels.tsv")),
        "--labels",
        s(&labels),
        "--membership",
        s(&inf.join("membership.csv")),
        "--out",
        s(&acc),
    ]);
    let r: serde_json::Value =
        serde_json::from_slice(&fs::read(acc.join("eval_report.json")).unwrap()).unwrap();
    assert!(r["accuracy"].as_f64().unwrap() > r["majority_baseline"].as_f64().unwrap());

    let cv = tmp.path().join("cv");
    ok(&[
        "eval",
        "cv",
        "--graph",
        s(&edges),
        "--labels",
        s(&labels),
        "--algo",
        "up",
        "--folds",
        "5",
        "--out",
        s(&cv),
    ]);
    let r: serde_json::Value =
        serde_json::from_slice(&fs::read(cv.join("eval_report.json")).unwrap()).unwrap();
    assert_eq!(r["fold_results"].as_array().unwrap().len(), 5);

    for (cmd, file) in [
        ("triangles", "triangles.json"),
        ("followback", "followback.json"),
    ] {
        let o = tmp.path().join(cmd);
        ok(&[cmd, "--graph", s(&edges), "--out", s(&o)]);
        assert!(o.join(file).exists());
    }
    let pr = tmp.path().join("pr");
    ok(&["pagerank", "--graph", s(&edges), "--out", s(&pr)]);
    let scores = fs::read_to_string(pr.join("scores.csv")).unwrap();
    let total: f64 = scores
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
}
