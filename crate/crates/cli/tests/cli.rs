use std::path::PathBuf;

use topaz_cli::{run_command, ResultDocument};
use topaz_core::syntax::load_model;

fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn model(name: &str) -> String {
    corpus().join(format!("{name}.pta")).display().to_string()
}

fn run(args: &[&str]) -> (i32, String) {
    let out = run_command(std::iter::once("topaz").chain(args.iter().copied()));
    (out.code, out.stdout + &out.stderr)
}

fn json(args: &[&str]) -> (i32, ResultDocument) {
    let mut argv = args.to_vec();
    argv.push("--json");
    let (code, text) = run(&argv);
    let doc = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{args:?}: {e}\n{text}"));
    (code, doc)
}

/// Command lines for every bench directive of the corpus.
fn bundled_runs(budget: Option<usize>) -> Vec<Vec<String>> {
    let mut files: Vec<_> = std::fs::read_dir(corpus()).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut runs = Vec::new();
    for path in files {
        let (file, _) = load_model(&std::fs::read_to_string(&path).unwrap()).unwrap();
        for b in &file.benches {
            let mut argv = vec![b.command.clone(), "--model".into(), path.display().to_string()];
            if !b.valuation.is_empty() {
                let vals: Vec<String> = b.valuation.iter().map(|(n, v)| format!("{n}={v}")).collect();
                argv.extend(["--pval".into(), vals.join(",")]);
            }
            if let Some(n) = budget.or(b.budget) {
                argv.extend(["--budget".into(), n.to_string()]);
            }
            runs.push(argv);
        }
    }
    runs
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

#[test]
fn json_documents_round_trip() {
    for argv in bundled_runs(None) {
        let (_, doc) = json(&strs(&argv));
        let text = serde_json::to_string(&doc).unwrap();
        let back: ResultDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc, "{argv:?}");
    }
}

#[test]
fn inconclusive_runs_exit_with_two() {
    let mut inconclusive = 0;
    for argv in bundled_runs(Some(10)) {
        let (code, doc) = json(&strs(&argv));
        assert_eq!(code == 2, doc.verdict == "Inconclusive", "{argv:?}: {}", doc.verdict);
        assert_ne!(code, 1, "{argv:?}");
        if !doc.complete {
            assert!(doc.verdict == "Inconclusive" || doc.verdict == "NonEmpty", "{argv:?}");
        }
        inconclusive += usize::from(code == 2);
    }
    assert!(inconclusive > 0);
}

fn without_times(mut d: ResultDocument) -> ResultDocument {
    d.wall_time = 0.0;
    for r in d.rows.iter_mut().flatten() {
        r.time = 0.0;
    }
    d
}

#[test]
fn runs_are_deterministic() {
    let mut runs = bundled_runs(None);
    runs.push(vec!["bench".into(), corpus().display().to_string()]);
    for argv in runs {
        let (c1, d1) = json(&strs(&argv));
        let (c2, d2) = json(&strs(&argv));
        assert_eq!((c1, without_times(d1)), (c2, without_times(d2)), "{argv:?}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["durations"],
        vec!["durations", "--model"],
        vec!["durations", "--model", "x.pta", "--budget", "0"],
        vec!["durations", "--model", "x.pta", "--budget", "many"],
        vec!["oracle-sample", "--model", "x.pta"],
    ] {
        let (code, _) = run(&args);
        assert_eq!(code, 1, "{args:?}");
    }
    let fig1 = model("fig1");
    for args in [
        vec!["durations", "--model", "missing.pta"],
        vec!["durations", "--model", &fig1, "--pval", "p1"],
        vec!["durations", "--model", &fig1, "--final", "nowhere"],
        vec!["durations", "--model", &fig1, "--private", "l2,nowhere"],
        vec!["lu-empty", "--model", &model("fig7")],
    ] {
        let (code, text) = run(&args);
        assert_eq!(code, 1, "{args:?}");
        assert!(text.starts_with("error:"), "{text}");
    }
    let (code, text) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(text.contains("durations"));
}

#[test]
fn unknown_identifier_is_reported_with_position() {
    let dir = std::env::temp_dir().join(format!("topaz-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.pta");
    std::fs::write(&path, "clocks x;\nautomaton a {\n  init location l { when y <= 1 goto f; }\n  final location f;\n}\n").unwrap();
    let (code, text) = run(&["durations", "--model", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(text.contains("`y`") || text.contains(" y"), "{text}");
    assert!(text.contains(":3:"), "{text}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn bench_on_an_empty_directory() {
    let dir = std::env::temp_dir().join(format!("topaz-empty-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (code, doc) = json(&["bench", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(doc.rows, Some(vec![]));
    let (code, text) = run(&["bench", dir.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(text.starts_with("query: bench\n"));
    assert!(text.contains("model  query  verdict  states  time\n"));
    std::fs::remove_dir_all(dir).unwrap();

    let (code, _) = run(&["bench", "/nonexistent/corpus"]);
    assert_eq!(code, 1);
}

#[test]
fn bench_over_the_corpus() {
    let (code, doc) = json(&["bench", corpus().to_str().unwrap()]);
    assert_eq!(code, 0);
    let rows = doc.rows.unwrap();
    assert_eq!(rows.len(), bundled_runs(None).len());
    let row = |m: &str, q: &str| &rows.iter().find(|r| r.model == m && r.query == q).unwrap().verdict;
    assert_eq!(row("fig7", "durations [epsilon=1,p=2]"), "NotOpaqueVulnerable");
    assert_eq!(row("fig4", "durations budget 200"), "Inconclusive (truncated)");
    assert_eq!(row("fig1", "durations [p1=1,p2=2]"), "NotOpaqueFixable");
    assert_eq!(row("lu_privdead", "lu-empty"), "Empty");
}

#[test]
fn fig1_durations() {
    let fig1 = model("fig1");
    let args = ["durations", "--model", &fig1, "--private", "l2", "--final", "l1", "--pval", "p1=1,p2=2"];
    let (code, doc) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(doc.verdict, "NotOpaqueFixable");
    assert_eq!(doc.priv_times.unwrap().to_string(), "[1, 3]");
    assert_eq!(doc.pub_times.unwrap().to_string(), "[2, 3]");
    assert_eq!(doc.duration_set.unwrap().to_string(), "[2, 3]");
    let (_, text) = run(&args);
    assert!(text.contains("verdict: NotOpaqueFixable\n"));
    assert!(text.contains("priv: [1, 3]\n"));
}

#[test]
fn fig1_full_opacity() {
    let fig1 = model("fig1");
    let (code, doc) = json(&["full-opacity", "--model", &fig1, "--private", "l2", "--final", "l1", "--pval", "p1=1.5,p2=1.5"]);
    assert_eq!(code, 0);
    assert_eq!(doc.verdict, "Opaque");
    let (code, doc) = json(&["full-opacity", "--model", &fig1, "--pval", "p1=3/2,p2=1.5"]);
    assert_eq!((code, doc.verdict.as_str()), (0, "Opaque"));
}

#[test]
fn fig7_synth() {
    let (code, doc) = json(&["synth", "--model", &model("fig7"), "--private", "lpriv", "--final", "lf"]);
    assert_eq!(code, 0);
    assert_eq!(doc.verdict, "Synthesized");
    assert!(doc.complete);
    let disjuncts = doc.constraint.unwrap();
    assert!(!disjuncts.is_empty());
    let names: std::collections::BTreeSet<_> =
        disjuncts.iter().flatten().flat_map(|a| a.coefficients.keys().cloned()).collect();
    assert!(names.iter().all(|n| ["epsilon", "p", "p_abs"].contains(&n.as_str())), "{names:?}");
}

#[test]
fn fig4_is_inconclusive() {
    let (code, doc) = json(&["durations", "--model", &model("fig4"), "--budget", "300"]);
    assert_eq!(code, 2);
    assert!(doc.frontier_truncated);
    assert!(!doc.warnings.is_empty());
}

#[test]
fn oracle_sampling() {
    let fig8 = model("fig8");
    let (code, doc) = json(&["oracle-sample", "--model", &fig8, "--pval", "p=1", "--horizon", "2", "--polarity", "pub"]);
    assert_eq!(code, 0);
    let s = doc.samples.unwrap();
    let reached: Vec<String> = s.reachable().map(ToString::to_string).collect();
    assert_eq!(reached, ["0", "0.5", "1"]);
    let (code, text) = run(&["oracle-sample", "--model", &fig8, "--pval", "p=1", "--horizon", "1"]);
    assert_eq!(code, 0);
    assert!(text.contains("duration\tverdict\n"), "{text}");
}

#[test]
fn lu_emptiness_witness() {
    let (code, doc) = json(&["lu-empty", "--model", &model("fig1")]);
    assert_eq!(code, 0);
    assert_eq!(doc.verdict, "NonEmpty");
    assert_eq!(doc.duration_set.unwrap().to_string(), "[0, 3]");
    let w = doc.witness.unwrap();
    assert_eq!(w.len(), 2);
    let (code, doc) = json(&["lu-empty", "--model", &model("lu_privdead")]);
    assert_eq!((code, doc.verdict.as_str(), doc.witness), (0, "Empty", None));
}
