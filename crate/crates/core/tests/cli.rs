mod common;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use common::*;
use rebug::cli::{self, EXIT_CONFIG, EXIT_OK};
use rebug::detector::{Branch, Verdict};
use rebug::report::RunReport;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let mut argv = vec!["rebug"];
    argv.extend_from_slice(args);
    let code = cli::run(argv, &mut o, &mut e);
    (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
}

fn fixture_args<'a>(src: &'a str, bugs: &'a str) -> Vec<&'a str> {
    vec!["--src", src, "--bugs", bugs]
}

fn fixture_report(extra: &[&str]) -> (String, RunReport) {
    let src = fixtures().join("src");
    let bugs = fixtures().join("bugs");
    let mut args = fixture_args(src.to_str().unwrap(), bugs.to_str().unwrap());
    args.extend_from_slice(&["--format", "json", "--deterministic"]);
    args.extend_from_slice(extra);
    let (code, out, err) = run(&args);
    assert_eq!(code, EXIT_OK, "{err}");
    let report: RunReport = serde_json::from_str(&out).unwrap();
    (out, report)
}

/// Flagged (bug, candidate class) pairs at `theta` on a tree.
fn flagged_at(src: &Path, bugs: &Path, theta: f64) -> BTreeSet<String> {
    let t = theta.to_string();
    let (code, out, err) =
        run(&["--src", src.to_str().unwrap(), "--bugs", bugs.to_str().unwrap(), "--format", "json", "--theta", &t]);
    assert_eq!(code, EXIT_OK, "{err}");
    let r: RunReport = serde_json::from_str(&out).unwrap();
    r.per_bug
        .iter()
        .flat_map(|b| &b.candidates)
        .filter(|c| c.candidate.verdict == Verdict::Flagged)
        .map(|c| c.candidate.candidate_method.class_name.clone())
        .collect()
}

#[test]
fn json_report_matches_schema() {
    let (out, report) = fixture_report(&["--theta-sweep", "0.1:1.0:0.1", "--corpus-stats"]);
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")).unwrap())
            .unwrap();
    let instance: Value = serde_json::from_str(&out).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(report.totals, report.recount());
    assert_eq!(report.totals.flagged, 1);
    let sweep = report.theta_sweep.unwrap();
    assert_eq!(sweep.len(), 10);
    assert_eq!(sweep.last().unwrap().flagged, 0);
}

#[test]
fn fixture_paths_are_relative_and_highlighted() {
    let (_, report) = fixture_report(&[]);
    let bug = &report.per_bug[0];
    assert_eq!(bug.bug_key, "LUCENE-1587");
    let c = &bug.candidates[0];
    assert_eq!(c.candidate.candidate_method.file, Path::new("org/apache/lucene/search/RangeFilter.java"));
    assert_eq!(c.candidate.breakdown.branch, Branch::ProgramHit);
    assert!(c.highlight.lines.contains(&313));
    assert_eq!(report.elapsed_ms, 0);
}

#[test]
fn text_and_json_agree() {
    let src = fixtures().join("src");
    let bugs = fixtures().join("bugs");
    let (code, text, _) = run(&fixture_args(src.to_str().unwrap(), bugs.to_str().unwrap()));
    assert_eq!(code, EXIT_OK);
    let (_, report) = fixture_report(&[]);
    let flagged_lines = text.lines().filter(|l| l.trim_start().starts_with("FLAGGED")).count();
    assert_eq!(flagged_lines, report.totals.flagged);
    assert!(text.contains("RangeFilter.equals"));
    assert!(text.lines().any(|l| l.trim_start().starts_with("> 313")));
    assert!(text.contains("totals: 1 flagged, 0 below, 0 skipped"));
}

#[test]
fn deterministic_runs_are_identical() {
    let (a, _) = fixture_report(&["--theta-sweep", "0.1:1.0:0.1"]);
    let (b, _) = fixture_report(&["--theta-sweep", "0.1:1.0:0.1"]);
    assert_eq!(a, b);
}

#[test]
fn out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let (_, expected) = fixture_report(&[]);
    let (src, bugs) = (fixtures().join("src"), fixtures().join("bugs"));
    let mut args = fixture_args(src.to_str().unwrap(), bugs.to_str().unwrap());
    args.extend_from_slice(&["--format", "json", "--deterministic", "--out", path.to_str().unwrap()]);
    let (code, out, _) = run(&args);
    assert_eq!((code, out.as_str()), (EXIT_OK, ""));
    let written: RunReport = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, expected);
}

#[test]
fn flagged_sets_shrink_as_theta_grows() {
    let dir = tempfile::tempdir().unwrap();
    let (files, bug) = worker_corpus();
    write_tree(&dir.path().join("src"), &files);
    fs::create_dir_all(dir.path().join("bugs")).unwrap();
    fs::write(dir.path().join("bugs/SYN-1.xml"), bug).unwrap();
    let (src, bugs) = (dir.path().join("src"), dir.path().join("bugs"));
    let low = flagged_at(&src, &bugs, 0.3);
    let high = flagged_at(&src, &bugs, 0.7);
    assert!(high.is_subset(&low), "{high:?} vs {low:?}");
    assert!(low.len() > high.len());
}

#[test]
fn skipped_bugs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("X-1.xml"),
        "<rss><channel><item><key>X-1</key><summary>Slow</summary><description>It is slow.</description></item></channel></rss>",
    )
    .unwrap();
    let src = fixtures().join("src");
    let (code, out, err) = run(&["--src", src.to_str().unwrap(), "--bugs", dir.path().to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("X-1"));
    let r: RunReport = serde_json::from_str(&out).unwrap();
    assert_eq!(r.totals.skipped_bugs, 1);
    assert!(r.per_bug[0].diagnostics[0].starts_with("skipped"));
}

#[test]
fn corpus_stats_alone() {
    let src = fixtures().join("src");
    let (code, out, _) = run(&["--src", src.to_str().unwrap(), "--corpus-stats", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["classes"], 2);
    assert_eq!(v["overloads"]["equals"], serde_json::json!([2, 2]));
}

#[test]
fn usage_errors() {
    assert_eq!(run(&["--bugs", "b"]).0, EXIT_CONFIG);
    assert_eq!(run(&["--src", "s", "--bugs", "b", "--min-cs-len", "0"]).0, EXIT_CONFIG);
    assert_eq!(run(&["--src", "s", "--bugs", "b", "--theta", "1.5"]).0, EXIT_CONFIG);
    assert_eq!(run(&["--src", "s", "--bugs", "b", "--theta-sweep", "x"]).0, EXIT_CONFIG);
}

#[test]
fn binary_reports_missing_lexicon() {
    let src = fixtures().join("src");
    let bugs = fixtures().join("bugs");
    let status = Command::new(env!("CARGO_BIN_EXE_rebug"))
        .args(["--src", src.to_str().unwrap(), "--bugs", bugs.to_str().unwrap()])
        .env(rebug::lexicon::LEXICON_ENV, "/nonexistent/lexicon")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_CONFIG));

    let ok = Command::new(env!("CARGO_BIN_EXE_rebug"))
        .args(["--src", src.to_str().unwrap(), "--bugs", bugs.to_str().unwrap()])
        .env_remove(rebug::lexicon::LEXICON_ENV)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
}
