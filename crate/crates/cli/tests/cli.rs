use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde::de::DeserializeOwned;
use serde::Serialize;
use waring_labels::survey::LabelHistogram;
use waring_labels::Label;
use waring_labels_cli::{
    BinaryResult, GlobalConfig, HypersurfaceResult, OutputDoc, RankResult, RealRankDoc, VeroneseResult,
};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

fn run_with(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_waring-labels"));
    cmd.current_dir(data_dir()).args(args).env_remove(waring_labels_cli::SEED_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn run(args: &[&str]) -> Output {
    run_with(args, &[])
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Parses the document under the typed schema and checks that writing it
/// back gives the same bytes.
fn reparse<T: Serialize + DeserializeOwned>(o: &Output) -> OutputDoc<T> {
    let text = stdout(o);
    let doc: OutputDoc<T> = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(serde_json::to_string_pretty(&doc).unwrap() + "\n", text);
    doc
}

fn golden(name: &str, o: &Output) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, stdout(o)).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(stdout(o), want, "output differs from {}", path.display());
}

#[test]
fn decompose_binary_labels_pair_cubic() {
    let o = run(&["decompose-binary", "--form", "cubic_pair.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: OutputDoc<BinaryResult> = reparse(&o);
    let r = doc.result.unwrap();
    assert_eq!(r.label, Label::new(1, 0).unwrap());
    assert_eq!(r.complex_rank, 2);
    assert!(r.certificate.residual <= 1e-8);
    assert!(stdout(&o).contains("\"label\": [\n      1,\n      0\n    ]"));
    golden("decompose_binary_cubic_pair.json", &o);
}

#[test]
fn rank_of_sum_of_cubes() {
    let o = run(&["rank", "--form", "cubic_sum.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: OutputDoc<RankResult> = reparse(&o);
    let r = doc.result.unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"complex_rank":2,"real_rank":2}"#);
    assert_eq!(r.real_rank, RealRankDoc::Exact(2));
    golden("rank_cubic_sum.json", &o);
}

#[test]
fn malformed_exponent_names_path() {
    let o = run(&["decompose-binary", "--form", "bad_alpha.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("coeffs[2].alpha"), "{}", stderr(&o));
}

#[test]
fn missing_file_is_usage_error() {
    let o = run(&["rank", "--form", "no_such_file.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no_such_file.json"));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["frobnicate"],
        vec![],
        vec!["decompose-veronese", "--form", "cubic_sum.json"],
        vec!["decompose-veronese", "--form", "cubic_sum.json", "--weight", "2", "--join", "2"],
        vec!["decompose-veronese", "--form", "cubic_sum.json", "--template", "1"],
        vec!["label-hypersurface", "--form", "conic.json"],
        vec!["survey", "--spec", "survey_cubic.json", "--threads", "0"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn help_for_every_subcommand() {
    for sub in ["decompose-binary", "label-hypersurface", "decompose-veronese", "rank", "survey"] {
        let o = run(&[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
}

#[test]
fn real_point_free_conic() {
    let o = run(&["label-hypersurface", "--form", "conic.json", "--point", "1,-2,0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: OutputDoc<HypersurfaceResult> = reparse(&o);
    let r = doc.result.unwrap();
    assert_eq!(r.label, Label::new(1, 0).unwrap());
    assert!(r.certificate.residual <= 1e-10);
    assert!(r.on_surface_residuals.iter().all(|&e| e <= 1e-8));
    golden("label_hypersurface_conic.json", &o);
}

#[test]
fn retries_exhausted_exit_two() {
    let o =
        run(&["label-hypersurface", "--form", "quartic_double_conic.json", "--point", "1,2,3", "--max-retries", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let doc: OutputDoc<HypersurfaceResult> = reparse(&o);
    assert_eq!(doc.error.unwrap().kind, "retries_exhausted");
    assert_eq!(doc.config.max_retries, 3);
}

#[test]
fn decomposition_failure_exit_three() {
    let o = run(&["decompose-veronese", "--form", "cubic_sum.json", "--template", "1,0"]);
    assert_eq!(o.status.code(), Some(3));
    let doc: OutputDoc<VeroneseResult> = reparse(&o);
    let err = doc.error.unwrap();
    assert_eq!(err.kind, "decomposition");
    assert!(err.report.unwrap().best_residual > 1e-6);
}

#[test]
fn veronese_template_success() {
    let o = run(&["decompose-veronese", "--form", "cubic_pair.json", "--template", "1,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: OutputDoc<VeroneseResult> = reparse(&o);
    let r = doc.result.unwrap();
    assert_eq!(r.label, Label::new(1, 0).unwrap());
    assert!(r.decomposition.certificate.residual <= 1e-6);
}

#[test]
fn veronese_weight_search_skipping_all_real() {
    let o = run(&["decompose-veronese", "--form", "cubic_sum.json", "--weight", "3", "--skip-all-real"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: OutputDoc<VeroneseResult> = reparse(&o);
    let label = doc.result.unwrap().label;
    assert_eq!(label.weight(), 3);
    assert!(label.a() >= 1);
}

#[test]
fn seed_precedence() {
    let o = run_with(&["rank", "--form", "cubic_sum.json"], &[("WARING_LABELS_SEED", "7")]);
    let doc: OutputDoc<RankResult> = reparse(&o);
    assert_eq!((doc.seed, doc.config.seed, doc.config.nls.seed), (7, 7, 7));

    let o = run_with(&["rank", "--form", "cubic_sum.json", "--seed", "9"], &[("WARING_LABELS_SEED", "7")]);
    let doc: OutputDoc<RankResult> = reparse(&o);
    assert_eq!(doc.seed, 9);

    let o = run_with(&["rank", "--form", "cubic_sum.json"], &[("WARING_LABELS_SEED", "x")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_is_echoed_and_validated() {
    let o = run(&["rank", "--form", "cubic_sum.json", "--config", "config_custom.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: OutputDoc<RankResult> = reparse(&o);
    let want: GlobalConfig =
        serde_json::from_str(&std::fs::read_to_string(data_dir().join("config_custom.json")).unwrap()).unwrap();
    assert_eq!(doc.config.tolerances, want.tolerances);
    assert_eq!(doc.seed, 11);

    let o = run(&["rank", "--form", "cubic_sum.json", "--config", "config_unknown_field.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tolerances"), "{}", stderr(&o));

    let o = run(&["rank", "--form", "cubic_sum.json", "--config", "config_negative_tol.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("tau_sep"), "{}", stderr(&o));
}

#[test]
fn rerun_is_byte_identical() {
    let args = ["decompose-veronese", "--form", "cubic_sum.json", "--weight", "3", "--skip-all-real", "--seed", "4"];
    let first = run(&args);
    let doc: OutputDoc<VeroneseResult> = reparse(&first);
    let echoed: Vec<&str> = doc.argv.iter().skip(1).map(String::as_str).collect();
    assert_eq!(echoed, args);
    let again = run(&echoed);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn survey_is_thread_independent_and_exports_csv() {
    let dir = std::env::temp_dir().join(format!("waring-labels-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("hist.csv");
    let one = run(&["survey", "--spec", "survey_cubic.json", "--threads", "1"]);
    let four = run(&["survey", "--spec", "survey_cubic.json", "--threads", "4", "--csv", csv.to_str().unwrap()]);
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(four.status.code(), Some(0), "{}", stderr(&four));
    let a: OutputDoc<LabelHistogram> = reparse(&one);
    let b: OutputDoc<LabelHistogram> = reparse(&four);
    assert_eq!(serde_json::to_string(&a.result).unwrap(), serde_json::to_string(&b.result).unwrap());
    let h = a.result.unwrap();
    assert_eq!(h.trials, 200);
    assert_eq!(h.failures, 0);
    assert_eq!(h.counts.iter().map(|c| c.count).sum::<usize>(), 200);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, h.to_csv());
    std::fs::remove_dir_all(&dir).unwrap();
    golden("survey_cubic.json", &one);
}

#[test]
fn survey_seed_override() {
    let o = run(&["survey", "--spec", "survey_cubic.json", "--seed", "99"]);
    let doc: OutputDoc<LabelHistogram> = reparse(&o);
    assert_eq!(doc.seed, 99);
    assert_eq!(doc.result.unwrap().metadata.spec.seed, 99);
}

#[test]
fn in_process_dispatch_matches_binary() {
    let argv: Vec<String> = ["waring-labels", "rank", "--form"]
        .iter()
        .map(|s| s.to_string())
        .chain([data_dir().join("cubic_sum.json").to_string_lossy().into_owned()])
        .collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = waring_labels_cli::run(&argv, None, &mut out, &mut err);
    assert_eq!(code, 0);
    let doc: OutputDoc<RankResult> = serde_json::from_slice(&out).unwrap();
    assert_eq!(doc.result.unwrap().complex_rank, 2);
}

#[test]
fn schema_documents_are_valid_json() {
    let docs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs");
    for name in ["form", "config", "survey-spec", "output"] {
        let path = docs.join(format!("{name}.schema.json"));
        let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["type"], "object", "{name}");
    }
}
