use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coopic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coopic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn line_with<'a>(text: &'a str, prefix: &str) -> &'a str {
    text.lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no line starting with {prefix:?} in:\n{text}"))
}

fn value_after(text: &str, prefix: &str) -> f64 {
    let line = line_with(text, prefix);
    line[prefix.len()..]
        .split_whitespace()
        .next()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("no number after {prefix:?} in {line:?}"))
}

#[test]
fn ldm_sum_prints_the_pinned_capacity_lines() {
    let out = coopic(&["ldm-sum", "2", "2", "5"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "2 (δ*: any)");

    let text = stdout_of(&coopic(&["ldm-sum", "2", "4", "8"]));
    assert_eq!(text.lines().next().unwrap(), "24/5 (δ*=1/2)");

    // a dead channel is a bare zero, with no schedule or active bounds
    let out = coopic(&["ldm-sum", "0", "0", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "0\n");
}

#[test]
fn ldm_cog_names_the_active_bounds() {
    let out = coopic(&["ldm-cog", "2", "3", "4", "1", "5"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "2 (δ*=0)");
    assert_eq!(line_with(&text, "active:"), "active: v2, v3, v4");
}

#[test]
fn gauss_sum_reports_region_one_without_cooperation() {
    let out = coopic(&["gauss-sum", "100", "10", "1"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "theta: 0 (not given; using 0)");
    assert_eq!(line_with(&text, "region:"), "region: 1");
    assert_eq!(line_with(&text, "cooperation:"), "cooperation: off");
    for name in [
        "  achievable_le_outer:",
        "  inner_gap:",
        "  outer_gap:",
        "  shadow_over:",
        "  shadow_under:",
    ] {
        assert!(value_after(&text, name) >= -1e-6, "margin {name} negative");
    }
    // clean margins keep --strict at exit 0
    let strict = coopic(&["gauss-sum", "100", "10", "1", "--strict"]);
    assert!(strict.status.success());
}

#[test]
fn cog_withholds_the_lower_bound_below_the_asserted_backoff() {
    let out = coopic(&[
        "cog", "1e4", "1e4", "1e2", "1e2", "1e6", "--r0", "5",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(line_with(&text, "lower:"), "lower: not asserted (R0<7)");
    assert!(text.contains("n/a"));
}

#[test]
fn cog_without_interference_tracks_the_direct_link() {
    let out = coopic(&["cog", "1e6", "1e6", "1e-9", "1e-9", "1e8"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(line_with(&text, "cooperation:"), "cooperation: off");
    let lower = value_after(&text, "lower:");
    // integer gain exponents put the bound within two bits of log2(1+snr2)
    let direct = (1.0 + 1e6f64).log2();
    assert!((lower - direct).abs() <= 2.0, "lower {lower} vs direct {direct}");
}

#[test]
fn fm_check_counts_its_cases() {
    let out = coopic(&["fm-check", "--max", "3"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), "all closed-form identities hold (1616 cases)\n");
}

#[test]
fn codec_sim_is_deterministic_and_names_an_explicit_seed() {
    let args = ["codec-sim", "2", "4", "8", "--delta", "1/2", "--blocks", "64"];
    let a = coopic(&args);
    let b = coopic(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "identical runs must be byte-identical");
    let text = stdout_of(&a);
    assert!(!text.contains("seed:"), "unseeded run must not print a seed");
    assert_eq!(line_with(&text, "plan:"), "plan: δ=1/2, 5 slots per block");
    assert!(line_with(&text, "tuples:").ends_with("errors: 0"));

    let seeded = stdout_of(&coopic(&[
        "codec-sim", "2", "4", "8", "--seed", "9", "--blocks", "8",
    ]));
    assert_eq!(seeded.lines().next().unwrap(), "seed: 9");
}

#[test]
fn gdof_sum_table_holds_the_known_crossover_row() {
    let out = coopic(&["gdof", "sum"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().next().unwrap(), "alpha,beta,d");
    assert!(text.lines().any(|l| l == "1/2,16/5,27/16"));
    // 301 alphas by 4 betas plus the header
    assert_eq!(text.lines().count(), 1205);

    let json = stdout_of(&coopic(&["gdof", "sum", "--format", "json"]));
    assert!(json.contains("\"schema_version\": 1"));
    assert!(json.contains("\"kind\": \"sum_gdof\""));
    assert!(json.contains("{\"alpha\": \"1/2\", \"beta\": \"16/5\", \"d\": \"27/16\"}"));
}

#[test]
fn gdof_cog_writes_a_file_and_notes_the_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cog.csv");
    let out = coopic(&["gdof", "cog", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(line_with(&text, "note:"), "note: n2=3/2, alpha2=1/2 held fixed");
    assert!(text.contains("(1204 rows)"));
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("alpha1,beta,d\n"));
}

#[test]
fn gdof_sweep_file_overrides_the_default_grid() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.sweep");
    fs::write(&path, "alpha = 0:1/2:1\nbeta = 1\n").unwrap();
    let out = coopic(&["gdof", "sum", "--sweep", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().any(|l| l.starts_with("1/2,1,")));
}

fn write_small_grid(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.grid");
    fs::write(
        &path,
        "# single gain point\nsnr = 1e4\ninr = 1e2\ncnr = 0.5\ntheta = 0\ncog_gain = 1e4\nr0 = 7\n",
    )
    .unwrap();
    path
}

#[test]
fn verify_gaps_passes_a_clean_single_point_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write_small_grid(dir.path());
    let grid = grid.to_str().unwrap();
    let out = coopic(&["verify-gaps", grid, "--grid-density", "96"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert_eq!(line_with(&text, "violations:"), "violations: 0");

    let strict = coopic(&["verify-gaps", grid, "--grid-density", "96", "--strict"]);
    assert!(strict.status.success(), "no violations means strict still exits 0");

    let report = dir.path().join("report.json");
    let out = coopic(&[
        "verify-gaps", grid, "--grid-density", "96",
        "--out", report.to_str().unwrap(), "--format", "json",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["schema_version"], 1);
    assert_eq!(parsed["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn bad_inputs_exit_nonzero_with_an_error_line() {
    let neg = coopic(&["gauss-sum", "--", "-3", "10", "1"]);
    assert_eq!(neg.status.code(), Some(1));

    let off_optimum = coopic(&["codec-sim", "2", "4", "8", "--delta", "3"]);
    assert_eq!(off_optimum.status.code(), Some(1));
    let err = String::from_utf8(off_optimum.stderr).unwrap();
    assert!(err.starts_with("error:"), "stderr was {err:?}");

    let missing = coopic(&["gdof", "sum", "--sweep", "/nonexistent/sweep.txt"]);
    assert_eq!(missing.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.grid");
    fs::write(&bad, "snr = 1e4\nbogus = 3\n").unwrap();
    let out = coopic(&["verify-gaps", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
