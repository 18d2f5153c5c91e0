use std::fs;
use std::path::Path;

use maxent_graphs::cli::{graph_from_json, parse_number_list, run};
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("maxent-graphs").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn check_rejects_non_graphic_continuous() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    fs::write(&d, "5,2,2\n").unwrap();
    let r = cli(&["check", "--regime", "continuous", "--degrees", p(&d)]);
    assert_eq!(r.code, 3);
    assert_eq!(json(&r.stdout)["graphic"], false);
}

#[test]
fn check_enforces_integrality_for_discrete() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    fs::write(&d, "1.5,1,0.5\n").unwrap();
    let r = cli(&["check", "--regime", "infinite", "--degrees", p(&d)]);
    assert_eq!(r.code, 2);
    assert_eq!(r.stderr.lines().count(), 1);
    let r = cli(&["check", "--regime", "continuous", "--degrees", p(&d)]);
    assert_eq!(r.code, 0);
}

#[test]
fn fit_symmetric_continuous() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    fs::write(&d, "2,2,2\n").unwrap();
    let r = cli(&["fit", "--regime", "continuous", "--degrees", p(&d)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["converged"], true);
    for t in v["theta_hat"].as_array().unwrap() {
        assert!((t.as_f64().unwrap() - 0.5).abs() < 1e-10);
    }
}

#[test]
fn fit_reports_missing_mle_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    fs::write(&d, "4,2,2\n").unwrap();
    assert_eq!(cli(&["fit", "--regime", "continuous", "--degrees", p(&d)]).code, 3);
    fs::write(&d, "3,1,1,0\n").unwrap();
    assert_eq!(cli(&["fit", "--regime", "finite", "--r", "3", "--degrees", p(&d)]).code, 3);
    fs::write(&d, "2,2,2\n").unwrap();
    let r = cli(&["fit", "--regime", "finite", "--r", "2", "--degrees", p(&d), "--max-iter", "3000"]);
    assert_eq!(r.code, 3);
    assert_eq!(json(&r.stdout)["diverged"], true);
}

#[test]
fn fit_writes_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    let trace = dir.path().join("trace.csv");
    fs::write(&d, "3,2,2,1,2\n").unwrap();
    let r = cli(&["fit", "--regime", "finite", "--r", "3", "--degrees", p(&d), "--trace", p(&trace), "--tol", "1e-12"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let iterations = json(&r.stdout)["iterations"].as_u64().unwrap() as usize;
    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iter,step_inf,residual_inf"));
    assert_eq!(lines.count(), iterations);
}

#[test]
fn mean_matches_closed_forms() {
    let r = cli(&["mean", "--regime", "finite", "--r", "5", "--t", "0"]);
    assert_eq!(r.code, 0);
    let v = json(&r.stdout);
    assert_eq!(v["mu"], 2.0);
    assert_eq!(v["mu_prime"], -2.0);
    assert!((v["z1"].as_f64().unwrap() - 5f64.ln()).abs() < 1e-15);
    let v = json(&cli(&["mean", "--regime", "finite", "--r", "2", "--t", "-0.5"]).stdout);
    assert!((v["mu"].as_f64().unwrap() - 1.0 / (1.0 + (-0.5f64).exp())).abs() < 1e-15);
}

#[test]
fn usage_errors() {
    assert_eq!(cli(&["mean", "--regime", "finite", "--t", "1"]).code, 2);
    assert_eq!(cli(&["mean", "--regime", "infinite", "--r", "3", "--t", "1"]).code, 2);
    assert_eq!(cli(&["mean", "--regime", "weird", "--t", "1"]).code, 2);
    assert_eq!(cli(&["fit", "--regime", "continuous", "--degrees", "/nonexistent/d.csv"]).code, 2);
    assert_eq!(cli(&[]).code, 2);
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("d.csv");
    fs::write(&d, "1,two,3\n").unwrap();
    let r = cli(&["fit", "--regime", "continuous", "--degrees", p(&d)]);
    assert_eq!(r.code, 2);
    assert_eq!(r.stderr.lines().count(), 1);
    // Output paths are validated before any work.
    let theta = dir.path().join("theta.csv");
    fs::write(&theta, "1,1,1\n").unwrap();
    let r = cli(&["sample", "--regime", "continuous", "--theta", p(&theta), "--out", "/nonexistent/dir/g.json"]);
    assert_eq!(r.code, 2);
}

#[test]
fn version_mentions_format() {
    let r = cli(&["--version"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains(env!("CARGO_PKG_VERSION")));
    assert!(r.stdout.contains("format 1"));
}

#[test]
fn sample_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let theta = dir.path().join("theta.csv");
    let values: Vec<String> = (0..20).map(|i| format!("{}", f64::from(i) * 0.03 - 0.3)).collect();
    fs::write(&theta, values.join(",") + "\n").unwrap();
    let graph = dir.path().join("g.json");
    let degrees = dir.path().join("d.csv");
    let r = cli(&[
        "sample", "--regime", "finite", "--r", "4", "--theta", p(&theta), "--seed", "12", "--out", p(&graph),
        "--degrees-out", p(&degrees),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let g = graph_from_json(&fs::read_to_string(&graph).unwrap()).unwrap();
    let d = parse_number_list(&fs::read_to_string(&degrees).unwrap()).unwrap();
    assert_eq!(g.degree_sequence().as_slice(), d.as_slice());
    // Discrete weights are written as JSON integers.
    let raw = json(&fs::read_to_string(&graph).unwrap());
    assert!(raw["edges"].as_array().unwrap().iter().all(|e| e[2].is_u64()));

    let r = cli(&["fit", "--regime", "finite", "--r", "4", "--degrees", p(&degrees)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r.stdout);
    assert_eq!(v["converged"], true);
    assert!(v["residual_inf"].as_f64().unwrap() <= 1e-6);

    // An isolated vertex has no finite potential.
    let mut zeroed = d.clone();
    zeroed[0] = 0.0;
    fs::write(&degrees, maxent_graphs::cli::format_number_list(&zeroed)).unwrap();
    assert_eq!(cli(&["fit", "--regime", "finite", "--r", "4", "--degrees", p(&degrees)]).code, 3);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let theta = dir.path().join("theta.csv");
    fs::write(&theta, "0.3,0.9,0.5,0.7,1.1,0.4\n").unwrap();
    let a = cli(&["sample", "--regime", "continuous", "--theta", p(&theta), "--seed", "77"]).stdout;
    let b = cli(&["--threads", "3", "sample", "--regime", "continuous", "--theta", p(&theta), "--seed", "77"]).stdout;
    let c = cli(&["sample", "--regime", "continuous", "--theta", p(&theta), "--seed", "78"]).stdout;
    assert_eq!(a, b);
    assert_ne!(a, c);
    // Real weights survive the JSON round trip exactly.
    let g = graph_from_json(&a).unwrap();
    assert_eq!(serde_json::to_string(&maxent_graphs::cli::graph_to_json(&g)).unwrap() + "\n", a);
}

#[test]
fn experiment_writes_tables_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"regime": {"kind": "infinite"}, "n_values": [20, 40], "replicates": 4,
            "theta_law": {"kind": "symmetric_shifted", "base": 0.75, "jitter": 0.25}, "seed": 5}"#,
    )
    .unwrap();
    for (kind, rows) in [("consistency", 8usize), ("scatter", 60), ("trace", 0)] {
        let out = dir.path().join(kind);
        let args = ["experiment", "--kind", kind, "--config", p(&cfg), "--out", p(&out)];
        let r = cli(&args);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let table = fs::read_to_string(out.join(format!("{kind}.csv"))).unwrap();
        if rows > 0 {
            assert_eq!(table.lines().count(), rows + 1, "{kind}");
        }
        let summary = json(&fs::read_to_string(out.join("summary.json")).unwrap());
        assert_eq!(summary["kind"], kind);
        let again = cli(&["--threads", "4", "experiment", "--kind", kind, "--config", p(&cfg), "--out", p(&out)]);
        assert_eq!(again.code, 0);
        assert_eq!(fs::read_to_string(out.join(format!("{kind}.csv"))).unwrap(), table);
    }
    fs::write(&cfg, r#"{"regime": {"kind": "continuous"}, "n_values": [20], "theta_law": {"kind": "uniform_box", "lo": -1, "hi": 1}}"#).unwrap();
    let r = cli(&["experiment", "--kind", "consistency", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(r.code, 2);
}
