use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use embezzlemeter::io::{parse_csv_records, parse_probvec};
use embezzlemeter::special::harmonic;
use embezzlemeter::Normalization;
use serde_json::Value;
use tempfile::TempDir;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_embezzlemeter"));
        cmd.current_dir(self.dir.path())
            .args(args)
            .env("SOURCE_DATE_EPOCH", "1700000000");
        cmd.env_remove("EMBEZZLEMETER_THREADS");
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Splits CSV output into its manifest and data records.
fn csv(out: &Output) -> (Value, Vec<Vec<String>>) {
    assert_eq!(code(out), 0, "{}", stderr(out));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let first = text.lines().next().unwrap();
    let manifest = serde_json::from_str(first.strip_prefix("# manifest ").unwrap()).unwrap();
    (manifest, parse_csv_records(&text))
}

fn num(v: &str) -> f64 {
    v.parse().unwrap()
}

#[test]
fn dstar_reports_distance_bounds_and_manifest() {
    let sb = Sandbox::new();
    let p = sb.file("p.json", "[0.7, 0.2, 0.1]");
    let q = sb.file("q.csv", "# target\n0.5\n0.3\n0.2\n");
    let doc = json(&sb.run(&[
        "dstar",
        "--psi",
        s(&p),
        "--phi",
        s(&q),
        "--purified",
        "--oracle",
        "lp",
    ]));
    let r = &doc["report"];
    assert!((r["d_star"].as_f64().unwrap() - 0.2).abs() < 1e-12);
    assert_eq!(r["argmax_k"], 1);
    assert!((r["d_star_purified"].as_f64().unwrap() - 0.20870655827414875).abs() < 1e-6);
    assert!((r["oracle"]["value"].as_f64().unwrap() - 0.2).abs() < 1e-9);
    assert_eq!(r["discrimination_input"]["source"], "sandwich_lo");
    assert!((r["sandwich_hi"].as_f64().unwrap() - 0.4f64.sqrt()).abs() < 1e-12);

    let m = &doc["manifest"];
    assert_eq!(m["command"], "dstar");
    assert_eq!(m["timestamp"], "2023-11-14T22:13:20Z");
    assert_eq!(m["input_digests"].as_object().unwrap().len(), 2);
    assert_eq!(m["parameters"]["purified"], "true");
}

#[test]
fn dstar_user_discrimination_input() {
    let sb = Sandbox::new();
    let p = sb.file("p.json", "[0.7, 0.2, 0.1]");
    let q = sb.file("q.json", "[0.5, 0.3, 0.2]");
    let doc = json(&sb.run(&["dstar", "--psi", s(&p), "--phi", s(&q), "--d-value", "0.3"]));
    let r = &doc["report"];
    assert_eq!(r["discrimination_input"]["source"], "user");
    assert_eq!(r["discrimination_input"]["value"], 0.3);
    assert_eq!(r["discrimination_bound"], 0.65);
    assert!(r.get("d_star_purified").is_none());
}

#[test]
fn dstar_rejects_negative_entry() {
    let sb = Sandbox::new();
    let p = sb.file("bad.json", "[0.6, 0.5, -0.1]");
    let q = sb.file("q.json", "[1]");
    let out = sb.run(&["dstar", "--psi", s(&p), "--phi", s(&q)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("entry 3"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
}

#[test]
fn dstar_rejects_malformed_csv_line() {
    let sb = Sandbox::new();
    let p = sb.file("p.csv", "0.5\nhalf\n");
    let out = sb.run(&["dstar", "--psi", s(&p), "--phi", s(&p)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn dstar_renormalize_flag() {
    let sb = Sandbox::new();
    let p = sb.file("p.json", "[7, 2, 1]");
    let q = sb.file("q.json", "[5, 3, 2]");
    assert_eq!(code(&sb.run(&["dstar", "--psi", s(&p), "--phi", s(&q)])), 2);
    let doc = json(&sb.run(&["dstar", "--psi", s(&p), "--phi", s(&q), "--renormalize"]));
    assert!((doc["report"]["d_star"].as_f64().unwrap() - 0.2).abs() < 1e-12);
}

#[test]
fn grid_oracle_dimension_limit() {
    let sb = Sandbox::new();
    let p = sb.file("p.json", "[0.4, 0.3, 0.2, 0.1]");
    let out = sb.run(&["dstar", "--psi", s(&p), "--phi", s(&p), "--oracle", "grid"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("grid oracle supports dim ≤ 3"));

    let q = sb.file("q.json", "[0.5, 0.3, 0.2]");
    let r = sb.file("r.json", "[0.7, 0.2, 0.1]");
    let doc = json(&sb.run(&[
        "dstar",
        "--psi",
        s(&r),
        "--phi",
        s(&q),
        "--oracle",
        "grid",
        "--resolution",
        "100",
    ]));
    assert_eq!(doc["report"]["oracle"]["method"], "grid");
    assert!((doc["report"]["oracle"]["value"].as_f64().unwrap() - 0.2).abs() <= 0.03 + 1e-9);
}

#[test]
fn exhausted_budget_exits_3() {
    let sb = Sandbox::new();
    let p = sb.file("p.json", "[0.7, 0.2, 0.1]");
    let q = sb.file("q.json", "[0.5, 0.3, 0.2]");
    let out = sb.run(&[
        "dstar",
        "--psi",
        s(&p),
        "--phi",
        s(&q),
        "--purified",
        "--budget",
        "5",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("no convergence"));
}

#[test]
fn missing_input_file_exits_2() {
    let sb = Sandbox::new();
    let out = sb.run(&["nielsen", "--psi", "absent.json", "--phi", "absent.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("absent.json"));
}

#[test]
fn nielsen_from_maximally_entangled() {
    let sb = Sandbox::new();
    let u = sb.file("u.json", "[0.25, 0.25, 0.25, 0.25]");
    let t = sb.file("t.json", "[0.61, 0.2, 0.12, 0.07]");
    let r = json(&sb.run(&["nielsen", "--psi", s(&u), "--phi", s(&t)]))["report"].clone();
    assert_eq!(r["convertible"], true);
    assert_eq!(r["d_star"], 0.0);
    let back = json(&sb.run(&["nielsen", "--psi", s(&t), "--phi", s(&u)]))["report"].clone();
    assert_eq!(back["convertible"], false);
    assert!((back["d_star"].as_f64().unwrap() - 0.36).abs() < 1e-12);
}

#[test]
fn ensemble_check_validates_weights() {
    let sb = Sandbox::new();
    let p = sb.file("p.json", "[0.5, 0.5]");
    let bad = sb.file(
        "bad.json",
        r#"{"members": [{"weight": 0.5, "state": [1]}, {"weight": 0.4, "state": [0.5, 0.5]}]}"#,
    );
    let out = sb.run(&["ensemble-check", "--psi", s(&p), "--ensemble", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sum"), "{}", stderr(&out));

    let good = sb.file(
        "ok.json",
        r#"{"members": [{"weight": 0.5, "state": [1]}, {"weight": 0.5, "state": [0.5, 0.5]}]}"#,
    );
    let r = json(&sb.run(&["ensemble-check", "--psi", s(&p), "--ensemble", s(&good)]))["report"]
        .clone();
    assert_eq!(r["convertible"], true);
}

#[test]
fn embezzle_scan_vdh_has_analytic_bound() {
    let sb = Sandbox::new();
    let (manifest, rows) = csv(&sb.run(&[
        "embezzle-scan",
        "--family",
        "vdh",
        "--m",
        "2",
        "--schedule",
        "geometric:10,10,4",
    ]));
    assert_eq!(manifest["command"], "embezzle-scan");
    assert_eq!(rows[0], ["n", "d_star", "criterion", "p1", "bound"]);
    let ns: Vec<usize> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ns, [10, 100, 1000, 10000]);
    assert!((num(&rows[1][1]) - 0.22043083593009077).abs() < 1e-14);
    for r in &rows[1..] {
        let n: u64 = r[0].parse().unwrap();
        let bound = (1.0 + 2f64.ln()) / harmonic(n);
        assert_eq!(num(&r[4]), bound);
        assert!(num(&r[1]) <= bound);
        assert!(num(&r[3]) <= num(&r[2]));
    }
}

#[test]
fn embezzle_scan_other_families_have_no_bound() {
    let sb = Sandbox::new();
    let (_, rows) = csv(&sb.run(&[
        "embezzle-scan",
        "--family",
        "power:1",
        "--m",
        "3",
        "--schedule",
        "5,50",
    ]));
    assert_eq!(rows[0], ["n", "d_star", "criterion", "p1"]);
    assert_eq!(rows.len(), 3);

    let table = sb.file("f.csv", "x,f\n1,1\n100,0.01\n1e6,1e-6\n");
    let out = sb.run(&[
        "embezzle-scan",
        "--family",
        &format!("custom:{}", s(&table)),
        "--m",
        "2",
        "--schedule",
        "10,100",
    ]);
    let (manifest, rows) = csv(&out);
    assert_eq!(manifest["input_digests"].as_object().unwrap().len(), 1);
    assert_eq!(rows.len(), 3);
}

#[test]
fn embezzle_scan_rejects_bad_input() {
    let sb = Sandbox::new();
    for args in [
        [
            "embezzle-scan",
            "--family",
            "vdh",
            "--m",
            "1",
            "--schedule",
            "10",
        ],
        [
            "embezzle-scan",
            "--family",
            "nope",
            "--m",
            "2",
            "--schedule",
            "10",
        ],
        [
            "embezzle-scan",
            "--family",
            "vdh",
            "--m",
            "2",
            "--schedule",
            "geometric:10,2",
        ],
    ] {
        assert_eq!(code(&sb.run(&args)), 2, "{args:?}");
    }
}

#[test]
fn embezzle_scan_writes_file() {
    let sb = Sandbox::new();
    let path = sb.dir.path().join("scan.csv");
    let out = sb.run(&[
        "embezzle-scan",
        "--family",
        "vdh",
        "--m",
        "2",
        "--schedule",
        "3,30",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# manifest {"));
    assert_eq!(parse_csv_records(&text).len(), 3);
}

#[test]
fn figure1_documented_rows() {
    let sb = Sandbox::new();
    for (range, limit) in [("-1:-1:-1", 0.0), ("0:1:0", 0.5), ("1:1:1", 1.0 / 3.0)] {
        let (_, rows) = csv(&sb.run(&[
            "figure1", "--m", "2", "--alphas", range, "--n", "1000", "--out", "csv",
        ]));
        assert_eq!(
            rows[0],
            [
                "alpha",
                "limit_or_nan",
                "lower",
                "upper",
                "finite_n_estimate_1000"
            ]
        );
        assert_eq!(rows.len(), 2, "{range}");
        assert!((num(&rows[1][1]) - limit).abs() < 1e-15, "{range}");
    }
}

#[test]
fn figure1_full_range_shape() {
    let sb = Sandbox::new();
    let (_, rows) = csv(&sb.run(&[
        "figure1",
        "--m",
        "2",
        "--alphas",
        "-3:-0.1:3",
        "--n",
        "200,2000",
    ]));
    assert_eq!(rows.len(), 62);
    assert_eq!(rows[1][0], "-3");
    assert_eq!(rows[61][0], "3");
    for r in &rows[1..] {
        let alpha = num(&r[0]);
        assert_eq!(r[1] == "NaN", alpha < -1.0, "α = {alpha}");
        assert!(num(&r[2]) <= num(&r[3]));
        assert!(r[4..].iter().all(|v| (0.0..=1.0).contains(&num(v))));
    }
}

#[test]
fn figure1_rejects_bad_ranges() {
    let sb = Sandbox::new();
    for range in ["0:0:1", "0:1", "x:1:2", "0:1e-9:1"] {
        assert_eq!(
            code(&sb.run(&["figure1", "--alphas", range, "--n", "10"])),
            2,
            "{range}"
        );
    }
    assert_eq!(
        code(&sb.run(&["figure1", "--m", "1", "--alphas", "0:1:0", "--n", "10"])),
        2
    );
}

#[test]
fn family_limit_analytic_and_numeric() {
    let sb = Sandbox::new();
    let r = json(&sb.run(&["family-limit", "--family", "power:1", "--m", "2"]))["report"].clone();
    assert!((r["analytic_limit"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(r["family"], "power:1");

    let r = json(&sb.run(&[
        "family-limit",
        "--family",
        "power:-2",
        "--m",
        "2",
        "--schedule",
        "100,1000",
    ]))["report"]
        .clone();
    assert!(r["analytic_limit"].is_null());
    assert_eq!(r["finite_n_tail"].as_array().unwrap().len(), 2);
    assert!(!r["warnings"].as_array().unwrap().is_empty());

    let args = [
        "family-limit",
        "--family",
        "power:1",
        "--m",
        "2",
        "--numeric",
        "--y-schedule",
        "1e4,1e5",
    ];
    let r = json(&sb.run(&args))["report"].clone();
    let pts = r["numeric_M"].as_array().unwrap();
    assert_eq!(pts.len(), 2);
    assert!((pts[0]["M"].as_f64().unwrap() - 0.333_400_006_667_333_4).abs() < 1e-9);
}

#[test]
fn family_limit_reports_per_point_errors() {
    // A non-monotone f has no M(y); the failure is recorded per point and the run still succeeds.
    let sb = Sandbox::new();
    let r = json(&sb.run(&[
        "family-limit",
        "--family",
        "osc",
        "--m",
        "2",
        "--numeric",
        "--y-schedule",
        "1e4",
    ]))["report"]
        .clone();
    let p = &r["numeric_M"][0];
    assert!(p["M"].is_null());
    assert!(p["error"].as_str().unwrap().contains("not monotone"));
    assert_eq!(
        code(&sb.run(&[
            "family-limit",
            "--family",
            "power:1",
            "--m",
            "2",
            "--numeric",
            "--quad-tol",
            "0"
        ])),
        2
    );
}

#[test]
fn deterministic_under_pinned_timestamp() {
    let sb = Sandbox::new();
    let args = [
        "figure1", "--m", "3", "--alphas", "-2:0.5:1", "--n", "300,3000",
    ];
    let a = sb.run(&args);
    let b = sb.run_env(&args, &[("EMBEZZLEMETER_THREADS", "1")]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn thread_variable_is_validated() {
    let sb = Sandbox::new();
    let out = sb.run_env(
        &["figure1", "--alphas", "0:1:0", "--n", "10"],
        &[("EMBEZZLEMETER_THREADS", "zero")],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn output_round_trips_through_parsers() {
    let sb = Sandbox::new();
    let (_, rows) = csv(&sb.run(&[
        "embezzle-scan",
        "--family",
        "log:1",
        "--m",
        "2",
        "--schedule",
        "7,70",
    ]));
    // Every numeric field parses back to an f64 whose shortest rendering is the field itself.
    for r in &rows[1..] {
        for v in &r[1..] {
            assert_eq!(embezzlemeter::io::fmt_num(num(v)), *v);
        }
    }
    // A rendered coefficient column is itself a valid state file.
    let column: String = rows[1..].iter().map(|r| format!("{}\n", r[3])).collect();
    assert!(parse_probvec(&column, Normalization::Renormalize).is_ok());
}
