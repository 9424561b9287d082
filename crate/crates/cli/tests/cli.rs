use std::path::Path;
use std::process::{Command, Output};

use besov_inflate::initial_data::{lemma32_lower, ConstructionParams};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_besov-inflate"));
    c.env_remove("BESOV_INFLATE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_kind(o: &Output) -> String {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let line = text.lines().last().expect("error record");
    let v: serde_json::Value = serde_json::from_str(line).expect("json error record");
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn seventeen_digits(cell: &str) -> bool {
    let mantissa = cell.split('e').next().unwrap().replace(['-', '.'], "");
    mantissa.len() == 17 && cell.parse::<f64>().is_ok()
}

#[test]
fn lemma31_emits_one_row_per_scale() {
    let out = run(&["lemma31", "--n", "16,32,48,64", "--p", "4"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(
        header,
        [
            "n",
            "linf_ratio",
            "slope_ratio",
            "besov_ratio",
            "evaluation"
        ]
    );
    assert_eq!(rows.len(), 4);
    for (row, n) in rows.iter().zip(["16", "32", "48", "64"]) {
        assert_eq!(row[0], n);
        for cell in &row[1..4] {
            assert!(seventeen_digits(cell), "{cell}");
            assert!(cell.parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn lemma32_ratio_matches_the_library_and_clears_c() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("l32.csv");
    let json_path = dir.path().join("l32.json");
    let out = run(&[
        "lemma32",
        "--n",
        "16",
        "--p",
        "4",
        "-o",
        csv_path.to_str().unwrap(),
        "--json",
        json_path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&std::fs::read_to_string(&csv_path).unwrap());
    assert_eq!(header, ["n", "j", "block", "value", "ratio"]);
    let expected = lemma32_lower(&ConstructionParams::new(16, 4.0).unwrap()).unwrap();
    assert_eq!(rows.len(), expected.per_block.len());
    let ratio: f64 = rows[0][4].parse().unwrap();
    assert_eq!(ratio, expected.value / 16f64.ln().powi(2));
    assert!(ratio >= besov_inflate_cli::config::DEFAULT_LEMMA32_C);

    let mirror: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(mirror["command"], "lemma32");
    assert_eq!(mirror["pass"], true);
    assert_eq!(mirror["rows"][0][4].as_f64(), Some(ratio));
}

#[test]
fn inflate_writes_the_fixed_header() {
    // One step at the full synthesis grid: the format contract, not the physics.
    let dt = 1e-3;
    let out = run(&[
        "inflate",
        "--n",
        "16",
        "--p",
        "4",
        "--dt",
        &dt.to_string(),
        "--t-end",
        &dt.to_string(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with(
        "t,S,besov,lip,energy,ledger_u0,ledger_R,ledger_F,ledger_Edrift,ledger_tE0\n"
    ));
    let (_, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(row.len(), 10);
        assert!(row.iter().all(|c| seventeen_digits(c)), "{row:?}");
    }
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), dt);
}

#[test]
fn seeded_output_is_byte_identical() {
    let a = run(&["cutoff-check", "--seed", "11"]);
    let b = run(&["cutoff-check", "--seed", "11"]);
    let c = run(&["cutoff-check", "--seed", "12"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let (header, rows) = csv_rows(&stdout(&a));
    assert_eq!(header, ["xi", "partition_sum", "residual"]);
    assert_eq!(rows.len(), 10_000);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["lemma31", "--n", "32,48,64"];
    let one = bin()
        .env("BESOV_INFLATE_THREADS", "1")
        .args(args)
        .output()
        .unwrap();
    let three = bin()
        .env("BESOV_INFLATE_THREADS", "3")
        .args(args)
        .output()
        .unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "# closed-form scales\ncommand = lemma31\nn = 32, 48\np = 6\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = run(&["--config", cfg]);
    let overridden = run(&["--config", cfg, "--p", "4"]);
    let direct = run(&["lemma31", "--n", "32,48", "--p", "4"]);
    assert!(from_file.status.success() && overridden.status.success());
    assert_eq!(overridden.stdout, direct.stdout);
    assert_ne!(from_file.stdout, direct.stdout);
}

#[test]
fn solver_verify_passes_its_checks() {
    let out = run(&["solver-verify"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["check", "points", "dt", "t_end", "value", "ratio"]);
    let kinds: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        kinds,
        [
            "energy_drift",
            "time_reversal",
            "time_reversal",
            "rk4_order",
            "rk4_order"
        ]
    );
}

#[test]
fn failed_checks_exit_with_one() {
    let out = run(&["lemma32", "--n", "16", "--c", "1e9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));
}

#[test]
fn errors_produce_a_json_record() {
    let cases: [(&[&str], &str); 6] = [
        (&["inflate", "--n", "20"], "precondition"),
        (&["lemma31", "--n", "16", "--p", "2"], "precondition"),
        (&["inflate", "--n", "16,32"], "precondition"),
        (&["lemma31", "--n", "16,,32"], "usage"),
        (&["--p", "4"], "usage"),
        (&["--config", "/nonexistent/run.cfg", "lemma31"], "io"),
    ];
    for (args, kind) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_kind(&out), kind, "{args:?}");
    }
}

#[test]
fn module_errors_are_reported() {
    // Too coarse a grid for the n = 16 carriers.
    let out = run(&["lemma32", "--n", "16", "--N", "1024"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "resolution");

    let out = bin()
        .env("BESOV_INFLATE_THREADS", "many")
        .args(["cutoff-check"])
        .output()
        .unwrap();
    assert_eq!(error_kind(&out), "threads");
}

#[test]
fn bad_config_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "command = lemma31\nwidth = 3\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(error_kind(&out), "config");
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert!(!Path::new(&dir.path().join("out.csv")).exists());
}
