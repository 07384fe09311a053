use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const EOPM: &str = env!("CARGO_BIN_EXE_eopm");

fn eopm(args: &[&str]) -> Output {
    Command::new(EOPM).args(args).output().expect("run eopm")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

type Row = BTreeMap<String, String>;

fn rows(text: &str) -> Vec<Row> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    reader
        .records()
        .map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.into(), v.into())).collect())
        .collect()
}

fn run_rows(args: &[&str]) -> Vec<Row> {
    let out = eopm(args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    rows(&stdout(&out))
}

fn f(row: &Row, key: &str) -> f64 {
    row[key].parse().unwrap()
}

fn header(text: &str) -> Vec<&str> {
    text.lines().take_while(|l| l.starts_with('#')).collect()
}

fn out_path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn quantum_spectrum_stays_physical() {
    let lines = run_rows(&["spectrum", "--n0", "6", "--m", "5", "--N", "1", "--model", "quantum"]);
    assert!(lines.iter().all(|r| f(r, "mode") >= 1.0 && r["physical"] == "true"));
    let total: f64 = lines.iter().map(|r| f(r, "prob")).sum();
    assert!(total >= 1.0 - 1e-10);
    let modes: Vec<f64> = lines.iter().map(|r| f(r, "mode")).collect();
    assert!(modes.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn naive_spectrum_flags_unphysical_modes() {
    let lines = run_rows(&["spectrum", "--n0", "6", "--m", "5", "--N", "1", "--model", "classical-naive"]);
    let unphysical: Vec<&Row> = lines.iter().filter(|r| r["physical"] == "false").collect();
    assert!(!unphysical.is_empty());
    assert!(unphysical.iter().all(|r| f(r, "mode") <= 0.0));
    assert!(unphysical.iter().any(|r| f(r, "prob") > 1e-4));
    for r in &lines {
        assert_eq!(f(r, "mode"), 6.0 + f(r, "q_offset"));
    }
}

#[test]
fn undriven_spectrum_is_one_line() {
    for model in ["quantum", "classical-naive"] {
        let lines = run_rows(&["spectrum", "--n0", "6", "--m", "0", "--model", model]);
        assert_eq!(lines.len(), 1);
        assert_eq!(f(&lines[0], "prob"), 1.0);
        assert_eq!(f(&lines[0], "mode"), 6.0);
    }
}

#[test]
fn spectrum_matches_golden_file() {
    let out = eopm(&["spectrum", "--n0", "6", "--m", "5", "--N", "1", "--theta", "0.3", "--phi-b", "0.7"]);
    assert_eq!(code(&out), 0);
    let golden = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/spectrum_n0_6_m_5.csv")).unwrap();
    let version_line = format!("# eopm {}", env!("CARGO_PKG_VERSION"));
    let strip = |text: &str| -> Vec<String> {
        text.lines().filter(|l| !l.starts_with("# eopm ")).map(String::from).collect()
    };
    assert!(stdout(&out).starts_with(&version_line));
    assert_eq!(strip(&stdout(&out)), strip(&golden));
}

#[test]
fn spectrum_from_frequency() {
    let omega = 2.0 * std::f64::consts::PI * 7.0 * 3.0e8 / 1.5;
    let arg = omega.to_string();
    let by_frequency = run_rows(&["spectrum", "--omega0", &arg, "--length", "1.5", "--speed", "3e8", "--m", "1.2"]);
    let by_index = run_rows(&["spectrum", "--n0", "7", "--m", "1.2"]);
    assert_eq!(by_frequency, by_index);

    let off_grid = (omega * 1.05).to_string();
    let out = eopm(&["spectrum", "--omega0", &off_grid, "--length", "1.5", "--speed", "3e8", "--m", "1.2"]);
    assert_eq!(code(&out), 2);
    let both = eopm(&["spectrum", "--omega0", &arg, "--n0", "7", "--length", "1.5", "--speed", "3e8", "--m", "1"]);
    assert_eq!(code(&both), 2);
}

#[test]
fn invalid_configurations_exit_2() {
    for args in [
        vec!["spectrum", "--n0", "0", "--m", "1"],
        vec!["spectrum", "--n0", "5", "--m", "-1"],
        vec!["spectrum", "--n0", "5", "--m", "1", "--N", "0"],
        vec!["spectrum", "--n0", "5", "--m", "1", "--tail-tol", "0.1"],
        vec!["spectrum", "--m", "1"],
        vec!["spectrum", "--n0", "5"],
        vec!["unitarity", "--m", "1", "--p0-max", "0"],
        vec!["oracle-check", "--q0", "0"],
        vec!["oracle-check", "--r0", "1"],
        vec!["multitone", "--n0", "10", "--tones", "0.1:0"],
        vec!["bogus"],
    ] {
        assert_eq!(code(&eopm(&args)), 2, "{args:?}");
    }
}

#[test]
fn unitarity_sweep() {
    let out = eopm(&["unitarity", "--m", "5", "--N", "1"]);
    assert_eq!(code(&out), 0);
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 144);
    assert!(table.iter().all(|r| f(r, "defect") <= 1e-10 && r["pass"] == "true"));

    assert_eq!(code(&eopm(&["unitarity", "--m", "5", "--threshold", "1e-30"])), 1);

    let undriven = run_rows(&["unitarity", "--m", "0", "--theta", "1.1"]);
    assert!(undriven.iter().all(|r| f(r, "defect") == 0.0));
}

#[test]
fn oracle_sweeps() {
    for oracle in ["matrix-exp", "path-sum", "adjoint"] {
        let out = eopm(&["oracle-check", "--oracle", oracle, "--theta", "0.4"]);
        assert_eq!(code(&out), 0, "{oracle}");
        let table = rows(&stdout(&out));
        assert_eq!(table.len(), 18);
        assert!(table.iter().all(|r| f(r, "max_deviation") <= 1e-9));

        let undriven = run_rows(&["oracle-check", "--oracle", oracle, "--m", "0", "--theta", "0.4"]);
        assert!(undriven.iter().all(|r| f(r, "max_deviation") == 0.0), "{oracle}");
    }
    let out = eopm(&["oracle-check", "--oracle", "path-sum", "--m", "5", "--s-max", "4"]);
    assert_eq!(code(&out), 1);
    assert!(rows(&stdout(&out)).iter().any(|r| r["pass"] == "false"));
}

#[test]
fn oracle_check_off_residue_zero() {
    let out = eopm(&["oracle-check", "--N", "3,4", "--r0", "2", "--theta", "1", "--phi-b", "0.3"]);
    assert_eq!(code(&out), 0);
}

fn by_mode(table: &[Row]) -> BTreeMap<i64, (f64, f64)> {
    table
        .iter()
        .map(|r| (r["mode"].parse().unwrap(), (f(r, "amp_re"), f(r, "amp_im"))))
        .collect()
}

fn max_gap(a: &BTreeMap<i64, (f64, f64)>, b: &BTreeMap<i64, (f64, f64)>) -> f64 {
    let mut modes: Vec<i64> = a.keys().chain(b.keys()).copied().collect();
    modes.dedup();
    modes
        .iter()
        .map(|n| {
            let x = a.get(n).copied().unwrap_or_default();
            let y = b.get(n).copied().unwrap_or_default();
            (x.0 - y.0).hypot(x.1 - y.1)
        })
        .fold(0.0, f64::max)
}

#[test]
fn single_tone_multitone_matches_spectrum() {
    let reference = by_mode(&run_rows(&["spectrum", "--n0", "300", "--m", "0.15", "--N", "2", "--theta", "0.4", "--phi-b", "0.2"]));
    for (model, tol) in [("two-tone-factored", 0.0), ("large-carrier", 1e-15), ("oracle", 1e-10), ("small-m", 0.15 * 0.15)] {
        let table = run_rows(&["multitone", "--n0", "300", "--tones", "0.15:0.4:2", "--phi-b", "0.2", "--model", model]);
        let gap = max_gap(&by_mode(&table), &reference);
        assert!(gap <= tol, "{model}: {gap}");
    }
    let spectrum = stdout(&eopm(&["spectrum", "--n0", "300", "--m", "0.15", "--N", "2", "--theta", "0.4", "--phi-b", "0.2"]));
    let factored = stdout(&eopm(&["multitone", "--n0", "300", "--tones", "0.15:0.4:2", "--phi-b", "0.2"]));
    assert_eq!(rows(&spectrum), rows(&factored));
}

fn deviation_report(dir: &TempDir, n0: &str, tones: &str) -> f64 {
    let out = out_path(dir, &format!("mt_{n0}_{}.csv", tones.len()));
    let run = eopm(&["multitone", "--n0", n0, "--tones", tones, "--output", path_str(&out)]);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let sidecar = out.with_file_name(format!("{}.deviation.csv", out.file_stem().unwrap().to_str().unwrap()));
    let report = rows(&fs::read_to_string(sidecar).unwrap());
    assert_eq!(report.len(), 1);
    f(&report[0], "max_deviation")
}

#[test]
fn multitone_deviation_report_scales_quadratically() {
    let dir = tempfile::tempdir().unwrap();
    let full = deviation_report(&dir, "5", "0.4:0:3,0.4:1.5707963267948966:7");
    let half = deviation_report(&dir, "5", "0.2:0:3,0.2:1.5707963267948966:7");
    let ratio = full / half;
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn multitone_report_on_stderr_without_output() {
    let out = eopm(&["multitone", "--n0", "40", "--tones", "0.2:0:3,0.1:1:5", "--model", "small-m"]);
    assert_eq!(code(&out), 0);
    let report = String::from_utf8(out.stderr).unwrap();
    assert!(report.contains("max_deviation,total_probability"));
}

#[test]
fn multitone_precondition_exits() {
    let small = eopm(&["multitone", "--n0", "200", "--tones", "0.5:0:3", "--model", "small-m"]);
    assert_eq!(code(&small), 2);
    let misuse = eopm(&["multitone", "--n0", "200", "--tones", "0.4:0:3,0.4:0:7", "--model", "large-carrier"]);
    assert_eq!(code(&misuse), 4);
    let three = eopm(&["multitone", "--n0", "200", "--tones", "0.1:0:3,0.1:0:7,0.1:0:11"]);
    assert_eq!(code(&three), 2);
    let nine = ["0.01:0:1"; 9].join(",");
    assert_eq!(code(&eopm(&["multitone", "--n0", "50", "--tones", &nine, "--model", "small-m"])), 2);
    let eight = ["0.01:0:1"; 8].join(",");
    assert_eq!(code(&eopm(&["multitone", "--n0", "50", "--tones", &eight, "--model", "small-m"])), 0);
}

#[test]
fn classical_compare_joins_models() {
    let table = run_rows(&["classical-compare", "--n0", "6", "--m", "5"]);
    for r in &table {
        let diff = f(r, "quantum_prob") - f(r, "naive_prob");
        assert_eq!(f(r, "prob_diff"), diff);
        if f(r, "mode") <= 0.0 {
            assert_eq!(r["physical"], "false");
            assert_eq!(f(r, "quantum_prob"), 0.0);
        }
    }
    let quantum = run_rows(&["spectrum", "--n0", "6", "--m", "5"]);
    for q in &quantum {
        let joined = table.iter().find(|r| r["mode"] == q["mode"]).unwrap();
        assert_eq!(joined["quantum_re"], q["amp_re"]);
        assert_eq!(joined["quantum_im"], q["amp_im"]);
    }
}

#[test]
fn header_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_path(&dir, "s.csv");
    let run = eopm(&["spectrum", "--n0", "9", "--m", "2", "--N", "3", "--threads", "2", "--output", path_str(&out)]);
    assert_eq!(code(&run), 0);
    assert!(run.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let head = header(&text);
    assert_eq!(head[0], format!("# eopm {}", env!("CARGO_PKG_VERSION")));
    assert_eq!(head[1], "# command = spectrum");
    let keys: Vec<&str> = head[2..]
        .iter()
        .map(|l| l.trim_start_matches("# ").split(" = ").next().unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for key in ["N", "format", "m", "model", "n0", "phi-b", "tail-tol", "theta"] {
        assert!(keys.contains(&key), "{key}");
    }
    for key in ["threads", "output", "config"] {
        assert!(!keys.contains(&key), "{key}");
    }
    assert_eq!(
        text.lines().nth(head.len()).unwrap(),
        "mode,q_offset,amp_re,amp_im,prob,physical"
    );
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = out_path(&dir, "run.cfg");
    fs::write(&config, "# single tone\nn0 = 9\nm = 2\nN = 3\ntheta = 0.5\n\nmodel = classical-naive\n").unwrap();
    let from_file = stdout(&eopm(&["spectrum", "--config", path_str(&config), "--model", "quantum"]));
    let from_flags = stdout(&eopm(&["spectrum", "--n0", "9", "--m", "2", "--N", "3", "--theta", "0.5"]));
    assert_eq!(from_file, from_flags);

    let overridden = stdout(&eopm(&["spectrum", "--config", path_str(&config), "--m", "1"]));
    assert!(header(&overridden).contains(&"# m = 1"));
    assert!(header(&overridden).contains(&"# model = classical-naive"));

    fs::write(&config, "n0 = 9\nm = 2\nunknown = 4\n").unwrap();
    assert_eq!(code(&eopm(&["spectrum", "--config", path_str(&config)])), 2);
    fs::write(&config, "n0 9\n").unwrap();
    assert_eq!(code(&eopm(&["spectrum", "--config", path_str(&config), "--m", "1"])), 2);
    assert_eq!(code(&eopm(&["spectrum", "--config", "/nonexistent/run.cfg", "--m", "1", "--n0", "3"])), 2);
}

#[test]
fn json_output_matches_csv() {
    let csv_rows = run_rows(&["spectrum", "--n0", "4", "--m", "1.5", "--N", "2"]);
    let out = eopm(&["spectrum", "--n0", "4", "--m", "1.5", "--N", "2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["tool"], "eopm");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["config"]["format"], "json");
    let json_rows = doc["rows"].as_array().unwrap();
    assert_eq!(json_rows.len(), csv_rows.len());
    for (j, c) in json_rows.iter().zip(&csv_rows) {
        assert_eq!(j["mode"].as_i64().unwrap().to_string(), c["mode"]);
        assert_eq!(j["amp_re"].as_f64().unwrap(), f(c, "amp_re"));
        assert_eq!(j["prob"].as_f64().unwrap(), f(c, "prob"));
        assert_eq!(j["physical"].as_bool().unwrap().to_string(), c["physical"]);
    }
}

#[test]
fn csv_floats_round_trip() {
    let out = stdout(&eopm(&["spectrum", "--n0", "4", "--m", "1.5", "--N", "2", "--format", "json"]));
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    let table = run_rows(&["spectrum", "--n0", "4", "--m", "1.5", "--N", "2"]);
    for (j, c) in doc["rows"].as_array().unwrap().iter().zip(&table) {
        let exact = j["amp_im"].as_f64().unwrap();
        assert_eq!(exact.to_bits(), f(c, "amp_im").to_bits());
        let mantissa = c["amp_im"].trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17);
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&eopm(&["--help"])), 0);
    assert_eq!(code(&eopm(&["--version"])), 0);
    assert_eq!(code(&eopm(&["spectrum", "--help"])), 0);
}
