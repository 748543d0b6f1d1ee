//! End-to-end runs of the `hfield` binary and of the library entry point.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hfield::expansion::Expander;
use hfield::{ConnectionSpec, Direction, WirtingerPolynomial};
use hfield_cli::{prepare_config, run_suites, Formats, Overrides, RunConfig, Status, Suite};
use tempfile::TempDir;

fn hfield(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hfield"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn default_identity_sweep_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().to_str().unwrap();
    let run = hfield(&["verify-identity", "--out", out]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(tmp.path(), "identity.json")).unwrap();
    // 127 sequences of length ≤ 6, three indices, three functions
    assert_eq!(report["total"], 1143);
    assert_eq!(report["failed"], 0);
    assert_eq!(report["cells"].as_array().unwrap().len(), 1143);
}

#[test]
fn empty_index_list_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"indices": []}"#);
    let run = hfield(&["verify-identity", "--config", &cfg]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("basis-index list is empty"));
}

#[test]
fn non_real_potential_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"connection": {"g": [[2,0,"1","0"]]}}"#);
    assert_eq!(
        hfield(&["curvature", "--config", &cfg]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_config_file_and_bad_flags_are_usage_errors() {
    assert_eq!(
        hfield(&["splittings", "--config", "/nonexistent/cfg.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        hfield(&["splittings", "--m-max", "many"]).status.code(),
        Some(2)
    );
    assert_eq!(hfield(&["no-such-suite"]).status.code(), Some(2));
}

#[test]
fn curvature_without_potential_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), r#"{"connection": {"k": [[0,1,"1","0"]]}}"#);
    assert_eq!(
        hfield(&["curvature", "--config", &cfg]).status.code(),
        Some(2)
    );
    // the same connection is fine for suites that only need k
    assert_eq!(
        hfield(&["verify-identity", "--config", &cfg, "--m-max", "3"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn corrupted_expansion_fails_verification() {
    let cfg = prepare_config(
        None,
        &Overrides {
            m_max: Some(4),
            ..Overrides::default()
        },
    )
    .unwrap();
    let corrupted =
        |e: &Expander, d: &[Direction], c: &ConnectionSpec, j: usize, f: &WirtingerPolynomial| {
            if d.is_empty() {
                return e.expansion(d, c, j, f);
            }
            let (s1, s2) = e.type_sums(d, c, j, f);
            &s2 - &s1
        };
    let outcomes = run_suites(&cfg, &[Suite::Identity], Formats::JSON, &corrupted).unwrap();
    assert_eq!(Status::from_outcomes(&outcomes), Status::Failed);
    assert_eq!(Status::from_outcomes(&outcomes).code(), 1);
    let report: serde_json::Value =
        serde_json::from_str(&outcomes[0].artifacts[0].contents).unwrap();
    assert!(report["failed"].as_u64().unwrap() > 0);
    assert_eq!(report["passed"], false);
}

#[test]
fn splitting_table_counts() {
    let tmp = TempDir::new().unwrap();
    let run = hfield(&["splittings", "--csv", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0));
    assert!(!tmp.path().join("splittings.json").exists());
    let rows = csv_rows(&read(tmp.path(), "splittings.csv"));
    assert_eq!(rows[0][..3], ["0", "1", "1"]);
    let total = |m: &str| rows.iter().find(|r| r[0] == m && r[1] == "all").unwrap()[2].clone();
    assert_eq!(total("2"), "5");
    assert_eq!(total("3"), "15");
    // Bell numbers B(m+1)
    assert_eq!(total("8"), "21147");
    assert!(rows.iter().all(|r| r[5] == "pass"));
    for r in rows.iter().filter(|r| r[0] != "0") {
        let sum: u64 = r[3].parse::<u64>().unwrap() + r[4].parse::<u64>().unwrap();
        assert_eq!(sum.to_string(), r[2]);
    }
}

fn curvature_rows(config: &str) -> (i32, Vec<Vec<String>>, Vec<Vec<String>>) {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), config);
    let out = tmp.path().join("out");
    let run = hfield(&[
        "curvature",
        "--csv",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    let code = run.status.code().unwrap();
    (
        code,
        csv_rows(&read(&out, "curvature.csv")),
        csv_rows(&read(&out, "curvature_growth.csv")),
    )
}

#[test]
fn curvature_of_the_standard_potential_grows_linearly() {
    let (code, spectrum, growth) = curvature_rows(r#"{"connection": {"g": [[1,1,"1","0"]]}}"#);
    assert_eq!(code, 0);
    let at_origin: Vec<_> = spectrum
        .iter()
        .filter(|r| r[1] == "0/1" && r[2] == "0/1")
        .collect();
    assert_eq!(at_origin.len(), 10);
    for (j, row) in at_origin.iter().enumerate() {
        assert_eq!(row[3], format!("-{}", 2 * (j + 1)));
        assert_eq!(row[4].parse::<f64>().unwrap(), 2.0 * (j + 1) as f64);
        assert_eq!(row[5], "true");
    }
    assert!(growth.iter().all(|r| r[3] == "true" && r[5] == "true"));
}

#[test]
fn harmonic_potential_is_flat() {
    let (code, spectrum, growth) =
        curvature_rows(r#"{"connection": {"g": [[2,0,"1","0"],[0,2,"1","0"]]}}"#);
    assert_eq!(code, 0);
    assert!(spectrum.iter().all(|r| r[3] == "0" && r[4] == "0.0"));
    assert!(growth
        .iter()
        .all(|r| r[3] == "false" && r[4] == "true" && r[5] == "true"));
}

#[test]
fn quartic_potential_is_flat_only_at_the_origin() {
    let (code, spectrum, growth) = curvature_rows(
        r#"{"connection": {"g": [[2,2,"1","0"]]},
            "curvature": {"j_max": 5, "points": [["0","0"],["1","0"]]}}"#,
    );
    assert_eq!(code, 0);
    let abs_at = |re: &str| -> Vec<f64> {
        spectrum
            .iter()
            .filter(|r| r[1] == re)
            .map(|r| r[4].parse().unwrap())
            .collect()
    };
    assert!(abs_at("0/1").iter().all(|&v| v == 0.0));
    assert!(abs_at("1/1").iter().all(|&v| v > 0.0));
    assert_eq!(growth[0][2], "0/1");
    assert_eq!(growth[0][3], "false");
    assert_eq!(growth[1][3], "true");
}

#[test]
fn analyticity_certificates_round_trip_and_scale_with_index() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"indices": [0, 4], "functions": [[[0,0,"1","0"]]]}"#,
    );
    let out = tmp.path().join("out");
    let run = hfield(&[
        "analyticity",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        run.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );

    let cert = |j: usize| -> serde_json::Value {
        serde_json::from_str(&read(&out, &format!("certificate_j{j}_f0.json"))).unwrap()
    };
    let m_of = |v: &serde_json::Value| -> f64 {
        let (p, q) = v["M"].as_str().unwrap().split_once('/').unwrap();
        p.parse::<f64>().unwrap() / q.parse::<f64>().unwrap()
    };
    let (c0, c4) = (cert(0), cert(4));
    assert_eq!(c0["audited"], true);
    assert_eq!(c0["epsilon"], "1/2");
    assert!(m_of(&c4) > m_of(&c0));

    let f = WirtingerPolynomial::one();
    let conn = ConnectionSpec::from_k(WirtingerPolynomial::sbar());
    for (j, text) in [
        (0, read(&out, "certificate_j0_f0.json")),
        (4, read(&out, "certificate_j4_f0.json")),
    ] {
        let back =
            hfield::analyticity::AnalyticityEstimate::from_json(&text, &f, &conn, j).unwrap();
        assert!(hfield::analyticity::audit_certificate(&back).passed);
    }

    for j in [0, 4] {
        let decay = csv_rows(&read(&out, &format!("decay_j{j}_f0.csv")));
        assert_eq!(decay.len(), 11);
        assert!(decay.iter().all(|r| r[4] == "true"));
        let greedy = csv_rows(&read(&out, &format!("greedy_j{j}_f0.csv")));
        assert_eq!(greedy.len(), 13);
        assert!(greedy.iter().all(|r| r[5] == "true" && r[7] == "true"));
    }
}

#[test]
fn flat_connection_decay_vanishes_past_the_degree() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"connection": {"k": []}, "indices": [2], "functions": [[[1,1,"1","0"]]], "m_decay": 6}"#,
    );
    let out = tmp.path().join("out");
    let run = hfield(&[
        "analyticity",
        "--csv",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0));
    let decay = csv_rows(&read(&out, "decay_j2_f0.csv"));
    for row in &decay {
        let m: usize = row[0].parse().unwrap();
        let sup: f64 = row[1].parse().unwrap();
        assert_eq!(sup == 0.0, m > 2, "m = {m}");
    }
}

#[test]
fn reports_are_deterministic() {
    let run = || {
        let out = hfield(&["all", "--m-max", "3", "--grid", "16"]);
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}

#[test]
fn default_config_round_trips_through_json() {
    let cfg = RunConfig::default();
    let text = serde_json::to_string(&cfg).unwrap();
    let back = RunConfig::from_json(&text).unwrap();
    assert_eq!(serde_json::to_string(&back).unwrap(), text);
}
