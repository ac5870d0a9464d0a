use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use edge_surgery::plane::{solve_center, solve_misiurewicz, Complex64, SolverSettings};
use edge_surgery::Angle;
use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fig2() -> PathBuf {
    configs().join("fig2.json")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn cli(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_edge-surgery"))
        .args(args)
        .output()
        .unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn with_config(path: &Path, args: &[&str]) -> Run {
    let mut all = vec!["--config", path.to_str().unwrap()];
    all.extend_from_slice(args);
    cli(&all)
}

fn angle(n: i64, d: i64) -> Angle {
    Angle::new(n, d).unwrap()
}

fn point(v: &Value) -> Complex64 {
    Complex64::new(v["re"].as_f64().unwrap(), v["im"].as_f64().unwrap())
}

/// Writes fig2.json with one field replaced or removed.
fn edited_config(dir: &TempDir, key: &str, value: Option<&str>) -> PathBuf {
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(fig2()).unwrap()).unwrap();
    let map = doc.as_object_mut().unwrap();
    match value {
        Some(v) => map.insert(key.into(), v.into()),
        None => map.remove(key),
    };
    let path = dir.path().join(format!("{key}.json"));
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    path
}

#[test]
fn validate_reports_first_return_data() {
    let run = with_config(&fig2(), &["validate"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = &run.json()["results"];
    assert_eq!(r["valid"], true);
    let k: Vec<u64> = ["k_v", "k_w", "k_tilde_v", "k_tilde_w"]
        .iter()
        .map(|key| r[key].as_u64().unwrap())
        .collect();
    assert_eq!(k, [7, 4, 4, 7]);
    assert_eq!(
        (r["sigma_v"].as_i64(), r["sigma_w"].as_i64()),
        (Some(1), Some(-1))
    );
    assert_eq!(r["alpha_v"], "4/7");
}

#[test]
fn bundled_tuned_config_validates() {
    let run = with_config(&configs().join("fig2_tuned.json"), &["validate"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = &run.json()["results"];
    assert_eq!(r["k_v"], 14);
    assert_eq!(r["angles"][0], "1423/4032");
}

#[test]
fn format_and_usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let seven = edited_config(&dir, "theta1_plus", None);
    assert_eq!(with_config(&seven, &["validate"]).code, 2);
    let garbled = edited_config(&dir, "theta3_minus", Some("103|504"));
    assert_eq!(with_config(&garbled, &["validate"]).code, 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(with_config(&missing, &["validate"]).code, 2);
    assert_eq!(cli(&["validate"]).code, 2);
    assert_eq!(
        with_config(&fig2(), &["--set", "bogus=1", "validate"]).code,
        2
    );
    assert_eq!(
        with_config(&fig2(), &["--set", "newton_tolerance=-1", "validate"]).code,
        2
    );
    assert_eq!(with_config(&fig2(), &["map-angle", "3/0"]).code, 2);
    assert_eq!(
        with_config(&fig2(), &["map-param", "--center", "x", "1/5"]).code,
        2
    );
}

#[test]
fn invalid_configs_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = edited_config(&dir, "theta2_minus", Some("201/1008"));
    let run = with_config(&bad, &["validate"]);
    assert_eq!(run.code, 1);
    let report = run.json();
    assert_eq!(report["results"]["valid"], false);
    assert_eq!(report["results"]["colanding_ok"], false);
    assert!(!report["errors"].as_array().unwrap().is_empty());
    assert_eq!(with_config(&bad, &["map-angle", "1/5"]).code, 1);
    assert_eq!(with_config(&bad, &["domains", "2"]).code, 1);
}

#[test]
fn map_angle_examples() {
    for (theta, n, expected) in [
        ("199/1008", "1", "103/504"),
        ("3/4", "7", "3/4"),
        ("11/56", "-3", "11/56"),
        ("25/127", "1", "1/5"),
    ] {
        let run = with_config(&fig2(), &["map-angle", theta, "-n", n]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let r = &run.json()["results"];
        assert_eq!(r["image"], expected, "{theta}");
        assert_eq!(r["round_trip"], theta);
    }
    let r = with_config(&fig2(), &["map-angle", "199/1008"]).json()["results"].clone();
    assert_eq!(r["expansion"], "0.001(101000)");
    assert_eq!(r["orbit_class"]["preperiod"], 3);
    assert_eq!(r["orbit_class"]["period"], 6);
}

#[test]
fn map_angle_round_trips() {
    for theta in ["1/5", "26/127", "45/224", "203/1000", "7/31", "1/2"] {
        for n in ["2", "-2", "5"] {
            let run = with_config(&fig2(), &["map-angle", theta, "-n", n]);
            assert_eq!(run.code, 0, "{theta} {n}: {}", run.stderr);
            let r = run.json();
            assert_eq!(r["results"]["round_trip"], theta);
            assert!(r["errors"].as_array().unwrap().is_empty());
        }
    }
}

#[test]
fn map_param_moves_centers_along_the_edge() {
    let settings = SolverSettings::default();
    let run = with_config(&fig2(), &["map-param", "--center", "7", "25/127"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = &run.json()["results"];
    assert_eq!(r["image_angle"], "1/5");
    let c4 = solve_center(4, &angle(1, 5), &settings).unwrap().point;
    assert!((point(&r["image"]["c"]) - c4).norm() < 1e-9);

    let r = with_config(&fig2(), &["map-param", "--center", "4", "1/5"]).json()["results"].clone();
    assert_eq!(r["image_angle"], "26/127");
    assert_eq!(r["image_orbit_class"]["period"], 7);
    let b = solve_misiurewicz(&angle(23, 112), &settings).unwrap().point;
    let c7 = point(&r["image"]["c"]);
    assert!((c7 - b).norm() < (c4 - b).norm());
}

#[test]
fn map_param_fixes_the_outer_vertex() {
    for n in ["1", "-2", "3"] {
        let run = with_config(&fig2(), &["map-param", "--misiurewicz", "11/56", "-n", n]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        let r = &run.json()["results"];
        assert_eq!(r["image_angle"], "11/56");
        assert!(r["displacement"].as_f64().unwrap() < 1e-9);
    }
}

#[test]
fn domains_examples() {
    let pairs = |n: &str| with_config(&fig2(), &["domains", n]).json()["results"].clone();
    let zero = pairs("0");
    assert_eq!(zero["pairs"].as_array().unwrap().len(), 1);
    assert_eq!(zero["pairs"][0]["minus"], "199/1008");
    assert_eq!(zero["pairs"][0]["plus"], "269/1008");
    let one = pairs("1");
    let listed: Vec<(String, String)> = one["pairs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| (p["minus"].to_string(), p["plus"].to_string()))
        .collect();
    assert!(listed.contains(&("\"199/1008\"".into(), "\"269/1008\"".into())));
    assert!(listed.contains(&("\"103/504\"".into(), "\"131/504\"".into())));
    let twenty = pairs("20");
    assert_eq!(twenty["pairs"].as_array().unwrap().len(), 41);
    for side in ["minus", "plus"] {
        assert!(twenty["last_distance_to_theta4"][side].as_f64().unwrap() < 1e-4);
    }
}

#[test]
fn domains_with_parameters() {
    let run = with_config(&fig2(), &["--numeric", "domains", "1"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let params = run.json()["results"]["parameters"].clone();
    assert_eq!(params.as_array().unwrap().len(), 3);
}

#[test]
fn tune_writes_the_bundled_fixture() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = with_config(&fig2(), &["--out", out, "tune", "01", "10"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let written = fs::read_to_string(dir.path().join("fig2_tuned.json")).unwrap();
    let bundled = fs::read_to_string(configs().join("fig2_tuned.json")).unwrap();
    assert_eq!(written, bundled);
    assert_eq!(run.json()["results"]["validation"]["valid"], true);
    let again = with_config(&dir.path().join("fig2_tuned.json"), &["validate"]);
    assert_eq!(again.code, 0);
}

#[test]
fn trivial_tuning_changes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        with_config(&fig2(), &["--out", out, "tune", "0", "1"]).code,
        0
    );
    let written: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fig2_tuned.json")).unwrap())
            .unwrap();
    let original: Value = serde_json::from_str(&fs::read_to_string(fig2()).unwrap()).unwrap();
    assert_eq!(written, original);
}

#[test]
fn bad_tuning_words_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    for (w0, w1) in [("01", "01"), ("0", "10"), ("0a", "1b"), ("10", "01")] {
        assert_eq!(
            with_config(&fig2(), &["--out", out, "tune", w0, w1]).code,
            2,
            "{w0} {w1}"
        );
    }
}

#[test]
fn render_writes_image_and_overlay() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = with_config(
        &fig2(),
        &["--out", out, "render", "--width", "48", "--height", "36"],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let ppm = fs::read(dir.path().join("parameter.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n48 36\n255\n"));
    assert_eq!(ppm.len(), "P6\n48 36\n255\n".len() + 48 * 36 * 3);
    let svg = fs::read_to_string(dir.path().join("parameter.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 8);
    assert!(svg.contains("data-angle=\"15/56\""));
    let report = fs::read_to_string(dir.path().join("render.json")).unwrap();
    assert_eq!(report, run.stdout);
}

#[test]
fn render_dynamic_plane_defaults_to_the_inner_center() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = with_config(
        &fig2(),
        &[
            "--out", out, "render", "--plane", "dynamic", "--width", "40", "--height", "30",
        ],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let c = point(&run.json()["results"]["c"]);
    let c4 = solve_center(4, &angle(1, 5), &SolverSettings::default())
        .unwrap()
        .point;
    assert!((c - c4).norm() < 1e-9);
    assert!(dir.path().join("dynamic.ppm").exists());
    let explicit = with_config(
        &fig2(),
        &[
            "--out", out, "render", "--plane", "dynamic", "--c", "-1,0", "--width", "8",
            "--height", "8",
        ],
    );
    assert_eq!(explicit.code, 0, "{}", explicit.stderr);
}

#[test]
fn zero_size_viewport_is_rejected() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().to_str().unwrap();
    let run = with_config(&fig2(), &["--out", out, "render", "--width", "0"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("viewport"));
    let run = with_config(&fig2(), &["--out", out, "render", "--half-width", "0"]);
    assert_eq!(run.code, 2);
}

#[test]
fn trace_ray_prints_potential_columns() {
    let run = cli(&["trace-ray", "1/3", "--c", "0,0"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows: Vec<[f64; 3]> = run
        .stdout
        .lines()
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[1][2] < w[0][2]));
    let last = rows.last().unwrap();
    let expected = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    assert!((Complex64::new(last[0], last[1]) - expected).norm() < 1e-6);
    let parameter = cli(&["trace-ray", "1/4"]);
    assert_eq!(parameter.code, 0);
    assert!(parameter.stdout.lines().count() > 100);
}

#[test]
fn settings_overrides_reach_the_report() {
    let run = with_config(&fig2(), &["--set", "ray_final_potential=1e-8", "validate"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json()["settings"]["ray_final_potential"], 1e-8);
}

#[test]
fn reports_are_repeatable() {
    let args = ["--numeric", "validate"];
    let first = with_config(&fig2(), &args);
    assert_eq!(first.code, 0, "{}", first.stderr);
    assert_eq!(first.stdout, with_config(&fig2(), &args).stdout);
    assert_eq!(first.json()["version"], env!("CARGO_PKG_VERSION"));
}
