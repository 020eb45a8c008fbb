use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nh3pt(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nh3pt"))
        .arg("-q")
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("NH3PT_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Data rows of a CSV written by the CLI, header first.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(body.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

fn column(path: &Path, name: &str) -> Vec<Option<f64>> {
    let rows = csv_rows(path);
    let k = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[k].parse().ok()).collect()
}

#[test]
fn zero_point_is_the_zero_result() {
    let tmp = tempfile::tempdir().unwrap();
    let v = json(&ok(nh3pt(&["point", "--wgen", "0", "--wfc", "0"], tmp.path())));
    assert_eq!(v["w_sys_kw"], 0.0);
    assert_eq!(v["eta_sys"], 0.0);
    assert_eq!(v["config_fingerprint"].as_str().unwrap().len(), 64);
}

#[test]
fn ice_hybrid_point_near_its_efficiency_peak() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["point", "--topology", "ice_hybrid", "--measure", "IV", "--wgen", "89.5"];
    let eta = json(&ok(nh3pt(&args, tmp.path())))["eta_sys"].as_f64().unwrap();
    assert!((eta - 0.3878).abs() <= 0.015, "{eta}");
}

#[test]
fn infeasible_point_exits_one_with_json_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = nh3pt(&["point", "--topology", "ice_hybrid", "--wgen", "900"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "infeasible");
}

#[test]
fn misspelled_key_exits_two_and_names_it() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[system]\ntopology = \"composite\"\n\n[bed]\nlenght_m = 3.0\n").unwrap();
    let out = nh3pt(&["--config", cfg.to_str().unwrap(), "point", "--wgen", "40", "--wfc", "30"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lenght_m") && stderr.contains("line 5"), "{stderr}");
}

#[test]
fn partial_config_fills_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("part.toml");
    std::fs::write(&cfg, "[system]\nmeasure = \"II\"\n").unwrap();
    let a = json(&ok(nh3pt(&["--config", cfg.to_str().unwrap(), "point", "--wgen", "40", "--wfc", "30"], tmp.path())));
    let b = json(&ok(nh3pt(&["point", "--measure", "II", "--wgen", "40", "--wfc", "30"], tmp.path())));
    assert_eq!(a["eta_sys"], b["eta_sys"]);
    assert_eq!(a["measure"], "II");
}

#[test]
fn one_cell_map_equals_point() {
    let tmp = tempfile::tempdir().unwrap();
    let p = json(&ok(nh3pt(&["point", "--wgen", "40", "--wfc", "30"], tmp.path())));
    ok(nh3pt(&["map", "--gen", "40", "--fc", "30"], tmp.path()));
    let path = tmp.path().join("map_IV.csv");
    assert_eq!(column(&path, "w_sys_kw"), vec![p["w_sys_kw"].as_f64()]);
    assert_eq!(column(&path, "eta_sys"), vec![p["eta_sys"].as_f64()]);
    let manifest: Value = serde_json::from_slice(&std::fs::read(tmp.path().join("map_IV.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_fingerprint"], p["config_fingerprint"]);
}

#[test]
fn curve_four_dominates_curve_one() {
    let tmp = tempfile::tempdir().unwrap();
    ok(nh3pt(&["curve", "--measure", "I", "IV"], tmp.path()));
    let read = |m: &str| {
        let p = tmp.path().join(format!("curve_{m}.csv"));
        let t = column(&p, "target_kw");
        let e = column(&p, "eta_sys");
        t.into_iter().zip(e).map(|(t, e)| (t.unwrap().to_bits(), e.unwrap())).collect::<std::collections::HashMap<_, _>>()
    };
    let (one, four) = (read("I"), read("IV"));
    assert!(one.len() > 50);
    for (t, e1) in &one {
        let e4 = four.get(t).unwrap_or_else(|| panic!("IV misses target {}", f64::from_bits(*t)));
        assert!(e4 >= e1, "{}: {e4} < {e1}", f64::from_bits(*t));
    }
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_nh3pt"))
        .args(["-q", "sweep", "--r", "0.4,0.6"])
        .env("NH3PT_OUTPUT_DIR", tmp.path())
        .current_dir(tmp.path())
        .output()
        .unwrap();
    ok(out);
    assert!(tmp.path().join("sweep.csv").exists());
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(nh3pt(&["sweep", "--r", "0.3,0.7"], d));
        ok(nh3pt(&["map", "--gen", "0:20:100", "--fc", "0,20,40"], d));
    }
    for f in ["sweep.csv", "sweep.manifest.json", "map_IV.csv", "map_IV.manifest.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn fig6_conversion_falls_with_ghsv() {
    let tmp = tempfile::tempdir().unwrap();
    ok(nh3pt(&["fig", "fig6"], tmp.path()));
    let path = tmp.path().join("fig6.csv");
    let rows = csv_rows(&path);
    assert!(rows[0].iter().eq(["temperature_k", "ghsv_per_h", "conversion", "h2_rate_mol_s"].iter()));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# units: K, 1/h, fraction, mol/s\n# config sha256: "));
    for temp in ["673.15", "723.15", "773.15", "823.15"] {
        let x: Vec<f64> = rows[1..].iter().filter(|r| r[0] == temp).map(|r| r[2].parse().unwrap()).collect();
        assert_eq!(x.len(), 30);
        assert!(x.windows(2).all(|w| w[1] < w[0]), "{temp}");
    }
}

#[test]
fn fig11_rows_keep_measure_dominance() {
    let tmp = tempfile::tempdir().unwrap();
    ok(nh3pt(&["fig", "fig11"], tmp.path()));
    let path = tmp.path().join("fig11.csv");
    let eta: Vec<Vec<Option<f64>>> = ["I", "II", "III", "IV"].iter().map(|m| column(&path, &format!("eta_sys_{m}"))).collect();
    let mut compared = 0;
    #[allow(clippy::needless_range_loop)]
    for row in 0..eta[0].len() {
        for (lo, hi) in [(0, 1), (1, 3), (0, 2), (2, 3)] {
            if let Some(a) = eta[lo][row] {
                let b = eta[hi][row].expect("stronger measure reaches the target");
                assert!(b >= a, "row {row}");
                compared += 1;
            }
        }
    }
    assert!(compared > 200);
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(nh3pt(&["fig", "fig7"], tmp.path()).status.code(), Some(2));
}
