use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn infolat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infolat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_preset(preset: &str, out: &Path) {
    let o = infolat(&["--preset", preset, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

/// Rows of a CSV file as column-name -> value maps.
fn read_csv(path: &Path) -> Vec<HashMap<String, f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| {
                    let x = match v {
                        "true" => 1.0,
                        "false" => 0.0,
                        _ => v.parse().unwrap(),
                    };
                    (h.clone(), x)
                })
                .collect()
        })
        .collect()
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_preset("fig7c", &a);
    run_preset("fig7c", &b);
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn shielding_is_visible_in_the_current_table() {
    let dir = tempfile::tempdir().unwrap();
    run_preset("fig7a", dir.path());
    let rows = read_csv(&dir.path().join("info_currents.csv"));
    let n = 7.0;
    let mut interior = 0;
    for r in &rows {
        let (ell, n2) = (r["ell"], r["n2"]);
        let (jl, jr) = ((n2 - ell) / 2.0, (n2 + ell) / 2.0);
        if jl > 1.0 && jr < n {
            interior += 1;
            for k in ["left", "right", "env"] {
                assert!(r[k].abs() < 1e-4, "cell ({ell}, {}) {k} = {}", n2 / 2.0, r[k]);
            }
        }
    }
    assert_eq!(interior, 15);
    let ends = read_csv(&dir.path().join("end_currents.csv"));
    assert!((ends[0]["left_in"].abs() - ends[0]["right_in"].abs()).abs() < 1e-10);
}

#[test]
fn symmetric_bias_gives_half_filled_bulk() {
    let dir = tempfile::tempdir().unwrap();
    run_preset("fig5a", dir.path());
    let rows = read_csv(&dir.path().join("occupations.csv"));
    assert_eq!(rows.len(), 7 * 21);
    let bulk: Vec<f64> = rows
        .iter()
        .filter(|r| r["delta"] == 0.0 && r["site"] > 1.0 && r["site"] < 21.0)
        .map(|r| r["occupation"])
        .collect();
    assert_eq!(bulk.len(), 19);
    assert!(bulk.iter().all(|x| (x - 0.5).abs() < 1e-10), "{bulk:?}");
}

#[test]
fn off_centre_defect_has_a_ghost_column() {
    let dir = tempfile::tempdir().unwrap();
    run_preset("fig14", dir.path());
    let rows = read_csv(&dir.path().join("info_lattice.csv"));
    let at = |ell: f64, n2: f64| {
        rows.iter()
            .find(|r| r["ell"] == ell && r["n2"] == n2)
            .map(|r| r["local_information"])
    };
    let mut hits = 0;
    for ell in 2..12 {
        let ell = ell as f64;
        // the column at n = 15 (or 14.5 on odd scales)
        let n2 = if ell as usize % 2 == 0 { 30.0 } else { 29.0 };
        let centre = at(ell, n2).unwrap();
        if centre > at(ell, n2 - 2.0).unwrap() && centre > at(ell, n2 + 2.0).unwrap() {
            hits += 1;
        }
    }
    assert!(hits >= 8, "ghost maximum on only {hits} scales");
}

#[test]
fn manifest_lists_every_output() {
    let dir = tempfile::tempdir().unwrap();
    run_preset("fig11ab", dir.path());
    let m: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["task"], "noise_lattice");
    assert_eq!(m["preset"], "fig11ab");
    for o in m["outputs"].as_array().unwrap() {
        let file = dir.path().join(o["file"].as_str().unwrap());
        let rows = read_csv(&file);
        assert_eq!(rows.len() as u64, o["rows"].as_u64().unwrap());
    }
}

#[test]
fn config_file_overrides_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, "task = \"ness\"\n[chain]\nn_sites = 5\nsite_defect = { site = 3, energy = 3.0 }\n").unwrap();
    let out = dir.path().join("out");
    let o = infolat(&["--preset", "fig6c", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out.join("occupations.csv"));
    assert_eq!(rows.len(), 5);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "task = \"ness\"\n[chain]\nn_sites = 5\nhoping = 1.0\n[reservoir]\nregime = \"large_bias\"\ng = 1.0\ndelta = 0.0\n",
    )
    .unwrap();
    let o = infolat(&["--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error[config]"), "{err}");
    assert!(err.contains("hoping"), "{err}");
}

#[test]
fn out_of_domain_parameters_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[reservoir]\nregime = \"large_bias\"\ng = 1.0\ndelta = 1.5\n").unwrap();
    let o = infolat(&["--preset", "fig6a", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[config]"));
}

#[test]
fn missing_input_is_reported() {
    let o = infolat(&["ness"]);
    assert_eq!(o.status.code(), Some(2));
    let o = infolat(&["--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error[io]"));
}

#[test]
fn preset_listing_shows_known_names() {
    let o = infolat(&["--list-presets"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["fig5a", "fig7a", "fig14", "fig16_inset", "fig18", "fig19c"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}
