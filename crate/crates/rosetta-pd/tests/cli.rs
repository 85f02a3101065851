mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rosetta_pd::lef::parse_lef;
use rosetta_pd_core::enable3d::HBT_VIA;

use common::fixtures;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rosetta-pd"))
        .args(args)
        .env_remove("ROSETTA_PD_JOBS")
        .output()
        .expect("spawn rosetta-pd")
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Synthetic design written under `dir`; returns its (lef, def).
fn synth_into(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf) {
    let (n, seed) = (n.to_string(), seed.to_string());
    ok(&["--out", s(dir), "--seed", &seed, "synth", "--instances", &n]);
    let name = format!("synth_{n}_s{seed}");
    (dir.join(format!("tech/{name}.lef")), dir.join(format!("designs/{name}.def")))
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(2));
    let text = String::from_utf8_lossy(&o.stdout).to_string() + &String::from_utf8_lossy(&o.stderr);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn bad_flag_is_a_usage_error() {
    assert_eq!(run(&["partition", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["repair", "--aux", "x.aux", "--max-area-ratio", "1/2"]).status.code(), Some(2));
}

#[test]
fn ub_sweep_writes_eleven_points() {
    let tmp = tempfile::tempdir().unwrap();
    let (lef, def) = synth_into(tmp.path(), 30, 1);
    let out = tmp.path().join("p");
    ok(&[
        "--out", s(&out), "partition", "--lef", s(&lef), "--def", s(&def), "--sweep", "ub", "--lo", "2", "--hi", "10",
        "--points", "11", "--seeds", "50",
    ]);
    let csv = std::fs::read_to_string(out.join("reports/sweep_ub.synth_30_s1.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 12);
    assert!(lines[0].starts_with("ubfactor,expected_min_cutsize"));
    assert_eq!(lines[1].split(',').next(), Some("2"));
    assert_eq!(lines[11].split(',').next(), Some("10"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("reports/sweep_ub.synth_30_s1.json")).unwrap()).unwrap();
    assert_eq!(json["points"].as_array().unwrap().len(), 11);
    assert_eq!(json["seeds"].as_array().unwrap().len(), 50);
    assert!(out.join("reports/partition.synth_30_s1.json").exists());
}

#[test]
fn enable3d_default_pitch_gives_half_micron_terminal() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["--out", s(tmp.path()), "enable3d", "--pitch", "1.0"]);
    let text = std::fs::read_to_string(tmp.path().join("tech/3d.lef")).unwrap();
    let lef = parse_lef("3d.lef", &text).unwrap().value;
    let via = lef.vias.iter().find(|v| v.name == HBT_VIA).unwrap();
    let r = via.cut_rects[0];
    assert_eq!((r.width(), r.height()), (lef.units as i64 / 2, lef.units as i64 / 2));
    assert_eq!(via.resistance, Some(0.02));
    assert!(tmp.path().join("reports/stack_manifest.json").exists());
}

#[test]
fn enable3d_pitch_sweep_and_compat() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["--out", s(tmp.path()), "enable3d", "--metals", "4", "--compat", "--pitch-sweep", "0.5,1,1.5,2,3,4"]);
    let sweep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("reports/hbt_sweep.json")).unwrap()).unwrap();
    let specs = sweep.as_array().unwrap();
    assert_eq!(specs.len(), 6);
    for sp in specs {
        assert_eq!(sp["width_um"], sp["spacing_um"]);
    }
    let lef = parse_lef("3d.lef", &std::fs::read_to_string(tmp.path().join("tech/3d.lef")).unwrap()).unwrap().value;
    let routing = lef.layers.iter().filter(|l| l.kind == rosetta_pd_core::model::LayerKind::Routing).count();
    assert_eq!(routing, 2 * 4 + 2);
}

#[test]
fn strict_mode_fails_on_validation_findings() {
    let tmp = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(fixtures().join("lefdef/minimal.def")).unwrap();
    // u2 now overlaps u1
    let bad = src.replace("- u2 NAND2_X1 + PLACED ( 760 0 ) N ;", "- u2 NAND2_X1 + PLACED ( 380 0 ) N ;");
    assert_ne!(bad, src);
    let def = tmp.path().join("overlap.def");
    std::fs::write(&def, bad).unwrap();
    let lef = fixtures().join("lefdef/lib_a.lef");
    let out = tmp.path().join("m");
    let args = ["--out", s(&out), "metrics", "--lef", s(&lef), "--def", s(&def)];

    let lenient = run(&args);
    assert_eq!(lenient.status.code(), Some(0));
    let report = std::fs::read_to_string(out.join("reports/measure.minimal.validation.json")).unwrap();
    assert!(report.contains("OVERLAP"), "{report}");

    let strict = run(&[&["--strict"], &args[..]].concat());
    assert_eq!(strict.status.code(), Some(1));
    let err = String::from_utf8_lossy(&strict.stderr);
    let last = err.lines().last().unwrap();
    assert!(last.starts_with("error: ") && last.contains("violation"), "{err}");
}

#[test]
fn parse_errors_exit_1_with_one_line() {
    let aux = fixtures().join("bad/header_mismatch/header_mismatch.aux");
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["--out", s(tmp.path()), "translate", "--from", "bookshelf", "--aux", s(&aux)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("error:")).count(), 1);
    assert!(err.contains("HEADER_MISMATCH"), "{err}");
}

#[test]
fn translate_then_repair_bookshelf() {
    let tmp = tempfile::tempdir().unwrap();
    let aux = fixtures().join("bookshelf/ill_formed/ill_formed.aux");
    let out = tmp.path().join("r");
    ok(&["--out", s(&out), "--strict", "translate", "--from", "bookshelf", "--aux", s(&aux)]);
    assert!(out.join("designs/ill_formed.def").exists());
    ok(&["--out", s(&out), "repair", "--aux", s(&aux), "--max-area-ratio", "8"]);
    let log: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("reports/repair.ill_formed.json")).unwrap()).unwrap();
    let removed: Vec<&str> = log["removed_nets"].as_array().unwrap().iter().map(|r| r["net"].as_str().unwrap()).collect();
    for net in ["no_driver", "single", "no_sink"] {
        assert!(removed.contains(&net), "{net} not removed: {removed:?}");
    }
    assert!(!log["split_instances"].as_array().unwrap().is_empty());
}

/// Metrics records with the wall-clock fields dropped.
fn stable(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    let o = v.as_object_mut().unwrap();
    o.remove("runtime_s");
    o.remove("memory_peak_kib");
    v
}

#[test]
fn pipeline_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut runs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let (lef, def) = synth_into(&out, 40, 7);
        let input = ["--lef", s(&lef), "--def", s(&def)];
        ok(&[&["--out", s(&out), "--seed", "7", "partition", "--sweep", "base", "--seeds", "6"], &input[..]].concat());
        ok(&[&["--out", s(&out), "--seed", "7", "tierview", "--seeds", "4"], &input[..]].concat());
        ok(&[&["--out", s(&out), "repair", "--grid", "100"], &input[..]].concat());
        runs.push(files(&out));
    }
    assert_eq!(runs[0].keys().collect::<Vec<_>>(), runs[1].keys().collect::<Vec<_>>());
    assert!(runs[0].keys().any(|p| p.starts_with("views")));
    for (p, a) in &runs[0] {
        let b = &runs[1][p];
        if p.to_string_lossy().ends_with(".metrics.json") {
            assert_eq!(stable(a), stable(b), "{}", p.display());
        } else {
            assert!(a == b, "{} differs between runs", p.display());
        }
    }
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let tmp = tempfile::tempdir().unwrap();
    let (lef, def) = synth_into(tmp.path(), 20, 2);
    let cfg = tmp.path().join("sweep.cfg");
    std::fs::write(&cfg, "# small sweep\nsweep = ub\npoints = 3\nseeds = 4\n").unwrap();
    let csv = |out: &Path| std::fs::read_to_string(out.join("reports/sweep_ub.synth_20_s2.csv")).unwrap().lines().count();

    let a = tmp.path().join("a");
    ok(&["--config", s(&cfg), "--out", s(&a), "partition", "--lef", s(&lef), "--def", s(&def)]);
    assert_eq!(csv(&a), 4);

    let b = tmp.path().join("b");
    ok(&["--config", s(&cfg), "--out", s(&b), "partition", "--lef", s(&lef), "--def", s(&def), "--points", "5"]);
    assert_eq!(csv(&b), 6);
}

#[test]
fn metrics_compare_builds_table() {
    let tmp = tempfile::tempdir().unwrap();
    let lef = fixtures().join("lefdef/lib_a.lef");
    let out = tmp.path().join("m");
    for def in ["minimal.def", "routed.def"] {
        let def = fixtures().join("lefdef").join(def);
        ok(&["--out", s(&out), "metrics", "--lef", s(&lef), "--def", s(&def)]);
    }
    let recs: Vec<PathBuf> = ["minimal", "routed"].iter().map(|n| out.join(format!("reports/measure.{n}.metrics.json"))).collect();
    ok(&["--out", s(&out), "metrics", "--compare", s(&recs[0]), s(&recs[1])]);
    let table = std::fs::read_to_string(out.join("reports/compare.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    // 30050 DBU at 2000 DBU/um
    assert!(table.lines().nth(2).unwrap().contains(",0.015025,"), "{table}");
}

#[test]
fn remap_fake_lefdef_round() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let lefdef = fixtures().join("lefdef");
    ok(&[
        "--out", s(&out), "translate", "--from", "fakelefdef", "--lef", s(&lefdef.join("lib_a.lef")), "--def",
        s(&lefdef.join("minimal.def")),
    ]);
    let aux = out.join("designs/minimal/minimal.aux");
    assert!(aux.exists());
    ok(&["--out", s(&out), "remap", "--aux", s(&aux), "--target-lef", s(&lefdef.join("lib_b.lef"))]);
    assert!(out.join("reports/remap.minimal.json").exists());
}
