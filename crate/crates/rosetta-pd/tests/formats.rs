mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rosetta_pd::bookshelf_io::{nets_text, nodes_text, parse_bookshelf, ParseOptions};
use rosetta_pd::def::write_def;
use rosetta_pd::lef::{parse_lef, write_lef_subset};
use rosetta_pd::netlist::{read_structural_netlist, write_structural_netlist};
use rosetta_pd_core::bookshelf::bundle_to_design;
use rosetta_pd_core::metrics::{compute_hpwl, routed_length};
use rosetta_pd_core::{canonical_digest, connectivity_digest, design_stats, validate_design};

use common::*;

fn expected(path: &std::path::Path) -> BTreeMap<String, String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once(' ').unwrap();
            (k.to_string(), v.trim().to_string())
        })
        .collect()
}

fn um2(area_dbu2: i64, units: u32) -> f64 {
    area_dbu2 as f64 / (units as f64 * units as f64)
}

#[test]
fn tiny3_counts_and_hpwl() {
    let aux = fixtures().join("bookshelf/tiny3/tiny3.aux");
    let want = expected(&fixtures().join("bookshelf/tiny3/expected.txt"));
    let b = parse_bookshelf(&aux, ParseOptions::default()).unwrap().value;
    assert_eq!(b.nodes.len().to_string(), want["nodes"]);
    assert_eq!(b.terminal_count().to_string(), want["terminals"]);
    assert_eq!(b.nets.len().to_string(), want["nets"]);
    assert_eq!(b.pin_count().to_string(), want["pins"]);
    let d = bundle_to_design(&b, 1000).unwrap();
    let movable: f64 = want["movable_area_um2"].parse().unwrap();
    assert_eq!(um2(design_stats(&d).unwrap().stdcell_area, 1000), movable);
    let hpwl: f64 = want["hpwl_um"].parse().unwrap();
    assert_eq!(compute_hpwl(&d).total, (hpwl * 1000.0) as i64);
}

#[test]
fn ispd_excerpt_areas() {
    let dir = fixtures().join("bookshelf/ispd_excerpt");
    let want = expected(&dir.join("expected.txt"));
    let b = parse_bookshelf(&dir.join("ispd_excerpt.aux"), ParseOptions::default()).unwrap().value;
    let d = bundle_to_design(&b, 1000).unwrap();
    let total: i64 = d
        .instances
        .iter()
        .map(|i| d.master(&i.master).unwrap().area())
        .chain(d.io_pins.iter().map(|p| p.shape.area()))
        .sum();
    assert_eq!(um2(total, 1000), want["total_area_um2"].parse::<f64>().unwrap());
    assert_eq!(um2(design_stats(&d).unwrap().stdcell_area, 1000), want["movable_area_um2"].parse::<f64>().unwrap());
}

#[test]
fn malformed_bundles_are_rejected_with_codes() {
    let code = |name: &str| {
        let aux = fixtures().join(format!("bad/{name}/{name}.aux"));
        match parse_bookshelf(&aux, ParseOptions::default()) {
            Err(e) => e.code().to_string(),
            Ok(b) => match bundle_to_design(&b.value, 1000) {
                Err(e) => rosetta_pd::error::FormatError::from(e).code().to_string(),
                Ok(_) => "OK".into(),
            },
        }
    };
    assert_eq!(code("header_mismatch"), "HEADER_MISMATCH");
    assert_eq!(code("unknown_node"), "UNKNOWN_NODE");
}

#[test]
fn written_headers_match_record_counts() {
    for aux in bookshelf_fixtures() {
        let b = parse_bookshelf(&aux, ParseOptions::default()).unwrap().value;
        let nodes = nodes_text(&b);
        let header = |text: &str, key: &str| -> usize {
            let line = text.lines().find(|l| l.starts_with(key)).unwrap();
            line.split(':').nth(1).unwrap().trim().parse().unwrap()
        };
        assert_eq!(header(&nodes, "NumNodes"), b.nodes.len(), "{}", aux.display());
        assert_eq!(header(&nodes, "NumTerminals"), b.terminal_count());
        let nets = nets_text(&b);
        assert_eq!(header(&nets, "NumNets"), b.nets.len());
        assert_eq!(header(&nets, "NumPins"), b.pin_count());
    }
}

#[test]
fn routed_fixture_length() {
    let dir = fixtures().join("lefdef");
    let want = expected(&dir.join("routed.expected"));
    let d = load_def(&dir.join("routed.def"), &load_lef(&dir.join("lib_a.lef")));
    assert_eq!(routed_length(&d).unwrap().total.to_string(), want["total"]);
}

#[test]
fn parsed_defs_validate() {
    for (def, lef) in lefdef_fixtures() {
        let d = load_def(&def, &load_lef(&lef));
        assert!(validate_design(&d).is_empty(), "{}: {:?}", def.display(), validate_design(&d));
    }
}

#[test]
fn lef_roundtrip_is_identity() {
    for lef in ["lib_a.lef", "lib_b.lef"] {
        let lib = load_lef(&fixtures().join("lefdef").join(lef));
        let text = write_lef_subset(&lib);
        let again = parse_lef("again.lef", &text).unwrap().value;
        assert_eq!(again, lib, "{lef}");
        assert_eq!(write_lef_subset(&again), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn def_roundtrip_random(seed in any::<u64>(), big in any::<bool>()) {
        let d = random_design(seed, big);
        let back = def_roundtrip(&d, &own_lef(&d));
        prop_assert_eq!(canonical_digest(&d).unwrap(), canonical_digest(&back).unwrap());
        prop_assert_eq!(write_def(&back), write_def(&d));
    }

    #[test]
    fn bookshelf_roundtrip_random(seed in any::<u64>()) {
        let tmp = tempfile::tempdir().unwrap();
        let d = random_design(seed, false);
        // first pass normalizes masters to size-derived names
        let once = bookshelf_roundtrip(&d, &tmp.path().join("a"));
        let twice = bookshelf_roundtrip(&once, &tmp.path().join("b"));
        prop_assert_eq!(canonical_digest(&once).unwrap(), canonical_digest(&twice).unwrap());
        prop_assert_eq!(compute_hpwl(&once), compute_hpwl(&d));
    }

    #[test]
    fn netlist_roundtrip_keeps_connectivity(seed in any::<u64>()) {
        let d = synth(40, rosetta_pd_core::num::Ratio::new(3, 1), seed);
        let text = write_structural_netlist(&d).unwrap();
        let back = read_structural_netlist(&text, &d.masters, d.units).unwrap();
        prop_assert_eq!(connectivity_digest(&back), connectivity_digest(&d));
    }
}
