//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p rosetta-pd --test acceptance`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rosetta_pd::lef::{parse_lef, write_lef, write_lef_subset};
use rosetta_pd::metrics_io::{emit_metrics, validate_metrics_json};
use rosetta_pd::sweep_par::{par_base_balance_sweep, par_ubfactor_sweep, sweep_csv, sweep_report};
use rosetta_pd_core::enable3d::{build_3d_tech, hbt_pitch_sweep, HbtSpec, StackConfig, HBT_LAYER, HBT_VIA};
use rosetta_pd_core::metrics::{compute_hpwl, MetricsError, MetricsRecord};
use rosetta_pd_core::model::{LayerKind, TechStack, Tier};
use rosetta_pd_core::num::Ratio;
use rosetta_pd_core::partition::{
    design_to_hypergraph, expected_min_cutsize, fm_bipartition, ubfactor_sweep, BalancePoint, Hypergraph, PartitionResult,
};
use rosetta_pd_core::repair::{repair_pipeline, RepairConfig};
use rosetta_pd_core::tierview::{assign_tiers, estimate_hbt_count, generate_tier_views, StackKind, TierLibrary};
use rosetta_pd_core::{
    canonical_digest, Design, Direction, Endpoint, Instance, IoPin, LayerRect, Master, MasterPin, Net, NetPin, Orientation,
    Point, Rect,
};

use common::*;

const ROUNDTRIP_BUDGET: Duration = Duration::from_secs(60);
const PARTITION_BUDGET: Duration = Duration::from_secs(30);
const FM_OPTIMAL_MIN: usize = 90;
const SYNTH_SIZES: [usize; 5] = [100, 500, 1000, 5000, 10_000];
/// Bonding terminal geometry settings: cut side, spacing, pitch (um) and resistance (ohm).
const HBT_REFERENCE: (f64, f64, f64, f64) = (0.5, 0.5, 1.0, 0.02);

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn digest(d: &Design) -> String {
    canonical_digest(d).unwrap_or_else(|e| panic!("{}: {e}", d.name))
}

// 1 ---------------------------------------------------------------------------

fn roundtrips() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut counts = [0usize; 3];

    let shelves = bookshelf_fixtures();
    for aux in &shelves {
        let d = load_bookshelf(aux, 1000);
        let back = bookshelf_roundtrip(&d, &tmp.path().join(&d.name));
        ensure!(digest(&d) == digest(&back), "bookshelf {} digest changed", aux.display());
        counts[0] += 1;
    }

    for (def, lef) in lefdef_fixtures() {
        let lib = load_lef(&lef);
        let d = load_def(&def, &lib);
        // the library goes through the writer too
        let lib2 = parse_lef("lib.lef", &write_lef_subset(&lib)).map_err(|e| e.to_string())?.value;
        ensure!(lib2 == lib, "{}: LEF round-trip changed the library", lef.display());
        let back = def_roundtrip(&d, &lib2);
        ensure!(digest(&d) == digest(&back), "{} digest changed", def.display());
        counts[1] += 1;
    }

    for (k, &n) in SYNTH_SIZES.iter().enumerate() {
        let d = synth(n, Ratio::new(3, 1), 11 + k as u64);
        let lib = own_lef(&d);
        let back = def_roundtrip(&d, &lib);
        ensure!(digest(&d) == digest(&back), "synthetic {n}: DEF digest changed");
        counts[2] += 1;
    }

    let t = start.elapsed();
    ensure!(counts[0] >= 10 && counts[1] >= 10 && counts[2] >= 5, "corpus too small: {counts:?}");
    ensure!(t < ROUNDTRIP_BUDGET, "took {t:.1?}, budget {ROUNDTRIP_BUDGET:?}");
    Ok(format!(
        "{} bookshelf, {} lef/def, {} synthetic (max {} instances) in {t:.1?} (< {ROUNDTRIP_BUDGET:?})",
        counts[0],
        counts[1],
        counts[2],
        SYNTH_SIZES[4]
    ))
}

// 2, 3 ------------------------------------------------------------------------

fn random_hypergraph(rng: &mut ChaCha8Rng) -> Hypergraph {
    let n = rng.gen_range(4..=14u32);
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=12)).collect();
    let m = rng.gen_range(n / 2..=3 * n);
    let edges: Vec<(Vec<u32>, u64)> = (0..m)
        .map(|_| {
            let a = rng.gen_range(0..n);
            let mut vs = vec![a, (a + rng.gen_range(1..n)) % n];
            for _ in 0..rng.gen_range(0..3) {
                vs.push(rng.gen_range(0..n));
            }
            (vs, rng.gen_range(1..=4))
        })
        .collect();
    Hypergraph::from_parts(&weights, &edges)
}

/// Side-0 weight inside `[(t - e) W, (t + e) W]`, evaluated as written.
fn balance_law(bp: &BalancePoint, w0: u64, total: u64) -> bool {
    let (t, e, w) = (bp.target.0, bp.tolerance, total as f64);
    (t - e) * w <= w0 as f64 && w0 as f64 <= (t + e) * w
}

fn cut_of(h: &Hypergraph, side: &[u8]) -> u64 {
    h.edges
        .iter()
        .filter(|e| e.vertices.iter().any(|&v| side[v as usize] == 0) && e.vertices.iter().any(|&v| side[v as usize] == 1))
        .map(|e| e.weight)
        .sum()
}

/// Exhaustive minimum over assignments feasible under any of `bps`.
fn exhaustive(h: &Hypergraph, bps: &[BalancePoint]) -> Option<u64> {
    let n = h.vertices.len();
    let total: u64 = h.vertices.iter().map(|v| v.weight).sum();
    let mut best: Option<u64> = None;
    for mask in 0u32..1 << n {
        let side: Vec<u8> = (0..n).map(|i| (mask >> i & 1) as u8).collect();
        let w0: u64 = (0..n).filter(|&i| side[i] == 0).map(|i| h.vertices[i].weight).sum();
        if bps.iter().any(|bp| balance_law(bp, w0, total)) {
            let c = cut_of(h, &side);
            best = Some(best.map_or(c, |b| b.min(c)));
        }
    }
    best
}

fn law_holds(h: &Hypergraph, r: &PartitionResult) -> bool {
    let total: u64 = h.vertices.iter().map(|v| v.weight).sum();
    let w0: u64 = r.side.iter().zip(&h.vertices).filter(|(s, _)| **s == 0).map(|(_, v)| v.weight).sum();
    r.feasible == balance_law(&r.balance, w0, total) && r.cutsize == cut_of(h, &r.side)
}

fn partitioner(law_violations: &mut Option<(usize, usize)>) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let bp = BalancePoint::new(0.5, 0.1);
    let seeds = [0, 1, 2];
    let (mut above, mut equal, mut sweep_equal) = (0, 0, 0);
    let (mut checked, mut violations) = (0, 0);
    for case in 0..100u64 {
        let h = random_hypergraph(&mut rng);
        let opt = exhaustive(&h, &[bp]).expect("0.5 +- 0.1 admits some split");
        let r = fm_bipartition(&h, &bp, case).map_err(|e| e.to_string())?;
        ensure!(r.feasible, "case {case}: infeasible result");
        above += (r.cutsize >= opt) as usize;
        equal += (r.cutsize == opt) as usize;
        checked += 1;
        violations += !law_holds(&h, &r) as usize;

        let sweep = ubfactor_sweep(&h, 2.0, 10.0, 11, &seeds).map_err(|e| e.to_string())?;
        let bps: Vec<BalancePoint> = sweep.points.iter().map(|p| p.balance).collect();
        let union = exhaustive(&h, &bps);
        let best = sweep.best.as_ref();
        sweep_equal += (best.map(|b| b.cutsize) == union) as usize;
        if let Some(b) = best {
            checked += 1;
            violations += !(law_holds(&h, &b.result) && b.result.feasible) as usize;
        }
        // per-point bests are FM results too
        for p in &sweep.points {
            for run in p.runs.iter().filter(|r| r.feasible) {
                let r = fm_bipartition(&h, &p.balance, run.seed).map_err(|e| e.to_string())?;
                checked += 1;
                violations += !(law_holds(&h, &r) && Some(r.cutsize) == run.cutsize) as usize;
            }
        }
    }
    *law_violations = Some((checked, violations));
    let t = start.elapsed();
    ensure!(above == 100, "fm below exhaustive minimum in {} cases", 100 - above);
    ensure!(equal >= FM_OPTIMAL_MIN, "fm optimal in {equal}/100, need {FM_OPTIMAL_MIN}");
    ensure!(sweep_equal == 100, "sweep best equals union minimum in {sweep_equal}/100");
    ensure!(t < PARTITION_BUDGET, "took {t:.1?}, budget {PARTITION_BUDGET:?}");
    Ok(format!(
        "fm >= min 100/100, == min {equal}/100 (need {FM_OPTIMAL_MIN}), sweep best == union min {sweep_equal}/100 in {t:.1?} (< {PARTITION_BUDGET:?})"
    ))
}

fn balance(law: Option<(usize, usize)>) -> Outcome {
    let (checked, violations) = law.ok_or("criterion 2 did not run to completion")?;
    ensure!(violations == 0, "{violations} of {checked} results break the balance inequality");
    Ok(format!("{checked} results, 0 violations"))
}

// 4, 5 ------------------------------------------------------------------------

fn enablement() -> Outcome {
    for metals in 2..=10usize {
        for units in [1000u32, 2000] {
            for compat in [false, true] {
                let mut cfg = StackConfig::homogeneous(TechStack::synthetic("s", metals, units));
                cfg.legacy_compat_layers = compat;
                let t = build_3d_tech(&cfg).map_err(|e| e.to_string())?;
                let routing = t.layers.iter().filter(|l| l.kind == LayerKind::Routing).count();
                let hbt = t.layers.iter().filter(|l| l.kind == LayerKind::Cut && l.name == HBT_LAYER).count();
                let cuts = t.layers.iter().filter(|l| l.kind == LayerKind::Cut).count();
                let want = 2 * metals + if compat { 2 } else { 0 };
                ensure!(routing == want, "M={metals} compat={compat}: {routing} routing layers, want {want}");
                ensure!(hbt == 1, "M={metals}: {hbt} bonding cut layers");
                ensure!(cuts == 2 * (metals - 1) + 1, "M={metals}: {cuts} cut layers");
            }
        }
    }

    let (side, spacing, pitch, res) = HBT_REFERENCE;
    for units in [1000u32, 2000] {
        let cfg = StackConfig::homogeneous(TechStack::synthetic("s", 6, units));
        ensure!(cfg.hbt == HbtSpec::default(), "stack config does not use the default terminal");
        let t = build_3d_tech(&cfg).map_err(|e| e.to_string())?;
        // geometry as it lands in the written LEF
        let lef = parse_lef("3d.lef", &write_lef(&t, &[])).map_err(|e| e.to_string())?.value;
        let um = |v: i64| v as f64 / units as f64;
        let via = lef.vias.iter().find(|v| v.name == HBT_VIA).ok_or("no bonding via in LEF")?;
        ensure!(via.cut == HBT_LAYER && via.cut_rects.len() == 1, "bonding via cut is not one {HBT_LAYER} rect");
        let r = via.cut_rects[0];
        ensure!(um(r.width()) == side && um(r.height()) == side, "cut {}x{} um, want {side}", um(r.width()), um(r.height()));
        ensure!(via.resistance.map(f64::to_bits) == Some(res.to_bits()), "resistance {:?}, want {res}", via.resistance);
        let layer = lef.layers.iter().find(|l| l.name == HBT_LAYER).ok_or("no bonding layer in LEF")?;
        ensure!(um(layer.width) == side, "layer width {}", um(layer.width));
        ensure!(um(layer.spacing) == spacing, "layer spacing {}", um(layer.spacing));
        ensure!(um(layer.pitch) == pitch, "layer pitch {}", um(layer.pitch));
    }
    let d = HbtSpec::default();
    ensure!(
        (d.width_um, d.spacing_um, d.pitch_um, d.resistance_ohm) == HBT_REFERENCE,
        "default terminal {d:?}"
    );
    Ok(format!(
        "M=2..10 x {{1000,2000}} DBU x compat: 2M(+2) routing, 1 bonding cut; via {side} um, spacing {spacing} um, pitch {pitch} um, {res} ohm"
    ))
}

fn pitch_sweep() -> Outcome {
    let pitches = [0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.0, 0.125, 10.0];
    let specs = hbt_pitch_sweep(&HbtSpec::default(), &pitches).map_err(|e| e.to_string())?;
    ensure!(specs.len() == pitches.len(), "sweep produced {} specs", specs.len());
    for (p, s) in pitches.iter().zip(&specs) {
        ensure!(s.pitch_um == *p, "pitch {p} became {}", s.pitch_um);
        ensure!(s.width_um == s.spacing_um, "pitch {p}: width {} != spacing {}", s.width_um, s.spacing_um);
        ensure!(s.pitch_um == s.width_um + s.spacing_um, "pitch {p}: pitch != width + spacing");
        ensure!(s.width_dbu(1000) + s.spacing_dbu(1000) == s.pitch_dbu(1000), "pitch {p}: DBU sum differs");
    }
    Ok(format!("{} pitches, width == spacing and pitch == width + spacing exactly", specs.len()))
}

// 6 ---------------------------------------------------------------------------

fn scan_direction(d: &Design, p: &NetPin) -> Direction {
    if let Some(dir) = p.direction {
        return dir;
    }
    match &p.endpoint {
        Endpoint::Instance { instance, pin } => d
            .instances
            .iter()
            .find(|i| &i.name == instance)
            .and_then(|i| d.masters.iter().find(|m| m.name == i.master))
            .and_then(|m| m.pins.iter().find(|mp| &mp.name == pin))
            .map_or(Direction::Inout, |mp| mp.direction),
        // a primary input drives the net inside the design
        Endpoint::Io { name } => match d.io_pins.iter().find(|io| &io.name == name).map(|io| io.direction) {
            Some(Direction::Input) => Direction::Output,
            Some(Direction::Output) => Direction::Input,
            _ => Direction::Inout,
        },
    }
}

fn ill_formed(d: &Design) -> BTreeSet<String> {
    d.nets
        .iter()
        .filter(|n| {
            let dirs: Vec<Direction> = n.pins.iter().map(|p| scan_direction(d, p)).collect();
            dirs.len() < 2
                || dirs.iter().all(|x| *x == Direction::Input)
                || dirs.iter().all(|x| *x == Direction::Output)
        })
        .map(|n| n.name.clone())
        .collect()
}

fn stdcell_area(d: &Design) -> i128 {
    d.instances
        .iter()
        .map(|i| d.masters.iter().find(|m| m.name == i.master).unwrap())
        .filter(|m| !m.is_cover())
        .map(|m| m.width as i128 * m.height as i128)
        .sum()
}

fn repair() -> Outcome {
    let cfg = RepairConfig::default();
    let (mut removed, mut split) = (0, 0);
    for seed in 0..100u64 {
        let d = random_design(1000 + seed, seed % 2 == 0);
        let (once, log) = repair_pipeline(&d, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        let (twice, log2) = repair_pipeline(&once, &cfg).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(digest(&once) == digest(&twice), "seed {seed}: second repair changed the design");
        ensure!(log2.removed_nets.is_empty() && log2.split_instances.is_empty(), "seed {seed}: second repair logged work");
        let got: BTreeSet<String> = log.removed_nets.iter().map(|r| r.net.clone()).collect();
        let want = ill_formed(&d);
        ensure!(got == want, "seed {seed}: removed {got:?}, oracle {want:?}");
        ensure!(stdcell_area(&d) == stdcell_area(&once), "seed {seed}: area {} -> {}", stdcell_area(&d), stdcell_area(&once));
        removed += got.len();
        split += log.split_instances.len();
    }
    ensure!(split > 0, "no instance was split; generator too tame");
    Ok(format!("100 designs idempotent, {removed} removed nets match the scan oracle, {split} splits conserve area"))
}

// 7 ---------------------------------------------------------------------------

fn strip_tier(name: &str) -> &str {
    name.strip_suffix(Tier::Bottom.suffix()).or_else(|| name.strip_suffix(Tier::Upper.suffix())).unwrap_or(name)
}

fn tier_views() -> Outcome {
    let bp = BalancePoint::new(0.5, 0.1);
    let mut total_cut = 0;
    for seed in 0..50u64 {
        let d = random_design(5000 + seed, false);
        let h = design_to_hypergraph(&d).map_err(|e| e.to_string())?;
        let part = fm_bipartition(&h, &bp, seed).map_err(|e| e.to_string())?;
        let kind = if seed % 2 == 0 { StackKind::Homogeneous } else { StackKind::Heterogeneous };
        let ta = assign_tiers(&d, &h, &part, kind).map_err(|e| e.to_string())?;
        let lib = own_lef(&d);
        let bottom = TierLibrary::derive(&lib, Tier::Bottom, None).map_err(|e| e.to_string())?;
        let upper = TierLibrary::derive(&lib, Tier::Upper, None).map_err(|e| e.to_string())?;
        let views = generate_tier_views(&d, &ta, &bottom, &upper, &Default::default()).map_err(|e| e.to_string())?;

        let mut union: BTreeMap<(String, String), usize> = BTreeMap::new();
        for v in [&views.bottom, &views.upper] {
            for i in &v.instances {
                let m = v.masters.iter().find(|m| m.name == i.master).ok_or("view instance without master")?;
                if !m.is_cover() {
                    *union.entry((i.name.clone(), strip_tier(&i.master).to_string())).or_default() += 1;
                }
            }
        }
        let mut orig: BTreeMap<(String, String), usize> = BTreeMap::new();
        for i in &d.instances {
            *orig.entry((i.name.clone(), i.master.clone())).or_default() += 1;
        }
        ensure!(union == orig, "seed {seed}: non-COVER union differs from the original instances");

        // nets whose instance pins land on both sides
        let side: BTreeMap<&str, u8> = h.vertices.iter().zip(&part.side).map(|(v, s)| (v.name.as_str(), *s)).collect();
        let cut = d
            .nets
            .iter()
            .filter(|n| {
                let sides: BTreeSet<u8> = n
                    .pins
                    .iter()
                    .filter_map(|p| match &p.endpoint {
                        Endpoint::Instance { instance, .. } => side.get(instance.as_str()).copied(),
                        Endpoint::Io { .. } => None,
                    })
                    .collect();
                sides.len() == 2
            })
            .count();
        let internal = views.report.internal_count();
        ensure!(internal == cut, "seed {seed}: {internal} internal cross-tier nets, unit-weight cut {cut}");
        let hbt = estimate_hbt_count(&views.report, false);
        ensure!(hbt == cut, "seed {seed}: hbt estimate {hbt}, cut {cut}");
        total_cut += cut;
    }
    Ok(format!("50 designs: instance multisets conserved, internal nets == cut == hbt estimate (sum {total_cut})"))
}

// 8 ---------------------------------------------------------------------------

/// Cell-local point after placing a `w x h` cell in orientation `o`.
fn oriented(o: Orientation, x: i64, y: i64, w: i64, h: i64) -> (i64, i64) {
    match o {
        Orientation::N => (x, y),
        Orientation::S => (w - x, h - y),
        Orientation::FN => (w - x, y),
        Orientation::FS => (x, h - y),
        _ => unreachable!("row orientations only"),
    }
}

struct Placement {
    design: Design,
    /// Per net, every pin position, or `None` when a pin is unplaced.
    pins: Vec<Option<Vec<(i64, i64)>>>,
}

fn random_placement(rng: &mut ChaCha8Rng) -> Placement {
    let mut d = Design::new("hp", 1000);
    d.die = Rect::new(-50_000, -50_000, 50_000, 50_000);
    d.core = d.die;
    for k in 0..rng.gen_range(1..6) {
        let (w, h) = (2 * rng.gen_range(1..200), 2 * rng.gen_range(1..200));
        let mut m = Master::new(format!("M{k}"), w, h);
        for p in 0..3 {
            let mut mp = MasterPin::new(format!("P{p}"), if p == 0 { Direction::Output } else { Direction::Input });
            if rng.gen_bool(0.6) {
                let (x0, y0) = (rng.gen_range(0..w / 2), rng.gen_range(0..h / 2));
                let (dx, dy) = (2 * rng.gen_range(0..w / 4 + 1), 2 * rng.gen_range(0..h / 4 + 1));
                mp.shapes.push(LayerRect::new("M1", Rect::new(x0, y0, x0 + dx, y0 + dy)));
            }
            m.pins.push(mp);
        }
        d.masters.push(m);
    }
    let n_inst = rng.gen_range(2..40);
    for k in 0..n_inst {
        let m = rng.gen_range(0..d.masters.len());
        let mut i = Instance::new(format!("u{k}"), d.masters[m].name.clone());
        if rng.gen_ratio(19, 20) {
            i.location = Some(Point::new(rng.gen_range(-20_000..20_000), rng.gen_range(-20_000..20_000)));
        }
        i.orientation = random_orientation(rng);
        d.instances.push(i);
    }
    for k in 0..rng.gen_range(0..4) {
        let mut io = IoPin::new(format!("io{k}"), Direction::Input);
        io.location = Some(Point::new(rng.gen_range(-40_000..40_000), rng.gen_range(-40_000..40_000)));
        io.shape = Rect::new(0, 0, 2 * rng.gen_range(1..50), 2 * rng.gen_range(1..50));
        d.io_pins.push(io);
    }

    let mut pins = Vec::new();
    for k in 0..rng.gen_range(1..60) {
        let mut net = Net::new(format!("n{k}"));
        let mut pts = Some(Vec::new());
        for _ in 0..rng.gen_range(1..7) {
            let offset = rng.gen_bool(0.3).then(|| Point::new(rng.gen_range(0..40), rng.gen_range(0..40)));
            let pos = if !d.io_pins.is_empty() && rng.gen_bool(0.15) {
                let io = &d.io_pins[rng.gen_range(0..d.io_pins.len())];
                let mut np = NetPin::new(Endpoint::io(io.name.clone()));
                np.offset = offset;
                net.pins.push(np);
                let l = io.location.unwrap();
                offset.map_or((l.x, l.y), |o| (l.x + o.x, l.y + o.y))
            } else {
                let i = &d.instances[rng.gen_range(0..d.instances.len())];
                let m = d.masters.iter().find(|m| m.name == i.master).unwrap();
                let pin = &m.pins[rng.gen_range(0..m.pins.len())];
                let mut np = NetPin::new(Endpoint::inst(i.name.clone(), pin.name.clone()));
                np.offset = offset;
                net.pins.push(np);
                let local = match (offset, pin.shapes.first()) {
                    (Some(o), _) => (o.x, o.y),
                    (None, Some(s)) => ((s.rect.xlo + s.rect.xhi) / 2, (s.rect.ylo + s.rect.yhi) / 2),
                    (None, None) => (m.width / 2, m.height / 2),
                };
                match i.location {
                    Some(l) => {
                        let (x, y) = oriented(i.orientation, local.0, local.1, m.width, m.height);
                        (l.x + x, l.y + y)
                    }
                    None => {
                        pts = None;
                        (0, 0)
                    }
                }
            };
            if let Some(v) = pts.as_mut() {
                v.push(pos);
            }
        }
        d.nets.push(net);
        pins.push(pts);
    }
    Placement { design: d, pins }
}

/// Largest pairwise x spread plus largest pairwise y spread, summed over nets.
fn pairwise_hpwl(p: &Placement) -> (i64, usize) {
    let mut total = 0;
    let mut unplaced = 0;
    for net in &p.pins {
        let Some(pts) = net else {
            unplaced += 1;
            continue;
        };
        let (mut dx, mut dy) = (0, 0);
        for a in pts {
            for b in pts {
                dx = dx.max((a.0 - b.0).abs());
                dy = dy.max((a.1 - b.1).abs());
            }
        }
        total += dx + dy;
    }
    (total, unplaced)
}

fn hpwl() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut translations = 0;
    for case in 0..100 {
        let mut p = random_placement(&mut rng);
        let got = compute_hpwl(&p.design);
        let (want, unplaced) = pairwise_hpwl(&p);
        ensure!(got.total == want, "case {case}: hpwl {}, oracle {want}", got.total);
        ensure!(got.unplaced_nets == unplaced, "case {case}: {} unplaced nets, oracle {unplaced}", got.unplaced_nets);
        if case < 20 {
            let (dx, dy) = (rng.gen_range(-1_000_000..1_000_000), rng.gen_range(-1_000_000..1_000_000));
            for i in &mut p.design.instances {
                i.location = i.location.map(|l| l.translate(dx, dy));
            }
            for io in &mut p.design.io_pins {
                io.location = io.location.map(|l| l.translate(dx, dy));
            }
            ensure!(compute_hpwl(&p.design) == got, "case {case}: translation by ({dx}, {dy}) changed hpwl");
            translations += 1;
        }
    }
    Ok(format!("100 placements match the pairwise oracle exactly, {translations} translations invariant"))
}

// 9 ---------------------------------------------------------------------------

fn metrics() -> Outcome {
    let mut designs: Vec<Design> = bookshelf_fixtures().iter().map(|a| load_bookshelf(a, 1000)).collect();
    for (def, lef) in lefdef_fixtures() {
        designs.push(load_def(&def, &load_lef(&lef)));
    }
    designs.push(synth(2000, Ratio::new(3, 1), 9));
    for d in &designs {
        let runs: Vec<String> = (0..3)
            .map(|_| {
                let mut r = MetricsRecord::from_design(d, "measure", "acceptance");
                r.runtime_s = 0.25;
                emit_metrics(&r)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{}: {e}", d.name))?;
        ensure!(runs.iter().all(|r| r == &runs[0]), "{}: metrics bytes differ between runs", d.name);
        validate_metrics_json(&runs[0]).map_err(|e| format!("{}: own output rejected: {e}", d.name))?;
    }

    let d = synth(200, Ratio::new(3, 1), 3);
    let good = emit_metrics(&MetricsRecord::from_design(&d, "measure", "acceptance")).map_err(|e| e.to_string())?;
    let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
    let u = v["utilization"].as_f64().ok_or("no utilization")?;
    v["utilization"] = serde_json::json!(u * 1.01);
    let bad = serde_json::to_string_pretty(&v).unwrap();
    ensure!(
        matches!(validate_metrics_json(&bad), Err(MetricsError::SchemaViolation(ref m)) if m.contains("utilization")),
        "a record with utilization != stdcell_area / core_area was accepted"
    );
    let mut rec = MetricsRecord::from_design(&d, "measure", "acceptance");
    rec.utilization = Some(u * 1.01);
    ensure!(emit_metrics(&rec).is_err(), "emit_metrics wrote a record breaking the utilization identity");
    Ok(format!("{} designs byte-identical over 3 runs; utilization identity violation rejected", designs.len()))
}

// 10 --------------------------------------------------------------------------

/// Uniform index in `0..n` from a 64-bit stream by widening multiply with
/// rejection of the biased low zone.
fn uniform_index(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    let zone = (n << n.leading_zeros()).wrapping_sub(1);
    loop {
        let m = rng.next_u64() as u128 * n as u128;
        let (hi, lo) = ((m >> 64) as u64, m as u64);
        if lo <= zone {
            return hi;
        }
    }
}

fn reference_bootstrap(samples: &[u64], size: usize, resamples: u64, seed: u64) -> u128 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..resamples)
        .map(|_| (0..size).map(|_| samples[uniform_index(&mut rng, samples.len() as u64) as usize]).min().unwrap() as u128)
        .sum()
}

fn bootstrap() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0010);
    for case in 0..100u64 {
        let n = rng.gen_range(1..=60);
        let samples: Vec<u64> = (0..n).map(|_| rng.gen_range(0..500)).collect();
        let resamples = rng.gen_range(1..400);
        let seed = rng.gen();
        let stat = expected_min_cutsize(&samples, 15, resamples, seed).map_err(|e| e.to_string())?;
        ensure!(stat.resamples == resamples, "case {case}: resample count");
        let want = reference_bootstrap(&samples, 15, resamples, seed);
        ensure!(stat.sum_of_minima == want, "case {case}: sum of minima {}, reference {want}", stat.sum_of_minima);
        let min = *samples.iter().min().unwrap() as u128;
        let sum: u128 = samples.iter().map(|&s| s as u128).sum();
        let r = resamples as u128;
        ensure!(min * r <= stat.sum_of_minima, "case {case}: statistic below the sample minimum");
        ensure!(stat.sum_of_minima * n as u128 <= sum * r, "case {case}: statistic above the sample mean");
    }

    // CSV axes on a synthetic design
    let d = synth(40, Ratio::new(3, 1), 4);
    let h = design_to_hypergraph(&d).map_err(|e| e.to_string())?;
    let seeds: Vec<u64> = (0..12).collect();
    let ub = par_ubfactor_sweep(&h, 2.0, 10.0, 11, &seeds).map_err(|e| e.to_string())?;
    let base = par_base_balance_sweep(&h, (0.06, 0.94), 11, 0.02, &seeds).map_err(|e| e.to_string())?;
    for (sweep, axis) in [(ub, "ubfactor"), (base, "base_balance")] {
        let report = sweep_report(&sweep, &seeds, 15, 200, 1).map_err(|e| e.to_string())?;
        let csv = sweep_csv(&report);
        let mut rows = csv::Reader::from_reader(csv.as_bytes());
        let header = rows.headers().unwrap().clone();
        ensure!(&header[0] == axis && &header[1] == "expected_min_cutsize", "{axis}: header {header:?}");
        let mut params = Vec::new();
        for rec in rows.records() {
            let rec = rec.unwrap();
            params.push(rec[0].parse::<f64>().map_err(|e| e.to_string())?);
            if !rec[1].is_empty() {
                let stat: f64 = rec[1].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
                let best: f64 = rec[2].parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
                ensure!(stat >= best, "{axis}: expected minimum {stat} below best {best}");
            }
        }
        ensure!(params.len() == 11, "{axis}: {} rows", params.len());
        ensure!(params.windows(2).all(|w| w[0] < w[1]), "{axis}: balance parameter not increasing: {params:?}");
        ensure!(report.points.iter().any(|p| p.expected_min_cutsize.is_some()), "{axis}: no point has a statistic");
    }
    Ok("100 sample sets match the reference stream exactly with min <= stat <= mean; ub and base CSVs have 11 rows of (balance parameter, expected minimum cutsize)".into())
}

type Criterion = Box<dyn FnOnce(&mut Option<(usize, usize)>) -> Outcome>;

fn main() {
    // silence the default hook; panics become FAIL lines
    std::panic::set_hook(Box::new(|_| {}));
    let mut law = None;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("format round-trips", Box::new(|_| roundtrips())),
        ("partitioner oracle", Box::new(partitioner)),
        ("balance law", Box::new(|l| balance(*l))),
        ("3D enablement geometry", Box::new(|_| enablement())),
        ("pitch-sweep invariant", Box::new(|_| pitch_sweep())),
        ("repair properties", Box::new(|_| repair())),
        ("tier-view conservation", Box::new(|_| tier_views())),
        ("hpwl oracle", Box::new(|_| hpwl())),
        ("metrics determinism", Box::new(|_| metrics())),
        ("bootstrap statistic", Box::new(|_| bootstrap())),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(|| f(&mut law))).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let t = t.elapsed();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{t:.2?}]", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{t:.2?}]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
