//! Fixture loading and random designs shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rosetta_pd::bookshelf_io::{parse_bookshelf, write_bookshelf, ParseOptions};
use rosetta_pd::def::{parse_def, write_def};
use rosetta_pd::lef::parse_lef;
use rosetta_pd_core::bookshelf::bundle_to_design;
use rosetta_pd_core::model::TieOff;
use rosetta_pd_core::num::Ratio;
use rosetta_pd_core::synth::{generate_synthetic, SynthConfig};
use rosetta_pd_core::{Design, Direction, Endpoint, IoPin, LefSubset, Master, MasterPin, Net, NetPin, Orientation, Point, Rect};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// `.aux` manifests of the well-formed Bookshelf fixtures.
pub fn bookshelf_fixtures() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(fixtures().join("bookshelf"))
        .expect("bookshelf fixture dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_dir())
        .map(|d| {
            let name = d.file_name().unwrap().to_str().unwrap().to_string();
            d.join(format!("{name}.aux"))
        })
        .collect();
    out.sort();
    out
}

/// `(def, lef)` pairs listed in `lefdef/corpus.txt`.
pub fn lefdef_fixtures() -> Vec<(PathBuf, PathBuf)> {
    let dir = fixtures().join("lefdef");
    let list = std::fs::read_to_string(dir.join("corpus.txt")).unwrap();
    list.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            (dir.join(it.next().unwrap()), dir.join(it.next().unwrap()))
        })
        .collect()
}

pub fn load_bookshelf(aux: &Path, units: u32) -> Design {
    let b = parse_bookshelf(aux, ParseOptions::default()).unwrap_or_else(|e| panic!("{}: {e}", aux.display()));
    bundle_to_design(&b.value, units).unwrap_or_else(|e| panic!("{}: {e}", aux.display()))
}

pub fn load_lef(path: &Path) -> LefSubset {
    let text = std::fs::read_to_string(path).unwrap();
    parse_lef(&path.display().to_string(), &text).unwrap_or_else(|e| panic!("{e}")).value
}

pub fn load_def(path: &Path, lef: &LefSubset) -> Design {
    let text = std::fs::read_to_string(path).unwrap();
    parse_def(&path.display().to_string(), &text, lef).unwrap_or_else(|e| panic!("{e}")).value
}

/// Library holding exactly the design's own masters and sites.
pub fn own_lef(d: &Design) -> LefSubset {
    let mut lef = LefSubset::new(d.units);
    lef.macros = d.masters.clone();
    lef.sites = d.sites.clone();
    lef
}

pub fn def_roundtrip(d: &Design, lef: &LefSubset) -> Design {
    parse_def("roundtrip.def", &write_def(d), lef).unwrap_or_else(|e| panic!("{}: {e}", d.name)).value
}

pub fn bookshelf_roundtrip(d: &Design, dir: &Path) -> Design {
    let (_, aux) = write_bookshelf(d, dir).unwrap();
    load_bookshelf(&aux, d.units)
}

pub fn synth(n: usize, degree: Ratio, seed: u64) -> Design {
    generate_synthetic(&SynthConfig::new(n, degree, seed)).unwrap()
}

/// A valid synthetic design with IO pins, per-pin direction overrides, a
/// few ill-formed nets and, with `oversized`, one instance of a very wide
/// master.
pub fn random_design(seed: u64, oversized: bool) -> Design {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(8..60);
    let mut d = synth(n, Ratio::new(rng.gen_range(20..40), 10), seed);
    d.name = format!("rand{seed}");

    let ios = rng.gen_range(0..4);
    for k in 0..ios {
        let dir = [Direction::Input, Direction::Output, Direction::Inout][k % 3];
        let mut io = IoPin::new(format!("io{k}"), dir);
        io.location = Some(Point::new(d.die.xlo, d.die.ylo + 100 * k as i64));
        io.shape = Rect::new(0, 0, 100, 100);
        d.io_pins.push(io);
        let inst = &d.instances[rng.gen_range(0..d.instances.len())].name;
        let master = d.master(&d.instances.iter().find(|i| &i.name == inst).unwrap().master).unwrap();
        let pin = &master.pins[rng.gen_range(0..master.pins.len())].name;
        d.nets.push(Net::new(format!("ionet{k}")).with_pins([Endpoint::io(format!("io{k}")), Endpoint::inst(inst.clone(), pin.clone())]));
    }

    // ill-formed: single pin, all-input, all-output by override
    let pick = |rng: &mut ChaCha8Rng, d: &Design| {
        let i = &d.instances[rng.gen_range(0..d.instances.len())];
        let m = d.master(&i.master).unwrap();
        (i.name.clone(), m.pins[rng.gen_range(0..m.pins.len())].name.clone())
    };
    for k in 0..rng.gen_range(0..4) {
        let mut net = Net::new(format!("bad{k}"));
        let pins = if k % 3 == 0 { 1 } else { rng.gen_range(2..4) };
        for _ in 0..pins {
            let (i, p) = pick(&mut rng, &d);
            let mut np = NetPin::new(Endpoint::inst(i, p));
            np.direction = Some(if k % 3 == 1 { Direction::Input } else { Direction::Output });
            net.pins.push(np);
        }
        d.nets.push(net);
    }
    // a well-formed net whose directions all come from overrides
    if rng.gen_bool(0.5) {
        let (a, pa) = pick(&mut rng, &d);
        let (b, pb) = pick(&mut rng, &d);
        let mut net = Net::new("ovr");
        net.weight = rng.gen_range(1..5);
        let mut p0 = NetPin::new(Endpoint::inst(a, pa));
        p0.direction = Some(Direction::Output);
        p0.offset = Some(Point::new(10, 20));
        let mut p1 = NetPin::new(Endpoint::inst(b, pb));
        p1.direction = Some(Direction::Input);
        net.pins.push(p0);
        net.pins.push(p1);
        d.nets.push(net);
    }

    if oversized {
        let h = d.masters[0].height;
        let mut big = Master::new("BIGCELL", 100 * 400, h);
        big.site = d.masters[0].site.clone();
        big.pins.push(MasterPin::new("A", Direction::Input));
        big.pins.push(MasterPin::new("Y", Direction::Output));
        d.masters.push(big);
        let mut inst = rosetta_pd_core::Instance::new("big0", "BIGCELL");
        inst.tie_offs = vec![TieOff { pin: "A".into(), value: rosetta_pd_core::model::TieValue::Low }];
        d.instances.push(inst);
        let (o, po) = pick(&mut rng, &d);
        if o != "big0" {
            d.nets.push(Net::new("to_big").with_pins([Endpoint::inst("big0", "Y"), Endpoint::inst(o, po)]));
        }
    }
    d
}

/// Random legal orientations of the row-based set.
pub fn random_orientation(rng: &mut impl Rng) -> Orientation {
    [Orientation::N, Orientation::S, Orientation::FN, Orientation::FS][rng.gen_range(0..4)]
}
