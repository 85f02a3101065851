//! DEF subset: UNITS, DIEAREA, ROW, COMPONENTS, PINS and NETS with regular
//! wiring. Model fields without a DEF keyword travel as `ROSETTA_*` properties.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rosetta_pd_core::model::{Endpoint, IoPin, Net, NetPin, RoutedWire, Row, TieOff, TieValue, Tier};
use rosetta_pd_core::{validate_design, Dbu, Design, Direction, Instance, LefSubset, Orientation, Point, Rect};

use crate::bookshelf_io::Parsed;
use crate::error::FormatError;
use crate::lef::rescale_lef;
use crate::lex::Cursor;
use crate::GENERATED_BY;

const P_TIER: &str = "ROSETTA_TIER";
const P_TIES: &str = "ROSETTA_TIES";
const P_UNPLACED: &str = "ROSETTA_UNPLACED";
const P_PIN_OVR: &str = "ROSETTA_PIN_OVR";
const P_CORE: &str = "ROSETTA_CORE";
const P_SITES: &str = "ROSETTA_SITES";
/// Footprints of IO pins without a layer (Bookshelf terminals).
const P_PIN_SHAPES: &str = "ROSETTA_PIN_SHAPES";

fn row_hull(design: &Design) -> Option<Rect> {
    let boxes: Vec<Rect> = design
        .rows
        .iter()
        .filter_map(|r| design.site(&r.site).map(|s| r.bbox(s.height)))
        .collect();
    Rect::hull(boxes.iter())
}

fn rows_sites(design: &Design) -> BTreeSet<&str> {
    design.rows.iter().map(|r| r.site.as_str()).collect()
}

fn tie_str(v: TieValue) -> &'static str {
    match v {
        TieValue::Low => "LOW",
        TieValue::High => "HIGH",
        TieValue::Open => "OPEN",
    }
}

fn pt(s: &mut String, p: Point) {
    let _ = write!(s, "( {} {} )", p.x, p.y);
}

/// DEF text for a design. Coordinates are written in the design's DBU.
pub fn write_def(design: &Design) -> String {
    let mut s = String::with_capacity(128 + 96 * (design.instances.len() + design.nets.len()));
    let _ = writeln!(s, "# {GENERATED_BY}");
    s.push_str("VERSION 5.8 ;\nDIVIDERCHAR \"/\" ;\nBUSBITCHARS \"[]\" ;\n");
    let _ = writeln!(s, "DESIGN {} ;", design.name);
    let _ = writeln!(s, "UNITS DISTANCE MICRONS {} ;\n", design.units);

    let core_prop = {
        let implied = row_hull(design).unwrap_or(design.die);
        (implied != design.core).then_some(design.core)
    };
    let extra_sites: Vec<&str> = {
        let used = rows_sites(design);
        let mut v: Vec<&str> = design.sites.iter().map(|s| s.name.as_str()).filter(|n| !used.contains(n)).collect();
        v.sort_unstable();
        v
    };
    let has = |f: &dyn Fn(&Instance) -> bool| design.instances.iter().any(f);
    let tiers = has(&|i| i.tier.is_some());
    let ties = has(&|i| !i.tie_offs.is_empty());
    let unplaced = has(&|i| i.location.is_none() && (i.fixed || i.orientation != Orientation::N));
    let ovr = design.nets.iter().any(|n| n.pins.iter().any(|p| p.direction.is_some() || p.offset.is_some()));
    let pin_shapes: Vec<String> = design
        .io_pins
        .iter()
        .filter(|io| io.layer.is_none() && io.shape != Rect::default())
        .map(|io| {
            let r = io.shape;
            format!("{} {} {} {} {}", io.name, r.xlo, r.ylo, r.xhi, r.yhi)
        })
        .collect();
    if core_prop.is_some() || !extra_sites.is_empty() || !pin_shapes.is_empty() || tiers || ties || unplaced || ovr {
        s.push_str("PROPERTYDEFINITIONS\n");
        if core_prop.is_some() {
            let _ = writeln!(s, "  DESIGN {P_CORE} STRING ;");
        }
        if !extra_sites.is_empty() {
            let _ = writeln!(s, "  DESIGN {P_SITES} STRING ;");
        }
        if !pin_shapes.is_empty() {
            let _ = writeln!(s, "  DESIGN {P_PIN_SHAPES} STRING ;");
        }
        for (on, name) in [(tiers, P_TIER), (ties, P_TIES), (unplaced, P_UNPLACED)] {
            if on {
                let _ = writeln!(s, "  COMPONENT {name} STRING ;");
            }
        }
        if ovr {
            let _ = writeln!(s, "  NET {P_PIN_OVR} STRING ;");
        }
        s.push_str("END PROPERTYDEFINITIONS\n\n");
        if let Some(c) = core_prop {
            let _ = writeln!(s, "PROPERTY {P_CORE} \"{} {} {} {}\" ;", c.xlo, c.ylo, c.xhi, c.yhi);
        }
        if !extra_sites.is_empty() {
            let _ = writeln!(s, "PROPERTY {P_SITES} \"{}\" ;", extra_sites.join(" "));
        }
        if !pin_shapes.is_empty() {
            let _ = writeln!(s, "PROPERTY {P_PIN_SHAPES} \"{}\" ;", pin_shapes.join(" "));
        }
        s.push('\n');
    }

    let d = design.die;
    let _ = writeln!(s, "DIEAREA ( {} {} ) ( {} {} ) ;\n", d.xlo, d.ylo, d.xhi, d.yhi);

    for r in &design.rows {
        let _ = writeln!(
            s,
            "ROW {} {} {} {} {} DO {} BY 1 STEP {} 0 ;",
            r.name, r.site, r.origin.x, r.origin.y, r.orientation, r.num_sites, r.step
        );
    }
    if !design.rows.is_empty() {
        s.push('\n');
    }

    let _ = writeln!(s, "COMPONENTS {} ;", design.instances.len());
    for inst in &design.instances {
        let _ = write!(s, "  - {} {}", inst.name, inst.master);
        match inst.location {
            Some(p) => {
                let _ = write!(s, " + {} ", if inst.fixed { "FIXED" } else { "PLACED" });
                pt(&mut s, p);
                let _ = write!(s, " {}", inst.orientation);
            }
            None => s.push_str(" + UNPLACED"),
        }
        let mut props = Vec::new();
        if let Some(t) = inst.tier {
            props.push(format!("{P_TIER} \"{}\"", t.as_str()));
        }
        if !inst.tie_offs.is_empty() {
            let v: Vec<String> = inst.tie_offs.iter().map(|t| format!("{}={}", t.pin, tie_str(t.value))).collect();
            props.push(format!("{P_TIES} \"{}\"", v.join(" ")));
        }
        if inst.location.is_none() && (inst.fixed || inst.orientation != Orientation::N) {
            props.push(format!("{P_UNPLACED} \"{} {}\"", if inst.fixed { "FIXED" } else { "PLACED" }, inst.orientation));
        }
        if !props.is_empty() {
            let _ = write!(s, " + PROPERTY {}", props.join(" "));
        }
        s.push_str(" ;\n");
    }
    s.push_str("END COMPONENTS\n\n");

    let io_net: BTreeMap<&str, &str> = design
        .nets
        .iter()
        .flat_map(|n| {
            n.pins.iter().filter_map(move |p| match &p.endpoint {
                Endpoint::Io { name } => Some((name.as_str(), n.name.as_str())),
                _ => None,
            })
        })
        .collect();
    let _ = writeln!(s, "PINS {} ;", design.io_pins.len());
    for io in &design.io_pins {
        let net = io_net.get(io.name.as_str()).copied().unwrap_or(io.name.as_str());
        let _ = write!(s, "  - {} + NET {} + DIRECTION {}", io.name, net, io.direction.as_str());
        if let Some(l) = &io.layer {
            let r = io.shape;
            let _ = write!(s, " + LAYER {l} ( {} {} ) ( {} {} )", r.xlo, r.ylo, r.xhi, r.yhi);
        }
        if let Some(p) = io.location {
            let _ = write!(s, " + {} ", if io.fixed { "FIXED" } else { "PLACED" });
            pt(&mut s, p);
            let _ = write!(s, " {}", io.orientation);
        }
        s.push_str(" ;\n");
    }
    s.push_str("END PINS\n\n");

    let _ = writeln!(s, "NETS {} ;", design.nets.len());
    for net in &design.nets {
        let _ = write!(s, "  - {}", net.name);
        for p in &net.pins {
            match &p.endpoint {
                Endpoint::Instance { instance, pin } => {
                    let _ = write!(s, " ( {instance} {pin} )");
                }
                Endpoint::Io { name } => {
                    let _ = write!(s, " ( PIN {name} )");
                }
            }
        }
        if net.weight != 1 {
            let _ = write!(s, " + WEIGHT {}", net.weight);
        }
        for (k, w) in net.routing.iter().enumerate() {
            let _ = write!(s, "\n    {} {}", if k == 0 { "+ ROUTED" } else { "NEW" }, w.layer);
            for p in &w.points {
                s.push(' ');
                pt(&mut s, *p);
            }
            if let Some(v) = &w.via {
                let _ = write!(s, " {v}");
            }
        }
        if net.pins.iter().any(|p| p.direction.is_some() || p.offset.is_some()) {
            let v: Vec<String> = net
                .pins
                .iter()
                .enumerate()
                .filter(|(_, p)| p.direction.is_some() || p.offset.is_some())
                .map(|(k, p)| {
                    let d = p.direction.map_or("-", |d| d.as_str());
                    match p.offset {
                        Some(o) => format!("{k}:{d}:{}:{}", o.x, o.y),
                        None => format!("{k}:{d}:-:-"),
                    }
                })
                .collect();
            let _ = write!(s, "\n    + PROPERTY {P_PIN_OVR} \"{}\"", v.join(" "));
        }
        s.push_str(" ;\n");
    }
    s.push_str("END NETS\n\nEND DESIGN\n");
    s
}

struct DefReader<'a> {
    cur: Cursor<'a>,
    warnings: Vec<String>,
}

impl DefReader<'_> {
    fn warn(&mut self, what: &str) {
        self.warnings.push(format!("{}: skipped unsupported {what}", self.cur.file));
    }

    fn int(&mut self, what: &str) -> Result<Dbu, FormatError> {
        self.cur.dbu(what)
    }

    fn point(&mut self) -> Result<Point, FormatError> {
        self.cur.expect("(")?;
        let x = self.int("x")?;
        let y = self.int("y")?;
        self.cur.expect(")")?;
        Ok(Point::new(x, y))
    }

    fn orientation(&mut self) -> Result<Orientation, FormatError> {
        let t = self.cur.next("orientation")?;
        t.parse().map_err(|_| self.cur.error(format!("unknown orientation `{t}`")))
    }

    fn quoted(&mut self, what: &str) -> Result<String, FormatError> {
        Ok(self.cur.next(what)?.to_string())
    }

    /// `NAME value` pairs after `+ PROPERTY`, up to the next `+` or `;`.
    fn properties(&mut self) -> Result<Vec<(String, String)>, FormatError> {
        let mut out = Vec::new();
        while !self.cur.peek_is("+") && !self.cur.peek_is(";") {
            let k = self.cur.next("property name")?.to_string();
            let v = self.quoted("property value")?;
            out.push((k, v));
        }
        Ok(out)
    }

    fn count_header(&mut self, what: &str) -> Result<u64, FormatError> {
        let n = self.cur.uint(what)?;
        self.cur.expect(";")?;
        Ok(n)
    }
}

fn parse_tier(v: &str) -> Option<Tier> {
    Tier::parse(v)
}

fn parse_ties(v: &str) -> Option<Vec<TieOff>> {
    v.split_whitespace()
        .map(|e| {
            let (pin, val) = e.rsplit_once('=')?;
            let value = match val {
                "LOW" => TieValue::Low,
                "HIGH" => TieValue::High,
                "OPEN" => TieValue::Open,
                _ => return None,
            };
            Some(TieOff { pin: pin.to_string(), value })
        })
        .collect()
}

fn parse_ovr(v: &str, pins: &mut [NetPin]) -> Option<()> {
    for e in v.split_whitespace() {
        let f: Vec<&str> = e.split(':').collect();
        if f.len() != 4 {
            return None;
        }
        let p = pins.get_mut(f[0].parse::<usize>().ok()?)?;
        p.direction = match f[1] {
            "-" => None,
            d => Some(Direction::parse(d)?),
        };
        p.offset = match (f[2], f[3]) {
            ("-", "-") => None,
            (x, y) => Some(Point::new(x.parse().ok()?, y.parse().ok()?)),
        };
    }
    Some(())
}

/// Parses DEF against a library. Components must name library macros; the
/// design's masters are the referenced macros. The result is validated.
pub fn parse_def(file: &str, text: &str, lef: &LefSubset) -> Result<Parsed<Design>, FormatError> {
    let mut r = DefReader { cur: Cursor::new(file, text), warnings: Vec::new() };
    let mut d = Design::new("", lef.units);
    let mut die: Option<Rect> = None;
    let mut core_prop: Option<Rect> = None;
    let mut extra_sites: Vec<String> = Vec::new();
    let mut pin_shapes: BTreeMap<String, Rect> = BTreeMap::new();
    let mut io_nets: Vec<(String, String)> = Vec::new();

    while !r.cur.at_end() {
        match r.cur.next("statement")? {
            "DESIGN" => {
                d.name = r.cur.next("design name")?.to_string();
                r.cur.expect(";")?;
            }
            "UNITS" => {
                r.cur.expect("DISTANCE")?;
                r.cur.expect("MICRONS")?;
                let u = r.cur.uint("units")?;
                d.units = u32::try_from(u).map_err(|_| r.cur.error("units out of range"))?;
                r.cur.expect(";")?;
            }
            "PROPERTYDEFINITIONS" => r.cur.skip_block("PROPERTYDEFINITIONS")?,
            "PROPERTY" => {
                let k = r.cur.next("property name")?.to_string();
                let v = r.quoted("property value")?;
                r.cur.expect(";")?;
                match k.as_str() {
                    P_CORE => {
                        let n: Vec<Dbu> = v.split_whitespace().filter_map(|t| t.parse().ok()).collect();
                        if n.len() != 4 {
                            return Err(r.cur.error(format!("bad {P_CORE} value `{v}`")));
                        }
                        core_prop = Some(Rect::new(n[0], n[1], n[2], n[3]));
                    }
                    P_SITES => extra_sites = v.split_whitespace().map(String::from).collect(),
                    P_PIN_SHAPES => {
                        let t: Vec<&str> = v.split_whitespace().collect();
                        if !t.len().is_multiple_of(5) {
                            return Err(r.cur.error(format!("bad {P_PIN_SHAPES} value")));
                        }
                        for c in t.chunks(5) {
                            let n: Vec<Dbu> = c[1..].iter().filter_map(|x| x.parse().ok()).collect();
                            if n.len() != 4 {
                                return Err(r.cur.error(format!("bad {P_PIN_SHAPES} entry for `{}`", c[0])));
                            }
                            pin_shapes.insert(c[0].to_string(), Rect::new(n[0], n[1], n[2], n[3]));
                        }
                    }
                    _ => r.warn(&format!("design property {k}")),
                }
            }
            "DIEAREA" => {
                let mut pts = vec![r.point()?];
                while r.cur.peek_is("(") {
                    pts.push(r.point()?);
                }
                r.cur.expect(";")?;
                let boxes: Vec<Rect> = pts.iter().map(|p| Rect::new(p.x, p.y, p.x, p.y)).collect();
                die = Rect::hull(boxes.iter());
                if pts.len() < 2 {
                    return Err(r.cur.error("DIEAREA needs at least two points"));
                }
            }
            "ROW" => {
                let name = r.cur.next("row name")?.to_string();
                let site = r.cur.next("site name")?.to_string();
                let x = r.int("row x")?;
                let y = r.int("row y")?;
                let orientation = r.orientation()?;
                let mut row = Row { name, site, origin: Point::new(x, y), orientation, num_sites: 1, step: 0 };
                if r.cur.eat("DO") {
                    let nx = r.cur.uint("row count")?;
                    r.cur.expect("BY")?;
                    let ny = r.cur.uint("row count")?;
                    if nx != 1 && ny != 1 {
                        return Err(r.cur.error("two-dimensional row arrays are not supported"));
                    }
                    if ny != 1 {
                        r.warnings.push(format!("{}: vertical row {} read as horizontal", file, row.name));
                    }
                    row.num_sites = u32::try_from(nx.max(ny)).map_err(|_| r.cur.error("row too long"))?;
                    if r.cur.eat("STEP") {
                        let sx = r.int("step x")?;
                        let sy = r.int("step y")?;
                        row.step = if ny != 1 { sy } else { sx };
                    }
                }
                if row.step == 0 {
                    row.step = lef.sites.iter().find(|s| s.name == row.site).map_or(0, |s| s.width);
                }
                r.cur.skip_statement()?;
                d.rows.push(row);
            }
            "COMPONENTS" => {
                let n = r.count_header("component count")?;
                loop {
                    if r.cur.eat("END") {
                        r.cur.expect("COMPONENTS")?;
                        break;
                    }
                    r.cur.expect("-")?;
                    let name = r.cur.next("component name")?.to_string();
                    let master = r.cur.next("macro name")?.to_string();
                    let mut inst = Instance::new(name, master);
                    while r.cur.eat("+") {
                        match r.cur.next("component attribute")? {
                            kw @ ("PLACED" | "FIXED" | "COVER") => {
                                inst.location = Some(r.point()?);
                                inst.orientation = r.orientation()?;
                                inst.fixed = kw != "PLACED";
                            }
                            "UNPLACED" => {}
                            "PROPERTY" => {
                                for (k, v) in r.properties()? {
                                    match k.as_str() {
                                        P_TIER => {
                                            inst.tier = Some(parse_tier(&v).ok_or_else(|| r.cur.error(format!("bad tier `{v}`")))?)
                                        }
                                        P_TIES => {
                                            inst.tie_offs = parse_ties(&v).ok_or_else(|| r.cur.error(format!("bad tie list `{v}`")))?
                                        }
                                        P_UNPLACED => {
                                            let mut it = v.split_whitespace();
                                            inst.fixed = it.next() == Some("FIXED");
                                            let o = it.next().unwrap_or("N");
                                            inst.orientation = o.parse().map_err(|_| r.cur.error(format!("unknown orientation `{o}`")))?;
                                        }
                                        _ => {}
                                    }
                                }
                            }
                            other => {
                                r.warn(&format!("component attribute {other}"));
                                while !r.cur.peek_is("+") && !r.cur.peek_is(";") {
                                    r.cur.next("attribute value")?;
                                }
                            }
                        }
                    }
                    r.cur.expect(";")?;
                    d.instances.push(inst);
                }
                if d.instances.len() as u64 != n {
                    return Err(FormatError::HeaderMismatch { file: file.into(), what: "COMPONENTS".into(), declared: n as usize, found: d.instances.len() });
                }
            }
            "PINS" => {
                let n = r.count_header("pin count")?;
                loop {
                    if r.cur.eat("END") {
                        r.cur.expect("PINS")?;
                        break;
                    }
                    r.cur.expect("-")?;
                    let mut io = IoPin::new(r.cur.next("pin name")?, Direction::Inout);
                    while r.cur.eat("+") {
                        match r.cur.next("pin attribute")? {
                            "NET" => io_nets.push((io.name.clone(), r.cur.next("net name")?.to_string())),
                            "DIRECTION" => {
                                let t = r.cur.next("direction")?;
                                io.direction = match t {
                                    "FEEDTHRU" => Direction::Inout,
                                    t => Direction::parse(t).ok_or_else(|| r.cur.error(format!("unknown direction `{t}`")))?,
                                };
                            }
                            "LAYER" => {
                                io.layer = Some(r.cur.next("layer name")?.to_string());
                                while !r.cur.peek_is("(") {
                                    r.cur.next("layer option")?;
                                }
                                let a = r.point()?;
                                let b = r.point()?;
                                io.shape = Rect::new(a.x, a.y, b.x, b.y);
                            }
                            kw @ ("PLACED" | "FIXED" | "COVER") => {
                                io.location = Some(r.point()?);
                                io.orientation = r.orientation()?;
                                io.fixed = kw != "PLACED";
                            }
                            other => {
                                if other != "USE" {
                                    r.warn(&format!("pin attribute {other}"));
                                }
                                while !r.cur.peek_is("+") && !r.cur.peek_is(";") {
                                    r.cur.next("attribute value")?;
                                }
                            }
                        }
                    }
                    r.cur.expect(";")?;
                    d.io_pins.push(io);
                }
                if d.io_pins.len() as u64 != n {
                    return Err(FormatError::HeaderMismatch { file: file.into(), what: "PINS".into(), declared: n as usize, found: d.io_pins.len() });
                }
            }
            "NETS" => {
                let n = r.count_header("net count")?;
                loop {
                    if r.cur.eat("END") {
                        r.cur.expect("NETS")?;
                        break;
                    }
                    r.cur.expect("-")?;
                    let mut net = Net::new(r.cur.next("net name")?);
                    while r.cur.eat("(") {
                        let owner = r.cur.next("component")?;
                        let pin = r.cur.next("pin")?;
                        net.pins.push(NetPin::new(if owner == "PIN" { Endpoint::io(pin) } else { Endpoint::inst(owner, pin) }));
                        while !r.cur.eat(")") {
                            r.cur.next("`)`")?;
                        }
                    }
                    let mut ovr = None;
                    while r.cur.eat("+") {
                        match r.cur.next("net attribute")? {
                            "WEIGHT" => {
                                let w = r.cur.uint("weight")?;
                                net.weight = u32::try_from(w).map_err(|_| r.cur.error("weight out of range"))?;
                            }
                            "ROUTED" | "FIXED" | "COVER" | "NOSHIELD" => {
                                loop {
                                    let layer = r.cur.next("layer")?.to_string();
                                    let mut w = RoutedWire { layer, points: Vec::new(), via: None };
                                    if r.cur.eat("TAPER") {
                                    } else if r.cur.eat("TAPERRULE") {
                                        r.cur.next("rule")?;
                                    }
                                    let mut last = Point::new(0, 0);
                                    loop {
                                        if r.cur.eat("(") {
                                            let xs = r.cur.next("x")?;
                                            let ys = r.cur.next("y")?;
                                            let x = if xs == "*" { last.x } else { xs.parse().map_err(|_| r.cur.error(format!("bad x `{xs}`")))? };
                                            let y = if ys == "*" { last.y } else { ys.parse().map_err(|_| r.cur.error(format!("bad y `{ys}`")))? };
                                            while !r.cur.eat(")") {
                                                r.cur.next("`)`")?;
                                            }
                                            last = Point::new(x, y);
                                            w.points.push(last);
                                        } else if r.cur.peek_is("NEW") || r.cur.peek_is("+") || r.cur.peek_is(";") {
                                            break;
                                        } else {
                                            let t = r.cur.next("via")?;
                                            if w.via.is_some() {
                                                return Err(r.cur.error(format!("unexpected `{t}` in wiring")));
                                            }
                                            w.via = Some(t.to_string());
                                        }
                                    }
                                    net.routing.push(w);
                                    if !r.cur.eat("NEW") {
                                        break;
                                    }
                                }
                            }
                            "PROPERTY" => {
                                for (k, v) in r.properties()? {
                                    if k == P_PIN_OVR {
                                        ovr = Some(v);
                                    }
                                }
                            }
                            other => {
                                r.warn(&format!("net attribute {other}"));
                                while !r.cur.peek_is("+") && !r.cur.peek_is(";") {
                                    r.cur.next("attribute value")?;
                                }
                            }
                        }
                    }
                    r.cur.expect(";")?;
                    if let Some(v) = ovr {
                        parse_ovr(&v, &mut net.pins).ok_or_else(|| r.cur.error(format!("bad pin override list `{v}`")))?;
                    }
                    d.nets.push(net);
                }
                if d.nets.len() as u64 != n {
                    return Err(FormatError::HeaderMismatch { file: file.into(), what: "NETS".into(), declared: n as usize, found: d.nets.len() });
                }
            }
            "END" => {
                if r.cur.eat("DESIGN") {
                    break;
                }
                return Err(r.cur.error("unexpected END"));
            }
            "VERSION" | "DIVIDERCHAR" | "BUSBITCHARS" | "TECHNOLOGY" | "HISTORY" => r.cur.skip_statement()?,
            kw @ ("SPECIALNETS" | "VIAS" | "BLOCKAGES" | "REGIONS" | "GROUPS" | "FILLS" | "NONDEFAULTRULES" | "STYLES" | "SLOTS" | "PINPROPERTIES" | "SCANCHAINS") => {
                r.warn(kw);
                r.cur.skip_block(kw)?;
            }
            kw @ ("TRACKS" | "GCELLGRID") => {
                r.warn(kw);
                r.cur.skip_statement()?;
            }
            other => {
                let w = format!("statement {other}");
                r.warn(&w);
                r.cur.skip_statement()?;
            }
        }
    }

    let lef = if lef.units == d.units {
        std::borrow::Cow::Borrowed(lef)
    } else {
        std::borrow::Cow::Owned(rescale_lef(lef, d.units)?)
    };

    let used: BTreeSet<&str> = d.instances.iter().map(|i| i.master.as_str()).collect();
    for inst in &d.instances {
        if lef.macro_named(&inst.master).is_none() {
            return Err(FormatError::UnknownMaster { component: inst.name.clone(), master: inst.master.clone() });
        }
    }
    d.masters = lef.macros.iter().filter(|m| used.contains(m.name.as_str())).cloned().collect();

    let mut site_names: BTreeSet<String> = d.rows.iter().map(|r| r.site.clone()).collect();
    site_names.extend(extra_sites);
    for s in &site_names {
        match lef.sites.iter().find(|x| &x.name == s) {
            Some(site) => d.sites.push(site.clone()),
            None => return Err(FormatError::Invalid(format!("UNKNOWN_SITE: site `{s}` is not defined in the library"))),
        }
    }

    d.die = die.ok_or_else(|| FormatError::syntax(file, 1, 1, "missing DIEAREA"))?;
    d.core = core_prop.or_else(|| row_hull(&d)).unwrap_or(d.die);
    for io in d.io_pins.iter_mut().filter(|io| io.layer.is_none()) {
        if let Some(r) = pin_shapes.remove(&io.name) {
            io.shape = r;
        }
    }

    for (pin, net) in io_nets {
        if !d.nets.iter().any(|n| n.name == net || n.pins.iter().any(|p| p.endpoint == Endpoint::io(pin.as_str()))) {
            r.warnings.push(format!("{file}: pin {pin} names net {net} absent from NETS"));
        }
    }

    let report = validate_design(&d);
    if let Some(v) = report.violations.first() {
        return Err(FormatError::Invalid(format!("{} violation(s), first: {} at {}", report.len(), v.code.as_str(), v.locus)));
    }
    Ok(Parsed { value: d, warnings: r.warnings })
}
