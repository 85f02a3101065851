//! LEF subset: UNITS, LAYER, VIA, SITE and MACRO (with PIN and OBS).
//!
//! Two properties carry model fields LEF has no keyword for: `ROSETTA_TIER`
//! on macros and `ROSETTA_HIDDEN` on pins.

use std::fmt::Write as _;

use rosetta_pd_core::geom::{LayerRect, Rect};
use rosetta_pd_core::model::{
    CellClass, Direction, Layer, LayerDirection, LayerKind, LefSubset, Master, MasterPin, PinUse, Site, SiteClass,
    TechStack, TierTag, ViaDef, DEFAULT_DBU_PER_MICRON,
};
use rosetta_pd_core::num::dbu_to_micron_string;
use rosetta_pd_core::Dbu;

use crate::bookshelf_io::Parsed;
use crate::error::FormatError;
use crate::lex::Cursor;
use crate::GENERATED_BY;

pub const TIER_PROPERTY: &str = "ROSETTA_TIER";
pub const HIDDEN_PROPERTY: &str = "ROSETTA_HIDDEN";

struct LefReader<'a> {
    cur: Cursor<'a>,
    units: u32,
    warnings: Vec<String>,
}

impl LefReader<'_> {
    fn warn(&mut self, what: &str) {
        let msg = self.cur.error(format!("skipped unsupported {what}")).to_string();
        self.warnings.push(msg.trim_start_matches("SYNTAX: ").to_string());
    }

    fn rect(&mut self, origin: (Dbu, Dbu)) -> Result<Rect, FormatError> {
        if self.cur.eat("MASK") {
            self.cur.next("mask number")?;
        }
        let u = self.units;
        let x0 = self.cur.microns(u, "x")?;
        let y0 = self.cur.microns(u, "y")?;
        let x1 = self.cur.microns(u, "x")?;
        let y1 = self.cur.microns(u, "y")?;
        self.cur.expect(";")?;
        Ok(Rect::new(x0, y0, x1, y1).translate(origin.0, origin.1))
    }

    /// `LAYER l ; RECT ... ;` groups up to `END`.
    fn geometry(&mut self, origin: (Dbu, Dbu)) -> Result<Vec<LayerRect>, FormatError> {
        let mut out = Vec::new();
        let mut layer: Option<String> = None;
        loop {
            match self.cur.next("geometry or END")? {
                "END" => return Ok(out),
                "LAYER" => {
                    layer = Some(self.cur.next("layer name")?.to_string());
                    self.cur.skip_statement()?;
                }
                "RECT" => {
                    let r = self.rect(origin)?;
                    let l = layer.clone().ok_or_else(|| self.cur.error("RECT before LAYER"))?;
                    out.push(LayerRect::new(l, r));
                }
                other => {
                    self.warn(&format!("geometry statement {other}"));
                    self.cur.skip_statement()?;
                }
            }
        }
    }

    fn units_block(&mut self) -> Result<(), FormatError> {
        loop {
            match self.cur.next("units statement")? {
                "END" => {
                    self.cur.expect("UNITS")?;
                    return Ok(());
                }
                "DATABASE" => {
                    self.cur.expect("MICRONS")?;
                    let u = self.cur.uint("database units")?;
                    self.units = u32::try_from(u).map_err(|_| self.cur.error("database units out of range"))?;
                    self.cur.expect(";")?;
                }
                _ => self.cur.skip_statement()?,
            }
        }
    }

    fn layer(&mut self) -> Result<Layer, FormatError> {
        let name = self.cur.next("layer name")?.to_string();
        let mut l = Layer { name: name.clone(), kind: LayerKind::Masterslice, direction: None, pitch: 0, width: 0, spacing: 0 };
        let u = self.units;
        loop {
            match self.cur.next("layer statement")? {
                "END" => {
                    self.cur.expect(&name)?;
                    return Ok(l);
                }
                "TYPE" => {
                    let t = self.cur.next("layer type")?;
                    l.kind = LayerKind::parse(t).ok_or_else(|| self.cur.error(format!("unknown layer type `{t}`")))?;
                    self.cur.skip_statement()?;
                }
                "DIRECTION" => {
                    let t = self.cur.next("direction")?;
                    l.direction = LayerDirection::parse(t);
                    self.cur.skip_statement()?;
                }
                "PITCH" => {
                    l.pitch = self.cur.microns(u, "pitch")?;
                    self.cur.skip_statement()?;
                }
                "WIDTH" => {
                    l.width = self.cur.microns(u, "width")?;
                    self.cur.skip_statement()?;
                }
                "SPACING" => {
                    let s = self.cur.microns(u, "spacing")?;
                    if l.spacing == 0 {
                        l.spacing = s;
                    }
                    self.cur.skip_statement()?;
                }
                other => {
                    let what = format!("layer statement {other}");
                    self.warn(&what);
                    self.cur.skip_statement()?;
                }
            }
        }
    }

    /// `None` for via forms outside the subset (rule-generated, or not exactly
    /// three layers).
    /// Layer groups may appear in any order; they are sorted by stack position.
    fn via(&mut self, layers: &[Layer]) -> Result<Option<ViaDef>, FormatError> {
        let name = self.cur.next("via name")?.to_string();
        while !self.cur.at_end() && self.cur.peek() != Some(";") && !self.cur.peek_is("RESISTANCE") && !self.cur.peek_is("LAYER") && !self.cur.peek_is("END") && !self.cur.peek_is("VIARULE") {
            self.cur.next("via attribute")?;
        }
        self.cur.eat(";");
        let mut resistance = None;
        let mut groups: Vec<(String, Vec<Rect>)> = Vec::new();
        let mut supported = true;
        loop {
            match self.cur.next("via statement")? {
                "END" => {
                    self.cur.expect(&name)?;
                    break;
                }
                "RESISTANCE" => {
                    let t = self.cur.next("resistance")?;
                    resistance = Some(t.parse::<f64>().map_err(|_| self.cur.error(format!("bad resistance `{t}`")))?);
                    self.cur.skip_statement()?;
                }
                "LAYER" => {
                    groups.push((self.cur.next("layer name")?.to_string(), Vec::new()));
                    self.cur.skip_statement()?;
                }
                "RECT" => {
                    let r = self.rect((0, 0))?;
                    match groups.last_mut() {
                        Some(g) => g.1.push(r),
                        None => return Err(self.cur.error("RECT before LAYER")),
                    }
                }
                _ => {
                    supported = false;
                    self.cur.skip_statement()?;
                }
            }
        }
        if !supported || groups.len() != 3 {
            self.warnings.push(format!("{}: skipped via `{name}` outside the fixed three-layer form", self.cur.file));
            return Ok(None);
        }
        groups.sort_by_key(|(l, _)| layers.iter().position(|x| &x.name == l).unwrap_or(usize::MAX));
        let mut g = groups.into_iter();
        let (bottom, bottom_rects) = g.next().unwrap();
        let (cut, cut_rects) = g.next().unwrap();
        let (top, top_rects) = g.next().unwrap();
        Ok(Some(ViaDef { name, bottom, cut, top, bottom_rects, cut_rects, top_rects, resistance }))
    }

    fn site(&mut self) -> Result<Site, FormatError> {
        let name = self.cur.next("site name")?.to_string();
        let mut s = Site::new(name.clone(), 0, 0);
        loop {
            match self.cur.next("site statement")? {
                "END" => {
                    self.cur.expect(&name)?;
                    return Ok(s);
                }
                "CLASS" => {
                    s.class = match self.cur.next("site class")? {
                        "PAD" => SiteClass::Pad,
                        _ => SiteClass::Core,
                    };
                    self.cur.skip_statement()?;
                }
                "SIZE" => {
                    s.width = self.cur.microns(self.units, "width")?;
                    self.cur.expect("BY")?;
                    s.height = self.cur.microns(self.units, "height")?;
                    self.cur.expect(";")?;
                }
                _ => self.cur.skip_statement()?,
            }
        }
    }

    fn pin(&mut self, origin: (Dbu, Dbu)) -> Result<MasterPin, FormatError> {
        let name = self.cur.next("pin name")?.to_string();
        let mut p = MasterPin::new(name.clone(), Direction::Inout);
        loop {
            match self.cur.next("pin statement")? {
                "END" => {
                    self.cur.expect(&name)?;
                    return Ok(p);
                }
                "DIRECTION" => {
                    let t = self.cur.next("direction")?;
                    p.direction = match t {
                        "FEEDTHRU" => Direction::Inout,
                        t => Direction::parse(t).ok_or_else(|| self.cur.error(format!("unknown pin direction `{t}`")))?,
                    };
                    self.cur.skip_statement()?;
                }
                "USE" => {
                    let t = self.cur.next("pin use")?;
                    p.pin_use = PinUse::parse(t).unwrap_or_default();
                    self.cur.skip_statement()?;
                }
                "PROPERTY" => {
                    while !self.cur.peek_is(";") {
                        let key = self.cur.next("property name")?;
                        let val = self.cur.next("property value")?;
                        if key == HIDDEN_PROPERTY {
                            p.hidden = val != "0";
                        }
                    }
                    self.cur.expect(";")?;
                }
                "PORT" => {
                    if self.cur.eat("CLASS") {
                        self.cur.skip_statement()?;
                    }
                    let shapes = self.geometry(origin)?;
                    p.shapes.extend(shapes);
                }
                other => {
                    let what = format!("pin statement {other}");
                    self.warn(&what);
                    self.cur.skip_statement()?;
                }
            }
        }
    }

    fn macro_(&mut self) -> Result<Master, FormatError> {
        let name = self.cur.next("macro name")?.to_string();
        let mut m = Master::new(name.clone(), 0, 0);
        let mut tier = None;
        let mut origin = (0, 0);
        loop {
            match self.cur.next("macro statement")? {
                "END" => {
                    self.cur.expect(&name)?;
                    break;
                }
                "CLASS" => {
                    let t = self.cur.next("macro class")?;
                    m.class = CellClass::parse(t).unwrap_or(CellClass::Block);
                    self.cur.skip_statement()?;
                }
                "ORIGIN" => {
                    // LEF origin: the shift applied to geometry to place the cell at (0, 0)
                    origin.0 = self.cur.microns(self.units, "origin x")?;
                    origin.1 = self.cur.microns(self.units, "origin y")?;
                    self.cur.expect(";")?;
                }
                "SIZE" => {
                    m.width = self.cur.microns(self.units, "width")?;
                    self.cur.expect("BY")?;
                    m.height = self.cur.microns(self.units, "height")?;
                    self.cur.expect(";")?;
                }
                "SITE" => {
                    m.site = Some(self.cur.next("site name")?.to_string());
                    self.cur.skip_statement()?;
                }
                "PROPERTY" => {
                    while !self.cur.peek_is(";") {
                        let key = self.cur.next("property name")?;
                        let val = self.cur.next("property value")?;
                        if key == TIER_PROPERTY {
                            tier = Some(match val {
                                "BOTTOM" => TierTag::Bottom,
                                "UPPER" => TierTag::Upper,
                                _ => TierTag::None,
                            });
                        }
                    }
                    self.cur.expect(";")?;
                }
                "PIN" => {
                    let p = self.pin(origin)?;
                    m.pins.push(p);
                }
                "OBS" => {
                    let g = self.geometry(origin)?;
                    m.obs.extend(g);
                }
                "FOREIGN" | "SYMMETRY" | "EEQ" | "SOURCE" | "FIXEDMASK" => self.cur.skip_statement()?,
                other => {
                    let what = format!("macro statement {other}");
                    self.warn(&what);
                    self.cur.skip_statement()?;
                }
            }
        }
        m.tier_tag = tier.unwrap_or_else(|| TierTag::from_master_name(&m.name));
        if m.width <= 0 || m.height <= 0 {
            return Err(self.cur.error(format!("macro `{}` needs a positive SIZE", m.name)));
        }
        Ok(m)
    }
}

/// Parses the LEF subset. Unsupported sections are skipped and reported in
/// the warnings.
pub fn parse_lef(file: &str, text: &str) -> Result<Parsed<LefSubset>, FormatError> {
    let mut r = LefReader { cur: Cursor::new(file, text), units: DEFAULT_DBU_PER_MICRON, warnings: Vec::new() };
    let mut lef = LefSubset::new(DEFAULT_DBU_PER_MICRON);
    while !r.cur.at_end() {
        match r.cur.next("statement")? {
            "UNITS" => r.units_block()?,
            "LAYER" => {
                let l = r.layer()?;
                lef.layers.push(l);
            }
            "VIA" => {
                if let Some(v) = r.via(&lef.layers)? {
                    lef.vias.push(v);
                }
            }
            "SITE" => {
                let s = r.site()?;
                lef.sites.push(s);
            }
            "MACRO" => {
                let m = r.macro_()?;
                lef.macros.push(m);
            }
            "END" => {
                if r.cur.eat("LIBRARY") {
                    break;
                }
                return Err(r.cur.error("unexpected END"));
            }
            "PROPERTYDEFINITIONS" => r.cur.skip_block("PROPERTYDEFINITIONS")?,
            "VERSION" | "BUSBITCHARS" | "DIVIDERCHAR" | "NAMESCASESENSITIVE" | "MANUFACTURINGGRID" => {
                r.cur.skip_statement()?
            }
            kw @ ("VIARULE" | "NONDEFAULTRULE" | "ARRAY") => {
                r.warn(kw);
                let name = r.cur.next("name")?;
                r.cur.skip_block(name)?;
            }
            kw @ ("SPACING" | "NOISETABLE" | "CORRECTIONTABLE" | "IRDROP" | "BEGINEXT" | "MAXVIASTACK") => {
                r.warn(kw);
                match kw {
                    "BEGINEXT" => r.cur.skip_block("ENDEXT").or(Ok::<(), FormatError>(()))?,
                    "MAXVIASTACK" => r.cur.skip_statement()?,
                    _ => r.cur.skip_block(kw)?,
                }
            }
            other => {
                let what = format!("statement {other}");
                r.warn(&what);
                r.cur.skip_statement()?;
            }
        }
    }
    lef.units = r.units;
    for m in &lef.macros {
        for p in &m.pins {
            for s in &p.shapes {
                if lef.layer(&s.layer).is_none() && !lef.layers.is_empty() {
                    return Err(FormatError::syntax(file, 1, 1, format!("pin {}/{} names undeclared layer `{}`", m.name, p.name, s.layer)));
                }
            }
        }
    }
    Ok(Parsed { value: lef, warnings: r.warnings })
}

fn um(v: Dbu, units: u32) -> String {
    dbu_to_micron_string(v, units)
}

fn rect_line(s: &mut String, indent: &str, r: &Rect, units: u32) {
    let _ = writeln!(s, "{indent}RECT {} {} {} {} ;", um(r.xlo, units), um(r.ylo, units), um(r.xhi, units), um(r.yhi, units));
}

fn layer_rects(s: &mut String, indent: &str, rects: &[LayerRect], units: u32) {
    let mut last: Option<&str> = None;
    for lr in rects {
        if last != Some(lr.layer.as_str()) {
            let _ = writeln!(s, "{indent}LAYER {} ;", lr.layer);
            last = Some(&lr.layer);
        }
        rect_line(s, &format!("{indent}  "), &lr.rect, units);
    }
}

/// LEF text for a technology and a macro list.
pub fn write_lef(stack: &TechStack, masters: &[Master]) -> String {
    let u = stack.units;
    let mut s = String::new();
    let _ = writeln!(s, "# {GENERATED_BY}");
    s.push_str("VERSION 5.8 ;\nBUSBITCHARS \"[]\" ;\nDIVIDERCHAR \"/\" ;\n\n");
    let _ = writeln!(s, "UNITS\n  DATABASE MICRONS {u} ;\nEND UNITS\n");
    let tiers = masters.iter().any(|m| m.tier_tag != TierTag::None);
    let hidden = masters.iter().any(|m| m.pins.iter().any(|p| p.hidden));
    if tiers || hidden {
        s.push_str("PROPERTYDEFINITIONS\n");
        if tiers {
            let _ = writeln!(s, "  MACRO {TIER_PROPERTY} STRING ;");
        }
        if hidden {
            let _ = writeln!(s, "  PIN {HIDDEN_PROPERTY} INTEGER ;");
        }
        s.push_str("END PROPERTYDEFINITIONS\n\n");
    }
    for l in &stack.layers {
        let _ = writeln!(s, "LAYER {}\n  TYPE {} ;", l.name, l.kind.as_str());
        if let Some(d) = l.direction {
            let _ = writeln!(s, "  DIRECTION {} ;", d.as_str());
        }
        if l.pitch != 0 {
            let _ = writeln!(s, "  PITCH {} ;", um(l.pitch, u));
        }
        if l.width != 0 {
            let _ = writeln!(s, "  WIDTH {} ;", um(l.width, u));
        }
        if l.spacing != 0 {
            let _ = writeln!(s, "  SPACING {} ;", um(l.spacing, u));
        }
        let _ = writeln!(s, "END {}\n", l.name);
    }
    for v in &stack.vias {
        let _ = writeln!(s, "VIA {} DEFAULT", v.name);
        if let Some(r) = v.resistance {
            let _ = writeln!(s, "  RESISTANCE {r} ;");
        }
        for (layer, rects) in [(&v.bottom, &v.bottom_rects), (&v.cut, &v.cut_rects), (&v.top, &v.top_rects)] {
            let _ = writeln!(s, "  LAYER {layer} ;");
            for r in rects {
                rect_line(&mut s, "    ", r, u);
            }
        }
        let _ = writeln!(s, "END {}\n", v.name);
    }
    for site in &stack.sites {
        let class = match site.class {
            SiteClass::Core => "CORE",
            SiteClass::Pad => "PAD",
        };
        let _ = writeln!(
            s,
            "SITE {}\n  CLASS {class} ;\n  SIZE {} BY {} ;\nEND {}\n",
            site.name,
            um(site.width, u),
            um(site.height, u),
            site.name
        );
    }
    for m in masters {
        let _ = writeln!(s, "MACRO {}\n  CLASS {} ;\n  ORIGIN 0 0 ;", m.name, m.class.as_str());
        let _ = writeln!(s, "  SIZE {} BY {} ;", um(m.width, u), um(m.height, u));
        if let Some(site) = &m.site {
            let _ = writeln!(s, "  SITE {site} ;");
        }
        if let Some(t) = m.tier_tag.tier() {
            let _ = writeln!(s, "  PROPERTY {TIER_PROPERTY} \"{}\" ;", t.as_str());
        }
        for p in &m.pins {
            let _ = writeln!(s, "  PIN {}\n    DIRECTION {} ;\n    USE {} ;", p.name, p.direction.as_str(), p.pin_use.as_str());
            if p.hidden {
                let _ = writeln!(s, "    PROPERTY {HIDDEN_PROPERTY} 1 ;");
            }
            if !p.shapes.is_empty() {
                s.push_str("    PORT\n");
                layer_rects(&mut s, "      ", &p.shapes, u);
                s.push_str("    END\n");
            }
            let _ = writeln!(s, "  END {}", p.name);
        }
        if !m.obs.is_empty() {
            s.push_str("  OBS\n");
            layer_rects(&mut s, "    ", &m.obs, u);
            s.push_str("  END\n");
        }
        let _ = writeln!(s, "END {}\n", m.name);
    }
    s.push_str("END LIBRARY\n");
    s
}

pub fn write_lef_subset(lef: &LefSubset) -> String {
    write_lef(&TechStack::from_lef("lib", lef), &lef.macros)
}

/// The library re-expressed at `units` DBU per micron. Only exact integer
/// up-scaling is supported.
pub fn rescale_lef(lef: &LefSubset, units: u32) -> Result<LefSubset, FormatError> {
    if lef.units == units {
        return Ok(lef.clone());
    }
    if lef.units == 0 || !units.is_multiple_of(lef.units) {
        return Err(FormatError::UnitMismatch(format!("cannot rescale library from {} to {} DBU per micron", lef.units, units)));
    }
    let k = (units / lef.units) as Dbu;
    let r = |x: &Rect| Rect::new(x.xlo * k, x.ylo * k, x.xhi * k, x.yhi * k);
    let lr = |v: &[LayerRect]| v.iter().map(|l| LayerRect::new(l.layer.clone(), r(&l.rect))).collect::<Vec<_>>();
    let mut out = lef.clone();
    out.units = units;
    for l in &mut out.layers {
        l.pitch *= k;
        l.width *= k;
        l.spacing *= k;
    }
    for s in &mut out.sites {
        s.width *= k;
        s.height *= k;
    }
    for v in &mut out.vias {
        v.bottom_rects = v.bottom_rects.iter().map(r).collect();
        v.cut_rects = v.cut_rects.iter().map(r).collect();
        v.top_rects = v.top_rects.iter().map(r).collect();
    }
    for m in &mut out.macros {
        m.width *= k;
        m.height *= k;
        m.obs = lr(&m.obs);
        for p in &mut m.pins {
            p.shapes = lr(&p.shapes);
        }
    }
    Ok(out)
}
