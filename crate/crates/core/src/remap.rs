//! Fake LEF/DEF back to Bookshelf, and Bookshelf onto a real cell library.
//!
//! Fake libraries carry no function, so a node is matched to a macro by pin
//! arity first and footprint second.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::bookshelf::{bundle_to_design, design_to_bundle, BookshelfBundle, BookshelfError};
use crate::enable3d::rebuild_rows;
use crate::geom::{Dbu, Point, Rect};
use crate::model::{CellClass, Design, Direction, Endpoint, LefSubset, Master, SiteClass, Tier};
use crate::num::{div_ceil_i128, div_round_half_away};
use crate::validate::{row_overlaps, ValidationReport, ViolationCode};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RemapError {
    #[error("NO_CANDIDATE: no target macro has at least {pins} pins for node `{node}`")]
    NoCandidate { node: String, pins: usize },
    #[error("NO_SITE: target library has no CORE site")]
    NoSite,
    #[error("NO_CORE_MACRO: target library has no CORE macro whose height is a multiple of site `{0}`")]
    NoCoreMacro(String),
    #[error(transparent)]
    Bookshelf(#[from] BookshelfError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapPolicy {
    /// Let a node map onto a macro with fewer pins, dropping the surplus net pins.
    pub allow_pin_drop: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapEntry {
    pub source: String,
    pub chosen_macro: String,
    /// Macro signal pins minus node pins.
    pub pin_delta: i64,
    /// |macro area - scaled node area| in DBU², rounded.
    pub area_delta: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapReport {
    pub entries: Vec<RemapEntry>,
}

/// Bookshelf view of a design parsed against `lef`. Masters the design does
/// not carry are taken from the library.
pub fn fake_to_bookshelf(lef: &LefSubset, def: &Design) -> BookshelfBundle {
    let mut d = def.clone();
    for inst in &def.instances {
        if d.master(&inst.master).is_none() {
            if let Some(m) = lef.macro_named(&inst.master) {
                d.masters.push(m.clone());
            }
        }
    }
    for net in &mut d.nets {
        net.routing.clear();
    }
    design_to_bundle(&d)
}

/// Signal pins a node can be wired to.
fn usable_pins(m: &Master) -> usize {
    m.pins.iter().filter(|p| !p.hidden && !p.pin_use.is_supply()).count()
}

/// Exact scale factor `num / den` applied to source geometry.
#[derive(Clone, Copy, Debug)]
struct Scale {
    num: i128,
    den: i128,
}

impl Scale {
    fn apply(self, v: Dbu) -> Dbu {
        div_round_half_away(v as i128 * self.num, self.den) as Dbu
    }
}

/// Target site height over the median node height (mean of the two middle
/// heights for an even count).
fn scale_for(design: &Design, site_height: Dbu) -> Scale {
    let masters = design.master_index();
    let mut hs: Vec<Dbu> = design
        .instances
        .iter()
        .filter_map(|i| masters.get(i.master.as_str()).map(|m| m.height))
        .collect();
    if hs.is_empty() {
        return Scale { num: 1, den: 1 };
    }
    hs.sort_unstable();
    let n = hs.len();
    let med2 = if n % 2 == 1 { 2 * hs[n / 2] } else { hs[n / 2 - 1] + hs[n / 2] } as i128;
    if med2 <= 0 {
        return Scale { num: 1, den: 1 };
    }
    Scale { num: 2 * site_height as i128, den: med2 }
}

/// Candidate ordering key: (|pin delta|, |area delta| scaled by den², name).
fn candidate_key(m: &Master, node_pins: usize, node_area: i64, s: Scale) -> (u64, u128, &str) {
    let pd = (usable_pins(m) as i64 - node_pins as i64).unsigned_abs();
    let lhs = (m.area() as i128).saturating_mul(s.den * s.den);
    let rhs = (node_area as i128).saturating_mul(s.num * s.num);
    (pd, lhs.abs_diff(rhs), m.name.as_str())
}

/// Assigns one target macro per node, rescales and snaps the placement onto
/// the target site grid and rebuilds rows over the resulting core.
pub fn remap_to_pdk(
    bundle: &BookshelfBundle,
    target: &LefSubset,
    policy: &RemapPolicy,
) -> Result<(Design, LefSubset, RemapReport), RemapError> {
    let src = bundle_to_design(bundle, target.units)?;
    let site = target
        .sites
        .iter()
        .find(|s| s.class == SiteClass::Core && s.width > 0 && s.height > 0)
        .ok_or(RemapError::NoSite)?;
    let candidates: Vec<&Master> = target
        .macros
        .iter()
        .filter(|m| m.class == CellClass::Core && m.height > 0 && m.width > 0 && m.height % site.height == 0)
        .collect();
    if candidates.is_empty() {
        return Err(RemapError::NoCoreMacro(site.name.clone()));
    }
    let s = scale_for(&src, site.height);

    // pins per node in first-use order, with their declared directions
    let mut node_pins: BTreeMap<&str, Vec<(String, Option<Direction>)>> = BTreeMap::new();
    for net in &src.nets {
        for p in &net.pins {
            if let Endpoint::Instance { instance, pin } = &p.endpoint {
                node_pins.entry(instance.as_str()).or_default().push((pin.clone(), p.direction));
            }
        }
    }

    let src_masters = src.master_index();
    let mut report = RemapReport::default();
    let mut chosen: BTreeMap<&str, &Master> = BTreeMap::new();
    // (instance, old pin) -> new pin, None when dropped
    let mut pin_map: BTreeMap<(&str, &str), Option<&str>> = BTreeMap::new();
    for inst in &src.instances {
        let pins = node_pins.get(inst.name.as_str()).map_or(&[][..], |v| v.as_slice());
        let area = src_masters.get(inst.master.as_str()).map_or(0, |m| m.area());
        let best = candidates
            .iter()
            .filter(|m| policy.allow_pin_drop || usable_pins(m) >= pins.len())
            .min_by_key(|m| candidate_key(m, pins.len(), area, s))
            .ok_or_else(|| RemapError::NoCandidate { node: inst.name.clone(), pins: pins.len() })?;
        let key = candidate_key(best, pins.len(), area, s);
        report.entries.push(RemapEntry {
            source: inst.name.clone(),
            chosen_macro: best.name.clone(),
            pin_delta: usable_pins(best) as i64 - pins.len() as i64,
            area_delta: div_round_half_away(key.1.min(i128::MAX as u128) as i128, s.den * s.den) as i64,
        });
        chosen.insert(inst.name.as_str(), best);

        let free: Vec<&str> = best
            .pins
            .iter()
            .filter(|p| !p.hidden && !p.pin_use.is_supply())
            .map(|p| p.name.as_str())
            .collect();
        let mut used = alloc::vec![false; free.len()];
        let mut assigned: Vec<Option<&str>> = alloc::vec![None; pins.len()];
        for (k, (_, dir)) in pins.iter().enumerate() {
            let Some(d @ (Direction::Input | Direction::Output)) = dir else { continue };
            if let Some(j) = (0..free.len()).find(|&j| !used[j] && best.pins.iter().any(|p| p.name == free[j] && p.direction == *d)) {
                used[j] = true;
                assigned[k] = Some(free[j]);
            }
        }
        for slot in assigned.iter_mut().filter(|a| a.is_none()) {
            if let Some(j) = (0..free.len()).find(|&j| !used[j]) {
                used[j] = true;
                *slot = Some(free[j]);
            }
        }
        for ((old, _), new) in pins.iter().zip(assigned) {
            pin_map.insert((inst.name.as_str(), old.as_str()), new);
        }
    }

    let mut out = Design::new(src.name.clone(), target.units);
    out.sites.push(site.clone());
    let mut used_macros: Vec<Master> = target
        .macros
        .iter()
        .filter(|m| chosen.values().any(|c| c.name == m.name))
        .cloned()
        .collect();
    out.masters = used_macros.clone();

    let core0 = Rect::new(s.apply(src.core.xlo), s.apply(src.core.ylo), s.apply(src.core.xhi), s.apply(src.core.yhi));
    let origin = core0.lower_left();
    let snap = |v: Dbu, o: Dbu, step: Dbu| o + (div_round_half_away((v - o) as i128, step as i128) as Dbu) * step;
    for inst in &src.instances {
        let mut ni = inst.clone();
        ni.master = chosen[inst.name.as_str()].name.clone();
        ni.location = inst
            .location
            .map(|p| Point::new(snap(s.apply(p.x), origin.x, site.width), snap(s.apply(p.y), origin.y, site.height)));
        out.instances.push(ni);
    }
    for io in &src.io_pins {
        let mut nio = io.clone();
        nio.location = io.location.map(|p| Point::new(s.apply(p.x), s.apply(p.y)));
        nio.shape = Rect::new(0, 0, s.apply(io.shape.width()), s.apply(io.shape.height()));
        out.io_pins.push(nio);
    }
    for net in &src.nets {
        let mut nn = net.clone();
        nn.routing.clear();
        nn.pins.retain_mut(|p| {
            p.direction = None;
            p.offset = None;
            match &mut p.endpoint {
                Endpoint::Instance { instance, pin } => match pin_map.get(&(instance.as_str(), pin.as_str())) {
                    Some(Some(new)) => {
                        *pin = String::from(*new);
                        true
                    }
                    _ => false,
                },
                Endpoint::Io { .. } => true,
            }
        });
        out.nets.push(nn);
    }

    // grow the core in whole sites until every placed instance fits
    let index = out.master_index();
    let boxes: Vec<Rect> = out
        .instances
        .iter()
        .filter_map(|i| i.bbox(index.get(i.master.as_str())?))
        .collect();
    let hull = boxes.iter().fold(core0, |acc, r| acc.union(r));
    let grow_lo = |lo: Dbu, o: Dbu, step: Dbu| o - div_ceil_i128((o - lo) as i128, step as i128) as Dbu * step;
    let grow_hi = |hi: Dbu, lo: Dbu, step: Dbu| lo + div_ceil_i128((hi - lo) as i128, step as i128).max(1) as Dbu * step;
    let xlo = grow_lo(hull.xlo, origin.x, site.width);
    let ylo = grow_lo(hull.ylo, origin.y, site.height);
    out.core = Rect::new(xlo, ylo, grow_hi(hull.xhi, xlo, site.width), grow_hi(hull.yhi, ylo, site.height));
    out.rows = rebuild_rows(&out.core, site).unwrap_or_default();
    let mut die = boxes.iter().fold(out.core, |acc, r| acc.union(r));
    for io in &out.io_pins {
        if let Some(p) = io.location {
            let (w, h) = io.orientation.footprint(io.shape.width(), io.shape.height());
            die = die.union(&Rect::from_origin_size(p, w, h));
        }
    }
    out.die = die;

    used_macros.sort_by(|a, b| a.name.cmp(&b.name));
    let used = LefSubset {
        units: target.units,
        layers: target.layers.clone(),
        sites: alloc::vec![site.clone()],
        vias: target.vias.clone(),
        macros: used_macros,
    };
    Ok((out, used, report))
}

/// Placement rules a target technology imposes: known masters, site-grid
/// alignment relative to the core origin, containment in the core, no overlap
/// between placed non-COVER instances of the same tier, and row sanity.
pub fn legality_check(design: &Design, target: &LefSubset) -> ValidationReport {
    let mut report = ValidationReport::default();
    let default_site = design
        .rows
        .first()
        .and_then(|r| design.site(&r.site))
        .or_else(|| target.sites.iter().find(|s| s.class == SiteClass::Core))
        .or(target.sites.first());
    let origin = design.core.lower_left();

    let mut by_tier: BTreeMap<Option<Tier>, Vec<(Rect, &str)>> = BTreeMap::new();
    for inst in &design.instances {
        let Some(master) = target.macro_named(&inst.master) else {
            report.push(ViolationCode::UnknownMaster, format!("{} ({})", inst.name, inst.master));
            continue;
        };
        let Some(bbox) = inst.bbox(master) else { continue };
        let site = master
            .site
            .as_deref()
            .and_then(|n| target.sites.iter().find(|s| s.name == n).or_else(|| design.site(n)))
            .or(default_site);
        if let Some(site) = site.filter(|s| s.width > 0 && s.height > 0) {
            if (bbox.xlo - origin.x) % site.width != 0 || (bbox.ylo - origin.y) % site.height != 0 {
                report.push(ViolationCode::OffGrid, inst.name.as_str());
            }
        }
        if !design.core.contains(&bbox) {
            report.push(ViolationCode::OutsideCore, inst.name.as_str());
        }
        if !master.is_cover() {
            by_tier.entry(inst.tier).or_default().push((bbox, inst.name.as_str()));
        }
    }

    for rects in by_tier.values_mut() {
        rects.sort_by_key(|(r, n)| (r.xlo, r.ylo, *n));
        let mut active: Vec<(Rect, &str)> = Vec::new();
        for &(r, name) in rects.iter() {
            active.retain(|(a, _)| a.xhi > r.xlo);
            for (a, other) in &active {
                if a.overlaps(&r) {
                    report.push(ViolationCode::Overlap, format!("{other} {name}"));
                }
            }
            active.push((r, name));
        }
    }

    for row in &design.rows {
        match design.site(&row.site).or_else(|| target.sites.iter().find(|s| s.name == row.site)) {
            None => report.push(ViolationCode::UnknownSite, format!("{} ({})", row.name, row.site)),
            Some(site) if row.step != site.width => report.push(ViolationCode::RowStepMismatch, row.name.as_str()),
            Some(_) => {}
        }
        if row.num_sites == 0 {
            report.push(ViolationCode::EmptyRow, row.name.as_str());
        }
    }
    row_overlaps(design, &mut report);
    report
}
