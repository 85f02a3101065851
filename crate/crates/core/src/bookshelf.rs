//! Bookshelf benchmark records and their mapping onto [`Design`].
//!
//! Bookshelf has no master concept: every distinct node footprint becomes a
//! synthetic master named `BKS_w{W}_h{H}_CORE` (W, H in DBU) with generic
//! `P<k>` pins, terminals become IO pins and `.scl` rows become rows over a
//! synthetic site. Pin offsets are node-center relative in Bookshelf and
//! lower-left relative in the model; the conversion is exact in half-DBU.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::geom::{Dbu, Orientation, Point, Rect};
use crate::model::{
    CellClass, Design, Direction, Endpoint, Instance, IoPin, Master, MasterPin, Net, NetPin, Row, Site,
};
use crate::num::{div_round_half_away, format_ratio, Decimal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Movability {
    Movable,
    Terminal,
    TerminalNi,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRecord {
    pub name: String,
    pub width: Decimal,
    pub height: Decimal,
    pub movability: Movability,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PinRecord {
    pub node: String,
    pub direction: Option<Direction>,
    /// Offset from the node center.
    pub offset: Option<(Decimal, Decimal)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetRecord {
    pub name: String,
    pub pins: Vec<PinRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Movable,
    Fixed,
    FixedNi,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlRecord {
    pub name: String,
    pub x: Decimal,
    pub y: Decimal,
    pub orientation: Option<Orientation>,
    pub status: PlStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SclRow {
    pub coordinate: Decimal,
    pub height: Decimal,
    pub sitewidth: Decimal,
    pub sitespacing: Decimal,
    pub siteorient: String,
    pub sitesymmetry: String,
    pub subrow_origin: Decimal,
    pub num_sites: u32,
}

/// Member files named by the `.aux` manifest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuxManifest {
    pub nodes: String,
    pub nets: String,
    pub wts: Option<String>,
    pub pl: String,
    pub scl: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BookshelfBundle {
    pub name: String,
    pub aux: AuxManifest,
    pub nodes: Vec<NodeRecord>,
    pub nets: Vec<NetRecord>,
    pub pl: Vec<PlRecord>,
    pub rows: Vec<SclRow>,
    pub wts: Vec<(String, u32)>,
}

impl BookshelfBundle {
    pub fn pin_count(&self) -> usize {
        self.nets.iter().map(|n| n.pins.len()).sum()
    }

    pub fn terminal_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.movability != Movability::Movable).count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BookshelfError {
    #[error("SCALE_OVERFLOW: value {value} of `{what}` does not fit the DBU range")]
    ScaleOverflow { what: String, value: String },
    #[error("UNKNOWN_NODE: net `{net}` references undeclared node `{node}`")]
    UnknownNode { net: String, node: String },
    #[error("DUPLICATE_NODE: node `{0}` declared twice")]
    DuplicateNode(String),
}

const DBU_LIMIT: i128 = 1 << 52;

fn to_dbu2(v: Decimal, mult: i64, what: &str) -> Result<i128, BookshelfError> {
    let overflow = || BookshelfError::ScaleOverflow {
        what: what.to_string(),
        value: format_ratio(v.mantissa, 10i128.pow(v.scale)),
    };
    let num = v.mantissa.checked_mul(mult as i128).ok_or_else(overflow)?;
    let r = div_round_half_away(num, 10i128.pow(v.scale));
    if r.abs() > DBU_LIMIT {
        return Err(overflow());
    }
    Ok(r)
}

fn to_dbu(v: Decimal, units: u32, what: &str) -> Result<Dbu, BookshelfError> {
    Ok(to_dbu2(v, units as i64, what)? as Dbu)
}

/// Lower-left relative DBU offset from a center-relative Bookshelf offset.
fn center_offset_to_ll(off: Decimal, size: Dbu, units: u32, what: &str) -> Result<Dbu, BookshelfError> {
    let twice = to_dbu2(off, 2 * units as i64, what)?;
    Ok(div_round_half_away(twice + size as i128, 2) as Dbu)
}

/// Center-relative Bookshelf offset for a lower-left relative DBU offset.
fn ll_offset_to_center(off: Dbu, size: Dbu, units: u32) -> Decimal {
    decimal_ratio(2 * off as i128 - size as i128, 2 * units as i128)
}

/// Decimal for `num/den`, exact when the fraction terminates.
pub fn decimal_ratio(num: i128, den: i128) -> Decimal {
    format_ratio(num, den).parse().expect("formatted ratio is a decimal")
}

pub fn dbu_decimal(v: Dbu, units: u32) -> Decimal {
    decimal_ratio(v as i128, units as i128)
}

pub fn master_name(width: Dbu, height: Dbu) -> String {
    format!("BKS_w{width}_h{height}_CORE")
}

pub fn site_name(width: Dbu, height: Dbu) -> String {
    format!("BKS_site_w{width}_h{height}")
}

/// Builds a design from a parsed bundle; `units` is DBU per Bookshelf length unit.
pub fn bundle_to_design(bundle: &BookshelfBundle, units: u32) -> Result<Design, BookshelfError> {
    let mut design = Design::new(bundle.name.clone(), units);

    struct NodeInfo {
        width: Dbu,
        height: Dbu,
        terminal: bool,
        index: usize,
        pins: usize,
    }
    let mut nodes: BTreeMap<&str, NodeInfo> = BTreeMap::new();
    for n in &bundle.nodes {
        let width = to_dbu(n.width, units, &n.name)?;
        let height = to_dbu(n.height, units, &n.name)?;
        let terminal = n.movability != Movability::Movable;
        let index = if terminal { design.io_pins.len() } else { design.instances.len() };
        if terminal {
            let mut io = IoPin::new(n.name.clone(), Direction::Inout);
            io.shape = Rect::new(0, 0, width, height);
            io.fixed = true;
            design.io_pins.push(io);
        } else {
            design.instances.push(Instance::new(n.name.clone(), master_name(width, height)));
        }
        let info = NodeInfo { width, height, terminal, index, pins: 0 };
        if nodes.insert(n.name.as_str(), info).is_some() {
            return Err(BookshelfError::DuplicateNode(n.name.clone()));
        }
    }

    let weights: BTreeMap<&str, u32> = bundle.wts.iter().map(|(n, w)| (n.as_str(), *w)).collect();
    for (i, rec) in bundle.nets.iter().enumerate() {
        let name = if rec.name.is_empty() { format!("net{i}") } else { rec.name.clone() };
        let mut net = Net::new(name);
        if let Some(w) = weights.get(rec.name.as_str()) {
            net.weight = *w;
        }
        for p in &rec.pins {
            let info = nodes.get_mut(p.node.as_str()).ok_or_else(|| BookshelfError::UnknownNode {
                net: rec.name.clone(),
                node: p.node.clone(),
            })?;
            let (dx, dy) = p.offset.unwrap_or((Decimal::from_int(0), Decimal::from_int(0)));
            let offset = Point::new(
                center_offset_to_ll(dx, info.width, units, &p.node)?,
                center_offset_to_ll(dy, info.height, units, &p.node)?,
            );
            let endpoint = if info.terminal {
                Endpoint::io(p.node.clone())
            } else {
                let pin = format!("P{}", info.pins);
                info.pins += 1;
                Endpoint::inst(p.node.clone(), pin)
            };
            net.pins.push(NetPin {
                endpoint,
                direction: p.direction,
                offset: Some(offset),
            });
        }
        design.nets.push(net);
    }

    // one master per footprint, with as many generic pins as its busiest node
    let mut masters: BTreeMap<(Dbu, Dbu), usize> = BTreeMap::new();
    for info in nodes.values().filter(|n| !n.terminal) {
        let e = masters.entry((info.width, info.height)).or_insert(0);
        *e = (*e).max(info.pins);
    }
    for ((w, h), pins) in masters {
        let mut m = Master::new(master_name(w, h), w, h);
        m.class = CellClass::Core;
        m.pins = (0..pins).map(|k| MasterPin::new(format!("P{k}"), Direction::Inout)).collect();
        design.masters.push(m);
    }

    for rec in &bundle.pl {
        let Some(info) = nodes.get(rec.name.as_str()) else {
            continue;
        };
        let loc = Point::new(to_dbu(rec.x, units, &rec.name)?, to_dbu(rec.y, units, &rec.name)?);
        let orientation = rec.orientation.unwrap_or_default();
        let fixed = rec.status != PlStatus::Movable;
        if info.terminal {
            let io = &mut design.io_pins[info.index];
            io.location = Some(loc);
            io.orientation = orientation;
        } else {
            let inst = &mut design.instances[info.index];
            inst.location = Some(loc);
            inst.orientation = orientation;
            inst.fixed = fixed;
        }
    }

    for (i, r) in bundle.rows.iter().enumerate() {
        let height = to_dbu(r.height, units, "row height")?;
        let step = to_dbu(r.sitespacing, units, "row sitespacing")?;
        let site = site_name(step, height);
        if design.site(&site).is_none() {
            design.sites.push(Site::new(site.clone(), step, height));
        }
        design.rows.push(Row {
            name: format!("row_{i}"),
            site,
            origin: Point::new(to_dbu(r.subrow_origin, units, "row origin")?, to_dbu(r.coordinate, units, "row coordinate")?),
            orientation: r.siteorient.parse().unwrap_or_default(),
            num_sites: r.num_sites,
            step,
        });
    }

    let (die, core) = derive_outline(&design);
    design.die = die;
    design.core = core;
    Ok(design)
}

/// Core = hull of rows (or of placed objects when there are no rows);
/// die = hull of the core and every placed object.
pub fn derive_outline(design: &Design) -> (Rect, Rect) {
    let masters = design.master_index();
    let mut objects: Vec<Rect> = design
        .instances
        .iter()
        .filter_map(|i| i.bbox(masters.get(i.master.as_str())?))
        .collect();
    objects.extend(design.io_pins.iter().filter_map(|p| {
        let loc = p.location?;
        let (w, h) = p.orientation.footprint(p.shape.width(), p.shape.height());
        Some(Rect::from_origin_size(loc, w, h))
    }));
    let rows: Vec<Rect> = design
        .rows
        .iter()
        .filter_map(|r| Some(r.bbox(design.site(&r.site)?.height)))
        .collect();
    let core = Rect::hull(&rows).or_else(|| Rect::hull(&objects)).unwrap_or_default();
    let die = objects.iter().fold(core, |acc, r| acc.union(r));
    (die, core)
}

fn direction_of(pin: &NetPin, lookup: &crate::model::DesignLookup<'_>) -> Option<Direction> {
    match pin.direction {
        Some(d) => Some(d),
        None => match lookup.net_role(pin)? {
            Direction::Inout => None,
            d => Some(d),
        },
    }
}

/// Bookshelf records for a design. Pin names and masters are not representable
/// and are dropped; routing is dropped.
pub fn design_to_bundle(design: &Design) -> BookshelfBundle {
    let units = design.units;
    let lookup = design.lookup();
    let mut b = BookshelfBundle {
        name: design.name.clone(),
        aux: AuxManifest {
            nodes: format!("{}.nodes", design.name),
            nets: format!("{}.nets", design.name),
            wts: Some(format!("{}.wts", design.name)),
            pl: format!("{}.pl", design.name),
            scl: format!("{}.scl", design.name),
        },
        ..Default::default()
    };
    for inst in &design.instances {
        let (w, h) = lookup.masters.get(inst.master.as_str()).map_or((0, 0), |m| (m.width, m.height));
        b.nodes.push(NodeRecord {
            name: inst.name.clone(),
            width: dbu_decimal(w, units),
            height: dbu_decimal(h, units),
            movability: Movability::Movable,
        });
        if let Some(loc) = inst.location {
            b.pl.push(PlRecord {
                name: inst.name.clone(),
                x: dbu_decimal(loc.x, units),
                y: dbu_decimal(loc.y, units),
                orientation: Some(inst.orientation),
                status: if inst.fixed { PlStatus::Fixed } else { PlStatus::Movable },
            });
        }
    }
    for io in &design.io_pins {
        b.nodes.push(NodeRecord {
            name: io.name.clone(),
            width: dbu_decimal(io.shape.width(), units),
            height: dbu_decimal(io.shape.height(), units),
            movability: Movability::Terminal,
        });
        if let Some(loc) = io.location {
            b.pl.push(PlRecord {
                name: io.name.clone(),
                x: dbu_decimal(loc.x, units),
                y: dbu_decimal(loc.y, units),
                orientation: Some(io.orientation),
                status: PlStatus::Fixed,
            });
        }
    }
    for net in &design.nets {
        let mut rec = NetRecord { name: net.name.clone(), pins: Vec::new() };
        for p in &net.pins {
            let (size, anchor) = match &p.endpoint {
                Endpoint::Instance { instance, pin } => {
                    let master = lookup.instance_master(instance);
                    let size = master.map_or((0, 0), |m| (m.width, m.height));
                    (size, master.and_then(|m| m.pin_anchor(pin)))
                }
                Endpoint::Io { name } => {
                    let size = lookup.io_pin(name).map_or((0, 0), |io| (io.shape.width(), io.shape.height()));
                    // without an offset an IO pin sits at its location, not its center
                    (size, Some(Point::new(0, 0)))
                }
            };
            let ll = p.offset.or(anchor).unwrap_or(Point::new(size.0.div_euclid(2), size.1.div_euclid(2)));
            rec.pins.push(PinRecord {
                node: p.endpoint.owner().to_string(),
                direction: direction_of(p, &lookup),
                offset: Some((ll_offset_to_center(ll.x, size.0, units), ll_offset_to_center(ll.y, size.1, units))),
            });
        }
        if net.weight != 1 {
            b.wts.push((net.name.clone(), net.weight));
        }
        b.nets.push(rec);
    }
    for row in &design.rows {
        let (sw, sh) = design.site(&row.site).map_or((row.step, 0), |s| (s.width, s.height));
        b.rows.push(SclRow {
            coordinate: dbu_decimal(row.origin.y, units),
            height: dbu_decimal(sh, units),
            sitewidth: dbu_decimal(sw, units),
            sitespacing: dbu_decimal(row.step, units),
            siteorient: row.orientation.as_str().to_string(),
            sitesymmetry: "1".to_string(),
            subrow_origin: dbu_decimal(row.origin.x, units),
            num_sites: row.num_sites,
        });
    }
    if b.wts.is_empty() {
        b.aux.wts = None;
    }
    b
}
