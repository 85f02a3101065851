//! Canonical in-memory representation of designs, cell libraries and technology stacks.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geom::{Dbu, LayerRect, Orientation, Point, Rect};

/// Default database resolution when a source does not state one.
pub const DEFAULT_DBU_PER_MICRON: u32 = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Input,
    Output,
    #[default]
    Inout,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Input => "INPUT",
            Direction::Output => "OUTPUT",
            Direction::Inout => "INOUT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "INPUT" => Some(Direction::Input),
            "OUTPUT" => Some(Direction::Output),
            "INOUT" => Some(Direction::Inout),
            _ => None,
        }
    }

    /// INPUT <-> OUTPUT; INOUT is its own mirror.
    pub fn reversed(self) -> Self {
        match self {
            Direction::Input => Direction::Output,
            Direction::Output => Direction::Input,
            Direction::Inout => Direction::Inout,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PinUse {
    #[default]
    Signal,
    Clock,
    Power,
    Ground,
}

impl PinUse {
    pub fn as_str(self) -> &'static str {
        match self {
            PinUse::Signal => "SIGNAL",
            PinUse::Clock => "CLOCK",
            PinUse::Power => "POWER",
            PinUse::Ground => "GROUND",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "SIGNAL" => Some(PinUse::Signal),
            "CLOCK" => Some(PinUse::Clock),
            "POWER" => Some(PinUse::Power),
            "GROUND" => Some(PinUse::Ground),
            _ => None,
        }
    }

    pub fn is_supply(self) -> bool {
        matches!(self, PinUse::Power | PinUse::Ground)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellClass {
    #[default]
    Core,
    Cover,
    Block,
    Pad,
    Endcap,
}

impl CellClass {
    pub fn as_str(self) -> &'static str {
        match self {
            CellClass::Core => "CORE",
            CellClass::Cover => "COVER",
            CellClass::Block => "BLOCK",
            CellClass::Pad => "PAD",
            CellClass::Endcap => "ENDCAP",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "CORE" => Some(CellClass::Core),
            "COVER" => Some(CellClass::Cover),
            "BLOCK" => Some(CellClass::Block),
            "PAD" => Some(CellClass::Pad),
            "ENDCAP" => Some(CellClass::Endcap),
            _ => None,
        }
    }
}

/// Tier of a 3D stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    Bottom,
    Upper,
}

impl Tier {
    pub fn suffix(self) -> &'static str {
        match self {
            Tier::Bottom => "_bottom",
            Tier::Upper => "_upper",
        }
    }

    pub fn other(self) -> Tier {
        match self {
            Tier::Bottom => Tier::Upper,
            Tier::Upper => Tier::Bottom,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Bottom => "BOTTOM",
            Tier::Upper => "UPPER",
        }
    }

    pub fn parse(s: &str) -> Option<Tier> {
        match s.to_ascii_uppercase().as_str() {
            "BOTTOM" => Some(Tier::Bottom),
            "UPPER" | "TOP" => Some(Tier::Upper),
            _ => None,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TierTag {
    #[default]
    None,
    Bottom,
    Upper,
}

impl TierTag {
    pub fn tier(self) -> Option<Tier> {
        match self {
            TierTag::None => None,
            TierTag::Bottom => Some(Tier::Bottom),
            TierTag::Upper => Some(Tier::Upper),
        }
    }

    /// Recovers the tag from the naming convention of derived masters.
    pub fn from_master_name(name: &str) -> TierTag {
        let base = name.strip_suffix("_cover").unwrap_or(name);
        if base.ends_with("_bottom") {
            TierTag::Bottom
        } else if base.ends_with("_upper") {
            TierTag::Upper
        } else {
            TierTag::None
        }
    }
}

impl From<Tier> for TierTag {
    fn from(t: Tier) -> Self {
        match t {
            Tier::Bottom => TierTag::Bottom,
            Tier::Upper => TierTag::Upper,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterPin {
    pub name: String,
    pub direction: Direction,
    #[serde(default)]
    pub pin_use: PinUse,
    /// Physical pin that is absent from the logical view.
    #[serde(default)]
    pub hidden: bool,
    pub shapes: Vec<LayerRect>,
}

impl MasterPin {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        MasterPin {
            name: name.into(),
            direction,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Master {
    pub name: String,
    pub width: Dbu,
    pub height: Dbu,
    pub class: CellClass,
    pub site: Option<String>,
    pub tier_tag: TierTag,
    pub pins: Vec<MasterPin>,
    pub obs: Vec<LayerRect>,
}

impl Master {
    pub fn new(name: impl Into<String>, width: Dbu, height: Dbu) -> Self {
        Master {
            name: name.into(),
            width,
            height,
            ..Default::default()
        }
    }

    pub fn area(&self) -> i64 {
        self.width * self.height
    }

    pub fn pin(&self, name: &str) -> Option<&MasterPin> {
        self.pins.iter().find(|p| p.name == name)
    }

    pub fn is_cover(&self) -> bool {
        self.class == CellClass::Cover
    }

    /// Offset of a pin from the cell's lower-left corner in the unrotated frame:
    /// the center of the pin's shape bounding box, or the cell center when the
    /// pin has no geometry.
    pub fn pin_anchor(&self, pin: &str) -> Option<Point> {
        let p = self.pin(pin)?;
        Some(match Rect::hull(p.shapes.iter().map(|s| &s.rect)) {
            Some(bbox) => bbox.center(),
            None => Point::new(self.width.div_euclid(2), self.height.div_euclid(2)),
        })
    }
}

/// Constant value driven onto a tied-off pin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TieValue {
    Low,
    High,
    /// Output pins cannot be tied; they are left explicitly unconnected.
    Open,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TieOff {
    pub pin: String,
    pub value: TieValue,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub master: String,
    pub location: Option<Point>,
    pub orientation: Orientation,
    pub fixed: bool,
    pub tier: Option<Tier>,
    #[serde(default)]
    pub tie_offs: Vec<TieOff>,
}

impl Instance {
    pub fn new(name: impl Into<String>, master: impl Into<String>) -> Self {
        Instance {
            name: name.into(),
            master: master.into(),
            ..Default::default()
        }
    }

    pub fn placed_at(mut self, x: Dbu, y: Dbu) -> Self {
        self.location = Some(Point::new(x, y));
        self
    }

    /// Placed footprint, given the instance's master.
    pub fn bbox(&self, master: &Master) -> Option<Rect> {
        let loc = self.location?;
        let (w, h) = self.orientation.footprint(master.width, master.height);
        Some(Rect::from_origin_size(loc, w, h))
    }
}

/// What a net pin attaches to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Endpoint {
    Instance { instance: String, pin: String },
    Io { name: String },
}

impl Endpoint {
    pub fn inst(instance: impl Into<String>, pin: impl Into<String>) -> Self {
        Endpoint::Instance {
            instance: instance.into(),
            pin: pin.into(),
        }
    }

    pub fn io(name: impl Into<String>) -> Self {
        Endpoint::Io { name: name.into() }
    }

    /// Instance name or IO pin name.
    pub fn owner(&self) -> &str {
        match self {
            Endpoint::Instance { instance, .. } => instance,
            Endpoint::Io { name } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetPin {
    pub endpoint: Endpoint,
    /// Per-pin direction that overrides the master pin direction.
    pub direction: Option<Direction>,
    /// Per-pin offset from the owner's lower-left corner (unrotated frame),
    /// overriding the master pin anchor.
    pub offset: Option<Point>,
}

impl NetPin {
    pub fn new(endpoint: Endpoint) -> Self {
        NetPin {
            endpoint,
            direction: None,
            offset: None,
        }
    }
}

/// One run of regular wiring on a layer, optionally ending in a via.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoutedWire {
    pub layer: String,
    pub points: Vec<Point>,
    pub via: Option<String>,
}

impl RoutedWire {
    pub fn length(&self) -> Dbu {
        self.points.windows(2).map(|w| w[0].manhattan(w[1])).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Net {
    pub name: String,
    pub pins: Vec<NetPin>,
    pub weight: u32,
    #[serde(default)]
    pub routing: Vec<RoutedWire>,
}

impl Net {
    pub fn new(name: impl Into<String>) -> Self {
        Net {
            name: name.into(),
            pins: Vec::new(),
            weight: 1,
            routing: Vec::new(),
        }
    }

    pub fn with_pins(mut self, pins: impl IntoIterator<Item = Endpoint>) -> Self {
        self.pins.extend(pins.into_iter().map(NetPin::new));
        self
    }
}

/// Primary IO pin (a Bookshelf terminal or a DEF `PINS` entry).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoPin {
    pub name: String,
    pub direction: Direction,
    pub location: Option<Point>,
    pub orientation: Orientation,
    pub fixed: bool,
    pub layer: Option<String>,
    /// Pin shape relative to `location`.
    pub shape: Rect,
}

impl IoPin {
    pub fn new(name: impl Into<String>, direction: Direction) -> Self {
        IoPin {
            name: name.into(),
            direction,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SiteClass {
    #[default]
    Core,
    Pad,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub name: String,
    pub class: SiteClass,
    pub width: Dbu,
    pub height: Dbu,
}

impl Site {
    pub fn new(name: impl Into<String>, width: Dbu, height: Dbu) -> Self {
        Site {
            name: name.into(),
            class: SiteClass::Core,
            width,
            height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub site: String,
    pub origin: Point,
    pub orientation: Orientation,
    pub num_sites: u32,
    pub step: Dbu,
}

impl Row {
    pub fn width(&self) -> Dbu {
        self.num_sites as Dbu * self.step
    }

    pub fn bbox(&self, site_height: Dbu) -> Rect {
        Rect::from_origin_size(self.origin, self.width(), site_height)
    }
}

/// A technology-mapped design.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub name: String,
    /// Database units per micron.
    pub units: u32,
    pub die: Rect,
    pub core: Rect,
    pub sites: Vec<Site>,
    pub masters: Vec<Master>,
    pub instances: Vec<Instance>,
    pub nets: Vec<Net>,
    pub rows: Vec<Row>,
    pub io_pins: Vec<IoPin>,
}

impl Design {
    pub fn new(name: impl Into<String>, units: u32) -> Self {
        Design {
            name: name.into(),
            units,
            die: Rect::default(),
            core: Rect::default(),
            sites: Vec::new(),
            masters: Vec::new(),
            instances: Vec::new(),
            nets: Vec::new(),
            rows: Vec::new(),
            io_pins: Vec::new(),
        }
    }

    pub fn master(&self, name: &str) -> Option<&Master> {
        self.masters.iter().find(|m| m.name == name)
    }

    pub fn site(&self, name: &str) -> Option<&Site> {
        self.sites.iter().find(|s| s.name == name)
    }

    pub fn master_index(&self) -> BTreeMap<&str, &Master> {
        self.masters.iter().map(|m| (m.name.as_str(), m)).collect()
    }

    pub fn instance_index(&self) -> BTreeMap<&str, usize> {
        self.instances
            .iter()
            .enumerate()
            .map(|(i, inst)| (inst.name.as_str(), i))
            .collect()
    }

    pub fn io_index(&self) -> BTreeMap<&str, usize> {
        self.io_pins
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.as_str(), i))
            .collect()
    }

    /// Prebuilt lookup tables for repeated pin queries.
    pub fn lookup(&self) -> DesignLookup<'_> {
        DesignLookup {
            design: self,
            masters: self.master_index(),
            instances: self.instance_index(),
            io: self.io_index(),
        }
    }
}

/// Name-indexed view over a design.
pub struct DesignLookup<'a> {
    pub design: &'a Design,
    pub masters: BTreeMap<&'a str, &'a Master>,
    pub instances: BTreeMap<&'a str, usize>,
    pub io: BTreeMap<&'a str, usize>,
}

impl<'a> DesignLookup<'a> {
    pub fn instance(&self, name: &str) -> Option<&'a Instance> {
        self.instances.get(name).map(|&i| &self.design.instances[i])
    }

    pub fn instance_master(&self, name: &str) -> Option<&'a Master> {
        let inst = self.instance(name)?;
        self.masters.get(inst.master.as_str()).copied()
    }

    pub fn io_pin(&self, name: &str) -> Option<&'a IoPin> {
        self.io.get(name).map(|&i| &self.design.io_pins[i])
    }

    /// Direction of a net pin as seen by the net: the per-pin override when
    /// present, otherwise the master pin direction. A primary input port drives
    /// its net, so IO port directions are mirrored.
    pub fn net_role(&self, pin: &NetPin) -> Option<Direction> {
        if let Some(d) = pin.direction {
            return Some(d);
        }
        match &pin.endpoint {
            Endpoint::Instance { instance, pin } => {
                Some(self.instance_master(instance)?.pin(pin)?.direction)
            }
            Endpoint::Io { name } => Some(self.io_pin(name)?.direction.reversed()),
        }
    }

    /// Absolute pin location, `None` when the owner is unplaced or unknown.
    pub fn pin_location(&self, pin: &NetPin) -> Option<Point> {
        match &pin.endpoint {
            Endpoint::Instance { instance, pin: pname } => {
                let inst = self.instance(instance)?;
                let master = self.masters.get(inst.master.as_str())?;
                let loc = inst.location?;
                let local = match pin.offset {
                    Some(o) => o,
                    None => master.pin_anchor(pname)?,
                };
                let p = inst.orientation.apply(local, master.width, master.height);
                Some(loc.translate(p.x, p.y))
            }
            Endpoint::Io { name } => {
                let io = self.io_pin(name)?;
                let loc = io.location?;
                Some(match pin.offset {
                    Some(o) => {
                        let p = io.orientation.apply(o, io.shape.width(), io.shape.height());
                        loc.translate(p.x, p.y)
                    }
                    None => loc,
                })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LayerKind {
    Routing,
    Cut,
    Masterslice,
    Overlap,
    Implant,
}

impl LayerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Routing => "ROUTING",
            LayerKind::Cut => "CUT",
            LayerKind::Masterslice => "MASTERSLICE",
            LayerKind::Overlap => "OVERLAP",
            LayerKind::Implant => "IMPLANT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ROUTING" => Some(LayerKind::Routing),
            "CUT" => Some(LayerKind::Cut),
            "MASTERSLICE" => Some(LayerKind::Masterslice),
            "OVERLAP" => Some(LayerKind::Overlap),
            "IMPLANT" => Some(LayerKind::Implant),
            _ => None,
        }
    }

    pub fn is_interconnect(self) -> bool {
        matches!(self, LayerKind::Routing | LayerKind::Cut)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerDirection {
    Horizontal,
    Vertical,
}

impl LayerDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerDirection::Horizontal => "HORIZONTAL",
            LayerDirection::Vertical => "VERTICAL",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "HORIZONTAL" => Some(LayerDirection::Horizontal),
            "VERTICAL" => Some(LayerDirection::Vertical),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            LayerDirection::Horizontal => LayerDirection::Vertical,
            LayerDirection::Vertical => LayerDirection::Horizontal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub name: String,
    pub kind: LayerKind,
    pub direction: Option<LayerDirection>,
    pub pitch: Dbu,
    pub width: Dbu,
    pub spacing: Dbu,
}

impl Layer {
    pub fn routing(name: impl Into<String>, direction: LayerDirection, pitch: Dbu, width: Dbu, spacing: Dbu) -> Self {
        Layer {
            name: name.into(),
            kind: LayerKind::Routing,
            direction: Some(direction),
            pitch,
            width,
            spacing,
        }
    }

    pub fn cut(name: impl Into<String>, width: Dbu, spacing: Dbu) -> Self {
        Layer {
            name: name.into(),
            kind: LayerKind::Cut,
            direction: None,
            pitch: 0,
            width,
            spacing,
        }
    }
}

/// Fixed via between two routing layers through one cut layer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViaDef {
    pub name: String,
    pub bottom: String,
    pub cut: String,
    pub top: String,
    pub bottom_rects: Vec<Rect>,
    pub cut_rects: Vec<Rect>,
    pub top_rects: Vec<Rect>,
    /// Resistance in ohms.
    pub resistance: Option<f64>,
}

/// Which part of a tiered stack a layer belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LayerTier {
    Bottom,
    Upper,
    Bond,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TechStack {
    pub name: String,
    pub units: u32,
    /// Bottom-to-top process order.
    pub layers: Vec<Layer>,
    pub sites: Vec<Site>,
    pub vias: Vec<ViaDef>,
    pub tiered: bool,
    pub tier_of_layer: BTreeMap<String, LayerTier>,
}

impl TechStack {
    pub fn new(name: impl Into<String>, units: u32) -> Self {
        TechStack {
            name: name.into(),
            units,
            layers: Vec::new(),
            sites: Vec::new(),
            vias: Vec::new(),
            tiered: false,
            tier_of_layer: BTreeMap::new(),
        }
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }

    pub fn layer_position(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name == name)
    }

    pub fn routing_layers(&self) -> impl Iterator<Item = &Layer> {
        self.layers.iter().filter(|l| l.kind == LayerKind::Routing)
    }

    pub fn count_kind(&self, kind: LayerKind) -> usize {
        self.layers.iter().filter(|l| l.kind == kind).count()
    }

    /// Technology view of a parsed library.
    pub fn from_lef(name: impl Into<String>, lef: &LefSubset) -> Self {
        TechStack {
            name: name.into(),
            units: lef.units,
            layers: lef.layers.clone(),
            sites: lef.sites.clone(),
            vias: lef.vias.clone(),
            tiered: false,
            tier_of_layer: BTreeMap::new(),
        }
    }

    /// Structural problems: adjacent cut layers and vias whose layers are
    /// missing or out of bottom < cut < top order.
    pub fn check(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for w in self.layers.windows(2) {
            if w[0].kind == LayerKind::Cut && w[1].kind == LayerKind::Cut {
                problems.push(alloc::format!("adjacent cut layers {} and {}", w[0].name, w[1].name));
            }
        }
        for via in &self.vias {
            let pos = |n: &str| self.layer_position(n);
            match (pos(&via.bottom), pos(&via.cut), pos(&via.top)) {
                (Some(b), Some(c), Some(t)) if b < c && c < t => {
                    if self.layers[c].kind != LayerKind::Cut {
                        problems.push(alloc::format!("via {} cut layer {} is not a cut layer", via.name, via.cut));
                    }
                }
                _ => problems.push(alloc::format!("via {} has missing or misordered layers", via.name)),
            }
        }
        problems
    }

    /// A plain 2D stack with `metals` routing layers `M1..Mn` and cuts `V1..V(n-1)`,
    /// alternating preferred directions starting horizontal, plus one core site.
    pub fn synthetic(name: impl Into<String>, metals: usize, units: u32) -> Self {
        let mut t = TechStack::new(name, units);
        let scale = units as Dbu / 1000;
        for i in 1..=metals {
            let dir = if i % 2 == 1 { LayerDirection::Horizontal } else { LayerDirection::Vertical };
            let pitch = (140 + 20 * i as Dbu) * scale;
            t.layers.push(Layer::routing(alloc::format!("M{i}"), dir, pitch, pitch / 2, pitch / 2));
            if i < metals {
                t.layers.push(Layer::cut(alloc::format!("V{i}"), 70 * scale, 80 * scale));
                t.vias.push(ViaDef {
                    name: alloc::format!("VIA{i}{}", i + 1),
                    bottom: alloc::format!("M{i}"),
                    cut: alloc::format!("V{i}"),
                    top: alloc::format!("M{}", i + 1),
                    bottom_rects: alloc::vec![Rect::new(-50 * scale, -35 * scale, 50 * scale, 35 * scale)],
                    cut_rects: alloc::vec![Rect::new(-35 * scale, -35 * scale, 35 * scale, 35 * scale)],
                    top_rects: alloc::vec![Rect::new(-35 * scale, -50 * scale, 35 * scale, 50 * scale)],
                    resistance: Some(1.5),
                });
            }
        }
        t.sites.push(Site::new("core", 190 * scale, 1400 * scale));
        t
    }
}

/// The LEF subset this toolkit understands: technology plus cell macros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LefSubset {
    pub units: u32,
    pub layers: Vec<Layer>,
    pub sites: Vec<Site>,
    pub vias: Vec<ViaDef>,
    pub macros: Vec<Master>,
}

impl LefSubset {
    pub fn new(units: u32) -> Self {
        LefSubset {
            units,
            layers: Vec::new(),
            sites: Vec::new(),
            vias: Vec::new(),
            macros: Vec::new(),
        }
    }

    pub fn from_tech(tech: &TechStack, macros: Vec<Master>) -> Self {
        LefSubset {
            units: tech.units,
            layers: tech.layers.clone(),
            sites: tech.sites.clone(),
            vias: tech.vias.clone(),
            macros,
        }
    }

    /// Library view of a design: its masters plus the given technology.
    pub fn for_design(tech: &TechStack, design: &Design) -> Self {
        let mut lef = LefSubset::from_tech(tech, design.masters.clone());
        for s in &design.sites {
            if !lef.sites.iter().any(|x| x.name == s.name) {
                lef.sites.push(s.clone());
            }
        }
        lef.units = design.units;
        lef
    }

    pub fn macro_named(&self, name: &str) -> Option<&Master> {
        self.macros.iter().find(|m| m.name == name)
    }

    pub fn layer(&self, name: &str) -> Option<&Layer> {
        self.layers.iter().find(|l| l.name == name)
    }
}
