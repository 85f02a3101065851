//! Face-to-face 3D enablement from 2D technologies: tiered metal stack with a
//! bonding cut layer, per-tier and COVER masters, a unified heterogeneous
//! library, and row rebuilding for tier-specific sites.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::{Dbu, LayerRect, Orientation, Point, Rect};
use crate::model::{
    CellClass, Direction, Layer, LayerKind, LayerTier, LefSubset, Master, Row, Site, TechStack, Tier,
    TierTag, ViaDef,
};

/// Suffix for every layer, via and site of the upper tier.
pub const UPPER_SUFFIX: &str = "_m";
pub const HBT_LAYER: &str = "HBT";
pub const HBT_VIA: &str = "HBT_VIA";
pub const COMPAT_LAYERS: [&str; 2] = ["M2_add", "M3_add"];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Enable3dError {
    #[error("UNIT_MISMATCH: bottom tech has {bottom} DBU/um, top tech has {top}")]
    UnitMismatch { bottom: u32, top: u32 },
    #[error("UNKNOWN_LAYER: macro `{macro_name}` references layer `{layer}`")]
    UnknownLayer { macro_name: String, layer: String },
    #[error("EMPTY_INTERSECTION: the libraries share no macro name")]
    EmptyIntersection,
    #[error("SITE_TOO_LARGE: site {site_w}x{site_h} does not fit core {core_w}x{core_h}")]
    SiteTooLarge { site_w: Dbu, site_h: Dbu, core_w: Dbu, core_h: Dbu },
    #[error("BAD_SITE: site dimensions must be positive")]
    BadSite,
    #[error("NONPOSITIVE_PITCH: {0}")]
    NonpositivePitch(f64),
    #[error("BAD_HBT: {0}")]
    BadHbt(&'static str),
    #[error("BAD_STACK: {0}")]
    BadStack(String),
}

/// Hybrid bonding terminal geometry in microns, resistance in ohms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HbtSpec {
    pub width_um: f64,
    pub spacing_um: f64,
    pub pitch_um: f64,
    pub resistance_ohm: f64,
}

impl Default for HbtSpec {
    fn default() -> Self {
        HbtSpec {
            width_um: 0.5,
            spacing_um: 0.5,
            pitch_um: 1.0,
            resistance_ohm: 0.02,
        }
    }
}

impl HbtSpec {
    /// Square terminal of half the pitch, spaced by the other half.
    pub fn from_pitch(pitch_um: f64, resistance_ohm: f64) -> Result<Self, Enable3dError> {
        if !(pitch_um > 0.0) || !pitch_um.is_finite() {
            return Err(Enable3dError::NonpositivePitch(pitch_um));
        }
        let half = pitch_um / 2.0;
        let s = HbtSpec { width_um: half, spacing_um: half, pitch_um, resistance_ohm };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<(), Enable3dError> {
        if !(self.width_um > 0.0 && self.spacing_um > 0.0 && self.pitch_um > 0.0) {
            return Err(Enable3dError::BadHbt("width, spacing and pitch must be positive"));
        }
        if !(self.resistance_ohm >= 0.0) {
            return Err(Enable3dError::BadHbt("resistance must be nonnegative"));
        }
        if self.width_um != self.spacing_um {
            return Err(Enable3dError::BadHbt("width must equal spacing"));
        }
        if self.pitch_um != self.width_um + self.spacing_um {
            return Err(Enable3dError::BadHbt("pitch must equal width + spacing"));
        }
        Ok(())
    }

    fn to_dbu(um: f64, units: u32) -> Dbu {
        libm::round(um * units as f64) as Dbu
    }

    pub fn width_dbu(&self, units: u32) -> Dbu {
        Self::to_dbu(self.width_um, units)
    }

    pub fn spacing_dbu(&self, units: u32) -> Dbu {
        Self::to_dbu(self.spacing_um, units)
    }

    /// Width plus spacing on the grid, so the identity survives rounding of
    /// a half-pitch that is off the grid.
    pub fn pitch_dbu(&self, units: u32) -> Dbu {
        self.width_dbu(units) + self.spacing_dbu(units)
    }
}

/// Specs for each pitch with width = spacing = pitch / 2 and the base resistance.
pub fn hbt_pitch_sweep(base: &HbtSpec, pitches: &[f64]) -> Result<Vec<HbtSpec>, Enable3dError> {
    pitches.iter().map(|&p| HbtSpec::from_pitch(p, base.resistance_ohm)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub bottom_tech: TechStack,
    pub top_tech: TechStack,
    pub hbt: HbtSpec,
    pub legacy_compat_layers: bool,
    /// Separate supply domains per tier; recorded in the manifest only.
    pub pdn_isolated: bool,
}

impl StackConfig {
    pub fn homogeneous(tech: TechStack) -> Self {
        StackConfig {
            bottom_tech: tech.clone(),
            top_tech: tech,
            hbt: HbtSpec::default(),
            legacy_compat_layers: false,
            pdn_isolated: true,
        }
    }
}

pub fn upper_name(name: &str) -> String {
    format!("{name}{UPPER_SUFFIX}")
}

fn interconnect(tech: &TechStack) -> impl Iterator<Item = &Layer> {
    tech.layers.iter().filter(|l| l.kind.is_interconnect())
}

/// Tiered stack: the bottom tech's routing and cut layers, optional compat
/// layers, the bonding cut layer, then the top tech's layers mirrored (top
/// metal first, since the dies face each other) and suffixed `_m`.
pub fn build_3d_tech(cfg: &StackConfig) -> Result<TechStack, Enable3dError> {
    let (bt, tt) = (&cfg.bottom_tech, &cfg.top_tech);
    if bt.units != tt.units {
        return Err(Enable3dError::UnitMismatch { bottom: bt.units, top: tt.units });
    }
    cfg.hbt.check()?;
    let units = bt.units;
    let bottom_top_metal = interconnect(bt)
        .filter(|l| l.kind == LayerKind::Routing)
        .last()
        .ok_or_else(|| Enable3dError::BadStack(format!("{} has no routing layer", bt.name)))?
        .name
        .clone();
    let top_top_metal = interconnect(tt)
        .filter(|l| l.kind == LayerKind::Routing)
        .last()
        .ok_or_else(|| Enable3dError::BadStack(format!("{} has no routing layer", tt.name)))?
        .name
        .clone();

    let mut out = TechStack::new(format!("{}+{}_f2f", bt.name, tt.name), units);
    out.tiered = true;
    for l in interconnect(bt) {
        out.layers.push(l.clone());
        out.tier_of_layer.insert(l.name.clone(), LayerTier::Bottom);
    }
    if cfg.legacy_compat_layers {
        let routing: Vec<&Layer> = bt.routing_layers().collect();
        for (i, name) in COMPAT_LAYERS.iter().enumerate() {
            let mut l = routing
                .get(i + 1)
                .or(routing.last())
                .map(|l| (*l).clone())
                .ok_or_else(|| Enable3dError::BadStack(format!("{} has no routing layer", bt.name)))?;
            l.name = name.to_string();
            out.tier_of_layer.insert(l.name.clone(), LayerTier::Bottom);
            out.layers.push(l);
        }
    }
    let w = cfg.hbt.width_dbu(units);
    let s = cfg.hbt.spacing_dbu(units);
    let mut hbt = Layer::cut(HBT_LAYER, w, s);
    hbt.pitch = cfg.hbt.pitch_dbu(units);
    out.layers.push(hbt);
    out.tier_of_layer.insert(HBT_LAYER.to_string(), LayerTier::Bond);
    for l in interconnect(tt).collect::<Vec<_>>().into_iter().rev() {
        let mut l = l.clone();
        l.name = upper_name(&l.name);
        out.tier_of_layer.insert(l.name.clone(), LayerTier::Upper);
        out.layers.push(l);
    }

    out.vias.extend(bt.vias.iter().cloned());
    let lo = -(w / 2);
    let pad = Rect::new(lo, lo, lo + w, lo + w);
    out.vias.push(ViaDef {
        name: HBT_VIA.to_string(),
        bottom: bottom_top_metal,
        cut: HBT_LAYER.to_string(),
        top: upper_name(&top_top_metal),
        bottom_rects: alloc::vec![pad],
        cut_rects: alloc::vec![pad],
        top_rects: alloc::vec![pad],
        resistance: Some(cfg.hbt.resistance_ohm),
    });
    // mirrored tier: a via's bottom and top swap places
    for v in &tt.vias {
        out.vias.push(ViaDef {
            name: upper_name(&v.name),
            bottom: upper_name(&v.top),
            cut: upper_name(&v.cut),
            top: upper_name(&v.bottom),
            bottom_rects: v.top_rects.clone(),
            cut_rects: v.cut_rects.clone(),
            top_rects: v.bottom_rects.clone(),
            resistance: v.resistance,
        });
    }
    out.sites.extend(bt.sites.iter().cloned());
    for site in &tt.sites {
        let mut s = site.clone();
        s.name = upper_name(&s.name);
        out.sites.push(s);
    }
    let problems = out.check();
    if let Some(p) = problems.into_iter().next() {
        return Err(Enable3dError::BadStack(p));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierManifest {
    pub tier: String,
    pub tech: String,
    pub layers: Vec<String>,
    pub sites: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdnDomain {
    pub name: String,
    pub tiers: Vec<String>,
    pub power: String,
    pub ground: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    pub stack: String,
    pub units: u32,
    pub tiers: Vec<TierManifest>,
    pub bond_layer: String,
    pub bond_via: String,
    pub layer_map: BTreeMap<String, LayerTier>,
    pub hbt: HbtSpec,
    pub legacy_compat_layers: bool,
    pub pdn_isolated: bool,
    pub pdn_domains: Vec<PdnDomain>,
}

/// Machine-readable summary of a stack built by [`build_3d_tech`].
pub fn stack_manifest(cfg: &StackConfig, tech: &TechStack) -> StackManifest {
    let tier_layers = |t: LayerTier| -> Vec<String> {
        tech.layers
            .iter()
            .filter(|l| tech.tier_of_layer.get(&l.name) == Some(&t))
            .map(|l| l.name.clone())
            .collect()
    };
    let pdn_domains = if cfg.pdn_isolated {
        alloc::vec![
            PdnDomain {
                name: "bottom".into(),
                tiers: alloc::vec!["BOTTOM".into()],
                power: "VDD".into(),
                ground: "VSS".into(),
            },
            PdnDomain {
                name: "upper".into(),
                tiers: alloc::vec!["UPPER".into()],
                power: upper_name("VDD"),
                ground: upper_name("VSS"),
            },
        ]
    } else {
        alloc::vec![PdnDomain {
            name: "shared".into(),
            tiers: alloc::vec!["BOTTOM".into(), "UPPER".into()],
            power: "VDD".into(),
            ground: "VSS".into(),
        }]
    };
    StackManifest {
        stack: tech.name.clone(),
        units: tech.units,
        tiers: alloc::vec![
            TierManifest {
                tier: "BOTTOM".into(),
                tech: cfg.bottom_tech.name.clone(),
                layers: tier_layers(LayerTier::Bottom),
                sites: cfg.bottom_tech.sites.iter().map(|s| s.name.clone()).collect(),
            },
            TierManifest {
                tier: "UPPER".into(),
                tech: cfg.top_tech.name.clone(),
                layers: tier_layers(LayerTier::Upper),
                sites: cfg.top_tech.sites.iter().map(|s| upper_name(&s.name)).collect(),
            },
        ],
        bond_layer: HBT_LAYER.into(),
        bond_via: HBT_VIA.into(),
        layer_map: tech.tier_of_layer.clone(),
        hbt: cfg.hbt,
        legacy_compat_layers: cfg.legacy_compat_layers,
        pdn_isolated: cfg.pdn_isolated,
        pdn_domains,
    }
}

fn tier_layer(lib: &LefSubset, m: &Master, layer: &str, tier: Tier) -> Result<String, Enable3dError> {
    if lib.layer(layer).is_none() {
        return Err(Enable3dError::UnknownLayer { macro_name: m.name.clone(), layer: layer.to_string() });
    }
    Ok(match tier {
        Tier::Bottom => layer.to_string(),
        Tier::Upper => upper_name(layer),
    })
}

fn retarget_shapes(lib: &LefSubset, m: &Master, shapes: &[LayerRect], tier: Tier) -> Result<Vec<LayerRect>, Enable3dError> {
    shapes
        .iter()
        .map(|s| Ok(LayerRect::new(tier_layer(lib, m, &s.layer, tier)?, s.rect)))
        .collect()
}

fn tier_master(lib: &LefSubset, m: &Master, tier: Tier) -> Result<Master, Enable3dError> {
    let mut out = m.clone();
    out.name = format!("{}{}", m.name, tier.suffix());
    out.tier_tag = TierTag::from(tier);
    if tier == Tier::Upper {
        out.site = m.site.as_deref().map(upper_name);
    }
    for pin in &mut out.pins {
        pin.shapes = retarget_shapes(lib, m, &pin.shapes, tier)?;
    }
    out.obs = retarget_shapes(lib, m, &m.obs, tier)?;
    Ok(out)
}

/// `<orig>_bottom` / `<orig>_upper` masters for every CORE macro, with layer
/// references moved onto the tier's layer names.
pub fn derive_tier_masters(lib: &LefSubset, tier: Tier) -> Result<Vec<Master>, Enable3dError> {
    lib.macros
        .iter()
        .filter(|m| m.class == CellClass::Core)
        .map(|m| tier_master(lib, m, tier))
        .collect()
}

/// `<orig>_<tier>_cover` twins of the tier masters: same size and pins, no OBS.
pub fn derive_cover_masters(lib: &LefSubset, tier: Tier) -> Result<Vec<Master>, Enable3dError> {
    derive_tier_masters(lib, tier).map(|ms| ms.into_iter().map(|m| cover_of(&m)).collect())
}

pub fn cover_name(tier_master: &str) -> String {
    format!("{tier_master}_cover")
}

pub fn cover_of(tier_master: &Master) -> Master {
    let mut c = tier_master.clone();
    c.name = cover_name(&tier_master.name);
    c.class = CellClass::Cover;
    c.obs.clear();
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LibrarySide {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HiddenPin {
    #[serde(rename = "macro")]
    pub macro_name: String,
    pub pin: String,
    /// The only library that has this pin.
    pub side: LibrarySide,
    pub direction: Direction,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenPinReport {
    pub entries: Vec<HiddenPin>,
}

impl HiddenPinReport {
    pub fn hidden_pins_of(&self, macro_name: &str) -> impl Iterator<Item = &HiddenPin> {
        let m = String::from(macro_name);
        self.entries.iter().filter(move |e| e.macro_name == m)
    }
}

/// Library of macros present by name in both inputs. Technology and geometry
/// come from `lib_a`; pins present on only one side are kept but hidden.
pub fn build_unified_library(lib_a: &LefSubset, lib_b: &LefSubset) -> Result<(LefSubset, HiddenPinReport), Enable3dError> {
    let mut unified = LefSubset {
        units: lib_a.units,
        layers: lib_a.layers.clone(),
        sites: lib_a.sites.clone(),
        vias: lib_a.vias.clone(),
        macros: Vec::new(),
    };
    let mut report = HiddenPinReport::default();
    for ma in &lib_a.macros {
        let Some(mb) = lib_b.macro_named(&ma.name) else { continue };
        let mut m = ma.clone();
        let b_pins: BTreeSet<&str> = mb.pins.iter().map(|p| p.name.as_str()).collect();
        for p in &mut m.pins {
            if !b_pins.contains(p.name.as_str()) {
                p.hidden = true;
                report.entries.push(HiddenPin {
                    macro_name: m.name.clone(),
                    pin: p.name.clone(),
                    side: LibrarySide::A,
                    direction: p.direction,
                });
            }
        }
        for pb in &mb.pins {
            if ma.pin(&pb.name).is_none() {
                let mut p = pb.clone();
                p.hidden = true;
                // B geometry may use layers libA lacks
                p.shapes.clear();
                report.entries.push(HiddenPin {
                    macro_name: m.name.clone(),
                    pin: p.name.clone(),
                    side: LibrarySide::B,
                    direction: p.direction,
                });
                m.pins.push(p);
            }
        }
        unified.macros.push(m);
    }
    if unified.macros.is_empty() {
        return Err(Enable3dError::EmptyIntersection);
    }
    Ok((unified, report))
}

/// Rows of `site` tiling `core` bottom-up; a top strip shorter than a row and
/// a right strip narrower than a site stay uncovered.
pub fn rebuild_rows(core: &Rect, site: &Site) -> Result<Vec<Row>, Enable3dError> {
    if site.width <= 0 || site.height <= 0 {
        return Err(Enable3dError::BadSite);
    }
    if site.width > core.width() || site.height > core.height() {
        return Err(Enable3dError::SiteTooLarge {
            site_w: site.width,
            site_h: site.height,
            core_w: core.width(),
            core_h: core.height(),
        });
    }
    let count = core.height() / site.height;
    let num_sites = (core.width() / site.width) as u32;
    Ok((0..count)
        .map(|i| Row {
            name: format!("{}_row_{}", site.name, i),
            site: site.name.clone(),
            origin: Point::new(core.xlo, core.ylo + i * site.height),
            orientation: if i % 2 == 0 { Orientation::N } else { Orientation::FS },
            num_sites,
            step: site.width,
        })
        .collect())
}
