//! Per-tier design views from a bipartition: tier masters for each tier's own
//! instances, fixed COVER twins for the other tier's, pin remapping, tie-offs
//! for hidden pins and a cross-tier net report.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::enable3d::{
    cover_name, cover_of, derive_tier_masters, rebuild_rows, upper_name, Enable3dError, HiddenPinReport, LibrarySide,
};
use crate::model::{Design, Direction, Endpoint, LefSubset, Master, Site, Tier, TieOff, TieValue};
use crate::partition::{Hypergraph, PartitionResult};
use crate::validate::{ValidationReport, ViolationCode};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TierViewError {
    #[error("COVERAGE_GAP: instance `{0}` has no tier")]
    CoverageGap(String),
    #[error("MISSING_TIER_MASTER: no {tier} master for `{master}` (instance `{instance}`)")]
    MissingTierMaster { instance: String, master: String, tier: Tier },
    #[error("UNMAPPED_PIN: `{master}` has no pin `{pin}` on the {tier} tier")]
    UnmappedPin { master: String, pin: String, tier: Tier },
    #[error(transparent)]
    Library(#[from] Enable3dError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StackKind {
    Homogeneous,
    Heterogeneous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierAssignment {
    pub tiers: BTreeMap<String, Tier>,
    pub io_tier: Tier,
    pub cutsize: u64,
    pub seed: u64,
}

/// Side 0 is the bottom tier. IO pins go to the bottom tier of homogeneous
/// stacks and the upper tier of heterogeneous ones.
pub fn assign_tiers(
    design: &Design,
    h: &Hypergraph,
    part: &PartitionResult,
    kind: StackKind,
) -> Result<TierAssignment, TierViewError> {
    let index = h.vertex_index();
    let masters = design.master_index();
    let mut tiers = BTreeMap::new();
    for inst in &design.instances {
        if masters.get(inst.master.as_str()).is_some_and(|m| m.is_cover()) {
            continue;
        }
        let side = index
            .get(inst.name.as_str())
            .and_then(|&v| part.side.get(v as usize))
            .ok_or_else(|| TierViewError::CoverageGap(inst.name.clone()))?;
        tiers.insert(inst.name.clone(), if *side == 0 { Tier::Bottom } else { Tier::Upper });
    }
    Ok(TierAssignment {
        tiers,
        io_tier: match kind {
            StackKind::Homogeneous => Tier::Bottom,
            StackKind::Heterogeneous => Tier::Upper,
        },
        cutsize: part.cutsize,
        seed: part.seed,
    })
}

/// Physical library of one tier, keyed by logical master name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TierLibrary {
    pub tier: Tier,
    pub masters: BTreeMap<String, Master>,
    pub covers: BTreeMap<String, Master>,
    /// Logical pin name to physical pin name, per logical master; identity when absent.
    pub pin_map: BTreeMap<String, BTreeMap<String, String>>,
    /// Which side of a unified library this tier's technology was; `None` for
    /// homogeneous stacks (no tie-offs).
    pub library_side: Option<LibrarySide>,
    pub site: Option<Site>,
}

impl TierLibrary {
    pub fn derive(lib: &LefSubset, tier: Tier, library_side: Option<LibrarySide>) -> Result<Self, TierViewError> {
        let derived = derive_tier_masters(lib, tier)?;
        let mut masters = BTreeMap::new();
        let mut covers = BTreeMap::new();
        for (src, m) in lib.macros.iter().filter(|m| m.class == crate::model::CellClass::Core).zip(derived) {
            covers.insert(src.name.clone(), cover_of(&m));
            masters.insert(src.name.clone(), m);
        }
        let site_name = lib.macros.iter().find_map(|m| m.site.clone());
        let site = site_name
            .and_then(|n| lib.sites.iter().find(|s| s.name == n))
            .or(lib.sites.first())
            .map(|s| {
                let mut s = s.clone();
                if tier == Tier::Upper {
                    s.name = upper_name(&s.name);
                }
                s
            });
        Ok(TierLibrary { tier, masters, covers, pin_map: BTreeMap::new(), library_side, site })
    }

    fn physical_pin(&self, logical_master: &str, pin: &str) -> String {
        self.pin_map
            .get(logical_master)
            .and_then(|m| m.get(pin))
            .cloned()
            .unwrap_or_else(|| String::from(pin))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTierNet {
    pub net: String,
    pub bottom_pins: Vec<String>,
    pub upper_pins: Vec<String>,
    pub io_pins: Vec<String>,
    /// Instances on both tiers.
    pub internal: bool,
    /// All instances on the non-IO tier while the net reaches an IO pin.
    pub io_spanning: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTierReport {
    pub io_tier: Option<Tier>,
    pub nets: Vec<CrossTierNet>,
}

impl CrossTierReport {
    pub fn internal_count(&self) -> usize {
        self.nets.iter().filter(|n| n.internal).count()
    }

    pub fn io_spanning_count(&self) -> usize {
        self.nets.iter().filter(|n| n.io_spanning).count()
    }
}

/// One terminal per cross-tier net; IO-spanning nets are added on request.
pub fn estimate_hbt_count(report: &CrossTierReport, include_io: bool) -> usize {
    report.internal_count() + if include_io { report.io_spanning_count() } else { 0 }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TierViews {
    pub bottom: Design,
    pub upper: Design,
    pub report: CrossTierReport,
}

impl TierViews {
    pub fn view(&self, tier: Tier) -> &Design {
        match tier {
            Tier::Bottom => &self.bottom,
            Tier::Upper => &self.upper,
        }
    }
}

fn tie_value(d: Direction) -> TieValue {
    match d {
        Direction::Input => TieValue::Low,
        Direction::Output | Direction::Inout => TieValue::Open,
    }
}

pub fn generate_tier_views(
    design: &Design,
    ta: &TierAssignment,
    bottom_lib: &TierLibrary,
    upper_lib: &TierLibrary,
    hidden: &HiddenPinReport,
) -> Result<TierViews, TierViewError> {
    let lib_of = |t: Tier| if t == Tier::Bottom { bottom_lib } else { upper_lib };
    let masters = design.master_index();
    let tier_of = |inst: &str| ta.tiers.get(inst).copied();

    // net classification, shared by both views
    let lookup = design.lookup();
    let mut in_view: Vec<[bool; 2]> = Vec::with_capacity(design.nets.len());
    let mut report = CrossTierReport { io_tier: Some(ta.io_tier), nets: Vec::new() };
    for net in &design.nets {
        let mut tiers = BTreeSet::new();
        let mut pins: [Vec<String>; 2] = [Vec::new(), Vec::new()];
        let mut io = Vec::new();
        for p in &net.pins {
            match &p.endpoint {
                Endpoint::Instance { instance, pin } => {
                    if let Some(t) = tier_of(instance) {
                        tiers.insert(t);
                        pins[t as usize].push(alloc::format!("{instance}/{pin}"));
                    } else if let Some(t) = lookup.instance(instance).and_then(|i| i.tier) {
                        // pre-existing COVER instance
                        tiers.insert(t);
                    }
                }
                Endpoint::Io { name } => io.push(name.clone()),
            }
        }
        let internal = tiers.len() == 2;
        let io_spanning = !internal && !io.is_empty() && tiers.contains(&ta.io_tier.other());
        let mut flags = [false; 2];
        if internal || io_spanning {
            flags = [true, true];
            let [bottom_pins, upper_pins] = pins;
            report.nets.push(CrossTierNet {
                net: net.name.clone(),
                bottom_pins,
                upper_pins,
                io_pins: io,
                internal,
                io_spanning,
            });
        } else {
            let t = tiers.first().copied().unwrap_or(ta.io_tier);
            flags[t as usize] = true;
        }
        in_view.push(flags);
    }

    let mut views = Vec::with_capacity(2);
    for tier in [Tier::Bottom, Tier::Upper] {
        let own = lib_of(tier);
        let mut v = Design::new(alloc::format!("{}{}", design.name, tier.suffix()), design.units);
        v.die = design.die;
        v.core = design.core;
        v.io_pins = design.io_pins.clone();
        match &own.site {
            Some(site) => {
                v.sites.push(site.clone());
                v.rows = rebuild_rows(&design.core, site).unwrap_or_default();
            }
            None => {
                v.sites = design.sites.clone();
                v.rows = design.rows.clone();
            }
        }
        let mut used: BTreeMap<String, Master> = BTreeMap::new();
        // logical master of every instance, for pin remapping
        let mut logical: BTreeMap<&str, (&str, &TierLibrary)> = BTreeMap::new();
        for inst in &design.instances {
            let Some(m) = masters.get(inst.master.as_str()) else { continue };
            let Some(t) = tier_of(&inst.name) else {
                // COVER instances already in the input are carried over
                v.instances.push(inst.clone());
                used.entry(m.name.clone()).or_insert_with(|| (*m).clone());
                continue;
            };
            let lib = lib_of(t);
            let missing = || TierViewError::MissingTierMaster {
                instance: inst.name.clone(),
                master: inst.master.clone(),
                tier: t,
            };
            let mut out = inst.clone();
            out.tier = Some(t);
            out.tie_offs.clear();
            if t == tier {
                let tm = lib.masters.get(&inst.master).ok_or_else(missing)?;
                out.master = tm.name.clone();
                if let Some(side) = lib.library_side {
                    for hp in hidden.hidden_pins_of(&inst.master).filter(|hp| hp.side == side) {
                        match tm.pin(&hp.pin) {
                            Some(p) => out.tie_offs.push(TieOff { pin: p.name.clone(), value: tie_value(p.direction) }),
                            None => {
                                return Err(TierViewError::UnmappedPin {
                                    master: tm.name.clone(),
                                    pin: hp.pin.clone(),
                                    tier,
                                })
                            }
                        }
                    }
                    out.tie_offs.sort();
                }
                used.entry(tm.name.clone()).or_insert_with(|| tm.clone());
            } else {
                let cm = lib.covers.get(&inst.master).ok_or_else(missing)?;
                debug_assert_eq!(cm.name, cover_name(&lib.masters[&inst.master].name));
                out.master = cm.name.clone();
                out.fixed = true;
                used.entry(cm.name.clone()).or_insert_with(|| cm.clone());
            }
            logical.insert(inst.name.as_str(), (inst.master.as_str(), lib));
            v.instances.push(out);
        }
        v.masters = used.into_values().collect();

        for (net, flags) in design.nets.iter().zip(&in_view) {
            if !flags[tier as usize] {
                continue;
            }
            let mut n = net.clone();
            for p in &mut n.pins {
                if let Endpoint::Instance { instance, pin } = &mut p.endpoint {
                    if let Some(&(lm, lib)) = logical.get(instance.as_str()) {
                        let phys = lib.physical_pin(lm, pin);
                        let pm = &lib.masters[lm];
                        if pm.pin(&phys).is_none_or(|mp| mp.hidden) {
                            return Err(TierViewError::UnmappedPin { master: pm.name.clone(), pin: phys, tier: lib.tier });
                        }
                        *pin = phys;
                    }
                }
            }
            v.nets.push(n);
        }
        views.push(v);
    }
    let upper = views.pop().unwrap();
    let bottom = views.pop().unwrap();
    Ok(TierViews { bottom, upper, report })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StrategyMode {
    Restricted,
    Flexible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TierStrategy {
    pub mode: StrategyMode,
    pub active_tier: Tier,
}

/// Restricted mode flags movable instances whose master belongs to another
/// tier; both modes flag COVER instances that are not fixed.
pub fn check_tier_strategy(view: &Design, strategy: &TierStrategy) -> ValidationReport {
    let masters = view.master_index();
    let mut report = ValidationReport::default();
    for inst in &view.instances {
        let Some(m) = masters.get(inst.master.as_str()) else { continue };
        if m.is_cover() {
            if !inst.fixed {
                report.push(ViolationCode::CoverNotFixed, inst.name.as_str());
            }
        } else if strategy.mode == StrategyMode::Restricted
            && !inst.fixed
            && m.tier_tag.tier() != Some(strategy.active_tier)
        {
            report.push(ViolationCode::WrongTierMaster, inst.name.as_str());
        }
    }
    report
}
