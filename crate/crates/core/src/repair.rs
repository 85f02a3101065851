//! Benchmark normalization: drop ill-formed nets, split oversized instances,
//! snap placements to a grid.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::{Dbu, Point};
use crate::model::{Design, Direction, Endpoint, Instance, Master, MasterPin, Net, NetPin};
use crate::num::{div_round_half_away, Ratio};

/// Pin added to shard masters to carry the chain net.
pub const CHAIN_PIN: &str = "SHARD_CHAIN";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairConfig {
    /// Oversize threshold as a multiple of the median non-COVER master area.
    pub max_instance_area_ratio: Ratio,
    /// Placement snap step in DBU.
    pub grid: Dbu,
    pub strict: bool,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            max_instance_area_ratio: Ratio::integer(64),
            grid: 1,
            strict: false,
        }
    }
}

impl RepairConfig {
    pub fn check(&self) -> Result<(), RepairError> {
        if self.max_instance_area_ratio.cmp_exact(Ratio::integer(1)) != core::cmp::Ordering::Greater {
            return Err(RepairError::BadConfig("max_instance_area_ratio must exceed 1"));
        }
        if self.grid < 1 {
            return Err(RepairError::BadConfig("grid must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RepairError {
    #[error("THRESHOLD_UNDEFINED: design has no non-COVER master")]
    ThresholdUndefined,
    #[error("UNSPLITTABLE: instance `{0}` exceeds the area threshold even at unit width")]
    Unsplittable(String),
    #[error("invalid repair config: {0}")]
    BadConfig(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RemovalReason {
    AllInput,
    AllOutput,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedNet {
    pub net: String,
    pub reason: RemovalReason,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub original: String,
    pub shards: Vec<String>,
    pub shard_count: usize,
    pub chain_net: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairLog {
    pub removed_nets: Vec<RemovedNet>,
    pub split_instances: Vec<SplitRecord>,
    pub snapped: usize,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.removed_nets.is_empty() && self.split_instances.is_empty() && self.snapped == 0
    }

    pub fn merge(&mut self, other: RepairLog) {
        self.removed_nets.extend(other.removed_nets);
        self.split_instances.extend(other.split_instances);
        self.snapped += other.snapped;
    }
}

/// Why `net` is ill-formed, if it is.
pub fn classify_net(design: &crate::model::DesignLookup<'_>, net: &Net) -> Option<RemovalReason> {
    if net.pins.len() < 2 {
        return Some(RemovalReason::Degenerate);
    }
    let roles: Vec<Direction> = net
        .pins
        .iter()
        .map(|p| design.net_role(p).unwrap_or(Direction::Inout))
        .collect();
    if roles.iter().all(|d| *d == Direction::Input) {
        Some(RemovalReason::AllInput)
    } else if roles.iter().all(|d| *d == Direction::Output) {
        Some(RemovalReason::AllOutput)
    } else {
        None
    }
}

/// Removes zero/one-pin nets and nets whose pins all share one direction.
pub fn remove_ill_formed_nets(design: &Design) -> (Design, RepairLog) {
    let mut log = RepairLog::default();
    let keep: Vec<bool> = {
        let lookup = design.lookup();
        design
            .nets
            .iter()
            .map(|n| match classify_net(&lookup, n) {
                Some(reason) => {
                    log.removed_nets.push(RemovedNet { net: n.name.clone(), reason });
                    false
                }
                None => true,
            })
            .collect()
    };
    let mut out = design.clone();
    let mut it = keep.iter();
    out.nets.retain(|_| *it.next().unwrap());
    (out, log)
}

/// Twice the median area of the non-COVER masters used by instances (falling
/// back to all non-COVER masters when no instance uses one).
fn twice_median_area(design: &Design) -> Result<u128, RepairError> {
    let used: BTreeSet<&str> = design.instances.iter().map(|i| i.master.as_str()).collect();
    let mut areas: Vec<u128> = design
        .masters
        .iter()
        .filter(|m| !m.is_cover() && used.contains(m.name.as_str()))
        .map(|m| m.area() as u128)
        .collect();
    if areas.is_empty() {
        areas = design.masters.iter().filter(|m| !m.is_cover()).map(|m| m.area() as u128).collect();
    }
    if areas.is_empty() {
        return Err(RepairError::ThresholdUndefined);
    }
    areas.sort_unstable();
    let n = areas.len();
    Ok(if n % 2 == 1 { 2 * areas[n / 2] } else { areas[n / 2 - 1] + areas[n / 2] })
}

struct Threshold {
    twice_median: u128,
    ratio: Ratio,
}

impl Threshold {
    /// `area <= ratio * median`, exactly.
    fn admits(&self, area: u128) -> bool {
        area * 2 * self.ratio.den as u128 <= self.ratio.num as u128 * self.twice_median
    }
}

/// Shard widths for a `width` x `height` cell: the fewest (at least two)
/// near-equal integer widths whose every shard fits under the threshold.
fn shard_widths(width: Dbu, height: Dbu, th: &Threshold) -> Option<Vec<Dbu>> {
    let area = (width as u128) * (height as u128);
    let mut k: Dbu = 2;
    // k*T >= area is necessary; start from there
    while k < width && !th.admits(area.div_ceil(k as u128)) {
        k += 1;
    }
    while k <= width {
        let widest = (width + k - 1) / k;
        if th.admits(widest as u128 * height as u128) {
            let base = width / k;
            let extra = width % k;
            return Some((0..k).map(|i| if i < extra { base + 1 } else { base }).collect());
        }
        k += 1;
    }
    None
}

fn shard_master(orig: &Master, width: Dbu, first: bool) -> Master {
    let mut m = orig.clone();
    m.width = width;
    if first {
        m.name = format!("{}__w{}_s0", orig.name, width);
        m.pins.push(MasterPin::new(CHAIN_PIN, Direction::Output));
    } else {
        m.name = format!("{}__w{}", orig.name, width);
        m.pins = alloc::vec![MasterPin::new(CHAIN_PIN, Direction::Input)];
        m.obs.clear();
    }
    m
}

/// Splits every non-COVER instance whose area exceeds the threshold into
/// width shards `<orig>__s<i>`. Shard 0 keeps all connections; the shards are
/// joined by a chain net `<orig>__chain`.
pub fn split_oversized_instances(design: &Design, cfg: &RepairConfig) -> Result<(Design, RepairLog), RepairError> {
    cfg.check()?;
    let th = Threshold {
        twice_median: twice_median_area(design)?,
        ratio: cfg.max_instance_area_ratio,
    };
    let mut log = RepairLog::default();
    let masters = design.master_index();
    let mut out = design.clone();
    out.instances.clear();
    let mut new_masters: BTreeMap<String, Master> = BTreeMap::new();
    let mut renamed: BTreeMap<&str, String> = BTreeMap::new();
    let mut chain_nets = Vec::new();

    for inst in &design.instances {
        let Some(master) = masters.get(inst.master.as_str()) else {
            out.instances.push(inst.clone());
            continue;
        };
        if master.is_cover() || th.admits(master.area() as u128) {
            out.instances.push(inst.clone());
            continue;
        }
        let widths = shard_widths(master.width, master.height, &th)
            .ok_or_else(|| RepairError::Unsplittable(inst.name.clone()))?;
        let mut shards = Vec::with_capacity(widths.len());
        let mut chain = Net::new(format!("{}__chain", inst.name));
        let mut advance: Dbu = 0;
        for (i, &w) in widths.iter().enumerate() {
            let sm = shard_master(master, w, i == 0);
            let mut s = Instance {
                name: format!("{}__s{}", inst.name, i),
                master: sm.name.clone(),
                location: inst.location.map(|p| {
                    if inst.orientation.swaps_axes() {
                        p.translate(0, advance)
                    } else {
                        p.translate(advance, 0)
                    }
                }),
                orientation: inst.orientation,
                fixed: inst.fixed,
                tier: inst.tier,
                tie_offs: if i == 0 { inst.tie_offs.clone() } else { Vec::new() },
            };
            if i > 0 {
                s.tie_offs.clear();
            }
            advance += w;
            chain.pins.push(NetPin::new(Endpoint::inst(s.name.clone(), CHAIN_PIN)));
            new_masters.entry(sm.name.clone()).or_insert(sm);
            shards.push(s.name.clone());
            out.instances.push(s);
        }
        renamed.insert(inst.name.as_str(), shards[0].clone());
        log.split_instances.push(SplitRecord {
            original: inst.name.clone(),
            shard_count: shards.len(),
            shards,
            chain_net: chain.name.clone(),
        });
        chain_nets.push(chain);
    }

    if renamed.is_empty() {
        return Ok((out, log));
    }
    for m in new_masters.into_values() {
        if out.master(&m.name).is_none() {
            out.masters.push(m);
        }
    }
    for net in &mut out.nets {
        for pin in &mut net.pins {
            if let Endpoint::Instance { instance, .. } = &mut pin.endpoint {
                if let Some(to) = renamed.get(instance.as_str()) {
                    *instance = to.clone();
                }
            }
        }
    }
    out.nets.extend(chain_nets);
    Ok((out, log))
}

fn snap(v: Dbu, grid: Dbu) -> Dbu {
    (div_round_half_away(v as i128, grid as i128) * grid as i128) as Dbu
}

/// Snaps instance locations to multiples of `cfg.grid`, rounding half away from zero.
pub fn snap_and_rescale(design: &Design, cfg: &RepairConfig) -> Result<(Design, RepairLog), RepairError> {
    cfg.check()?;
    let mut out = design.clone();
    let mut log = RepairLog::default();
    for inst in &mut out.instances {
        if let Some(p) = inst.location {
            let q = Point::new(snap(p.x, cfg.grid), snap(p.y, cfg.grid));
            if q != p {
                inst.location = Some(q);
                log.snapped += 1;
            }
        }
    }
    Ok((out, log))
}

/// Net removal, then instance splitting, then grid snapping.
pub fn repair_pipeline(design: &Design, cfg: &RepairConfig) -> Result<(Design, RepairLog), RepairError> {
    cfg.check()?;
    let (d, mut log) = remove_ill_formed_nets(design);
    let has_cells = {
        let masters = d.master_index();
        d.instances
            .iter()
            .any(|i| masters.get(i.master.as_str()).is_some_and(|m| !m.is_cover()))
    };
    let d = if has_cells {
        let (d, l) = split_oversized_instances(&d, cfg)?;
        log.merge(l);
        d
    } else {
        d
    };
    let (d, l) = snap_and_rescale(&d, cfg)?;
    log.merge(l);
    Ok((d, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::stats::design_stats;
    use crate::validate::validate_design;

    fn base() -> Design {
        let mut d = Design::new("r", 1000);
        d.die = Rect::new(0, 0, 100_000, 100_000);
        d.core = d.die;
        let mut m = Master::new("INV", 10, 10);
        m.pins.push(MasterPin::new("A", Direction::Input));
        m.pins.push(MasterPin::new("Y", Direction::Output));
        d.masters.push(m);
        d
    }

    #[test]
    fn all_output_net_is_removed() {
        let mut d = base();
        d.instances.push(Instance::new("a", "INV"));
        d.instances.push(Instance::new("b", "INV"));
        d.nets.push(Net::new("oo").with_pins([Endpoint::inst("a", "Y"), Endpoint::inst("b", "Y")]));
        d.nets.push(Net::new("ok").with_pins([Endpoint::inst("a", "Y"), Endpoint::inst("b", "A")]));
        d.nets.push(Net::new("one").with_pins([Endpoint::inst("a", "A")]));
        let (out, log) = remove_ill_formed_nets(&d);
        assert_eq!(out.nets.len(), 1);
        assert_eq!(out.nets[0], d.nets[1]);
        assert_eq!(log.removed_nets[0], RemovedNet { net: "oo".into(), reason: RemovalReason::AllOutput });
        assert_eq!(log.removed_nets[1].reason, RemovalReason::Degenerate);
    }

    #[test]
    fn input_port_drives_its_net() {
        let mut d = base();
        d.instances.push(Instance::new("a", "INV"));
        d.io_pins.push(crate::model::IoPin::new("in", Direction::Input));
        d.nets.push(Net::new("n").with_pins([Endpoint::io("in"), Endpoint::inst("a", "A")]));
        let (out, log) = remove_ill_formed_nets(&d);
        assert!(log.is_empty());
        assert_eq!(out, d);
    }

    fn with_big(width: Dbu) -> Design {
        let mut d = base();
        let mut big = Master::new("BIG", width, 10);
        big.pins.push(MasterPin::new("A", Direction::Input));
        d.masters.push(big);
        d.instances.push(Instance::new("u0", "INV").placed_at(0, 0));
        d.instances.push(Instance::new("u1", "INV").placed_at(0, 20));
        d.instances.push(Instance::new("big", "BIG").placed_at(100, 0));
        d.nets.push(Net::new("n").with_pins([Endpoint::inst("u0", "Y"), Endpoint::inst("big", "A")]));
        d
    }

    #[test]
    fn ten_times_threshold_gives_ten_equal_shards() {
        // masters {100, 100*w}: median = (100 + 10w)/2; choose ratio so the
        // threshold is exactly 10 * 100 = 1000 and BIG has area 10_000
        let d = with_big(1000);
        // median = (100 + 10000) / 2 = 5050; ratio = 1000/5050
        let cfg = RepairConfig { max_instance_area_ratio: Ratio::new(1000, 5050), grid: 1, strict: false };
        // ratio below 1 is rejected by config, so emulate via a third small master
        assert!(split_oversized_instances(&d, &cfg).is_err());

        let mut d = with_big(1000);
        for i in 0..3 {
            d.instances.push(Instance::new(format!("v{i}"), "INV"));
        }
        // used masters: INV (100), BIG (10000) -> median 5050; use an odd set instead
        let mut small = Master::new("SMALL", 5, 10);
        small.pins.push(MasterPin::new("A", Direction::Input));
        d.masters.push(small);
        d.instances.push(Instance::new("s", "SMALL"));
        // used areas {50, 100, 10000}: median 100, ratio 10 -> threshold 1000
        let cfg = RepairConfig { max_instance_area_ratio: Ratio::integer(10), grid: 1, strict: false };
        let before = design_stats(&d).unwrap().stdcell_area;
        let (out, log) = split_oversized_instances(&d, &cfg).unwrap();
        assert_eq!(log.split_instances.len(), 1);
        assert_eq!(log.split_instances[0].shard_count, 10);
        assert_eq!(design_stats(&out).unwrap().stdcell_area, before);
        assert!(validate_design(&out).is_empty());
        let shard_widths: BTreeSet<Dbu> = out
            .instances
            .iter()
            .filter(|i| i.name.starts_with("big__s"))
            .map(|i| out.master(&i.master).unwrap().width)
            .collect();
        assert_eq!(shard_widths.into_iter().collect::<Vec<_>>(), [100]);
        let n = out.nets.iter().find(|n| n.name == "n").unwrap();
        assert!(n.pins.iter().any(|p| p.endpoint == Endpoint::inst("big__s0", "A")));
        let chain = out.nets.iter().find(|n| n.name == "big__chain").unwrap();
        assert_eq!(chain.pins.len(), 10);
        assert_eq!(out.instances.iter().find(|i| i.name == "big__s3").unwrap().location, Some(Point::new(400, 0)));
    }

    #[test]
    fn boundary_area_is_kept() {
        let mut d = with_big(640);
        d.instances.push(Instance::new("v", "INV"));
        // used areas {100, 6400}: median 3250 -> threshold with ratio 64 is huge; use SMALL
        let mut small = Master::new("SMALL", 10, 10);
        small.pins.push(MasterPin::new("A", Direction::Input));
        d.masters.push(small);
        d.instances.push(Instance::new("s", "SMALL"));
        // used {100, 100, 6400} -> median 100 -> threshold 6400 == BIG area
        let (out, log) = split_oversized_instances(&d, &RepairConfig::default()).unwrap();
        assert!(log.is_empty());
        assert_eq!(out, d);
    }

    #[test]
    fn no_masters_means_no_threshold() {
        let d = Design::new("e", 1000);
        assert_eq!(split_oversized_instances(&d, &RepairConfig::default()), Err(RepairError::ThresholdUndefined));
    }

    #[test]
    fn snapping_rounds_half_away() {
        let mut d = base();
        d.instances.push(Instance::new("a", "INV").placed_at(7, 7));
        d.instances.push(Instance::new("b", "INV").placed_at(10, 15));
        let cfg = RepairConfig { grid: 5, ..Default::default() };
        let (out, log) = snap_and_rescale(&d, &cfg).unwrap();
        assert_eq!(out.instances[0].location, Some(Point::new(5, 5)));
        assert_eq!(log.snapped, 1);
        assert_eq!(snap(-7, 5), -5);
        assert_eq!(snap(-8, 5), -10);
        assert_eq!(snap(12, 5), 10);
        assert_eq!(snap(13, 5), 15);
        assert_eq!(snap(-12, 5), -10);
        assert_eq!(snap(-13, 5), -15);
        // grid 1 is the identity
        let (same, log) = snap_and_rescale(&d, &RepairConfig::default()).unwrap();
        assert_eq!(same, d);
        assert_eq!(log.snapped, 0);
    }

    #[test]
    fn pipeline_logs_one_of_each_and_is_idempotent() {
        let mut d = with_big(1000);
        let mut small = Master::new("SMALL", 5, 10);
        small.pins.push(MasterPin::new("A", Direction::Input));
        d.masters.push(small);
        d.instances.push(Instance::new("s", "SMALL"));
        d.nets.push(Net::new("bad").with_pins([Endpoint::inst("u0", "A"), Endpoint::inst("u1", "A")]));
        let cfg = RepairConfig { max_instance_area_ratio: Ratio::integer(10), ..Default::default() };
        let (once, log) = repair_pipeline(&d, &cfg).unwrap();
        assert_eq!(log.removed_nets.len(), 1);
        assert_eq!(log.split_instances.len(), 1);
        let (twice, log2) = repair_pipeline(&once, &cfg).unwrap();
        assert!(log2.is_empty());
        assert_eq!(
            crate::digest::canonical_digest(&once).unwrap(),
            crate::digest::canonical_digest(&twice).unwrap()
        );
    }
}
