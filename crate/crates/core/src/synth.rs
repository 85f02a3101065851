//! Minimal hierarchical netlist generator for corpus building.
//!
//! Instances are split into nested binary blocks; each sink of a net stays in
//! the driver's block with probability 4/5 per level. This is a locality
//! proxy only, not a Rent-exponent model. Parameter names are our own.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enable3d::rebuild_rows;
use crate::geom::{Dbu, Point};
use crate::metrics::derive_floorplan;
use crate::model::{CellClass, Design, Direction, Endpoint, Instance, Master, MasterPin, Net, NetPin, Site};
use crate::num::Ratio;

pub const SYNTH_SITE: &str = "synth_site";

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("DEGENERATE_CONFIG: {0}")]
    DegenerateConfig(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterTemplate {
    pub name: String,
    pub width: Dbu,
    pub height: Dbu,
    pub inputs: u32,
    pub outputs: u32,
}

impl MasterTemplate {
    pub fn new(name: &str, width: Dbu, height: Dbu, inputs: u32, outputs: u32) -> Self {
        MasterTemplate { name: name.into(), width, height, inputs, outputs }
    }

    fn to_master(&self) -> Master {
        let mut m = Master::new(self.name.clone(), self.width, self.height);
        m.class = CellClass::Core;
        m.site = Some(SYNTH_SITE.into());
        m.pins.extend((0..self.inputs).map(|k| MasterPin::new(format!("A{k}"), Direction::Input)));
        m.pins.extend((0..self.outputs).map(|k| MasterPin::new(format!("Y{k}"), Direction::Output)));
        m
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub num_instances: usize,
    /// Target mean pins per net (driver included).
    pub avg_net_degree: Ratio,
    pub hierarchy_depth: u32,
    pub seed: u64,
    /// Templates with exact probabilities summing to one.
    pub master_mix: Vec<(MasterTemplate, Ratio)>,
    /// Derive a 60%-utilization floorplan and fill rows in instance order.
    pub place: bool,
}

/// Eight generic cells on a 100 x 1000 DBU site, averaging 2.3 inputs.
pub fn default_mix() -> Vec<(MasterTemplate, Ratio)> {
    let t = MasterTemplate::new;
    alloc::vec![
        (t("INV", 300, 1000, 1, 1), Ratio::new(2, 20)),
        (t("BUF", 400, 1000, 1, 1), Ratio::new(1, 20)),
        (t("NAND2", 400, 1000, 2, 1), Ratio::new(5, 20)),
        (t("NOR2", 400, 1000, 2, 1), Ratio::new(3, 20)),
        (t("NAND3", 500, 1000, 3, 1), Ratio::new(3, 20)),
        (t("AOI21", 600, 1000, 3, 1), Ratio::new(2, 20)),
        (t("OAI22", 700, 1000, 4, 1), Ratio::new(2, 20)),
        (t("DFF", 1500, 1000, 2, 2), Ratio::new(2, 20)),
    ]
}

impl SynthConfig {
    pub fn new(num_instances: usize, avg_net_degree: Ratio, seed: u64) -> Self {
        SynthConfig {
            num_instances,
            avg_net_degree,
            hierarchy_depth: 4,
            seed,
            master_mix: default_mix(),
            place: true,
        }
    }

    pub fn check(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::DegenerateConfig(m.into()));
        if self.num_instances == 0 {
            return bad("num_instances must be positive");
        }
        let d = self.avg_net_degree;
        if d.den == 0 || d.num < 2 * d.den {
            return bad("avg_net_degree must be at least 2");
        }
        if self.hierarchy_depth > 40 {
            return bad("hierarchy_depth above 40");
        }
        if self.master_mix.is_empty() {
            return bad("master_mix is empty");
        }
        let (mut n, mut den) = (0u128, 1u128);
        for (t, p) in &self.master_mix {
            if t.width <= 0 || t.height <= 0 || t.outputs == 0 {
                return bad("templates need a positive size and an output");
            }
            if t.height != self.master_mix[0].0.height {
                return bad("templates must share one height");
            }
            if p.den == 0 {
                return bad("probability with zero denominator");
            }
            n = n * p.den as u128 + p.num as u128 * den;
            den *= p.den as u128;
            let g = gcd(n, den);
            (n, den) = (n / g, den / g);
        }
        if n != den {
            return bad("master_mix probabilities must sum to 1");
        }
        Ok(())
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Instances with free input pins, sampled uniformly.
struct FreeList {
    items: Vec<u32>,
    pos: Vec<usize>,
}

impl FreeList {
    fn remove(&mut self, i: usize) {
        let p = self.pos[i];
        if p == usize::MAX {
            return;
        }
        let last = *self.items.last().unwrap() as usize;
        self.items.swap_remove(p);
        if last != i {
            self.pos[last] = p;
        }
        self.pos[i] = usize::MAX;
    }
}

pub fn generate_synthetic(cfg: &SynthConfig) -> Result<Design, SynthError> {
    cfg.check()?;
    let n = cfg.num_instances;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut d = Design::new(format!("synth_{}_s{}", n, cfg.seed), crate::model::DEFAULT_DBU_PER_MICRON);

    let cumulative: Vec<f64> = cfg
        .master_mix
        .iter()
        .scan(0.0, |acc, (_, p)| {
            *acc += p.to_f64();
            Some(*acc)
        })
        .collect();
    let mut kinds = Vec::with_capacity(n);
    for i in 0..n {
        let r: f64 = rng.gen();
        let k = cumulative.iter().position(|&c| r < c).unwrap_or(cumulative.len() - 1);
        kinds.push(k);
        d.instances.push(Instance::new(format!("u{i}"), cfg.master_mix[k].0.name.clone()));
    }
    let mut seen = alloc::collections::BTreeSet::new();
    for &k in &kinds {
        if seen.insert(k) {
            d.masters.push(cfg.master_mix[k].0.to_master());
        }
    }
    d.masters.sort_by(|a, b| a.name.cmp(&b.name));
    d.masters.dedup_by(|a, b| a.name == b.name);

    let mut free: Vec<u32> = kinds.iter().map(|&k| cfg.master_mix[k].0.inputs).collect();
    let mut pool = FreeList { items: Vec::new(), pos: alloc::vec![usize::MAX; n] };
    for (i, &f) in free.iter().enumerate() {
        if f > 0 {
            pool.pos[i] = pool.items.len();
            pool.items.push(i as u32);
        }
    }

    let deg = cfg.avg_net_degree;
    let extra = deg.num - deg.den;
    let (base, frac) = (extra / deg.den, extra % deg.den);
    let max_sinks = n - 1;
    for drv in 0..n {
        if max_sinks == 0 {
            break;
        }
        let mut want = base as usize + usize::from(rng.gen_range(0..deg.den) < frac);
        want = want.min(max_sinks);
        let mut sinks: Vec<usize> = Vec::with_capacity(want);
        for _ in 0..want {
            let (mut lo, mut hi) = (0usize, n);
            for l in 1..=cfg.hierarchy_depth {
                if !rng.gen_ratio(4, 5) {
                    break;
                }
                let bs = n.div_ceil(1usize << l.min(63)).max(1);
                let b = drv / bs;
                let (nlo, nhi) = (b * bs, ((b + 1) * bs).min(n));
                if nhi - nlo <= 1 {
                    break;
                }
                (lo, hi) = (nlo, nhi);
            }
            let ok = |i: usize, sinks: &[usize]| i != drv && free[i] > 0 && !sinks.contains(&i);
            let mut pick = None;
            for _ in 0..16 {
                let i = rng.gen_range(lo..hi);
                if ok(i, &sinks) {
                    pick = Some(i);
                    break;
                }
            }
            if pick.is_none() {
                for _ in 0..16 {
                    if pool.items.is_empty() {
                        break;
                    }
                    let i = pool.items[rng.gen_range(0..pool.items.len())] as usize;
                    if ok(i, &sinks) {
                        pick = Some(i);
                        break;
                    }
                }
            }
            if let Some(i) = pick {
                sinks.push(i);
            }
        }
        if sinks.is_empty() {
            continue;
        }
        let mut net = Net::new(format!("n{drv}"));
        net.pins.push(NetPin::new(Endpoint::inst(format!("u{drv}"), "Y0")));
        for &s in &sinks {
            let inputs = cfg.master_mix[kinds[s]].0.inputs;
            let pin = inputs - free[s];
            free[s] -= 1;
            if free[s] == 0 {
                pool.remove(s);
            }
            net.pins.push(NetPin::new(Endpoint::inst(format!("u{s}"), format!("A{pin}"))));
        }
        d.nets.push(net);
    }

    if cfg.place {
        place_rows(&mut d, cfg)?;
    }
    Ok(d)
}

/// 60% utilization, square core on the site grid, rows filled left to right
/// in instance order.
fn place_rows(d: &mut Design, cfg: &SynthConfig) -> Result<(), SynthError> {
    let widths: Vec<Dbu> = cfg.master_mix.iter().map(|(t, _)| t.width).collect();
    let site_w = widths.iter().fold(0, |g, &w| gcd(g as u128, w as u128) as Dbu);
    let site = Site::new(SYNTH_SITE, site_w, cfg.master_mix[0].0.height);
    let area: i64 = d
        .instances
        .iter()
        .map(|i| d.masters.iter().find(|m| m.name == i.master).map_or(0, |m| m.area()))
        .sum();
    let fp = derive_floorplan(area, Ratio::new(3, 5), Ratio::integer(1), Some(&site), 0)
        .map_err(|e| SynthError::DegenerateConfig(format!("{e}")))?;
    let mut core = fp.core;
    let widest = widths.iter().copied().max().unwrap_or(0);
    if core.width() < widest {
        core.xhi = core.xlo + (widest + site_w - 1) / site_w * site_w;
    }

    let masters: alloc::collections::BTreeMap<String, Dbu> = d.masters.iter().map(|m| (m.name.clone(), m.width)).collect();
    let (mut row, mut x) = (0i64, core.xlo);
    for inst in &mut d.instances {
        let w = masters[&inst.master];
        if x + w > core.xhi {
            row += 1;
            x = core.xlo;
        }
        let y = core.ylo + row * site.height;
        if y + site.height > core.yhi {
            core.yhi = y + site.height;
        }
        inst.location = Some(Point::new(x, y));
        inst.orientation = if row % 2 == 0 { crate::geom::Orientation::N } else { crate::geom::Orientation::FS };
        x += w;
    }
    d.rows = rebuild_rows(&core, &site).map_err(|e| SynthError::DegenerateConfig(format!("{e}")))?;
    d.sites.push(site);
    d.core = core;
    d.die = core;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repair::{repair_pipeline, RepairConfig};
    use crate::stats::design_stats;
    use crate::validate::validate_design;

    #[test]
    fn single_instance_has_no_nets() {
        let d = generate_synthetic(&SynthConfig::new(1, Ratio::integer(3), 0)).unwrap();
        assert_eq!(d.instances.len(), 1);
        assert!(d.nets.is_empty());
        assert!(validate_design(&d).is_empty());
    }

    #[test]
    fn degree_and_structure() {
        let cfg = SynthConfig::new(2000, Ratio::integer(3), 11);
        let d = generate_synthetic(&cfg).unwrap();
        assert_eq!(d.instances.len(), 2000);
        assert!(validate_design(&d).is_empty());
        let s = design_stats(&d).unwrap();
        assert!((2.7..=3.3).contains(&s.avg_net_degree), "{}", s.avg_net_degree);
        let (r, log) = repair_pipeline(&d, &RepairConfig::default()).unwrap();
        assert!(log.is_empty());
        assert_eq!(r, d);
        assert!(crate::remap::legality_check(&d, &crate::model::LefSubset {
            units: 1000,
            layers: Vec::new(),
            sites: d.sites.clone(),
            vias: Vec::new(),
            macros: d.masters.clone(),
        })
        .is_empty());
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig::new(300, Ratio::new(7, 2), 5);
        assert_eq!(generate_synthetic(&cfg).unwrap(), generate_synthetic(&cfg).unwrap());
    }

    #[test]
    fn rejects_degenerate() {
        let mut cfg = SynthConfig::new(10, Ratio::new(3, 2), 0);
        assert!(generate_synthetic(&cfg).is_err());
        cfg.avg_net_degree = Ratio::integer(2);
        cfg.master_mix[0].1 = Ratio::new(1, 20);
        assert!(generate_synthetic(&cfg).is_err());
        cfg.master_mix[0].1 = Ratio::new(2, 20);
        assert!(generate_synthetic(&cfg).is_ok());
        cfg.num_instances = 0;
        assert!(generate_synthetic(&cfg).is_err());
    }
}
