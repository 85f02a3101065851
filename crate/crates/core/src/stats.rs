use serde::{Deserialize, Serialize};

use crate::digest::InvalidDesign;
use crate::model::Design;
use crate::validate::validate_design;

/// Statically computable design statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub instances: usize,
    pub nets: usize,
    pub pins: usize,
    /// Σ width × height over instances of non-COVER masters, in DBU².
    pub stdcell_area: i64,
    /// Σ net pin counts / net count, 0 for a netless design.
    pub avg_net_degree: f64,
}

pub fn design_stats(design: &Design) -> Result<StatsRecord, InvalidDesign> {
    let report = validate_design(design);
    if !report.is_empty() {
        return Err(InvalidDesign(report));
    }
    Ok(stats_unchecked(design))
}

pub(crate) fn stats_unchecked(design: &Design) -> StatsRecord {
    let masters = design.master_index();
    let stdcell_area = design
        .instances
        .iter()
        .filter_map(|i| masters.get(i.master.as_str()))
        .filter(|m| !m.is_cover())
        .map(|m| m.area())
        .sum();
    let pins: usize = design.nets.iter().map(|n| n.pins.len()).sum();
    let nets = design.nets.len();
    StatsRecord {
        instances: design.instances.len(),
        nets,
        pins,
        stdcell_area,
        avg_net_degree: if nets == 0 { 0.0 } else { pins as f64 / nets as f64 },
    }
}
