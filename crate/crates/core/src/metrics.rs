//! Wirelength accounting, floorplan derivation and the structured metrics record.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::{Dbu, Rect};
use crate::model::{Design, Site};
use crate::num::{div_ceil_i128, isqrt, Ratio};
use crate::stats::stats_unchecked;

pub const METRICS_SCHEMA_ID: &str = "rosetta-pd/metrics/v1";

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("NO_ROUTING: design carries no routed wiring")]
    NoRouting,
    #[error("NONPOSITIVE_INPUT: {0}")]
    NonpositiveInput(&'static str),
    #[error("SCHEMA_VIOLATION: {0}")]
    SchemaViolation(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hpwl {
    pub total: Dbu,
    /// Nets skipped because some pin has no location.
    pub unplaced_nets: usize,
}

/// Σ over nets of pin bounding box width + height.
pub fn compute_hpwl(design: &Design) -> Hpwl {
    let lookup = design.lookup();
    let mut out = Hpwl::default();
    'nets: for net in &design.nets {
        let mut bbox: Option<(Dbu, Dbu, Dbu, Dbu)> = None;
        for p in &net.pins {
            let Some(pt) = lookup.pin_location(p) else {
                out.unplaced_nets += 1;
                continue 'nets;
            };
            bbox = Some(match bbox {
                None => (pt.x, pt.y, pt.x, pt.y),
                Some((a, b, c, d)) => (a.min(pt.x), b.min(pt.y), c.max(pt.x), d.max(pt.y)),
            });
        }
        if let Some((a, b, c, d)) = bbox {
            out.total += (c - a) + (d - b);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutedLength {
    pub total: Dbu,
    pub vias: usize,
}

/// Σ Manhattan length of routed segments; vias add no length.
pub fn routed_length(design: &Design) -> Result<RoutedLength, MetricsError> {
    let mut out = RoutedLength::default();
    let mut any = false;
    for w in design.nets.iter().flat_map(|n| &n.routing) {
        any = true;
        out.total += w.length();
        if w.via.is_some() {
            out.vias += 1;
        }
    }
    if any {
        Ok(out)
    } else {
        Err(MetricsError::NoRouting)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Floorplan {
    pub die: Rect,
    pub core: Rect,
}

/// Core of area `ceil(stdcell_area / utilization)` with width/height close to
/// `aspect_ratio` (width over height), rounded up to the site grid when a site
/// is given, surrounded by `margin` on every side.
pub fn derive_floorplan(
    stdcell_area: i64,
    utilization: Ratio,
    aspect_ratio: Ratio,
    site: Option<&Site>,
    margin: Dbu,
) -> Result<Floorplan, MetricsError> {
    if utilization.num == 0 || utilization.den == 0 || utilization.num > utilization.den {
        return Err(MetricsError::NonpositiveInput("utilization must lie in (0, 1]"));
    }
    if aspect_ratio.num == 0 || aspect_ratio.den == 0 {
        return Err(MetricsError::NonpositiveInput("aspect ratio must be positive"));
    }
    if stdcell_area < 0 || margin < 0 {
        return Err(MetricsError::NonpositiveInput("area and margin must be nonnegative"));
    }
    if site.is_some_and(|s| s.width <= 0 || s.height <= 0) {
        return Err(MetricsError::NonpositiveInput("site dimensions must be positive"));
    }
    let area = div_ceil_i128(stdcell_area as i128 * utilization.den as i128, utilization.num as i128);
    // w = round(sqrt(area * ar)): the largest w with (2w - 1)^2 <= 4 * area * ar
    let four_x = (4 * area as u128 * aspect_ratio.num as u128) / aspect_ratio.den as u128;
    let mut w = isqrt(four_x).div_ceil(2) as i128;
    if area > 0 {
        w = w.max(1);
    }
    let mut h = if w == 0 { 0 } else { div_ceil_i128(area, w) };
    if let Some(s) = site {
        w = div_ceil_i128(w, s.width as i128) * s.width as i128;
        h = if w == 0 { 0 } else { div_ceil_i128(area, w) };
        h = div_ceil_i128(h, s.height as i128) * s.height as i128;
    }
    let (w, h) = (w as Dbu, h as Dbu);
    Ok(Floorplan {
        die: Rect::new(0, 0, w + 2 * margin, h + 2 * margin),
        core: Rect::new(margin, margin, margin + w, margin + h),
    })
}

/// One stage-tagged measurement set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsRecord {
    pub schema: String,
    pub design: String,
    pub stage: String,
    pub flow: String,
    pub dbu_per_micron: u32,
    pub wirelength_hpwl: Dbu,
    pub wirelength_routed: Option<Dbu>,
    pub hpwl_unplaced_nets: u64,
    pub instance_count: u64,
    pub net_count: u64,
    pub pin_count: u64,
    pub io_pin_count: u64,
    pub stdcell_area: i64,
    pub core_area: i64,
    /// stdcell_area / core_area; null when the core is empty.
    pub utilization: Option<f64>,
    pub cutsize: Option<u64>,
    pub hbt_estimate: Option<u64>,
    pub runtime_s: f64,
    pub memory_peak_kib: Option<u64>,
    pub clock_period_ns: Option<f64>,
    pub timing_wns_ns: Option<f64>,
    pub timing_tns_ns: Option<f64>,
    pub power_total_mw: Option<f64>,
    pub violations: BTreeMap<String, u64>,
    pub notes: Vec<String>,
}

pub const NO_ENGINE_NOTE: &str = "timing and power need an external analysis engine and are reported as null";

impl MetricsRecord {
    /// Statically computable metrics of `design`; runtime and memory are left for the caller.
    pub fn from_design(design: &Design, stage: &str, flow: &str) -> Self {
        let stats = stats_unchecked(design);
        let hpwl = compute_hpwl(design);
        let core_area = design.core.area();
        MetricsRecord {
            schema: METRICS_SCHEMA_ID.into(),
            design: design.name.clone(),
            stage: stage.into(),
            flow: flow.into(),
            dbu_per_micron: design.units,
            wirelength_hpwl: hpwl.total,
            wirelength_routed: routed_length(design).ok().map(|r| r.total),
            hpwl_unplaced_nets: hpwl.unplaced_nets as u64,
            instance_count: stats.instances as u64,
            net_count: stats.nets as u64,
            pin_count: stats.pins as u64,
            io_pin_count: design.io_pins.len() as u64,
            stdcell_area: stats.stdcell_area,
            core_area,
            utilization: (core_area > 0).then(|| stats.stdcell_area as f64 / core_area as f64),
            cutsize: None,
            hbt_estimate: None,
            runtime_s: 0.0,
            memory_peak_kib: None,
            clock_period_ns: None,
            timing_wns_ns: None,
            timing_tns_ns: None,
            power_total_mw: None,
            violations: BTreeMap::new(),
            notes: alloc::vec![NO_ENGINE_NOTE.into()],
        }
    }

    /// Record invariants: schema id, nonnegative quantities and the
    /// utilization identity (relative tolerance 1e-9).
    pub fn check(&self) -> Result<(), MetricsError> {
        let bad = |m: String| Err(MetricsError::SchemaViolation(m));
        if self.schema != METRICS_SCHEMA_ID {
            return bad(alloc::format!("schema id `{}` is not {}", self.schema, METRICS_SCHEMA_ID));
        }
        if self.design.is_empty() || self.stage.is_empty() || self.flow.is_empty() {
            return bad("design, stage and flow must be nonempty".into());
        }
        if self.wirelength_hpwl < 0 || self.wirelength_routed.is_some_and(|r| r < 0) {
            return bad("wirelength must be nonnegative".into());
        }
        if self.stdcell_area < 0 || self.core_area < 0 {
            return bad("areas must be nonnegative".into());
        }
        if !(self.runtime_s >= 0.0 && self.runtime_s.is_finite()) {
            return bad("runtime_s must be a nonnegative number".into());
        }
        match (self.core_area > 0, self.utilization) {
            (true, Some(u)) => {
                let expect = self.stdcell_area as f64 / self.core_area as f64;
                if !u.is_finite() || libm::fabs(u - expect) > 1e-9 * expect.max(1.0) {
                    return bad(alloc::format!("utilization {u} != stdcell_area / core_area = {expect}"));
                }
            }
            (true, None) => return bad("utilization missing for a nonempty core".into()),
            (false, Some(_)) => return bad("utilization given for an empty core".into()),
            (false, None) => {}
        }
        Ok(())
    }
}
