//! Structural invariant checks over a [`Design`]. Violations are data, not errors.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{Design, Endpoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationCode {
    DanglingPin,
    UnknownMaster,
    DuplicateInstance,
    DuplicateNet,
    DuplicateIoPin,
    DuplicateMaster,
    BadOutline,
    CoreOutsideDie,
    OutsideDie,
    HiddenPinConnected,
    TierMismatch,
    UnknownSite,
    RowStepMismatch,
    EmptyRow,
    RowOverlap,
    BadMaster,
    // legality rules
    OffGrid,
    OutsideCore,
    Overlap,
    // tier strategy rules
    WrongTierMaster,
    CoverNotFixed,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::DanglingPin => "DANGLING_PIN",
            ViolationCode::UnknownMaster => "UNKNOWN_MASTER",
            ViolationCode::DuplicateInstance => "DUPLICATE_INSTANCE",
            ViolationCode::DuplicateNet => "DUPLICATE_NET",
            ViolationCode::DuplicateIoPin => "DUPLICATE_IO_PIN",
            ViolationCode::DuplicateMaster => "DUPLICATE_MASTER",
            ViolationCode::BadOutline => "BAD_OUTLINE",
            ViolationCode::CoreOutsideDie => "CORE_OUTSIDE_DIE",
            ViolationCode::OutsideDie => "OUTSIDE_DIE",
            ViolationCode::HiddenPinConnected => "HIDDEN_PIN_CONNECTED",
            ViolationCode::TierMismatch => "TIER_MISMATCH",
            ViolationCode::UnknownSite => "UNKNOWN_SITE",
            ViolationCode::RowStepMismatch => "ROW_STEP_MISMATCH",
            ViolationCode::EmptyRow => "EMPTY_ROW",
            ViolationCode::RowOverlap => "ROW_OVERLAP",
            ViolationCode::BadMaster => "BAD_MASTER",
            ViolationCode::OffGrid => "OFF_GRID",
            ViolationCode::OutsideCore => "OUTSIDE_CORE",
            ViolationCode::Overlap => "OVERLAP",
            ViolationCode::WrongTierMaster => "WRONG_TIER_MASTER",
            ViolationCode::CoverNotFixed => "COVER_NOT_FIXED",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub code: ViolationCode,
    /// What the violation is about, e.g. an instance or net name.
    pub locus: String,
}

impl Violation {
    pub fn new(code: ViolationCode, locus: impl Into<String>) -> Self {
        Violation { code, locus: locus.into() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn count(&self, code: ViolationCode) -> usize {
        self.violations.iter().filter(|v| v.code == code).count()
    }

    pub fn push(&mut self, code: ViolationCode, locus: impl Into<String>) {
        self.violations.push(Violation::new(code, locus));
    }

    /// Tally per violation code.
    pub fn histogram(&self) -> BTreeMap<String, u64> {
        let mut h = BTreeMap::new();
        for v in &self.violations {
            *h.entry(String::from(v.code.as_str())).or_insert(0) += 1;
        }
        h
    }
}

fn report_duplicates<'a>(
    names: impl Iterator<Item = &'a str>,
    code: ViolationCode,
    report: &mut ValidationReport,
) {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            report.push(code, n);
        }
    }
}

/// Checks every model invariant. Returns an empty report iff the design is well formed.
pub fn validate_design(design: &Design) -> ValidationReport {
    let mut report = ValidationReport::default();
    let lookup = design.lookup();

    report_duplicates(design.masters.iter().map(|m| m.name.as_str()), ViolationCode::DuplicateMaster, &mut report);
    report_duplicates(design.instances.iter().map(|i| i.name.as_str()), ViolationCode::DuplicateInstance, &mut report);
    report_duplicates(design.nets.iter().map(|n| n.name.as_str()), ViolationCode::DuplicateNet, &mut report);
    report_duplicates(design.io_pins.iter().map(|p| p.name.as_str()), ViolationCode::DuplicateIoPin, &mut report);

    if design.die.width() < 0 || design.die.height() < 0 || design.core.width() < 0 || design.core.height() < 0 {
        report.push(ViolationCode::BadOutline, design.name.as_str());
    }
    if !design.die.contains(&design.core) {
        report.push(ViolationCode::CoreOutsideDie, design.name.as_str());
    }

    for m in &design.masters {
        if m.width < 0 || m.height < 0 {
            report.push(ViolationCode::BadMaster, m.name.as_str());
        }
    }

    for inst in &design.instances {
        let Some(master) = lookup.masters.get(inst.master.as_str()) else {
            report.push(ViolationCode::UnknownMaster, format!("{} ({})", inst.name, inst.master));
            continue;
        };
        if let Some(bbox) = inst.bbox(master) {
            if !design.die.contains(&bbox) {
                report.push(ViolationCode::OutsideDie, inst.name.as_str());
            }
        }
        if let (Some(t), Some(tag)) = (inst.tier, master.tier_tag.tier()) {
            if t != tag {
                report.push(ViolationCode::TierMismatch, inst.name.as_str());
            }
        }
    }

    for net in &design.nets {
        for pin in &net.pins {
            match &pin.endpoint {
                Endpoint::Instance { instance, pin: pname } => {
                    let mp = lookup.instance_master(instance).and_then(|m| m.pin(pname));
                    match mp {
                        None => report.push(ViolationCode::DanglingPin, format!("{} {}/{}", net.name, instance, pname)),
                        Some(p) if p.hidden => {
                            report.push(ViolationCode::HiddenPinConnected, format!("{} {}/{}", net.name, instance, pname))
                        }
                        Some(_) => {}
                    }
                }
                Endpoint::Io { name } => {
                    if lookup.io_pin(name).is_none() {
                        report.push(ViolationCode::DanglingPin, format!("{} PIN {}", net.name, name));
                    }
                }
            }
        }
    }

    for row in &design.rows {
        match design.site(&row.site) {
            None => report.push(ViolationCode::UnknownSite, format!("{} ({})", row.name, row.site)),
            Some(site) => {
                if row.step != site.width {
                    report.push(ViolationCode::RowStepMismatch, row.name.as_str());
                }
            }
        }
        if row.num_sites == 0 {
            report.push(ViolationCode::EmptyRow, row.name.as_str());
        }
    }
    row_overlaps(design, &mut report);
    report
}

/// Rows sharing a site (and therefore a tier) must not overlap.
pub(crate) fn row_overlaps(design: &Design, report: &mut ValidationReport) {
    let mut by_site: BTreeMap<&str, Vec<(crate::geom::Rect, &str)>> = BTreeMap::new();
    for row in &design.rows {
        if let Some(site) = design.site(&row.site) {
            by_site.entry(row.site.as_str()).or_default().push((row.bbox(site.height), row.name.as_str()));
        }
    }
    for rows in by_site.values_mut() {
        rows.sort_by_key(|(r, name)| (r.ylo, r.xlo, *name));
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if rows[j].0.ylo >= rows[i].0.yhi {
                    break;
                }
                if rows[i].0.overlaps(&rows[j].0) {
                    report.push(ViolationCode::RowOverlap, format!("{} {}", rows[i].1, rows[j].1));
                }
            }
        }
    }
}
