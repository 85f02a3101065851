//! Order-independent content digests of designs.
//!
//! The canonical digest covers every semantic field: outline, sites, the masters
//! actually referenced by instances, instances, nets (with pin overrides and
//! routing), rows and IO pins. Collections are sorted by name before hashing, so
//! storage order never matters.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::geom::{LayerRect, Point, Rect};
use crate::model::{Design, Endpoint, Master, NetPin};
use crate::validate::{validate_design, ValidationReport};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("INVALID_DESIGN: {} violation(s), first: {}", .0.len(), .0.violations.first().map(|v| v.code.as_str()).unwrap_or("-"))]
pub struct InvalidDesign(pub ValidationReport);

/// Length-prefixed canonical byte encoder feeding a hasher.
struct Encoder {
    hasher: Sha256,
}

impl Encoder {
    fn new(domain: &str) -> Self {
        let mut e = Encoder { hasher: Sha256::new() };
        e.str(domain);
        e
    }

    fn tag(&mut self, t: u8) {
        self.hasher.update([t]);
    }

    fn u64(&mut self, v: u64) {
        self.hasher.update(v.to_le_bytes());
    }

    fn i64(&mut self, v: i64) {
        self.hasher.update(v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.hasher.update(s.as_bytes());
    }

    fn point(&mut self, p: Point) {
        self.i64(p.x);
        self.i64(p.y);
    }

    fn opt_point(&mut self, p: Option<Point>) {
        match p {
            None => self.tag(0),
            Some(p) => {
                self.tag(1);
                self.point(p);
            }
        }
    }

    fn rect(&mut self, r: &Rect) {
        self.i64(r.xlo);
        self.i64(r.ylo);
        self.i64(r.xhi);
        self.i64(r.yhi);
    }

    fn layer_rects(&mut self, rs: &[LayerRect]) {
        self.u64(rs.len() as u64);
        for r in rs {
            self.str(&r.layer);
            self.rect(&r.rect);
        }
    }

    fn opt_str(&mut self, s: Option<&str>) {
        match s {
            None => self.tag(0),
            Some(s) => {
                self.tag(1);
                self.str(s);
            }
        }
    }

    fn finish(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn sorted_by_name<T>(items: &[T], name: impl Fn(&T) -> &str) -> Vec<&T> {
    let mut v: Vec<&T> = items.iter().collect();
    v.sort_by(|a, b| name(a).cmp(name(b)));
    v
}

fn encode_master(e: &mut Encoder, m: &Master) {
    e.str(&m.name);
    e.i64(m.width);
    e.i64(m.height);
    e.str(m.class.as_str());
    e.opt_str(m.site.as_deref());
    e.tag(m.tier_tag as u8);
    let pins = sorted_by_name(&m.pins, |p| &p.name);
    e.u64(pins.len() as u64);
    for p in pins {
        e.str(&p.name);
        e.str(p.direction.as_str());
        e.str(p.pin_use.as_str());
        e.tag(p.hidden as u8);
        e.layer_rects(&p.shapes);
    }
    e.layer_rects(&m.obs);
}

fn encode_endpoint(e: &mut Encoder, ep: &Endpoint) {
    match ep {
        Endpoint::Instance { instance, pin } => {
            e.tag(0);
            e.str(instance);
            e.str(pin);
        }
        Endpoint::Io { name } => {
            e.tag(1);
            e.str(name);
        }
    }
}

fn encode_net_pin(e: &mut Encoder, p: &NetPin) {
    encode_endpoint(e, &p.endpoint);
    match p.direction {
        None => e.tag(0),
        Some(d) => {
            e.tag(1);
            e.str(d.as_str());
        }
    }
    e.opt_point(p.offset);
}

/// Digest of a valid design, invariant under storage reordering.
pub fn canonical_digest(design: &Design) -> Result<String, InvalidDesign> {
    let report = validate_design(design);
    if !report.is_empty() {
        return Err(InvalidDesign(report));
    }
    Ok(digest_unchecked(design))
}

/// Same as [`canonical_digest`] without the validation gate.
pub fn digest_unchecked(design: &Design) -> String {
    let mut e = Encoder::new("rosetta-pd/design/v1");
    e.str(&design.name);
    e.u64(design.units as u64);
    e.rect(&design.die);
    e.rect(&design.core);

    let sites = sorted_by_name(&design.sites, |s| &s.name);
    e.u64(sites.len() as u64);
    for s in sites {
        e.str(&s.name);
        e.tag(s.class as u8);
        e.i64(s.width);
        e.i64(s.height);
    }

    let used: BTreeSet<&str> = design.instances.iter().map(|i| i.master.as_str()).collect();
    let masters: Vec<&Master> = sorted_by_name(&design.masters, |m| &m.name)
        .into_iter()
        .filter(|m| used.contains(m.name.as_str()))
        .collect();
    e.u64(masters.len() as u64);
    for m in masters {
        encode_master(&mut e, m);
    }

    let instances = sorted_by_name(&design.instances, |i| &i.name);
    e.u64(instances.len() as u64);
    for inst in instances {
        e.str(&inst.name);
        e.str(&inst.master);
        e.opt_point(inst.location);
        e.str(inst.orientation.as_str());
        e.tag(inst.fixed as u8);
        e.tag(inst.tier.map_or(0, |t| t as u8 + 1));
        let mut ties = inst.tie_offs.clone();
        ties.sort();
        e.u64(ties.len() as u64);
        for t in &ties {
            e.str(&t.pin);
            e.tag(t.value as u8);
        }
    }

    let nets = sorted_by_name(&design.nets, |n| &n.name);
    e.u64(nets.len() as u64);
    for net in nets {
        e.str(&net.name);
        e.u64(net.weight as u64);
        let mut pins: Vec<&NetPin> = net.pins.iter().collect();
        pins.sort();
        e.u64(pins.len() as u64);
        for p in pins {
            encode_net_pin(&mut e, p);
        }
        e.u64(net.routing.len() as u64);
        for w in &net.routing {
            e.str(&w.layer);
            e.u64(w.points.len() as u64);
            for p in &w.points {
                e.point(*p);
            }
            e.opt_str(w.via.as_deref());
        }
    }

    let rows = sorted_by_name(&design.rows, |r| &r.name);
    e.u64(rows.len() as u64);
    for r in rows {
        e.str(&r.name);
        e.str(&r.site);
        e.point(r.origin);
        e.str(r.orientation.as_str());
        e.u64(r.num_sites as u64);
        e.i64(r.step);
    }

    let ios = sorted_by_name(&design.io_pins, |p| &p.name);
    e.u64(ios.len() as u64);
    for p in ios {
        e.str(&p.name);
        e.str(p.direction.as_str());
        e.opt_point(p.location);
        e.str(p.orientation.as_str());
        e.tag(p.fixed as u8);
        e.opt_str(p.layer.as_deref());
        e.rect(&p.shape);
    }
    e.finish()
}

/// Digest of connectivity only: the instance name set plus, for every net, the
/// sorted list of owners (instance or IO pin names) it touches. Net names, pin
/// names, masters and geometry are ignored, so designs that went through formats
/// without a master/pin concept still compare equal.
pub fn connectivity_digest(design: &Design) -> String {
    let mut e = Encoder::new("rosetta-pd/connectivity/v1");
    let mut names: Vec<&str> = design.instances.iter().map(|i| i.name.as_str()).collect();
    names.sort_unstable();
    e.u64(names.len() as u64);
    for n in names {
        e.str(n);
    }
    let mut nets: Vec<Vec<(u8, &str)>> = design
        .nets
        .iter()
        .map(|n| {
            let mut owners: Vec<(u8, &str)> = n
                .pins
                .iter()
                .map(|p| match &p.endpoint {
                    Endpoint::Instance { instance, .. } => (0, instance.as_str()),
                    Endpoint::Io { name } => (1, name.as_str()),
                })
                .collect();
            owners.sort_unstable();
            owners
        })
        .collect();
    nets.sort_unstable();
    e.u64(nets.len() as u64);
    for owners in nets {
        e.u64(owners.len() as u64);
        for (kind, name) in owners {
            e.tag(kind);
            e.str(name);
        }
    }
    e.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Direction, Instance, MasterPin, Net};

    fn fixture() -> Design {
        let mut d = Design::new("t", 1000);
        d.die = Rect::new(0, 0, 100, 100);
        d.core = d.die;
        let mut m = Master::new("INV", 10, 10);
        m.pins.push(MasterPin::new("A", Direction::Input));
        m.pins.push(MasterPin::new("Y", Direction::Output));
        d.masters.push(m);
        d.masters.push(Master::new("UNUSED", 5, 5));
        for i in 0..3 {
            d.instances.push(Instance::new(alloc::format!("u{i}"), "INV").placed_at(10 * i, 0));
        }
        d.nets.push(Net::new("a").with_pins([Endpoint::inst("u0", "Y"), Endpoint::inst("u1", "A")]));
        d.nets.push(Net::new("b").with_pins([Endpoint::inst("u1", "Y"), Endpoint::inst("u2", "A")]));
        d
    }

    #[test]
    fn storage_order_does_not_matter() {
        let d = fixture();
        let mut r = d.clone();
        r.nets.reverse();
        r.instances.reverse();
        r.masters.reverse();
        r.nets[0].pins.reverse();
        assert_eq!(canonical_digest(&d).unwrap(), canonical_digest(&r).unwrap());
    }

    #[test]
    fn moving_an_instance_changes_digest() {
        let d = fixture();
        let mut m = d.clone();
        m.instances[1].location = Some(Point::new(11, 0));
        assert_ne!(canonical_digest(&d).unwrap(), canonical_digest(&m).unwrap());
    }

    #[test]
    fn unused_masters_are_not_hashed() {
        let d = fixture();
        let mut m = d.clone();
        m.masters.retain(|x| x.name != "UNUSED");
        assert_eq!(canonical_digest(&d).unwrap(), canonical_digest(&m).unwrap());
    }

    #[test]
    fn invalid_design_is_rejected() {
        let mut d = fixture();
        d.instances[0].master = "NOPE".into();
        assert!(canonical_digest(&d).is_err());
    }

    #[test]
    fn connectivity_ignores_names_of_nets_and_pins() {
        let d = fixture();
        let mut m = d.clone();
        m.nets[0].name = "renamed".into();
        m.masters[0].pins[0].name = "Z".into();
        assert_eq!(connectivity_digest(&d), connectivity_digest(&m));
        m.nets[0].pins.pop();
        assert_ne!(connectivity_digest(&d), connectivity_digest(&m));
    }
}
