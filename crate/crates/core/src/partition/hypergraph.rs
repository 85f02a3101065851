use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::PartitionError;
use crate::model::{Design, Endpoint, Tier};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    pub weight: u64,
    pub fixed: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub net: String,
    /// Distinct vertex ids, ascending.
    pub vertices: Vec<u32>,
    pub weight: u64,
    /// IO pins on the same net; they take no part in the cut.
    pub io_pins: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Hyperedge>,
    /// Nets left out because they touch fewer than two vertices, with their IO pins.
    pub dropped_nets: Vec<(String, Vec<String>)>,
}

impl Hypergraph {
    /// Builds from raw vertex weights and edge vertex lists; duplicate vertices
    /// are merged and edges with fewer than two distinct vertices dropped.
    pub fn from_parts(weights: &[u64], edges: &[(Vec<u32>, u64)]) -> Self {
        let vertices = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Vertex { name: alloc::format!("v{i}"), weight: w, fixed: None })
            .collect();
        let mut h = Hypergraph { vertices, edges: Vec::new(), dropped_nets: Vec::new() };
        for (i, (vs, w)) in edges.iter().enumerate() {
            let mut vs = vs.clone();
            vs.sort_unstable();
            vs.dedup();
            let net = alloc::format!("e{i}");
            if vs.len() >= 2 {
                h.edges.push(Hyperedge { net, vertices: vs, weight: *w, io_pins: Vec::new() });
            } else {
                h.dropped_nets.push((net, Vec::new()));
            }
        }
        h
    }

    pub fn total_weight(&self) -> u64 {
        self.vertices.iter().map(|v| v.weight).sum()
    }

    /// Edge ids incident to each vertex.
    pub fn incidence(&self) -> Vec<Vec<u32>> {
        let mut inc = alloc::vec![Vec::new(); self.vertices.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            for &v in &edge.vertices {
                inc[v as usize].push(e as u32);
            }
        }
        inc
    }

    pub fn vertex_index(&self) -> BTreeMap<&str, u32> {
        self.vertices.iter().enumerate().map(|(i, v)| (v.name.as_str(), i as u32)).collect()
    }
}

/// One vertex per non-COVER instance weighted by master area (instance tier,
/// when set, fixes the side: bottom is side 0); one hyperedge per net over the
/// instances it touches. IO pins are recorded per edge but never cut.
pub fn design_to_hypergraph(design: &Design) -> Result<Hypergraph, PartitionError> {
    let masters = design.master_index();
    let mut h = Hypergraph::default();
    let mut index: BTreeMap<&str, u32> = BTreeMap::new();
    for inst in &design.instances {
        let Some(m) = masters.get(inst.master.as_str()) else { continue };
        if m.is_cover() {
            continue;
        }
        index.insert(inst.name.as_str(), h.vertices.len() as u32);
        h.vertices.push(Vertex {
            name: inst.name.clone(),
            weight: m.area().max(0) as u64,
            fixed: inst.tier.map(|t| if t == Tier::Bottom { 0 } else { 1 }),
        });
    }
    if h.vertices.is_empty() {
        return Err(PartitionError::EmptyDesign);
    }
    for net in &design.nets {
        let mut vs = Vec::new();
        let mut io = Vec::new();
        for p in &net.pins {
            match &p.endpoint {
                Endpoint::Instance { instance, .. } => {
                    if let Some(&v) = index.get(instance.as_str()) {
                        vs.push(v);
                    }
                }
                Endpoint::Io { name } => io.push(name.clone()),
            }
        }
        vs.sort_unstable();
        vs.dedup();
        io.sort();
        io.dedup();
        if vs.len() >= 2 {
            h.edges.push(Hyperedge { net: net.name.clone(), vertices: vs, weight: net.weight as u64, io_pins: io });
        } else {
            h.dropped_nets.push((net.name.clone(), io));
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Rect;
    use crate::model::{Direction, Instance, IoPin, Master, MasterPin, Net};

    #[test]
    fn io_pins_are_recorded_not_cut() {
        let mut d = Design::new("h", 1000);
        d.die = Rect::new(0, 0, 100, 100);
        d.core = d.die;
        let mut m = Master::new("INV", 2, 3);
        m.pins.push(MasterPin::new("A", Direction::Input));
        m.pins.push(MasterPin::new("Y", Direction::Output));
        d.masters.push(m);
        d.instances.push(Instance::new("a", "INV"));
        d.instances.push(Instance::new("b", "INV"));
        d.io_pins.push(IoPin::new("in", Direction::Input));
        d.nets.push(
            Net::new("n").with_pins([Endpoint::io("in"), Endpoint::inst("a", "A"), Endpoint::inst("b", "A")]),
        );
        let h = design_to_hypergraph(&d).unwrap();
        assert_eq!(h.vertices.len(), 2);
        assert_eq!(h.vertices[0].weight, 6);
        assert_eq!(h.edges.len(), 1);
        assert_eq!(h.edges[0].vertices, [0, 1]);
        assert_eq!(h.edges[0].io_pins, ["in"]);
    }

    #[test]
    fn empty_design_is_rejected() {
        assert_eq!(design_to_hypergraph(&Design::new("e", 1000)), Err(PartitionError::EmptyDesign));
    }
}
