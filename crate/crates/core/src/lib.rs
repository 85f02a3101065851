//! Design model and algorithms for legacy benchmark translation, netlist repair,
//! face-to-face 3D enablement, tier bipartitioning and metrics.
//!
//! Everything here is pure computation over in-memory data; file formats, JSON
//! reports and the command line live in the `rosetta-pd` crate. All geometry is
//! integer database units (DBU); microns only appear at the format boundary.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod bookshelf;
pub mod digest;
pub mod enable3d;
pub mod geom;
pub mod metrics;
pub mod model;
pub mod num;
pub mod partition;
pub mod remap;
pub mod repair;
pub mod stats;
pub mod synth;
pub mod tierview;
pub mod validate;

pub use digest::{canonical_digest, connectivity_digest};
pub use geom::{Dbu, LayerRect, Orientation, Point, Rect};
pub use model::{
    CellClass, Design, Direction, Endpoint, Instance, IoPin, LefSubset, Master, MasterPin, Net,
    NetPin, Row, Site, TechStack, Tier, TierTag,
};
pub use stats::{design_stats, StatsRecord};
pub use validate::{validate_design, ValidationReport, Violation, ViolationCode};

/// Version string stamped into generated files.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
