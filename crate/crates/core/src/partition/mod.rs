//! Balance-constrained min-cut bipartitioning of design hypergraphs.

mod bootstrap;
mod fm;
mod hypergraph;
mod sweep;

pub use bootstrap::{expected_min_cutsize, expected_min_per_point, ExpectedMin};
pub use fm::{fm_bipartition, fm_bipartition_with, FmConfig};
pub use hypergraph::{design_to_hypergraph, Hyperedge, Hypergraph, Vertex};
pub use sweep::{
    base_balance_sweep, base_balance_points, run_sweep, ubfactor_points, ubfactor_sweep, GlobalBest, SweepKind,
    SweepPoint, SweepResult, SweepRun,
};

use alloc::string::String;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("EMPTY_DESIGN: no non-COVER instance to partition")]
    EmptyDesign,
    #[error("INFEASIBLE_BALANCE: no assignment found with side-0 weight in [{lo}, {hi}] of {total}")]
    InfeasibleBalance { lo: u64, hi: u64, total: u64 },
    #[error("BAD_BALANCE: {0}")]
    BadBalance(String),
    #[error("BAD_SWEEP: {0}")]
    BadSweep(String),
    #[error("EMPTY_SAMPLES: point {0} has no cut sample")]
    EmptySamples(usize),
}

/// Target split (side 0 fraction; side 1 gets the rest) and tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BalancePoint {
    pub target: (f64, f64),
    pub tolerance: f64,
}

impl BalancePoint {
    pub fn new(target0: f64, tolerance: f64) -> Self {
        BalancePoint {
            target: (target0, 1.0 - target0),
            tolerance,
        }
    }

    pub fn check(&self) -> Result<(), PartitionError> {
        let (a, b) = self.target;
        if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
            return Err(PartitionError::BadBalance(alloc::format!("target fractions {a}, {b} must lie in (0, 1)")));
        }
        if libm::fabs(a + b - 1.0) > 1e-12 {
            return Err(PartitionError::BadBalance(alloc::format!("target fractions {a}, {b} must sum to 1")));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(PartitionError::BadBalance(alloc::format!("tolerance {} must be nonnegative", self.tolerance)));
        }
        Ok(())
    }

    /// `(t - eps) * W <= w0 <= (t + eps) * W`, evaluated literally.
    pub fn is_feasible(&self, side0_weight: u64, total: u64) -> bool {
        let w = total as f64;
        let w0 = side0_weight as f64;
        w0 >= (self.target.0 - self.tolerance) * w && w0 <= (self.target.0 + self.tolerance) * w
    }

    /// Integer side-0 weight window equivalent to [`Self::is_feasible`] for
    /// weights below 2^53. `None` when the window holds no integer.
    pub fn window(&self, total: u64) -> Option<(u64, u64)> {
        let w = total as f64;
        let lo_f = (self.target.0 - self.tolerance) * w;
        let hi_f = (self.target.0 + self.tolerance) * w;
        let lo = if lo_f <= 0.0 { 0 } else { libm::ceil(lo_f) as u64 };
        let hi = if hi_f >= w { total } else if hi_f < 0.0 { return None } else { libm::floor(hi_f) as u64 };
        (lo <= hi).then_some((lo, hi))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    /// Side (0 or 1) per hypergraph vertex.
    pub side: alloc::vec::Vec<u8>,
    pub cutsize: u64,
    pub balance: BalancePoint,
    pub seed: u64,
    pub feasible: bool,
    pub side_weights: [u64; 2],
    /// Cut of the first seeded start before refinement.
    pub initial_cutsize: u64,
}

/// Σ weight of hyperedges with vertices on both sides.
pub fn cutsize(h: &Hypergraph, side: &[u8]) -> u64 {
    h.edges
        .iter()
        .filter(|e| {
            let first = side[e.vertices[0] as usize];
            e.vertices.iter().any(|&v| side[v as usize] != first)
        })
        .map(|e| e.weight)
        .sum()
}

pub fn side_weights(h: &Hypergraph, side: &[u8]) -> [u64; 2] {
    let mut w = [0u64; 2];
    for (v, s) in h.vertices.iter().zip(side) {
        w[*s as usize] += v.weight;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_matches_literal_check() {
        for total in [0u64, 1, 7, 100, 101, 997] {
            for &(t, e) in &[(0.5, 0.0), (0.5, 0.02), (0.06, 0.02), (0.28, 0.02), (0.5, 0.1), (0.3, 0.3)] {
                let bp = BalancePoint::new(t, e);
                let lit: alloc::vec::Vec<u64> = (0..=total).filter(|&w0| bp.is_feasible(w0, total)).collect();
                match bp.window(total) {
                    None => assert!(lit.is_empty()),
                    Some((lo, hi)) => assert_eq!(lit, (lo..=hi).collect::<alloc::vec::Vec<_>>()),
                }
            }
        }
    }

    #[test]
    fn bad_targets_are_rejected() {
        assert!(BalancePoint::new(0.0, 0.1).check().is_err());
        assert!(BalancePoint::new(0.5, -0.1).check().is_err());
        assert!(BalancePoint::new(0.06, 0.02).check().is_ok());
    }
}
