//! Balance sweeps: run the partitioner over a family of balance points and
//! several seeds, keeping the minimum cut.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{fm_bipartition, BalancePoint, Hypergraph, PartitionError, PartitionResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Imbalance factor around an even split; the parameter is the UBfactor.
    Ub,
    /// Skewed target interpolated toward an even split; the parameter is the side-0 target.
    Base,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub seed: u64,
    pub cutsize: Option<u64>,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub parameter: f64,
    pub balance: BalancePoint,
    pub runs: Vec<SweepRun>,
    /// Minimum cut over this point's seeds, with the seed that found it.
    pub best: Option<(u64, u64)>,
    /// Reason the point produced no feasible run.
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalBest {
    pub point: usize,
    pub seed: u64,
    pub cutsize: u64,
    pub result: PartitionResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    pub best: Option<GlobalBest>,
}

impl SweepResult {
    /// Per-point feasible cut samples, in seed order.
    pub fn cut_samples(&self) -> Vec<Vec<u64>> {
        self.points.iter().map(|p| p.runs.iter().filter_map(|r| r.cutsize).collect()).collect()
    }
}

fn check_points(points: usize) -> Result<(), PartitionError> {
    if points == 0 {
        return Err(PartitionError::BadSweep("points must be at least 1".into()));
    }
    Ok(())
}

fn lerp(a: f64, b: f64, k: usize, points: usize) -> f64 {
    if points == 1 {
        a
    } else {
        a + (b - a) * k as f64 / (points - 1) as f64
    }
}

/// `(ubfactor, balance)` per point: u_k = lo + k(hi - lo)/(points - 1), target
/// (0.5, 0.5), tolerance u/100.
pub fn ubfactor_points(lo: f64, hi: f64, points: usize) -> Result<Vec<(f64, BalancePoint)>, PartitionError> {
    check_points(points)?;
    if !(lo <= hi) || lo < 0.0 {
        return Err(PartitionError::BadSweep(alloc::format!("need 0 <= lo <= hi, got {lo}..{hi}")));
    }
    Ok((0..points)
        .map(|k| {
            let u = lerp(lo, hi, k, points);
            (u, BalancePoint::new(0.5, u / 100.0))
        })
        .collect())
}

/// `(side-0 target, balance)` per point, interpolated from `start.0` to 0.5.
pub fn base_balance_points(
    start: (f64, f64),
    points: usize,
    tolerance: f64,
) -> Result<Vec<(f64, BalancePoint)>, PartitionError> {
    check_points(points)?;
    let first = BalancePoint { target: start, tolerance };
    first.check()?;
    Ok((0..points)
        .map(|k| {
            let t = lerp(start.0, 0.5, k, points);
            (t, BalancePoint::new(t, tolerance))
        })
        .collect())
}

/// Evaluates every `(point, seed)` pair with `eval`, which receives all jobs at
/// once and must return results in job order (so it may run them in
/// parallel). The global best is the minimum cut, ties broken by smaller
/// tolerance, then smaller seed, then earlier point.
pub fn run_sweep<F>(kind: SweepKind, points: &[(f64, BalancePoint)], seeds: &[u64], eval: F) -> SweepResult
where
    F: FnOnce(&[(BalancePoint, u64)]) -> Vec<Result<PartitionResult, PartitionError>>,
{
    let jobs: Vec<(BalancePoint, u64)> =
        points.iter().flat_map(|(_, bp)| seeds.iter().map(move |&s| (*bp, s))).collect();
    let mut results = eval(&jobs).into_iter();
    let mut out = SweepResult { kind, points: Vec::with_capacity(points.len()), best: None };
    for (index, &(parameter, balance)) in points.iter().enumerate() {
        let mut p = SweepPoint { index, parameter, balance, runs: Vec::new(), best: None, skipped: None };
        for &seed in seeds {
            match results.next().expect("one result per job") {
                Ok(r) if r.feasible => {
                    p.runs.push(SweepRun { seed, cutsize: Some(r.cutsize), feasible: true });
                    if p.best.is_none_or(|(c, _)| r.cutsize < c) {
                        p.best = Some((r.cutsize, seed));
                    }
                    let better = match &out.best {
                        None => true,
                        Some(b) => {
                            let bt = points[b.point].1.tolerance;
                            (r.cutsize, balance.tolerance, seed, index) < (b.cutsize, bt, b.seed, b.point)
                        }
                    };
                    if better {
                        out.best = Some(GlobalBest { point: index, seed, cutsize: r.cutsize, result: r });
                    }
                }
                Ok(_) => p.runs.push(SweepRun { seed, cutsize: None, feasible: false }),
                Err(e) => {
                    p.runs.push(SweepRun { seed, cutsize: None, feasible: false });
                    p.skipped.get_or_insert_with(|| e.to_string());
                }
            }
        }
        out.points.push(p);
    }
    out
}

fn sequential(h: &Hypergraph) -> impl FnOnce(&[(BalancePoint, u64)]) -> Vec<Result<PartitionResult, PartitionError>> + '_ {
    move |jobs| jobs.iter().map(|(bp, s)| fm_bipartition(h, bp, *s)).collect()
}

pub fn ubfactor_sweep(h: &Hypergraph, lo: f64, hi: f64, points: usize, seeds: &[u64]) -> Result<SweepResult, PartitionError> {
    let pts = ubfactor_points(lo, hi, points)?;
    Ok(run_sweep(SweepKind::Ub, &pts, seeds, sequential(h)))
}

pub fn base_balance_sweep(
    h: &Hypergraph,
    start: (f64, f64),
    points: usize,
    tolerance: f64,
    seeds: &[u64],
) -> Result<SweepResult, PartitionError> {
    let pts = base_balance_points(start, points, tolerance)?;
    Ok(run_sweep(SweepKind::Base, &pts, seeds, sequential(h)))
}
