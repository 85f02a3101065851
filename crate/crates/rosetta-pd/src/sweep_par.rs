//! Sweeps on a rayon pool, and their bootstrap report.

use rayon::prelude::*;
use rosetta_pd_core::num::format_ratio;
use rosetta_pd_core::partition::{
    base_balance_points, expected_min_cutsize, fm_bipartition, run_sweep, ubfactor_points, BalancePoint, ExpectedMin,
    Hypergraph, PartitionError, SweepKind, SweepResult,
};
use serde::Serialize;

pub const DEFAULT_RESAMPLE_SIZE: usize = 15;
pub const DEFAULT_RESAMPLES: u64 = 1000;

/// Same result as the sequential sweep; `(point, seed)` jobs run in parallel
/// on the current rayon pool.
pub fn par_sweep(h: &Hypergraph, kind: SweepKind, points: &[(f64, BalancePoint)], seeds: &[u64]) -> SweepResult {
    run_sweep(kind, points, seeds, |jobs| jobs.par_iter().map(|(bp, s)| fm_bipartition(h, bp, *s)).collect())
}

pub fn par_ubfactor_sweep(h: &Hypergraph, lo: f64, hi: f64, points: usize, seeds: &[u64]) -> Result<SweepResult, PartitionError> {
    Ok(par_sweep(h, SweepKind::Ub, &ubfactor_points(lo, hi, points)?, seeds))
}

pub fn par_base_balance_sweep(
    h: &Hypergraph,
    start: (f64, f64),
    points: usize,
    tolerance: f64,
    seeds: &[u64],
) -> Result<SweepResult, PartitionError> {
    Ok(par_sweep(h, SweepKind::Base, &base_balance_points(start, points, tolerance)?, seeds))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSummary {
    pub index: usize,
    pub parameter: f64,
    pub target: (f64, f64),
    pub tolerance: f64,
    pub feasible_runs: usize,
    pub best_cutsize: Option<u64>,
    pub best_seed: Option<u64>,
    pub expected_min_cutsize: Option<f64>,
    /// The statistic as an exact fraction.
    pub expected_min_exact: Option<ExpectedMin>,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub kind: SweepKind,
    pub seeds: Vec<u64>,
    pub resample_size: usize,
    pub resamples: u64,
    pub rng_seed: u64,
    pub points: Vec<PointSummary>,
    pub best_point: Option<usize>,
    pub best_seed: Option<u64>,
    pub best_cutsize: Option<u64>,
}

/// Per-point bootstrap statistic; point `k` draws with `rng_seed + k`. Points
/// without a feasible run get no statistic.
pub fn sweep_report(sweep: &SweepResult, seeds: &[u64], resample_size: usize, resamples: u64, rng_seed: u64) -> Result<SweepReport, PartitionError> {
    let samples = sweep.cut_samples();
    let mut points = Vec::with_capacity(sweep.points.len());
    for (k, p) in sweep.points.iter().enumerate() {
        let stat = if samples[k].is_empty() {
            None
        } else {
            Some(expected_min_cutsize(&samples[k], resample_size, resamples, rng_seed.wrapping_add(k as u64))?)
        };
        points.push(PointSummary {
            index: p.index,
            parameter: p.parameter,
            target: p.balance.target,
            tolerance: p.balance.tolerance,
            feasible_runs: samples[k].len(),
            best_cutsize: p.best.map(|b| b.0),
            best_seed: p.best.map(|b| b.1),
            expected_min_cutsize: stat.map(|s| s.to_f64()),
            expected_min_exact: stat,
            skipped: p.skipped.clone(),
        });
    }
    Ok(SweepReport {
        kind: sweep.kind,
        seeds: seeds.to_vec(),
        resample_size,
        resamples,
        rng_seed,
        points,
        best_point: sweep.best.as_ref().map(|b| b.point),
        best_seed: sweep.best.as_ref().map(|b| b.seed),
        best_cutsize: sweep.best.as_ref().map(|b| b.cutsize),
    })
}

/// Balance parameter against expected minimum cut, one row per point.
pub fn sweep_csv(report: &SweepReport) -> String {
    let param = match report.kind {
        SweepKind::Ub => "ubfactor",
        SweepKind::Base => "base_balance",
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([param, "expected_min_cutsize", "best_cutsize", "feasible_runs"]).expect("in-memory write");
    for p in &report.points {
        w.write_record([
            format!("{}", p.parameter),
            p.expected_min_exact.map(|e| format_ratio(e.sum_of_minima as i128, e.resamples as i128)).unwrap_or_default(),
            p.best_cutsize.map(|c| c.to_string()).unwrap_or_default(),
            p.feasible_runs.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
