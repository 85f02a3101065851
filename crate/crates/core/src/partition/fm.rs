//! Fiduccia-Mattheyses refinement with gain buckets and best-prefix rollback.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{cutsize, side_weights, BalancePoint, Hypergraph, PartitionError, PartitionResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FmConfig {
    /// Independent starts per call, each with its own seeded initial split.
    pub starts: usize,
    pub max_passes: usize,
}

impl FmConfig {
    pub fn for_size(vertices: usize) -> Self {
        let starts = match vertices {
            0..=256 => 24,
            257..=4096 => 8,
            _ => 3,
        };
        FmConfig { starts, max_passes: 32 }
    }
}

/// Min-cut bipartition honoring `bp` and fixed vertices; deterministic in `seed`.
pub fn fm_bipartition(h: &Hypergraph, bp: &BalancePoint, seed: u64) -> Result<PartitionResult, PartitionError> {
    fm_bipartition_with(h, bp, seed, &FmConfig::for_size(h.vertices.len()))
}

pub fn fm_bipartition_with(
    h: &Hypergraph,
    bp: &BalancePoint,
    seed: u64,
    cfg: &FmConfig,
) -> Result<PartitionResult, PartitionError> {
    bp.check()?;
    let total = h.total_weight();
    let infeasible = || {
        let w = total as f64;
        PartitionError::InfeasibleBalance {
            lo: libm::ceil(((bp.target.0 - bp.tolerance) * w).max(0.0)) as u64,
            hi: libm::floor(((bp.target.0 + bp.tolerance) * w).max(0.0)) as u64,
            total,
        }
    };
    let (lo, hi) = bp.window(total).ok_or_else(infeasible)?;
    let inc = h.incidence();
    let slack = h.vertices.iter().filter(|v| v.fixed.is_none()).map(|v| v.weight).max().unwrap_or(0);
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(u64, Vec<u8>)> = None;
    let mut initial_cutsize = None;
    let mut fallback: Option<Option<Vec<u8>>> = None;

    for _ in 0..cfg.starts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds.next_u64());
        let side = match initial_assignment(h, lo, hi, &mut rng) {
            Some(s) => s,
            None => match fallback.get_or_insert_with(|| exhaustive_feasible(h, lo, hi)) {
                Some(s) => s.clone(),
                None => return Err(infeasible()),
            },
        };
        let tiebreak: Vec<u64> = (0..h.vertices.len()).map(|_| rng.next_u64()).collect();
        let mut state = State::new(h, &inc, side, lo, hi, slack);
        initial_cutsize.get_or_insert(state.cut);
        for _ in 0..cfg.max_passes {
            if !state.pass(&tiebreak) {
                break;
            }
        }
        if best.as_ref().is_none_or(|(c, _)| state.cut < *c) {
            best = Some((state.cut, state.side));
        }
    }

    let (cut, side) = best.ok_or_else(infeasible)?;
    debug_assert_eq!(cut, cutsize(h, &side));
    let sw = side_weights(h, &side);
    Ok(PartitionResult {
        feasible: bp.is_feasible(sw[0], total),
        side,
        cutsize: cut,
        balance: *bp,
        seed,
        side_weights: sw,
        initial_cutsize: initial_cutsize.unwrap_or(cut),
    })
}

/// Fixed vertices first, then free vertices in random order fill side 0 up to
/// the window center; a repair phase moves the largest fitting vertices
/// across when the fill lands outside the window.
fn initial_assignment(h: &Hypergraph, lo: u64, hi: u64, rng: &mut ChaCha8Rng) -> Option<Vec<u8>> {
    let n = h.vertices.len();
    let mut side = vec![1u8; n];
    let mut w0 = 0u64;
    let mut free = Vec::new();
    for (i, v) in h.vertices.iter().enumerate() {
        match v.fixed {
            Some(s) => {
                side[i] = s;
                if s == 0 {
                    w0 += v.weight;
                }
            }
            None => free.push(i),
        }
    }
    free.shuffle(rng);
    let center = lo + (hi - lo) / 2;
    for &i in &free {
        let w = h.vertices[i].weight;
        if w0 + w <= center {
            side[i] = 0;
            w0 += w;
        }
    }
    if w0 < lo || w0 > hi {
        let mut by_weight = free.clone();
        by_weight.sort_by_key(|&i| core::cmp::Reverse(h.vertices[i].weight));
        for &i in &by_weight {
            let w = h.vertices[i].weight;
            if w0 < lo && side[i] == 1 && w0 + w <= hi {
                side[i] = 0;
                w0 += w;
            } else if w0 > hi && side[i] == 0 && w0 - w >= lo {
                side[i] = 1;
                w0 -= w;
            }
        }
    }
    (lo..=hi).contains(&w0).then_some(side)
}

/// Any balanced assignment by enumeration over free vertices, for small graphs
/// where the greedy fill fails.
fn exhaustive_feasible(h: &Hypergraph, lo: u64, hi: u64) -> Option<Vec<u8>> {
    let free: Vec<usize> = (0..h.vertices.len()).filter(|&i| h.vertices[i].fixed.is_none()).collect();
    if free.len() > 22 {
        return None;
    }
    let base: u64 = h.vertices.iter().filter(|v| v.fixed == Some(0)).map(|v| v.weight).sum();
    for mask in 0u32..(1u32 << free.len()) {
        let w0 = base
            + free
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| h.vertices[i].weight)
                .sum::<u64>();
        if (lo..=hi).contains(&w0) {
            let mut side: Vec<u8> = h.vertices.iter().map(|v| v.fixed.unwrap_or(1)).collect();
            for (b, &i) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    side[i] = 0;
                }
            }
            return Some(side);
        }
    }
    None
}

struct State<'a> {
    h: &'a Hypergraph,
    inc: &'a [Vec<u32>],
    side: Vec<u8>,
    w0: u64,
    cut: u64,
    lo: u64,
    hi: u64,
    slack: u64,
}

impl<'a> State<'a> {
    fn new(h: &'a Hypergraph, inc: &'a [Vec<u32>], side: Vec<u8>, lo: u64, hi: u64, slack: u64) -> Self {
        let w0 = side_weights(h, &side)[0];
        let cut = cutsize(h, &side);
        State { h, inc, side, w0, cut, lo, hi, slack }
    }

    /// One FM pass. Moves may leave the balance window by at most one vertex
    /// weight; only in-window prefixes are eligible as the kept result.
    /// Returns whether the cut strictly improved.
    fn pass(&mut self, tiebreak: &[u64]) -> bool {
        let h = self.h;
        let n = h.vertices.len();
        let mut count: Vec<[u32; 2]> = h
            .edges
            .iter()
            .map(|e| {
                let mut c = [0u32; 2];
                for &v in &e.vertices {
                    c[self.side[v as usize] as usize] += 1;
                }
                c
            })
            .collect();
        let mut locked: Vec<bool> = h.vertices.iter().map(|v| v.fixed.is_some()).collect();
        let mut gain = vec![0i64; n];
        for v in 0..n {
            if locked[v] {
                continue;
            }
            let from = self.side[v] as usize;
            for &e in &self.inc[v] {
                let w = h.edges[e as usize].weight as i64;
                let c = count[e as usize];
                if c[from] == 1 {
                    gain[v] += w;
                }
                if c[1 - from] == 0 {
                    gain[v] -= w;
                }
            }
        }
        let mut buckets: [BTreeSet<(i64, u64, u32)>; 2] = [BTreeSet::new(), BTreeSet::new()];
        for v in 0..n {
            if !locked[v] {
                buckets[self.side[v] as usize].insert((gain[v], tiebreak[v], v as u32));
            }
        }

        let rlo = self.lo.saturating_sub(self.slack);
        let rhi = self.hi.saturating_add(self.slack);
        let center = self.lo + (self.hi - self.lo) / 2;
        let start_cut = self.cut;
        let mut cur = self.cut as i64;
        let mut best_cut = self.cut;
        let mut best_len = 0usize;
        let mut moves: Vec<u32> = Vec::new();

        loop {
            let w0 = self.w0;
            let pick = |from: usize| -> Option<(i64, u32)> {
                buckets[from]
                    .iter()
                    .rev()
                    .find(|&&(_, _, v)| {
                        let w = h.vertices[v as usize].weight;
                        if from == 0 {
                            w0 >= w && w0 - w >= rlo
                        } else {
                            w0 + w <= rhi
                        }
                    })
                    .map(|&(g, _, v)| (g, v))
            };
            let (c0, c1) = (pick(0), pick(1));
            let chosen = match (c0, c1) {
                (None, None) => break,
                (Some(a), None) => (a, 0usize),
                (None, Some(b)) => (b, 1usize),
                (Some(a), Some(b)) => {
                    if a.0 != b.0 {
                        if a.0 > b.0 { (a, 0) } else { (b, 1) }
                    } else {
                        let da = (w0 - h.vertices[a.1 as usize].weight).abs_diff(center);
                        let db = (w0 + h.vertices[b.1 as usize].weight).abs_diff(center);
                        if db < da { (b, 1) } else { (a, 0) }
                    }
                }
            };
            let ((g, v), from) = chosen;
            let to = 1 - from;
            let vi = v as usize;
            buckets[from].remove(&(g, tiebreak[vi], v));
            locked[vi] = true;

            let adjust = |u: u32, delta: i64, gain: &mut Vec<i64>, buckets: &mut [BTreeSet<(i64, u64, u32)>; 2], side: &[u8]| {
                let ui = u as usize;
                let s = side[ui] as usize;
                buckets[s].remove(&(gain[ui], tiebreak[ui], u));
                gain[ui] += delta;
                buckets[s].insert((gain[ui], tiebreak[ui], u));
            };

            for &e in &self.inc[vi] {
                let edge = &h.edges[e as usize];
                let w = edge.weight as i64;
                let c = count[e as usize];
                if c[to] == 0 {
                    for &u in &edge.vertices {
                        if !locked[u as usize] {
                            adjust(u, w, &mut gain, &mut buckets, &self.side);
                        }
                    }
                } else if c[to] == 1 {
                    for &u in &edge.vertices {
                        if !locked[u as usize] && self.side[u as usize] as usize == to {
                            adjust(u, -w, &mut gain, &mut buckets, &self.side);
                        }
                    }
                }
                let c = &mut count[e as usize];
                c[from] -= 1;
                c[to] += 1;
                let c = *c;
                if c[from] == 0 {
                    for &u in &edge.vertices {
                        if !locked[u as usize] {
                            adjust(u, -w, &mut gain, &mut buckets, &self.side);
                        }
                    }
                } else if c[from] == 1 {
                    for &u in &edge.vertices {
                        if !locked[u as usize] && self.side[u as usize] as usize == from {
                            adjust(u, w, &mut gain, &mut buckets, &self.side);
                        }
                    }
                }
            }
            self.side[vi] = to as u8;
            let wv = h.vertices[vi].weight;
            if from == 0 {
                self.w0 -= wv;
            } else {
                self.w0 += wv;
            }
            cur -= g;
            moves.push(v);
            if (self.lo..=self.hi).contains(&self.w0) && (cur as u64) < best_cut {
                best_cut = cur as u64;
                best_len = moves.len();
            }
        }

        for &v in moves[best_len..].iter().rev() {
            let vi = v as usize;
            let wv = h.vertices[vi].weight;
            if self.side[vi] == 0 {
                self.w0 -= wv;
                self.side[vi] = 1;
            } else {
                self.w0 += wv;
                self.side[vi] = 0;
            }
        }
        self.cut = best_cut;
        best_cut < start_cut
    }
}
