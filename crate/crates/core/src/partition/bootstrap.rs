//! Bootstrapped expected minimum cut: the mean, over resamples drawn with
//! replacement, of each resample's minimum.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PartitionError;

/// Exact value `sum_of_minima / resamples`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedMin {
    pub sum_of_minima: u128,
    pub resamples: u64,
}

impl ExpectedMin {
    pub fn to_f64(self) -> f64 {
        self.sum_of_minima as f64 / self.resamples as f64
    }

    /// Exact comparison with `num / den`.
    pub fn cmp_ratio(self, num: u128, den: u128) -> core::cmp::Ordering {
        (self.sum_of_minima * den).cmp(&(num * self.resamples as u128))
    }
}

/// Draws indices with `ChaCha8Rng::seed_from_u64(rng_seed)` and
/// `gen_range(0..n as u64)`, `resample_size` per resample.
pub fn expected_min_cutsize(
    samples: &[u64],
    resample_size: usize,
    resamples: u64,
    rng_seed: u64,
) -> Result<ExpectedMin, PartitionError> {
    if samples.is_empty() {
        return Err(PartitionError::EmptySamples(0));
    }
    if resample_size == 0 || resamples == 0 {
        return Err(PartitionError::BadSweep("resample size and count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = samples.len() as u64;
    let mut sum: u128 = 0;
    for _ in 0..resamples {
        let mut min = u64::MAX;
        for _ in 0..resample_size {
            min = min.min(samples[rng.gen_range(0..n) as usize]);
        }
        sum += min as u128;
    }
    Ok(ExpectedMin { sum_of_minima: sum, resamples })
}

/// One statistic per sweep point; point `k` uses seed `rng_seed + k`.
pub fn expected_min_per_point(
    cuts_per_point: &[Vec<u64>],
    resample_size: usize,
    resamples: u64,
    rng_seed: u64,
) -> Result<Vec<ExpectedMin>, PartitionError> {
    cuts_per_point
        .iter()
        .enumerate()
        .map(|(k, cuts)| {
            expected_min_cutsize(cuts, resample_size, resamples, rng_seed.wrapping_add(k as u64)).map_err(|e| match e {
                PartitionError::EmptySamples(_) => PartitionError::EmptySamples(k),
                e => e,
            })
        })
        .collect()
}
