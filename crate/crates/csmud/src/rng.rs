use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::constellation::Constellation;

/// Deterministic random stream used by the model and the harness.
///
/// A thin wrapper over ChaCha12 so that every draw is reproducible from a
/// 64-bit seed on any platform.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        RandomStream {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    /// One circularly-symmetric complex Gaussian CN(0, 1) draw.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Row-major `rows x cols` matrix of i.i.d. CN(0, 1) entries.
    pub fn complex_gaussian_matrix(&mut self, rows: usize, cols: usize) -> Array2<Complex64> {
        let data: Vec<Complex64> = (0..rows * cols).map(|_| self.complex_gaussian()).collect();
        Array2::from_shape_vec((rows, cols), data).expect("shape matches data length")
    }

    /// Uniform integer in `lo..=hi`.
    pub fn usize_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    /// `amount` distinct indices drawn uniformly from `0..universe`, returned
    /// in ascending order.
    pub fn distinct_sorted(&mut self, universe: usize, amount: usize) -> Vec<usize> {
        let mut idx = rand::seq::index::sample(&mut self.rng, universe, amount).into_vec();
        idx.sort_unstable();
        idx
    }

    /// Uniform draw from the constellation alphabet.
    pub fn symbol(&mut self, constellation: &Constellation) -> Complex64 {
        let i = self.rng.random_range(0..constellation.cardinality());
        constellation.symbols()[i]
    }
}

/// Per-trial seed derivation: a SplitMix64 chain over (base, lane, index).
///
/// Used by the harness so that trials are independent, reproducible, and
/// safe to evaluate in any order.
pub fn derive_seed(base: u64, lane: u64, index: u64) -> u64 {
    splitmix(splitmix(splitmix(base).wrapping_add(lane)).wrapping_add(index))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
