//! Seeded limited-independence hashing over cell ids.
//!
//! A degree-D polynomial with random coefficients over the Mersenne prime
//! field GF(2^61 - 1) gives D-wise independence. Cell coordinate tuples are
//! first folded into a field element by a fixed, seed-independent mixer, so
//! the polynomial sees a scalar input.
//!
//! Sampling at rate 1/R (R a power of two) tests `eval(cell) mod R == 0`.
//! Because R | 2R, the rate-1/(2R) sample of any cell population is a subset
//! of its rate-1/R sample; the samplers rely on that nesting when they halve
//! their sample rate.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::grid::CellId;

/// 2^61 - 1.
const FIELD_PRIME: u64 = (1 << 61) - 1;

/// Folds `x * y mod (2^61 - 1)` using the Mersenne reduction.
#[inline]
fn mul_mod(x: u64, y: u64) -> u64 {
    let t = x as u128 * y as u128;
    let folded = (t >> 61) as u64 + (t as u64 & FIELD_PRIME);
    if folded >= FIELD_PRIME {
        folded - FIELD_PRIME
    } else {
        folded
    }
}

#[inline]
fn add_mod(x: u64, y: u64) -> u64 {
    let s = x + y; // both < 2^61, no overflow
    if s >= FIELD_PRIME {
        s - FIELD_PRIME
    } else {
        s
    }
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Fixed mixer from a coordinate tuple to a field element. Seed-independent
/// so that changing the polynomial seed never re-buckets cells.
#[inline]
fn mix_cell(coords: &[i64]) -> u64 {
    let mut h = 0x5bf0_3635_16f5_a2c5u64;
    for &c in coords {
        h = splitmix64(h ^ c as u64);
    }
    h % FIELD_PRIME
}

/// Polynomial hash over cell ids with power-of-two subsampling.
#[derive(Debug, Clone)]
pub struct HashSampler {
    seed: u64,
    degree: usize,
    range_bits: u32,
    coeffs: Vec<u64>,
}

impl HashSampler {
    /// Creates a hash of the given polynomial degree (independence parameter)
    /// whose output covers `[0, 2^range_bits)`.
    pub fn new(seed: u64, degree: usize, range_bits: u32) -> Result<Self, Error> {
        if degree < 2 {
            return Err(Error::Config("hash degree must be at least 2"));
        }
        if range_bits == 0 || range_bits > 62 {
            return Err(Error::Config("range_bits must lie in 1..=62"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..degree)
            .map(|_| loop {
                // rejection sampling keeps the coefficients uniform in the field
                let v = rng.next_u64() >> 3;
                if v < FIELD_PRIME {
                    break v;
                }
            })
            .collect();
        Ok(Self { seed, degree, range_bits, coeffs })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn range_bits(&self) -> u32 {
        self.range_bits
    }

    /// Hash value of a cell, an integer in `[0, 2^range_bits)`.
    pub fn eval(&self, cell: &CellId) -> u64 {
        self.eval_coords(&cell.coords)
    }

    pub fn eval_coords(&self, coords: &[i64]) -> u64 {
        let x = mix_cell(coords);
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = add_mod(mul_mod(acc, x), c);
        }
        acc & ((1u64 << self.range_bits) - 1)
    }

    /// True when the cell is sampled at rate 1/R, i.e. `eval(cell) mod R == 0`.
    /// R must be a power of two no larger than `2^range_bits`.
    pub fn is_sampled(&self, cell: &CellId, rate_denom: u64) -> Result<bool, Error> {
        self.is_sampled_coords(&cell.coords, rate_denom)
    }

    pub fn is_sampled_coords(&self, coords: &[i64], rate_denom: u64) -> Result<bool, Error> {
        if !rate_denom.is_power_of_two() {
            return Err(Error::Usage("sample rate denominator must be a power of two"));
        }
        if rate_denom > (1u64 << self.range_bits) {
            return Err(Error::Usage("sample rate denominator exceeds the hash range"));
        }
        Ok(self.eval_coords(coords) & (rate_denom - 1) == 0)
    }

    /// Largest level `l <= max_level` such that the cell is sampled at rate
    /// 1/2^l. Level 0 always qualifies.
    pub fn sampled_level(&self, coords: &[i64], max_level: usize) -> usize {
        let e = self.eval_coords(coords);
        (e.trailing_zeros() as usize).min(max_level)
    }
}
