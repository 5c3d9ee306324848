//! Exact homogeneous polynomial algebra on `C^n`: harmonic spaces, the
//! decomposition `P^m = sum H^{k1} (z^T z)^{k2}`, torus weight bases and
//! branching multiplicities.

mod harmonic;
pub mod linalg;
mod poly;
mod rational;
mod weights;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use harmonic::{decompose, harmonic_basis, harmonic_dim, highest_weight_vector, reconstruct, Decomposer};
pub use poly::{binomial, dim_homogeneous, monomials, FloatPolynomial, MultiIndex, Polynomial};
pub use rational::{format_ratio, parse_ratio, GaussianRational};
pub use weights::{act_on_poly, q_basis, q_exponents, weight_of};

/// Torus weight `beta - alpha` together with the `SO(2)` weight `-m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeightLabel {
    pub torus_weight: Vec<i64>,
    pub so2_weight: i64,
}

/// Index of the summand `H^{k1}(C^n) (z^T z)^{k2}`.
///
/// Ordered by degree `k1 + 2 k2`, then by `k1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockLabel {
    pub k1: u32,
    pub k2: u32,
}

impl BlockLabel {
    pub fn degree(&self) -> u32 {
        self.k1 + 2 * self.k2
    }
}

impl Ord for BlockLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then(self.k1.cmp(&other.k1))
    }
}

impl PartialOrd for BlockLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All blocks with `k1 + 2 k2 <= degree_max`, in block order.
pub fn blocks_up_to(degree_max: u32) -> Vec<BlockLabel> {
    let mut v: Vec<BlockLabel> = (0..=degree_max)
        .flat_map(|k1| (0..=(degree_max - k1) / 2).map(move |k2| BlockLabel { k1, k2 }))
        .collect();
    v.sort();
    v
}

/// Multiplicity of `H^r(C^{n-1})` in `P^m(C^n)` restricted to `SO(n-1)`:
/// `floor(m/2) - floor((r + ((m+1) mod 2)) / 2) + 1`. Only defined for `n >= 4`.
pub fn branching_multiplicity(n: usize, m: u32, r: u32) -> Result<u32> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "branching multiplicities need n >= 4 (n = {n}); use the torus decomposition for n = 3"
        )));
    }
    if r > m {
        return Err(Error::InvalidArgument(format!("r = {r} exceeds m = {m}")));
    }
    let parity = (m + 1) % 2;
    Ok(m / 2 - (r + parity) / 2 + 1)
}
