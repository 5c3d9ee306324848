//! Monte Carlo over the weighted measures `v_λ = c_λ Δ^{λ−n} dv` on the domain.
//!
//! All estimators are self-normalizing (ratios of weighted sums), so `c_λ` never
//! appears. Samples are uniform in the domain by rejection from the unit ball of
//! `R^{2n}`; each carries the weight `Δ(z)^{λ−n}`.

mod accum;
mod basis;
mod gram;
mod toeplitz;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use basis::BasisBlock;
pub use gram::{gram_blocks, GramClass, GramTable, GRAM_CACHE_VERSION};
pub use toeplitz::{
    commutator_norm, commutator_of, equivariance_check, equivariance_in, toeplitz_truncation, EquivarianceReport, OperatorMeta, TruncatedOperator, TruncationContext,
};

pub(crate) use accum::{accumulate_blocks, accumulate_outer};
pub(crate) use basis::PolyBank;

use crate::error::{Error, Result};
use crate::geometry::{delta, in_domain, DomainPoint, WeightParam};
use crate::mc::{map_chunks, CSum, Sum, DEFAULT_CHUNK};
use crate::polyspaces::{highest_weight_vector, BlockLabel};
use crate::spectral::ratio_estimate;
use crate::symbols::{eval_symbol_raw, SymbolSpec};

/// Largest n the rejection sampler is meant for; beyond it the acceptance rate
/// collapses. Exceeding it requires `force`.
pub const MAX_SUPPORTED_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCParams {
    pub n: usize,
    pub lambda: WeightParam,
    pub samples: usize,
    pub seed: u64,
    pub chunk: usize,
    #[serde(default)]
    pub force: bool,
}

impl MCParams {
    pub fn new(n: usize, lambda: f64, samples: usize, seed: u64) -> Result<Self> {
        let lambda = WeightParam::new(n, lambda)?;
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(Self { n, lambda, samples, seed, chunk: DEFAULT_CHUNK, force: false })
    }

    pub fn with_chunk(mut self, chunk: usize) -> Self {
        self.chunk = chunk.max(1);
        self
    }

    pub fn with_force(mut self, force: bool) -> Self {
        self.force = force;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda.lambda()
    }

    /// Δ^{2(λ−n)} is integrable only for λ > n − 1/2; below that the weights have
    /// infinite variance and every standard error is meaningless.
    pub fn finite_variance(&self) -> bool {
        self.lambda() > self.n as f64 - 0.5
    }

    pub fn check(&self) -> Result<()> {
        if !self.force && !self.finite_variance() {
            return Err(Error::UnsupportedLambda {
                lambda: self.lambda(),
                n: self.n,
                reason: format!("Monte Carlo weights have infinite variance for lambda <= {} (use force to override)", self.n as f64 - 0.5),
            });
        }
        if !self.force && self.n > MAX_SUPPORTED_N {
            return Err(Error::InvalidArgument(format!(
                "n = {} exceeds the sampler envelope n <= {MAX_SUPPORTED_N} (use force to override)",
                self.n
            )));
        }
        Ok(())
    }
}

/// A drawn sample set: points (row-major, `n` per point) and density weights.
#[derive(Debug, Clone)]
pub struct SampleSet {
    params: MCParams,
    points: Vec<Complex64>,
    weights: Vec<f64>,
    attempts: u64,
}

impl SampleSet {
    pub fn draw(params: &MCParams) -> Result<Self> {
        params.check()?;
        let n = params.n;
        let exponent = params.lambda.density_exponent();
        let cap = 1u64 << (n + 6).min(40);
        let chunks = map_chunks(params.samples, params.chunk, params.seed, |_, rng, len| {
            let mut pts = Vec::with_capacity(len * n);
            let mut attempts = 0u64;
            let mut accepted = 0;
            let mut z = vec![Complex64::default(); n];
            let limit = cap * len as u64;
            while accepted < len {
                if attempts >= limit {
                    return Err(Error::SamplingStall { attempts });
                }
                attempts += 1;
                let mut norm2 = 0.0;
                for c in z.iter_mut() {
                    *c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    norm2 += c.norm_sqr();
                }
                let scale = rng.random::<f64>().powf(1.0 / (2 * n) as f64) / norm2.sqrt();
                for c in z.iter_mut() {
                    *c *= scale;
                }
                if in_domain(&z) {
                    pts.extend_from_slice(&z);
                    accepted += 1;
                }
            }
            Ok((pts, attempts))
        });
        let mut points = Vec::with_capacity(params.samples * n);
        let mut attempts = 0;
        for c in chunks {
            let (p, a) = c?;
            points.extend(p);
            attempts += a;
        }
        let weights = points.chunks_exact(n).map(|z| delta(z).powf(exponent)).collect();
        Ok(Self { params: *params, points, weights, attempts })
    }

    pub fn params(&self) -> &MCParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.points[i * self.n()..(i + 1) * self.n()]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn points(&self) -> impl Iterator<Item = &[Complex64]> {
        self.points.chunks_exact(self.n())
    }

    pub fn acceptance_ratio(&self) -> f64 {
        self.len() as f64 / self.attempts as f64
    }

    /// Index ranges of the reduction chunks, in fold order.
    pub(crate) fn chunk_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let c = self.params.chunk;
        (0..self.len().div_ceil(c)).map(|k| k * c..((k + 1) * c).min(self.len())).collect()
    }

    /// SHA-256 over the parameters and the exact bits of every point.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n() as u64).to_le_bytes());
        h.update(self.params.lambda().to_bits().to_le_bytes());
        h.update((self.len() as u64).to_le_bytes());
        h.update(self.params.seed.to_le_bytes());
        h.update((self.params.chunk as u64).to_le_bytes());
        for z in &self.points {
            h.update(z.re.to_bits().to_le_bytes());
            h.update(z.im.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Self-normalized `∫ h dv_λ` with a delta-method standard error.
    pub fn weighted_mean<F>(&self, h: F) -> Result<(Complex64, f64)>
    where
        F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
    {
        let values = self.map_points(&h)?;
        let mut sw = Sum::default();
        let mut swh = CSum::default();
        for (w, v) in self.weights.iter().zip(&values) {
            sw.add(*w);
            swh.add(*v * *w);
        }
        let total = sw.value();
        let mean = swh.value() / total;
        let mut var = Sum::default();
        for (w, v) in self.weights.iter().zip(&values) {
            var.add(w * w * (*v - mean).norm_sqr());
        }
        Ok((mean, var.value().sqrt() / total))
    }

    pub(crate) fn map_points<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&[Complex64]) -> Result<T> + Sync,
    {
        use rayon::prelude::*;
        let parts: Vec<Result<Vec<T>>> =
            self.chunk_ranges().into_par_iter().map(|r| r.map(|i| f(self.point(i))).collect()).collect();
        let mut out = Vec::with_capacity(self.len());
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }
}

pub fn sample_domain(params: &MCParams) -> Result<Vec<DomainPoint>> {
    let set = SampleSet::draw(params)?;
    set.points().map(|z| DomainPoint::new(z.to_vec())).collect()
}

pub fn weighted_mean<F>(h: F, params: &MCParams) -> Result<(Complex64, f64)>
where
    F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
{
    SampleSet::draw(params)?.weighted_mean(h)
}

/// `⟨p, q⟩_λ = ∫ p conj(q) dv_λ`.
pub fn inner_product(p: &crate::polyspaces::Polynomial, q: &crate::polyspaces::Polynomial, set: &SampleSet) -> Result<(Complex64, f64)> {
    let bank = PolyBank::new(set.n(), &[p.to_float(), q.to_float()])?;
    set.weighted_mean(|z| {
        let mut v = [Complex64::default(); 2];
        bank.eval(z, &mut v);
        Ok(v[0] * v[1].conj())
    })
}

/// `⟨a h, h⟩ / ⟨h, h⟩` for the highest weight vector `h` of each block, all on one
/// sample set.
pub fn rayleigh_eigenvalues(spec: &SymbolSpec, blocks: &[BlockLabel], set: &SampleSet) -> Result<Vec<(f64, f64)>> {
    if !spec.is_invariant() {
        return Err(Error::Kind("Rayleigh eigenvalues need an invariant or moment symbol".into()));
    }
    let n = set.n();
    let hs: Vec<_> = blocks.iter().map(|b| highest_weight_vector(n, b.k1, b.k2).to_float()).collect();
    let bank = PolyBank::new(n, &hs)?;
    let m = blocks.len();
    let rows = set.map_points(|z| {
        let a = eval_symbol_raw(spec, z)?.re;
        let mut v = vec![Complex64::default(); m];
        bank.eval(z, &mut v);
        Ok((a, v.iter().map(|c| c.norm_sqr()).collect::<Vec<f64>>()))
    })?;
    Ok((0..m)
        .map(|b| {
            let pairs: Vec<(f64, f64)> = rows.iter().enumerate().map(|(i, (a, h2))| (set.weight(i) * h2[b], *a)).collect();
            ratio_estimate(&pairs)
        })
        .collect())
}

pub fn rayleigh_eigenvalue(spec: &SymbolSpec, k1: u32, k2: u32, params: &MCParams) -> Result<(f64, f64)> {
    let set = SampleSet::draw(params)?;
    Ok(rayleigh_eigenvalues(spec, &[BlockLabel { k1, k2 }], &set)?[0])
}
