//! Gram matrices of the torus-weight basis, grouped by weight class, with an
//! on-disk cache keyed by a content hash of the run parameters.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::toeplitz::{cholesky_with_ratio, cmat, rmat, PIVOT_THRESHOLD};
use super::{accumulate_outer, MCParams, PolyBank, SampleSet};
use crate::error::{Error, Result};
use crate::polyspaces::{q_basis, FloatPolynomial, Polynomial, WeightLabel};

/// Bumped whenever the basis construction or the file layout changes.
pub const GRAM_CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramClass {
    pub label: WeightLabel,
    pub degree: u32,
    pub polynomials: Vec<Polynomial>,
    /// `matrix[(k, l)] = ⟨p_k, p_l⟩`
    #[serde(with = "cmat")]
    pub matrix: DMatrix<Complex64>,
    #[serde(with = "rmat")]
    pub stderr: DMatrix<f64>,
    pub pivot_ratio: f64,
    pub ill_conditioned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramTable {
    pub version: u32,
    pub params: MCParams,
    pub degree_max: u32,
    pub sample_digest: String,
    pub classes: Vec<GramClass>,
    /// Largest `|⟨p, q⟩| / stderr` over pairs from distinct classes (exactly 0 in the limit).
    pub cross_class_max_ratio: f64,
    pub cross_class_pairs: usize,
    pub warnings: Vec<String>,
}

impl GramTable {
    pub fn class(&self, label: &WeightLabel) -> Option<&GramClass> {
        self.classes.iter().find(|c| &c.label == label)
    }
}

pub fn cache_key(params: &MCParams, degree_max: u32) -> String {
    let mut h = Sha256::new();
    h.update(b"gram");
    h.update(GRAM_CACHE_VERSION.to_le_bytes());
    h.update((params.n as u64).to_le_bytes());
    h.update(params.lambda().to_bits().to_le_bytes());
    h.update(degree_max.to_le_bytes());
    h.update((params.samples as u64).to_le_bytes());
    h.update(params.seed.to_le_bytes());
    h.update((params.chunk as u64).to_le_bytes());
    hex::encode(h.finalize())
}

pub fn cache_path(dir: &Path, params: &MCParams, degree_max: u32) -> PathBuf {
    dir.join(format!("gram-{}.json", &cache_key(params, degree_max)[..32]))
}

/// Gram matrices within each weight class of the q-basis up to `degree_max`.
///
/// With a cache directory, a stored table is reused only if its sample digest
/// matches the freshly drawn sample set.
pub fn gram_blocks(degree_max: u32, params: &MCParams, cache_dir: Option<&Path>) -> Result<GramTable> {
    let set = SampleSet::draw(params)?;
    let digest = set.digest();
    let path = cache_dir.map(|d| cache_path(d, params, degree_max));
    if let Some(p) = &path {
        if let Ok(text) = fs::read_to_string(p) {
            if let Ok(t) = serde_json::from_str::<GramTable>(&text) {
                if t.sample_digest == digest && t.version == GRAM_CACHE_VERSION {
                    return Ok(t);
                }
            }
        }
    }
    let table = compute(&set, degree_max, digest)?;
    if let Some(p) = &path {
        let dir = p.parent().expect("cache file has a parent");
        fs::create_dir_all(dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
        let text = serde_json::to_string(&table).map_err(|e| Error::Cache(e.to_string()))?;
        fs::write(p, text).map_err(|e| Error::Cache(format!("{}: {e}", p.display())))?;
    }
    Ok(table)
}

fn compute(set: &SampleSet, degree_max: u32, digest: String) -> Result<GramTable> {
    let n = set.n();
    let mut polys: Vec<Polynomial> = Vec::new();
    let mut labels: Vec<WeightLabel> = Vec::new();
    for m in 0..=degree_max {
        for (p, w) in q_basis(n, m) {
            polys.push(p);
            labels.push(w);
        }
    }
    let floats: Vec<FloatPolynomial> = polys.iter().map(Polynomial::to_float).collect();
    let bank = PolyBank::new(n, &floats)?;
    let dim = bank.len();
    let moments = accumulate_outer(set, dim, |z, e| {
        bank.eval(z, e);
        Ok(Complex64::new(1.0, 0.0))
    })?;
    let full = moments.mean.transpose();
    let full_err = moments.stderr.transpose();

    let mut order: Vec<WeightLabel> = labels.clone();
    order.sort_by(|a, b| (-a.so2_weight, &a.torus_weight).cmp(&(-b.so2_weight, &b.torus_weight)));
    order.dedup();
    let mut classes = Vec::new();
    let mut warnings = Vec::new();
    for label in order {
        let idx: Vec<usize> = (0..dim).filter(|&i| labels[i] == label).collect();
        let k = idx.len();
        let matrix = DMatrix::from_fn(k, k, |a, b| full[(idx[a], idx[b])]);
        let stderr = DMatrix::from_fn(k, k, |a, b| full_err[(idx[a], idx[b])]);
        let pivot_ratio = cholesky_with_ratio(&matrix).map(|(_, r)| r).unwrap_or(0.0);
        let ill = pivot_ratio < PIVOT_THRESHOLD;
        if ill {
            warnings.push(format!("ILL_CONDITIONED: class {:?} pivot ratio {pivot_ratio:e}", label));
        }
        classes.push(GramClass {
            degree: (-label.so2_weight) as u32,
            polynomials: idx.iter().map(|&i| polys[i].clone()).collect(),
            label,
            matrix,
            stderr,
            pivot_ratio,
            ill_conditioned: ill,
        });
    }
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for i in 0..dim {
        for j in 0..i {
            if labels[i] != labels[j] {
                pairs += 1;
                let s = full_err[(i, j)];
                let v = full[(i, j)].norm();
                worst = worst.max(if s > 0.0 { v / s } else if v == 0.0 { 0.0 } else { f64::INFINITY });
            }
        }
    }
    Ok(GramTable {
        version: GRAM_CACHE_VERSION,
        params: *set.params(),
        degree_max,
        sample_digest: digest,
        classes,
        cross_class_max_ratio: worst,
        cross_class_pairs: pairs,
        warnings,
    })
}
