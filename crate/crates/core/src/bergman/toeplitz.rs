//! Finite sections of Toeplitz operators in the orthonormalized block basis.
//!
//! Matrix convention: `entries[(i, j)] = ⟨a e_j, e_i⟩`, so `T e_j = Σ_i entries[(i, j)] e_i`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{accumulate_blocks, accumulate_outer, BasisBlock, MCParams, PolyBank, SampleSet};
use crate::actions::{act, GroupElement};
use crate::error::{Error, Result};
use crate::polyspaces::{act_on_poly, blocks_up_to, monomials, FloatPolynomial, MultiIndex, Polynomial};
use crate::symbols::{eval_symbol_raw, SymbolSpec};

pub const PIVOT_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub n: usize,
    pub lambda: f64,
    pub degree_max: u32,
    pub samples: usize,
    pub seed: u64,
    pub chunk: usize,
    pub symbol: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncatedOperator {
    pub blocks: Vec<BasisBlock>,
    #[serde(with = "cmat")]
    pub entries: DMatrix<Complex64>,
    #[serde(with = "rmat")]
    pub stderr: DMatrix<f64>,
    pub meta: OperatorMeta,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Block index of every basis position.
    pub fn block_of(&self) -> Vec<usize> {
        self.blocks.iter().enumerate().flat_map(|(b, blk)| std::iter::repeat_n(b, blk.len())).collect()
    }

    /// Largest `|entry| / stderr` over entries coupling distinct blocks.
    pub fn off_block_max_ratio(&self) -> f64 {
        let owner = self.block_of();
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if owner[i] != owner[j] {
                    worst = worst.max(ratio(self.entries[(i, j)].norm(), self.stderr[(i, j)]));
                }
            }
        }
        worst
    }

    /// Largest `|entry − δ_ij| / stderr`, the deviation from the identity.
    pub fn identity_max_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(ratio((self.entries[(i, j)] - target).norm(), self.stderr[(i, j)]));
            }
        }
        worst
    }

    /// Largest `|M_ij − conj(M_ji)| / sqrt(σ_ij² + σ_ji²)`.
    pub fn hermitian_max_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim() {
            for j in 0..i {
                let d = (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm();
                worst = worst.max(ratio(d, self.stderr[(i, j)].hypot(self.stderr[(j, i)])));
            }
        }
        worst
    }

    /// Per block: mean diagonal entry, its spread (max |d − mean| / stderr).
    pub fn block_diagonal_means(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut at = 0;
        for b in &self.blocks {
            let idx = at..at + b.len();
            at += b.len();
            let mean = idx.clone().map(|i| self.entries[(i, i)].re).sum::<f64>() / b.len() as f64;
            let spread = idx.map(|i| ratio((self.entries[(i, i)].re - mean).abs(), self.stderr[(i, i)])).fold(0.0, f64::max);
            out.push((mean, spread));
        }
        out
    }
}

fn ratio(v: f64, s: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else if s == 0.0 {
        f64::INFINITY
    } else {
        v / s
    }
}

/// Basis, sample set and per-block Cholesky factors shared by every operator
/// built at one `(params, degree_max)`.
pub struct TruncationContext {
    set: SampleSet,
    degree_max: u32,
    blocks: Vec<BasisBlock>,
    offsets: Vec<usize>,
    bank: PolyBank,
    chol: Vec<DMatrix<Complex64>>,
    inv: Vec<DMatrix<Complex64>>,
}

impl TruncationContext {
    pub fn new(params: &MCParams, degree_max: u32) -> Result<Self> {
        Self::with_samples(SampleSet::draw(params)?, degree_max)
    }

    pub fn with_samples(set: SampleSet, degree_max: u32) -> Result<Self> {
        let n = set.n();
        let blocks: Vec<BasisBlock> = blocks_up_to(degree_max).into_iter().map(|l| BasisBlock::new(n, l)).collect();
        let mut offsets = vec![0];
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.len());
        }
        let floats: Vec<FloatPolynomial> = blocks.iter().flat_map(|b| b.polynomials.iter().map(Polynomial::to_float)).collect();
        let bank = PolyBank::new(n, &floats)?;
        let dim = bank.len();

        let ranges: Vec<_> = offsets.windows(2).map(|w| w[0]..w[1]).collect();
        let grams = accumulate_blocks(&set, dim, &ranges, |z, e| {
            bank.eval(z, e);
            Ok(Complex64::new(1.0, 0.0))
        })?;
        let mut chol = Vec::with_capacity(blocks.len());
        let mut inv = Vec::with_capacity(blocks.len());
        for moments in grams {
            // accumulator gives ⟨p_l, p_k⟩ at (k, l); the Gram matrix ⟨p_k, p_l⟩ is its transpose
            let gram = moments.mean.transpose();
            let l = cholesky(&gram)?;
            let c = l.clone().try_inverse().ok_or_else(|| Error::SolveFailure("singular Cholesky factor".into()))?;
            chol.push(l);
            inv.push(c);
        }
        Ok(Self { set, degree_max, blocks, offsets, bank, chol, inv })
    }

    pub fn samples(&self) -> &SampleSet {
        &self.set
    }

    pub fn blocks(&self) -> &[BasisBlock] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.bank.len()
    }

    fn orthonormal_values(&self, z: &[Complex64], raw: &mut [Complex64], e: &mut [Complex64]) {
        self.bank.eval(z, raw);
        for (b, c) in self.inv.iter().enumerate() {
            let lo = self.offsets[b];
            let m = c.nrows();
            for i in 0..m {
                let mut s = Complex64::default();
                for k in 0..=i {
                    s += c[(i, k)] * raw[lo + k];
                }
                e[lo + i] = s;
            }
        }
    }

    /// Section of the operator whose symbol value at `z` is `symbol(z)`.
    pub fn operator_with<F>(&self, symbol: F, label: String) -> Result<TruncatedOperator>
    where
        F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
    {
        let dim = self.dim();
        let moments = accumulate_outer(&self.set, dim, |z, e| {
            let mut raw = vec![Complex64::default(); dim];
            self.orthonormal_values(z, &mut raw, e);
            symbol(z)
        })?;
        let p = self.set.params();
        Ok(TruncatedOperator {
            blocks: self.blocks.clone(),
            entries: moments.mean,
            stderr: moments.stderr,
            meta: OperatorMeta {
                n: p.n,
                lambda: p.lambda(),
                degree_max: self.degree_max,
                samples: p.samples,
                seed: p.seed,
                chunk: p.chunk,
                symbol: label,
            },
        })
    }

    pub fn operator(&self, spec: &SymbolSpec) -> Result<TruncatedOperator> {
        check_dims(spec, self.set.n())?;
        self.operator_with(|z| eval_symbol_raw(spec, z), spec.to_string())
    }

    /// Matrix of `π(g)` on the orthonormalized basis: `π(g) e_j = Σ_m U[(m, j)] e_m`.
    pub fn representation_matrix(&self, g: &GroupElement) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        let mut u = DMatrix::<Complex64>::zeros(dim, dim);
        for (b, blk) in self.blocks.iter().enumerate() {
            let n = self.set.n();
            let monos: Vec<MultiIndex> = monomials(n, blk.degree);
            let m = blk.len();
            let p = DMatrix::from_fn(monos.len(), m, |r, k| blk.polynomials[k].coeff(&monos[r]).to_complex());
            let mut v = DMatrix::<Complex64>::zeros(monos.len(), m);
            for k in 0..m {
                let img = act_on_poly(g, &blk.polynomials[k].to_float())?;
                for (r, a) in monos.iter().enumerate() {
                    v[(r, k)] = img.coeff(a);
                }
            }
            let r = p.svd(true, true).solve(&v, 1e-12).map_err(|e| Error::SolveFailure(e.to_string()))?;
            let ub = self.chol[b].transpose() * r * self.inv[b].transpose();
            u.view_mut((self.offsets[b], self.offsets[b]), (m, m)).copy_from(&ub);
        }
        Ok(u)
    }
}

fn check_dims(spec: &SymbolSpec, n: usize) -> Result<()> {
    if let SymbolSpec::Phase(terms) = spec {
        for t in terms {
            if t.alpha.len() != n || t.beta.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: t.alpha.len().max(t.beta.len()) });
            }
        }
    }
    Ok(())
}

/// Lower-triangular `L` with `G = L L^H`; fails with ILL_CONDITIONED when the
/// smallest squared pivot falls below `PIVOT_THRESHOLD` times the largest.
pub(crate) fn cholesky(g: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let (l, ratio) = cholesky_with_ratio(g)?;
    if ratio < PIVOT_THRESHOLD {
        return Err(Error::IllConditioned { ratio, threshold: PIVOT_THRESHOLD });
    }
    Ok(l)
}

pub(crate) fn cholesky_with_ratio(g: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, f64)> {
    let m = g.nrows();
    let mut l = DMatrix::<Complex64>::zeros(m, m);
    let mut pivots = Vec::with_capacity(m);
    for j in 0..m {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::IllConditioned { ratio: 0.0, threshold: PIVOT_THRESHOLD });
        }
        pivots.push(d);
        let djj = d.sqrt();
        l[(j, j)] = Complex64::new(djj, 0.0);
        for i in j + 1..m {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    let max = pivots.iter().cloned().fold(0.0, f64::max);
    let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((l, if m == 0 { 1.0 } else { min / max }))
}

pub fn toeplitz_truncation(spec: &SymbolSpec, degree_max: u32, params: &MCParams) -> Result<TruncatedOperator> {
    TruncationContext::new(params, degree_max)?.operator(spec)
}

/// Frobenius norm of `[A, B]` and the first-order noise scale
/// `sqrt(Σ_ij Var([A, B]_ij))` from independent entry errors.
pub fn commutator_of(a: &TruncatedOperator, b: &TruncatedOperator) -> (f64, f64) {
    let ma = &a.entries;
    let mb = &b.entries;
    let c = ma * mb - mb * ma;
    let va = a.stderr.map(|s| s * s);
    let vb = b.stderr.map(|s| s * s);
    let abs2 = |m: &DMatrix<Complex64>| m.map(|z| z.norm_sqr());
    let (aa, bb) = (abs2(ma), abs2(mb));
    let var = &va * &bb + &aa * &vb + &vb * &aa + &bb * &va;
    (c.norm(), var.sum().sqrt())
}

pub fn commutator_norm(spec_a: &SymbolSpec, spec_b: &SymbolSpec, degree_max: u32, params: &MCParams) -> Result<(f64, f64)> {
    let ctx = TruncationContext::new(params, degree_max)?;
    let a = ctx.operator(spec_a)?;
    if spec_a == spec_b {
        return Ok(commutator_of(&a, &a));
    }
    let b = ctx.operator(spec_b)?;
    Ok(commutator_of(&a, &b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    /// Largest `|T_{a∘g⁻¹} − U T_a U⁻¹|` entry.
    pub max_discrepancy: f64,
    /// Largest entrywise discrepancy in units of its propagated standard error.
    pub max_ratio: f64,
    /// Largest propagated entry standard error.
    pub noise: f64,
}

pub fn equivariance_check(spec: &SymbolSpec, g: &GroupElement, degree_max: u32, params: &MCParams) -> Result<EquivarianceReport> {
    let ctx = TruncationContext::new(params, degree_max)?;
    equivariance_in(&ctx, spec, g)
}

pub fn equivariance_in(ctx: &TruncationContext, spec: &SymbolSpec, g: &GroupElement) -> Result<EquivarianceReport> {
    check_dims(spec, ctx.samples().n())?;
    let base = ctx.operator(spec)?;
    let ginv = g.inverse();
    let moved = ctx.operator_with(|z| eval_symbol_raw(spec, &act(&ginv, z)?), format!("{spec} after g^-1"))?;
    let u = ctx.representation_matrix(g)?;
    let uinv = u.clone().try_inverse().ok_or_else(|| Error::SolveFailure("representation matrix is singular".into()))?;
    let conj = &u * &base.entries * &uinv;
    let var_conj = u.map(|z| z.norm_sqr()) * base.stderr.map(|s| s * s) * uinv.map(|z| z.norm_sqr());
    let mut report = EquivarianceReport { max_discrepancy: 0.0, max_ratio: 0.0, noise: 0.0 };
    for i in 0..ctx.dim() {
        for j in 0..ctx.dim() {
            let d = (moved.entries[(i, j)] - conj[(i, j)]).norm();
            let s = (moved.stderr[(i, j)].powi(2) + var_conj[(i, j)]).sqrt();
            report.max_discrepancy = report.max_discrepancy.max(d);
            report.max_ratio = report.max_ratio.max(ratio(d, s));
            report.noise = report.noise.max(s);
        }
    }
    Ok(report)
}

/// Complex matrices as row lists of `[re, im]`.
pub(crate) mod cmat {
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<Complex64>, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
    }
}

pub(crate) mod rmat {
    use nalgebra::DMatrix;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
    }
}
