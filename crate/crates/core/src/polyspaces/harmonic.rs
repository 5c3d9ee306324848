use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num::rational::BigRational;
use num::Zero;

use super::linalg::{inverse, mat_vec, nullspace, QMatrix};
use super::poly::{binomial, dim_homogeneous, monomials, MultiIndex, Polynomial};
use super::rational::GaussianRational;
use super::BlockLabel;
use crate::error::{Error, Result};

fn laplacian_matrix(n: usize, m: u32) -> QMatrix {
    let rows = monomials(n, m - 2);
    let cols = monomials(n, m);
    let index: HashMap<&MultiIndex, usize> = rows.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut mat = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (c, a) in cols.iter().enumerate() {
        for j in 0..n {
            let e = a.0[j];
            if e >= 2 {
                let mut b = a.clone();
                b.0[j] -= 2;
                mat[index[&b]][c] = BigRational::from_integer(((e * (e - 1)) as i64).into());
            }
        }
    }
    mat
}

fn from_coefficients(n: usize, basis: &[MultiIndex], v: &[BigRational]) -> Polynomial {
    Polynomial::from_terms(
        n,
        basis
            .iter()
            .zip(v)
            .filter(|(_, c)| !c.is_zero())
            .map(|(a, c)| (a.clone(), GaussianRational::real(c.clone()))),
    )
    .expect("consistent dimensions")
}

/// Reduced-echelon basis of `H^m(C^n)`, the kernel of the holomorphic Laplacian on `P^m`.
pub fn harmonic_basis(n: usize, m: u32) -> Vec<Polynomial> {
    let cols = monomials(n, m);
    if m < 2 {
        return cols
            .into_iter()
            .map(|a| Polynomial::monomial(n, a, GaussianRational::from_ints(1, 0)))
            .collect();
    }
    nullspace(laplacian_matrix(n, m), cols.len())
        .iter()
        .map(|v| from_coefficients(n, &cols, v))
        .collect()
}

/// `C(n+m-1, n-1) - C(n+m-3, n-1)`
pub fn harmonic_dim(n: usize, m: u32) -> usize {
    let all = dim_homogeneous(n, m);
    if m < 2 {
        all
    } else {
        all - binomial(n as u64 + m as u64 - 3, n as u64 - 1) as usize
    }
}

/// `(z1 - i z2)^{k1} (z^T z)^{k2}`
pub fn highest_weight_vector(n: usize, k1: u32, k2: u32) -> Polynomial {
    let lin = Polynomial::var(n, 0).sub(&Polynomial::var(n, 1).scale(&GaussianRational::i()));
    lin.pow(k1).mul(&Polynomial::zz(n).pow(k2))
}

/// Precomputed exact solver for the decomposition of `P^m(C^n)`.
pub struct Decomposer {
    n: usize,
    m: u32,
    monomials: Vec<MultiIndex>,
    // (label, columns of the harmonic basis) in concatenation order
    blocks: Vec<(BlockLabel, Vec<Polynomial>)>,
    inverse: QMatrix,
}

impl Decomposer {
    pub fn new(n: usize, m: u32) -> Result<Self> {
        let mons = monomials(n, m);
        let zz = Polynomial::zz(n);
        let mut blocks = Vec::new();
        let mut columns: Vec<Vec<BigRational>> = Vec::new();
        for k2 in 0..=m / 2 {
            let k1 = m - 2 * k2;
            let basis = harmonic_basis(n, k1);
            let lift = zz.pow(k2);
            for h in &basis {
                let full = h.mul(&lift);
                columns.push(mons.iter().map(|a| full.coeff(a).re).collect());
            }
            blocks.push((BlockLabel { k1, k2 }, basis));
        }
        if columns.len() != mons.len() {
            return Err(Error::SolveFailure(format!(
                "block bases span {} vectors, P^{m} has dimension {}",
                columns.len(),
                mons.len()
            )));
        }
        let square: QMatrix = (0..mons.len()).map(|r| columns.iter().map(|c| c[r].clone()).collect()).collect();
        let inverse = inverse(&square).ok_or_else(|| Error::SolveFailure("block bases are dependent".into()))?;
        Ok(Self { n, m, monomials: mons, blocks, inverse })
    }

    pub fn decompose(&self, p: &Polynomial) -> Result<BTreeMap<BlockLabel, Polynomial>> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p.n() });
        }
        if p.is_zero() {
            return Ok(BTreeMap::new());
        }
        if p.homogeneous_degree() != Some(self.m) {
            return Err(Error::InvalidArgument(format!("expected a homogeneous polynomial of degree {}", self.m)));
        }
        let re: Vec<BigRational> = self.monomials.iter().map(|a| p.coeff(a).re).collect();
        let im: Vec<BigRational> = self.monomials.iter().map(|a| p.coeff(a).im).collect();
        let (xr, xi) = (mat_vec(&self.inverse, &re), mat_vec(&self.inverse, &im));
        let mut out = BTreeMap::new();
        let mut idx = 0;
        for (label, basis) in &self.blocks {
            let mut comp = Polynomial::zero(self.n);
            for h in basis {
                let c = GaussianRational::new(xr[idx].clone(), xi[idx].clone());
                comp = comp.add(&h.scale(&c));
                idx += 1;
            }
            if !comp.is_zero() {
                out.insert(*label, comp);
            }
        }
        Ok(out)
    }
}

fn decomposer(n: usize, m: u32) -> Result<Arc<Decomposer>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Decomposer>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.lock().expect("cache lock").get(&(n, m)) {
        return Ok(d.clone());
    }
    let d = Arc::new(Decomposer::new(n, m)?);
    cache.lock().expect("cache lock").insert((n, m), d.clone());
    Ok(d)
}

/// Components `h_{k1,k2} in H^{k1}` with `p = sum h_{k1,k2} (z^T z)^{k2}`; zero components omitted.
pub fn decompose(p: &Polynomial) -> Result<BTreeMap<BlockLabel, Polynomial>> {
    let m = p
        .homogeneous_degree()
        .ok_or_else(|| Error::InvalidArgument("decompose needs a homogeneous polynomial".into()))?;
    decomposer(p.n(), m)?.decompose(p)
}

/// `sum h_{k1,k2} (z^T z)^{k2}`
pub fn reconstruct(n: usize, parts: &BTreeMap<BlockLabel, Polynomial>) -> Polynomial {
    let zz = Polynomial::zz(n);
    parts
        .iter()
        .fold(Polynomial::zero(n), |acc, (l, h)| acc.add(&h.mul(&zz.pow(l.k2))))
}
