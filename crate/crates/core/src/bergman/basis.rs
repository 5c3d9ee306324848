use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyspaces::{harmonic_basis, harmonic_dim, BlockLabel, FloatPolynomial, Polynomial};

/// The summand `H^{k1} (z^T z)^{k2}` with its raw (not orthonormalized) basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisBlock {
    pub label: BlockLabel,
    pub polynomials: Vec<Polynomial>,
    pub degree: u32,
}

impl BasisBlock {
    pub fn new(n: usize, label: BlockLabel) -> Self {
        let zz = Polynomial::zz(n).pow(label.k2);
        let polynomials: Vec<Polynomial> = harmonic_basis(n, label.k1).iter().map(|h| h.mul(&zz)).collect();
        debug_assert_eq!(polynomials.len(), harmonic_dim(n, label.k1));
        Self { label, polynomials, degree: label.degree() }
    }

    pub fn len(&self) -> usize {
        self.polynomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polynomials.is_empty()
    }
}

/// Evaluates a fixed list of polynomials at many points through a shared table
/// of monomial values.
#[derive(Debug, Clone)]
pub struct PolyBank {
    n: usize,
    max_deg: usize,
    monomials: Vec<Vec<u32>>,
    polys: Vec<Vec<(usize, Complex64)>>,
}

impl PolyBank {
    pub fn new(n: usize, polys: &[FloatPolynomial]) -> Result<Self> {
        let mut monomials: Vec<Vec<u32>> = Vec::new();
        let mut index = std::collections::HashMap::new();
        let mut out = Vec::with_capacity(polys.len());
        let mut max_deg = 0;
        for p in polys {
            if p.n() != n {
                return Err(Error::DimensionMismatch { expected: n, found: p.n() });
            }
            let mut terms = Vec::with_capacity(p.terms().len());
            for (alpha, c) in p.terms() {
                let key = alpha.0.clone();
                max_deg = max_deg.max(alpha.degree() as usize);
                let k = *index.entry(key.clone()).or_insert_with(|| {
                    monomials.push(key);
                    monomials.len() - 1
                });
                terms.push((k, *c));
            }
            out.push(terms);
        }
        Ok(Self { n, max_deg, monomials, polys: out })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn eval(&self, z: &[Complex64], out: &mut [Complex64]) {
        let stride = self.max_deg + 1;
        let mut pw = vec![Complex64::new(1.0, 0.0); self.n * stride];
        for (i, zi) in z.iter().enumerate() {
            for e in 1..stride {
                pw[i * stride + e] = pw[i * stride + e - 1] * zi;
            }
        }
        let mono: Vec<Complex64> = self
            .monomials
            .iter()
            .map(|a| a.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (i, &e)| acc * pw[i * stride + e as usize]))
            .collect();
        for (o, terms) in out.iter_mut().zip(&self.polys) {
            *o = terms.iter().map(|(k, c)| c * mono[*k]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bank_matches_direct_evaluation() {
        let n = 3;
        let polys: Vec<Polynomial> = (0..4).flat_map(|k2| (0..3).map(move |k1| BlockLabel { k1, k2 })).flat_map(|l| BasisBlock::new(n, l).polynomials).collect();
        let floats: Vec<FloatPolynomial> = polys.iter().map(Polynomial::to_float).collect();
        let bank = PolyBank::new(n, &floats).unwrap();
        let z = [Complex64::new(0.3, -0.1), Complex64::new(-0.2, 0.25), Complex64::new(0.05, 0.4)];
        let mut v = vec![Complex64::default(); bank.len()];
        bank.eval(&z, &mut v);
        for (p, x) in polys.iter().zip(&v) {
            assert!((p.evaluate(&z).unwrap() - x).norm() < 1e-15);
        }
    }

    #[test]
    fn block_sizes() {
        for (k1, size) in [(0, 1), (1, 3), (2, 5), (3, 7)] {
            let b = BasisBlock::new(3, BlockLabel { k1, k2: 1 });
            assert_eq!(b.len(), size);
            assert_eq!(b.degree, k1 + 2);
            assert!(b.polynomials.iter().all(|p| p.homogeneous_degree() == Some(k1 + 2)));
        }
    }
}
