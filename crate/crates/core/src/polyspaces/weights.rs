use num::Zero;

use super::poly::{monomials, FloatPolynomial, MultiIndex, Polynomial};
use super::rational::GaussianRational;
use super::WeightLabel;
use crate::actions::{torus_rank, GroupElement};
use crate::error::{check_dim, Error, Result};
use num_complex::Complex64;

/// Number of rotated coordinates `(a_1, b_1, ..., a_l, b_l [, c])`.
fn rotated_dim(n: usize) -> usize {
    2 * torus_rank(n) + n % 2
}

/// `a_j = z_{2j-1} - i z_{2j}`, `b_j = z_{2j-1} + i z_{2j}`, `c = z_n` for odd `n`,
/// as polynomials in `z`.
fn rotated_coordinates(n: usize) -> Vec<Polynomial> {
    let i = GaussianRational::i();
    let mut out = Vec::with_capacity(rotated_dim(n));
    for j in 0..torus_rank(n) {
        let (x, y) = (Polynomial::var(n, 2 * j), Polynomial::var(n, 2 * j + 1));
        out.push(x.sub(&y.scale(&i)));
        out.push(x.add(&y.scale(&i)));
    }
    if n % 2 == 1 {
        out.push(Polynomial::var(n, n - 1));
    }
    out
}

/// Inverse change of variables: `z` as polynomials in the rotated coordinates.
fn standard_in_rotated(n: usize) -> Vec<Polynomial> {
    let r = rotated_dim(n);
    let half = GaussianRational::from_ratio(1, 2);
    let ihalf = GaussianRational::new(num::rational::BigRational::zero(), half.re.clone());
    let mut out = Vec::with_capacity(n);
    for j in 0..torus_rank(n) {
        let (a, b) = (Polynomial::var(r, 2 * j), Polynomial::var(r, 2 * j + 1));
        out.push(a.add(&b).scale(&half));
        out.push(a.sub(&b).scale(&ihalf));
    }
    if n % 2 == 1 {
        out.push(Polynomial::var(r, r - 1));
    }
    out
}

fn label_of_rotated(n: usize, e: &MultiIndex) -> WeightLabel {
    let l = torus_rank(n);
    WeightLabel {
        torus_weight: (0..l).map(|j| e.0[2 * j + 1] as i64 - e.0[2 * j] as i64).collect(),
        so2_weight: -(e.degree() as i64),
    }
}

/// The basis `q_{alpha,beta(,gamma)} = prod a_j^{alpha_j} b_j^{beta_j} [c^gamma]` of `P^m(C^n)`,
/// tagged with torus weight `beta - alpha` and `SO(2)` weight `-m`.
pub fn q_basis(n: usize, m: u32) -> Vec<(Polynomial, WeightLabel)> {
    let coords = rotated_coordinates(n);
    let r = rotated_dim(n);
    monomials(r, m)
        .into_iter()
        .map(|e| {
            let mono = Polynomial::monomial(r, e.clone(), GaussianRational::from_ints(1, 0));
            let p = mono.substitute(&coords).expect("matching dimensions");
            (p, label_of_rotated(n, &e))
        })
        .collect()
}

/// Exponents `(alpha, beta, gamma)` of a q-basis element given in rotated-monomial form.
pub fn q_exponents(n: usize, e: &MultiIndex) -> (Vec<u32>, Vec<u32>, u32) {
    let l = torus_rank(n);
    let alpha = (0..l).map(|j| e.0[2 * j]).collect();
    let beta = (0..l).map(|j| e.0[2 * j + 1]).collect();
    let gamma = if n % 2 == 1 { e.0[2 * l] } else { 0 };
    (alpha, beta, gamma)
}

/// The common weight of `p` if it lies in a single weight class of the q-basis.
pub fn weight_of(p: &Polynomial) -> Result<WeightLabel> {
    let n = p.n();
    if p.is_zero() {
        return Err(Error::NotAWeightVector("zero polynomial".into()));
    }
    if !p.is_homogeneous() {
        return Err(Error::NotAWeightVector("not homogeneous".into()));
    }
    let rotated = p.substitute(&standard_in_rotated(n))?;
    let mut labels = rotated.terms().keys().map(|e| label_of_rotated(n, e));
    let first = labels.next().expect("nonzero");
    for other in labels {
        if other != first {
            return Err(Error::NotAWeightVector(format!(
                "mixes torus weights {:?} and {:?}",
                first.torus_weight, other.torus_weight
            )));
        }
    }
    Ok(first)
}

/// `pi(A, t) p (z) = p(conj(t) A^{-1} z)`
pub fn act_on_poly(g: &GroupElement, p: &FloatPolynomial) -> Result<FloatPolynomial> {
    let n = p.n();
    check_dim(n, g.dim())?;
    let a = g.matrix();
    let tb = g.phase().conj();
    // A^{-1} = A^T
    let b: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|k| tb * a[(k, i)]).collect()).collect();
    p.linear_substitute(&b)
}
