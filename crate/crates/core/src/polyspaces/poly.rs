use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num::Zero;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{format_ratio, parse_ratio, GaussianRational};
use crate::error::{check_dim, Error, Result};

/// Exponent vector of a monomial `z^alpha`.
///
/// Ordered graded-lexicographically: lower total degree first, then larger
/// exponents on earlier variables first (`z1^2 < z1 z2 < z2^2`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of total degree `m` in `n` variables, in graded-lex order.
pub fn monomials(n: usize, m: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == n {
            cur.push(left);
            out.push(MultiIndex(cur.clone()));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(n, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if m == 0 {
            out.push(MultiIndex(vec![]));
        }
        return out;
    }
    rec(n, m, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `C(n + m - 1, n - 1)`
pub fn dim_homogeneous(n: usize, m: u32) -> usize {
    binomial(n as u64 + m as u64 - 1, n as u64 - 1) as usize
}

pub fn binomial(a: u64, b: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1u64, |acc, i| acc * (a - i) / (i + 1))
}

/// Holomorphic polynomial on `C^n` with exact coefficients in `Q(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, GaussianRational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: GaussianRational) -> Self {
        Self::monomial(n, MultiIndex::zero(n), c)
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, GaussianRational::from_ints(1, 0))
    }

    pub fn monomial(n: usize, alpha: MultiIndex, c: GaussianRational) -> Self {
        assert_eq!(alpha.len(), n, "multi-index length");
        let mut p = Self::zero(n);
        if !c.is_zero() {
            p.terms.insert(alpha, c);
        }
        p
    }

    /// The coordinate `z_i` (0-based).
    pub fn var(n: usize, i: usize) -> Self {
        Self::monomial(n, MultiIndex::unit(n, i), GaussianRational::from_ints(1, 0))
    }

    /// `z^T z`
    pub fn zz(n: usize) -> Self {
        let mut p = Self::zero(n);
        for i in 0..n {
            let mut a = vec![0; n];
            a[i] = 2;
            p.terms.insert(MultiIndex(a), GaussianRational::from_ints(1, 0));
        }
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, GaussianRational)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (a, c) in terms {
            check_dim(n, a.len())?;
            p.add_term(a, &c);
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, GaussianRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> GaussianRational {
        self.terms.get(alpha).cloned().unwrap_or_else(GaussianRational::zero)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: &GaussianRational) {
        use std::collections::btree_map::Entry;
        if c.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
        }
    }

    /// Common total degree of all terms, `None` for mixed degrees; `Some(0)` for zero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MultiIndex::degree);
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|e| e == d).then_some(d),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous_degree().is_some()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&GaussianRational::from_ints(-1, 0)))
    }

    pub fn scale(&self, c: &GaussianRational) -> Polynomial {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Polynomial { n: self.n, terms: self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.n, other.n);
        let mut out = Self::zero(self.n);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.add(b), &(x * y));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut out = Self::one(self.n);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn conj_coeffs(&self) -> Polynomial {
        Polynomial { n: self.n, terms: self.terms.iter().map(|(a, c)| (a.clone(), c.conj())).collect() }
    }

    /// `sum_j d^2 p / dz_j^2`
    pub fn holomorphic_laplacian(&self) -> Polynomial {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            for j in 0..self.n {
                let e = a.0[j];
                if e >= 2 {
                    let mut b = a.clone();
                    b.0[j] -= 2;
                    let f = GaussianRational::from_ints((e * (e - 1)) as i64, 0);
                    out.add_term(b, &(c * &f));
                }
            }
        }
        out
    }

    /// Replaces `z_i` by `images[i]` (all in the same target dimension).
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial> {
        check_dim(self.n, images.len())?;
        let m = images.first().map(|p| p.n).unwrap_or(0);
        let max_e = self.terms.keys().flat_map(|a| a.0.iter().copied()).max().unwrap_or(0);
        let powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|p| {
                let mut v = vec![Polynomial::one(m)];
                for k in 1..=max_e as usize {
                    let next = v[k - 1].mul(p);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Polynomial::zero(m);
        for (a, c) in &self.terms {
            let mut t = Polynomial::constant(m, c.clone());
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Floating-point value at `z`, using per-variable power tables.
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        check_dim(self.n, z.len())?;
        Ok(self.to_float().eval_unchecked(z))
    }

    pub fn to_float(&self) -> FloatPolynomial {
        FloatPolynomial {
            n: self.n,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.to_complex())).collect(),
        }
    }

    /// Coefficients on the degree-`m` monomial basis as (re, im) rational vectors.
    pub fn coefficient_vector(&self, basis: &[MultiIndex]) -> Vec<GaussianRational> {
        basis.iter().map(|a| self.coeff(a)).collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &e) in a.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*z{}", i + 1)?,
                    _ => write!(f, "*z{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    re: String,
    im: String,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TermJson { alpha: a.0.clone(), re: format_ratio(&c.re), im: format_ratio(&c.im) })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PolyJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let re = parse_ratio(&t.re).map_err(D::Error::custom)?;
            let im = parse_ratio(&t.im).map_err(D::Error::custom)?;
            terms.push((MultiIndex(t.alpha), GaussianRational::new(re, im)));
        }
        Polynomial::from_terms(raw.n, terms).map_err(|e: Error| D::Error::custom(e.to_string()))
    }
}

/// Polynomial with floating coefficients, the result of group substitutions.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPolynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl FloatPolynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(MultiIndex::degree);
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|e| e == d).then_some(d),
        }
    }

    fn add_scaled(&mut self, other: &FloatPolynomial, c: Complex64) {
        for (a, v) in &other.terms {
            *self.terms.entry(a.clone()).or_default() += c * v;
        }
    }

    pub fn mul(&self, other: &FloatPolynomial) -> FloatPolynomial {
        let mut out = Self::zero(self.n);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                *out.terms.entry(a.add(b)).or_default() += x * y;
            }
        }
        out
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_coeff_diff(&self, other: &FloatPolynomial) -> f64 {
        let keys = self.terms.keys().chain(other.terms.keys());
        keys.map(|a| (self.coeff(a) - other.coeff(a)).norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> FloatPolynomial {
        FloatPolynomial { n: self.n, terms: self.terms.iter().map(|(a, v)| (a.clone(), c * v)).collect() }
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        check_dim(self.n, z.len())?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        let max_e = self.terms.keys().flat_map(|a| a.0.iter().copied()).max().unwrap_or(0) as usize;
        let mut pw = vec![Complex64::new(1.0, 0.0); self.n * (max_e + 1)];
        for i in 0..self.n {
            for e in 1..=max_e {
                pw[i * (max_e + 1) + e] = pw[i * (max_e + 1) + e - 1] * z[i];
            }
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, c) in &self.terms {
            let mut t = *c;
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    t *= pw[i * (max_e + 1) + e as usize];
                }
            }
            acc += t;
        }
        acc
    }

    /// `p(B z)` for an `n x n` complex matrix `B` given row-major.
    pub fn linear_substitute(&self, b: &[Vec<Complex64>]) -> Result<FloatPolynomial> {
        check_dim(self.n, b.len())?;
        let n = self.n;
        let images: Vec<FloatPolynomial> = b
            .iter()
            .map(|row| {
                let mut p = FloatPolynomial::zero(n);
                for (k, &c) in row.iter().enumerate() {
                    if c != Complex64::new(0.0, 0.0) {
                        p.terms.insert(MultiIndex::unit(n, k), c);
                    }
                }
                p
            })
            .collect();
        let max_e = self.terms.keys().flat_map(|a| a.0.iter().copied()).max().unwrap_or(0) as usize;
        let mut one = FloatPolynomial::zero(n);
        one.terms.insert(MultiIndex::zero(n), Complex64::new(1.0, 0.0));
        let powers: Vec<Vec<FloatPolynomial>> = images
            .iter()
            .map(|p| {
                let mut v = vec![one.clone()];
                for k in 1..=max_e {
                    let next = v[k - 1].mul(p);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = FloatPolynomial::zero(n);
        for (a, c) in &self.terms {
            let mut t = one.clone();
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&powers[i][e as usize]);
                }
            }
            out.add_scaled(&t, *c);
        }
        Ok(out)
    }
}

impl From<&Polynomial> for FloatPolynomial {
    fn from(p: &Polynomial) -> Self {
        p.to_float()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_ints(re, im)
    }

    fn z1_minus_iz2(n: usize) -> Polynomial {
        Polynomial::var(n, 0).sub(&Polynomial::var(n, 1).scale(&GaussianRational::i()))
    }

    #[test]
    fn monomial_order_and_count() {
        let m = monomials(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], MultiIndex(vec![2, 0, 0]));
        assert_eq!(m[1], MultiIndex(vec![1, 1, 0]));
        assert_eq!(m[5], MultiIndex(vec![0, 0, 2]));
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        for n in 1..6 {
            for d in 0..7 {
                assert_eq!(monomials(n, d).len(), dim_homogeneous(n, d));
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)];
        assert_eq!(Polynomial::one(3).evaluate(&z).unwrap(), c(1.0, 0.0));
        let v = z1_minus_iz2(3).pow(2).evaluate(&z).unwrap();
        assert!((v - c(4.0, 0.0)).norm() < 1e-15);
        assert_eq!(Polynomial::zz(3).evaluate(&z).unwrap(), c(0.0, 0.0));
        assert!(Polynomial::zz(3).evaluate(&z[..2]).is_err());
    }

    #[test]
    fn laplacian_examples() {
        let z1sq = Polynomial::var(3, 0).pow(2);
        assert_eq!(z1sq.holomorphic_laplacian(), Polynomial::constant(3, g(2, 0)));
        for n in 3..7 {
            assert_eq!(Polynomial::zz(n).holomorphic_laplacian(), Polynomial::constant(n, g(2 * n as i64, 0)));
        }
        for m in 0..8 {
            assert!(z1_minus_iz2(4).pow(m).holomorphic_laplacian().is_zero());
        }
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Polynomial::var(3, 0);
        assert!(p.sub(&p).is_zero());
        assert_eq!(p.sub(&p).homogeneous_degree(), Some(0));
    }

    #[test]
    fn json_round_trip() {
        let p = z1_minus_iz2(3).pow(3).add(&Polynomial::zz(3).mul(&Polynomial::var(3, 2)).scale(&GaussianRational::from_ratio(-2, 7)));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"re\":\"-2/7\""));
        let q: Polynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Polynomial>(r#"{"n":2,"terms":[{"alpha":[1],"re":"1","im":"0"}]}"#).is_err());
    }

    #[test]
    fn substitution_matches_evaluation() {
        let p = z1_minus_iz2(3).pow(2).mul(&Polynomial::var(3, 2));
        let b = vec![
            vec![Complex64::new(0.0, 1.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0)],
            vec![Complex64::new(0.1, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, -1.0), Complex64::new(0.3, 0.0)],
        ];
        let q = p.to_float().linear_substitute(&b).unwrap();
        let z = [Complex64::new(0.2, -0.1), Complex64::new(0.4, 0.3), Complex64::new(-0.5, 0.0)];
        let bz: Vec<Complex64> = b.iter().map(|row| row.iter().zip(&z).map(|(x, y)| x * y).sum()).collect();
        assert!((q.evaluate(&z).unwrap() - p.evaluate(&bz).unwrap()).norm() < 1e-14);
        assert_eq!(q.homogeneous_degree(), Some(3));
    }
}
