//! The Lie ball `D^IV_n`, its defining function, weighted Bergman kernels,
//! the Bergman metric and the associated symplectic form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

pub type CVec = Vec<Complex64>;

/// `|z|^2`
pub fn norm_sq(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// `z^T z` (bilinear, no conjugation).
pub fn bilinear(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// `Delta(z) = 1 - 2|z|^2 + |z^T z|^2`
pub fn delta(z: &[Complex64]) -> f64 {
    1.0 - 2.0 * norm_sq(z) + bilinear(z, z).norm_sqr()
}

fn violated_inequality(z: &[Complex64]) -> Option<String> {
    let nz = norm_sq(z);
    let zz = bilinear(z, z).norm_sqr();
    if !(nz < 1.0) {
        Some(format!("|z|^2 < 1 fails (|z|^2 = {nz})"))
    } else if !(2.0 * nz < 1.0 + zz) {
        Some(format!("2|z|^2 < 1 + |z^T z|^2 fails ({} >= {})", 2.0 * nz, 1.0 + zz))
    } else {
        None
    }
}

pub fn in_domain(z: &[Complex64]) -> bool {
    z.iter().all(|c| c.re.is_finite() && c.im.is_finite()) && violated_inequality(z).is_none()
}

/// A complex vector certified to lie in `D^IV_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct DomainPoint(CVec);

impl DomainPoint {
    pub fn new(z: CVec) -> Result<Self> {
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NotInDomain { violated: "non-finite coordinate".into() });
        }
        match violated_inequality(&z) {
            Some(violated) => Err(Error::NotInDomain { violated }),
            None => Ok(Self(z)),
        }
    }

    pub fn origin(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_vec(self) -> CVec {
        self.0
    }
}

impl TryFrom<CVec> for DomainPoint {
    type Error = Error;
    fn try_from(z: CVec) -> Result<Self> {
        Self::new(z)
    }
}

impl From<DomainPoint> for CVec {
    fn from(p: DomainPoint) -> CVec {
        p.0
    }
}

impl std::ops::Deref for DomainPoint {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Weight parameter `lambda > n - 1` of the measure `Delta^{lambda - n} dv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParam {
    lambda: f64,
    n: usize,
}

impl WeightParam {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("n must be at least 3, got {n}")));
        }
        if !lambda.is_finite() || lambda <= n as f64 - 1.0 {
            return Err(Error::UnsupportedLambda {
                lambda,
                n,
                reason: format!("the weighted measure needs lambda > {}", n - 1),
            });
        }
        Ok(Self { lambda, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Exponent of `Delta` in the density.
    pub fn density_exponent(&self) -> f64 {
        self.lambda - self.n as f64
    }
}

/// `K_lambda(z, w) = (1 - 2 z^T conj(w) + (z^T z) conj(w^T w))^{-lambda}`, principal branch.
pub fn bergman_kernel(z: &DomainPoint, w: &DomainPoint, lambda: f64) -> Result<Complex64> {
    check_dim(z.dim(), w.dim())?;
    let zw: Complex64 = z.iter().zip(w.iter()).map(|(a, b)| a * b.conj()).sum();
    let base = 1.0 - 2.0 * zw + bilinear(z, z) * bilinear(w, w).conj();
    if base.im == 0.0 && base.re <= 0.0 {
        return Err(Error::BranchFailure { re: base.re, im: base.im });
    }
    Ok((-lambda * base.ln()).exp())
}

/// Bergman metric `g_jk(z)` normalized so that `g(0) = I`.
pub fn metric(z: &DomainPoint) -> DMatrix<Complex64> {
    let n = z.dim();
    let d = delta(z);
    let zz = bilinear(z, z);
    // a_j = conj(z_j) - z_j conj(z^T z), and the second factor is conj(a_k).
    let a: CVec = z.iter().map(|zj| zj.conj() - zj * zz.conj()).collect();
    DMatrix::from_fn(n, n, |j, k| {
        let kron = if j == k { 1.0 } else { 0.0 };
        (d * (kron - 2.0 * z[j] * z[k].conj()) + 2.0 * a[j] * a[k].conj()) / (d * d)
    })
}

/// `omega_z(u, v) = i sum_jk g_jk (u_j conj(v_k) - v_j conj(u_k))`
pub fn symplectic_form(z: &DomainPoint, u: &[Complex64], v: &[Complex64]) -> Result<f64> {
    check_dim(z.dim(), u.len())?;
    check_dim(z.dim(), v.len())?;
    let g = metric(z);
    let n = z.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            acc += g[(j, k)] * (u[j] * v[k].conj() - v[j] * u[k].conj());
        }
    }
    Ok((Complex64::i() * acc).re)
}

/// `C_jkml = 2(d_jk d_ml - d_jm d_kl + d_km d_jl)`, 1-based indices.
pub fn jordan_pair_coeff(j: usize, k: usize, m: usize, l: usize) -> f64 {
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    2.0 * (d(j, k) * d(m, l) - d(j, m) * d(k, l) + d(k, m) * d(j, l))
}

/// Finite-difference estimate of `(1/2n) d^4 log K(z,z) / dz_j dzbar_k dz_m dzbar_l` at 0,
/// with `K = Delta^{-n}` the unweighted kernel, i.e. of `-(1/2) d^4 log Delta`.
///
/// Each Wirtinger derivative expands into real partials; every real fourth partial
/// is a fourth-order polarized central difference, extrapolated once in `h`.
pub fn jordan_pair_coeff_numeric(n: usize, j: usize, k: usize, m: usize, l: usize) -> f64 {
    let f = |z: &[Complex64]| -0.5 * delta(z).ln();
    let d1 = wirtinger4(&f, n, [j - 1, k - 1, m - 1, l - 1], 1e-2);
    let d2 = wirtinger4(&f, n, [j - 1, k - 1, m - 1, l - 1], 5e-3);
    (4.0 * d2.re - d1.re) / 3.0
}

// Index pattern: holomorphic, antiholomorphic, holomorphic, antiholomorphic.
fn wirtinger4(f: &dyn Fn(&[Complex64]) -> f64, n: usize, idx: [usize; 4], h: f64) -> Complex64 {
    let conj_slot = [false, true, false, true];
    let mut total = Complex64::new(0.0, 0.0);
    for choice in 0..16u32 {
        let mut coeff = Complex64::new(1.0, 0.0);
        let mut dirs = [(0usize, false); 4];
        for s in 0..4 {
            let imag = (choice >> s) & 1 == 1;
            dirs[s] = (idx[s], imag);
            if imag {
                // d/dz = (d/dx - i d/dy)/2, d/dzbar = (d/dx + i d/dy)/2
                coeff *= if conj_slot[s] { Complex64::i() } else { -Complex64::i() };
            }
        }
        total += coeff * real_partial4(f, n, &dirs, h);
    }
    total / 16.0
}

fn real_partial4(f: &dyn Fn(&[Complex64]) -> f64, n: usize, dirs: &[(usize, bool); 4], h: f64) -> f64 {
    let mut acc = 0.0;
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for signs in 0..16u32 {
        z.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        let mut sign = 1.0;
        for (s, &(i, imag)) in dirs.iter().enumerate() {
            let e = if (signs >> s) & 1 == 1 { -1.0 } else { 1.0 };
            sign *= e;
            if imag {
                z[i].im += e * h;
            } else {
                z[i].re += e * h;
            }
        }
        acc += sign * f(&z);
    }
    acc / (16.0 * h.powi(4))
}

/// Central-difference estimate of `d^2 F / dz_j dzbar_k` for a real function `F`.
pub fn wirtinger_mixed2(f: &dyn Fn(&[Complex64]) -> f64, z: &[Complex64], j: usize, k: usize, h: f64) -> Complex64 {
    let partial = |imag_a: bool, imag_b: bool| {
        let mut acc = 0.0;
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let mut p = z.to_vec();
            let step = |c: &mut Complex64, imag: bool, s: f64| {
                if imag {
                    c.im += s * h
                } else {
                    c.re += s * h
                }
            };
            step(&mut p[j], imag_a, sa);
            step(&mut p[k], imag_b, sb);
            acc += sa * sb * f(&p);
        }
        acc / (4.0 * h * h)
    };
    let i = Complex64::i();
    (partial(false, false) + i * partial(false, true) - i * partial(true, false) + partial(true, true)) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize) -> DomainPoint {
        loop {
            let z: CVec = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            if let Ok(p) = DomainPoint::new(z) {
                return p;
            }
        }
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&[c(0.0, 0.0); 3]), 1.0);
        assert_eq!(delta(&[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]), 9.0 / 16.0);
        assert!((delta(&[c(0.25, 0.0), c(0.0, 0.25), c(0.0, 0.0)]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn domain_examples() {
        assert!(in_domain(&[c(0.0, 0.0); 3]));
        assert!(!in_domain(&[c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)]));
        assert!(in_domain(&[c(0.9, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        let err = DomainPoint::new(vec![c(0.5, 0.0), c(0.0, 0.5), c(0.0, 0.0)]).unwrap_err();
        assert_eq!(err.code(), "POINT_NOT_IN_DOMAIN");
        assert!(err.to_string().contains("2|z|^2"));
    }

    #[test]
    fn weight_param_range() {
        assert!(WeightParam::new(3, 2.0).is_err());
        assert!(WeightParam::new(3, 2.1).is_ok());
        assert!(WeightParam::new(2, 4.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let o = DomainPoint::origin(3);
        let w = random_point(&mut rng, 3);
        assert_eq!(bergman_kernel(&o, &w, 4.3).unwrap(), c(1.0, 0.0));
        let z = DomainPoint::new(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let k = bergman_kernel(&z, &z, 4.0).unwrap();
        assert!((k.re - (16.0f64 / 9.0).powi(4)).abs() < 1e-12);
        assert!((k.re - 9.98872).abs() < 1e-5);
        for _ in 0..200 {
            let z = random_point(&mut rng, 4);
            let w = random_point(&mut rng, 4);
            let lam = rng.random_range(3.01..9.0);
            let a = bergman_kernel(&z, &w, lam).unwrap();
            let b = bergman_kernel(&w, &z, lam).unwrap().conj();
            assert!((a - b).norm() <= 1e-14 * a.norm().max(1.0));
            let kd = bergman_kernel(&z, &z, lam).unwrap();
            let exact = delta(&z).powf(-lam);
            assert!((kd.re - exact).abs() <= 1e-12 * exact && kd.im.abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn metric_examples() {
        let g0 = metric(&DomainPoint::origin(3));
        assert_eq!(g0, DMatrix::identity(3, 3));
        let z = DomainPoint::new(vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((metric(&z)[(0, 0)].re - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn metric_hermitian_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let z = random_point(&mut rng, 4);
            let g = metric(&z);
            assert!((&g - g.adjoint()).camax() < 1e-12 * g.camax());
            // Realify the Hermitian matrix to a symmetric one and check its spectrum.
            let n = g.nrows();
            let r = DMatrix::from_fn(2 * n, 2 * n, |a, b| {
                let e = g[(a % n, b % n)];
                match (a < n, b < n) {
                    (true, true) | (false, false) => e.re,
                    (true, false) => -e.im,
                    (false, true) => e.im,
                }
            });
            let ev = r.symmetric_eigen().eigenvalues;
            assert!(ev.min() > 0.0);
        }
    }

    #[test]
    fn metric_matches_log_kernel_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        let f = |z: &[Complex64]| -0.5 * delta(z).ln();
        let mut tested = 0;
        while tested < 20 {
            let z = random_point(&mut rng, n);
            if delta(&z) < 0.05 {
                continue;
            }
            tested += 1;
            let g = metric(&z);
            let scale = g.camax();
            for j in 0..n {
                for k in 0..n {
                    let fd = wirtinger_mixed2(&f, &z, j, k, 1e-4);
                    assert!((fd - g[(j, k)]).norm() < 1e-5 * scale, "{fd} vs {}", g[(j, k)]);
                }
            }
        }
    }

    #[test]
    fn symplectic_examples() {
        let o = DomainPoint::origin(3);
        let e1 = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let ie1 = vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!((symplectic_form(&o, &e1, &ie1).unwrap() - 2.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let z = random_point(&mut rng, 3);
            let u: CVec = (0..3).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let v: CVec = (0..3).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            assert!(symplectic_form(&z, &u, &u).unwrap().abs() < 1e-12);
            let a = symplectic_form(&z, &u, &v).unwrap();
            let b = symplectic_form(&z, &v, &u).unwrap();
            assert!((a + b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }

    #[test]
    fn jordan_pair_closed_form_examples() {
        assert_eq!(jordan_pair_coeff(1, 1, 1, 1), 2.0);
        assert_eq!(jordan_pair_coeff(1, 1, 2, 2), 2.0);
        assert_eq!(jordan_pair_coeff(1, 2, 1, 2), -2.0);
    }

    #[test]
    fn jordan_pair_numeric_spot_checks() {
        for (j, k, m, l) in [(1, 1, 1, 1), (1, 1, 2, 2), (1, 2, 1, 2), (1, 2, 2, 1), (1, 2, 3, 3)] {
            let num = jordan_pair_coeff_numeric(3, j, k, m, l);
            assert!((num - jordan_pair_coeff(j, k, m, l)).abs() < 1e-4, "{j}{k}{m}{l}: {num}");
        }
    }

    #[test]
    fn domain_point_serde_rejects_outside() {
        let ok: DomainPoint = serde_json::from_str("[[0.5,0.0],[0.0,0.0],[0.0,0.0]]").unwrap();
        assert_eq!(ok.dim(), 3);
        assert!(serde_json::from_str::<DomainPoint>("[[0.5,0.0],[0.0,0.5],[0.0,0.0]]").is_err());
    }
}
