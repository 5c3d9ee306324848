//! The linear `SO(n) x SO(2)` action on `D^IV_n`, its maximal torus, the
//! induced vector fields and the torus / `SO(2)` moment maps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{bilinear, delta, in_domain, norm_sq, symplectic_form, CVec, DomainPoint};

/// `(A, t)` with `A in SO(n)` and `|t| = 1`, acting by `z -> t A z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    a: DMatrix<f64>,
    t: Complex64,
}

impl GroupElement {
    pub fn new(a: DMatrix<f64>, t: Complex64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
        }
        let orth = (a.transpose() * &a - DMatrix::<f64>::identity(n, n)).amax();
        if orth > 1e-12 {
            return Err(Error::InvalidArgument(format!("A is not orthogonal (|A^T A - I| = {orth:e})")));
        }
        let det = a.determinant();
        if (det - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("det A = {det}, expected 1")));
        }
        if (t.norm() - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidArgument(format!("|t| = {}, expected 1", t.norm())));
        }
        Ok(Self { a, t })
    }

    pub fn identity(n: usize) -> Self {
        Self { a: DMatrix::identity(n, n), t: Complex64::new(1.0, 0.0) }
    }

    /// The central circle element `(I, t)`.
    pub fn scalar(n: usize, t: Complex64) -> Result<Self> {
        Self::new(DMatrix::identity(n, n), t)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn phase(&self) -> Complex64 {
        self.t
    }

    /// `g g'`
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        check_dim(self.dim(), other.dim())?;
        Ok(GroupElement { a: &self.a * &other.a, t: self.t * other.t })
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { a: self.a.transpose(), t: self.t.conj() }
    }
}

/// `(A, t) . z = t A z`
pub fn act(g: &GroupElement, z: &[Complex64]) -> Result<CVec> {
    check_dim(g.dim(), z.len())?;
    let n = z.len();
    Ok((0..n)
        .map(|i| g.t * (0..n).map(|k| z[k] * g.a[(i, k)]).sum::<Complex64>())
        .collect())
}

/// Like [`act`] but keeps the domain certificate.
pub fn act_point(g: &GroupElement, z: &DomainPoint) -> Result<DomainPoint> {
    DomainPoint::new(act(g, z)?)
}

/// `l = floor(n / 2)`
pub fn torus_rank(n: usize) -> usize {
    n / 2
}

/// `A(theta) = diag(R(theta_1), ..., R(theta_l) [, 1])` with
/// `R(theta) = [[cos, sin], [-sin, cos]]`, paired with `t = 1`.
pub fn torus_element(n: usize, theta: &[f64]) -> Result<GroupElement> {
    check_dim(torus_rank(n), theta.len())?;
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite torus angle".into()));
    }
    let mut a = DMatrix::identity(n, n);
    for (j, &th) in theta.iter().enumerate() {
        let (s, c) = th.sin_cos();
        a[(2 * j, 2 * j)] = c;
        a[(2 * j, 2 * j + 1)] = s;
        a[(2 * j + 1, 2 * j)] = -s;
        a[(2 * j + 1, 2 * j + 1)] = c;
    }
    Ok(GroupElement { a, t: Complex64::new(1.0, 0.0) })
}

fn check_basis_index(n: usize, j: usize) -> Result<()> {
    if j == 0 || j > torus_rank(n) + 1 {
        return Err(Error::InvalidArgument(format!(
            "Lie basis index {j} outside 1..={}",
            torus_rank(n) + 1
        )));
    }
    Ok(())
}

/// Holomorphic components of the vector field induced by the basis element `X_j`
/// (1-based; `j = l + 1` is the `SO(2)` generator).
pub fn infinitesimal_field(j: usize, z: &[Complex64]) -> Result<CVec> {
    let n = z.len();
    check_basis_index(n, j)?;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if j == torus_rank(n) + 1 {
        for (o, zi) in out.iter_mut().zip(z) {
            *o = Complex64::i() * zi;
        }
    } else {
        out[2 * j - 2] = z[2 * j - 1];
        out[2 * j - 1] = -z[2 * j - 2];
    }
    Ok(out)
}

fn torus_component(j: usize, z: &[Complex64], d: f64) -> f64 {
    let (a, b) = (z[2 * j - 2], z[2 * j - 1]);
    (Complex64::i() * (a.conj() * b - a * b.conj())).re / d
}

/// `mu^{SO(2)}(z) = (|z^T z|^2 - |z|^2) / Delta(z)`
pub fn moment_map_so2(z: &DomainPoint) -> f64 {
    so2_value(z)
}

fn so2_value(z: &[Complex64]) -> f64 {
    (bilinear(z, z).norm_sqr() - norm_sq(z)) / delta(z)
}

/// Components against `X_1, ..., X_{l+1}`; the last one is the `SO(2)` moment map.
pub fn moment_map_torus(z: &DomainPoint) -> Vec<f64> {
    torus_value(z)
}

fn torus_value(z: &[Complex64]) -> Vec<f64> {
    let d = delta(z);
    let l = torus_rank(z.len());
    let mut mu: Vec<f64> = (1..=l).map(|j| torus_component(j, z, d)).collect();
    mu.push(so2_value(z));
    mu
}

fn component(j: usize, z: &[Complex64]) -> f64 {
    if j == torus_rank(z.len()) + 1 {
        so2_value(z)
    } else {
        torus_component(j, z, delta(z))
    }
}

/// `|(mu_j(z + h u) - mu_j(z - h u)) / 2h - omega_z(X_j#, u)|`
pub fn hamiltonian_residual(j: usize, z: &DomainPoint, u: &[Complex64], h: f64) -> Result<f64> {
    let (fd, exact) = hamiltonian_pair(j, z, u, h)?;
    Ok((fd - exact).abs())
}

/// The two sides of the Hamiltonian identity: `(finite difference, omega(X#, u))`.
pub fn hamiltonian_pair(j: usize, z: &DomainPoint, u: &[Complex64], h: f64) -> Result<(f64, f64)> {
    check_dim(z.dim(), u.len())?;
    check_basis_index(z.dim(), j)?;
    let plus: CVec = z.iter().zip(u).map(|(a, b)| a + h * b).collect();
    let minus: CVec = z.iter().zip(u).map(|(a, b)| a - h * b).collect();
    if !in_domain(&plus) || !in_domain(&minus) {
        return Err(Error::StepExitsDomain);
    }
    let fd = (component(j, &plus) - component(j, &minus)) / (2.0 * h);
    let field = infinitesimal_field(j, z)?;
    Ok((fd, symplectic_form(z, &field, u)?))
}

/// Haar-irrelevant random rotation: QR of a Gaussian matrix with the determinant fixed to 1.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let mut q = m.qr().q();
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

pub fn random_group_element<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroupElement {
    let a = random_rotation(rng, n);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    GroupElement { a, t: Complex64::from_polar(1.0, phi) }
}

pub fn random_torus_element<R: Rng + ?Sized>(rng: &mut R, n: usize) -> GroupElement {
    let theta: Vec<f64> = (0..torus_rank(n))
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect();
    let mut g = torus_element(n, &theta).expect("valid angles");
    g.t = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> CVec {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> DomainPoint {
        loop {
            let z: CVec = (0..n).map(|_| c(rng.random_range(-0.8..0.8), rng.random_range(-0.8..0.8))).collect();
            if delta(&z) > margin {
                if let Ok(p) = DomainPoint::new(z) {
                    return p;
                }
            }
        }
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn act_examples() {
        let z = vec![c(0.1, 0.2), c(-0.3, 0.0), c(0.0, 0.4)];
        assert_eq!(act(&GroupElement::identity(3), &z).unwrap(), z);
        let g = torus_element(3, &[PI / 2.0]).unwrap();
        assert!(close(&act(&g, &real(&[1.0, 0.0, 0.0])).unwrap(), &real(&[0.0, -1.0, 0.0]), 1e-15));
        let s = GroupElement::scalar(3, c(0.0, 1.0)).unwrap();
        assert_eq!(act(&s, &real(&[1.0, 0.0, 0.0])).unwrap(), vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn torus_examples() {
        assert_eq!(torus_element(4, &[0.0, 0.0]).unwrap(), GroupElement::identity(4));
        let g = torus_element(3, &[PI]).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 1.0]));
        assert!((g.matrix() - expected).amax() < 1e-15);
        let g = torus_element(4, &[PI / 2.0, 0.0]).unwrap();
        let m = g.matrix();
        assert!((m[(0, 1)] - 1.0).abs() < 1e-15 && (m[(1, 0)] + 1.0).abs() < 1e-15);
        assert_eq!(m[(2, 2)], 1.0);
        assert_eq!(m[(3, 3)], 1.0);
        assert!(torus_element(4, &[0.0]).is_err());
    }

    #[test]
    fn group_element_validation() {
        assert!(GroupElement::new(DMatrix::from_element(3, 3, 1.0), c(1.0, 0.0)).is_err());
        let mut reflect = DMatrix::identity(3, 3);
        reflect[(0, 0)] = -1.0;
        assert!(GroupElement::new(reflect, c(1.0, 0.0)).is_err());
        assert!(GroupElement::new(DMatrix::identity(3, 3), c(1.0, 1.0)).is_err());
    }

    #[test]
    fn field_examples() {
        assert_eq!(infinitesimal_field(2, &real(&[1.0, 0.0, 0.0])).unwrap(), vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let (a, b) = (c(0.1, 0.3), c(-0.2, 0.5));
        assert_eq!(infinitesimal_field(1, &[a, b, c(0.0, 0.0)]).unwrap(), vec![b, -a, c(0.0, 0.0)]);
        for j in 1..=3 {
            assert!(infinitesimal_field(j, &real(&[0.0; 5])).unwrap().iter().all(|v| v.norm() == 0.0));
        }
        assert!(infinitesimal_field(3, &real(&[0.0; 3])).is_err());
    }

    #[test]
    fn moment_examples() {
        assert_eq!(moment_map_torus(&DomainPoint::origin(3)), vec![0.0, 0.0]);
        let z = DomainPoint::new(vec![c(0.25, 0.0), c(0.0, 0.25), c(0.0, 0.0)]).unwrap();
        let mu = moment_map_torus(&z);
        assert!((mu[0] + 1.0 / 6.0).abs() < 1e-15 && (mu[1] + 1.0 / 6.0).abs() < 1e-15);
        assert!((moment_map_so2(&z) + 1.0 / 6.0).abs() < 1e-15);
        let z = DomainPoint::new(real(&[0.5, 0.0, 0.0])).unwrap();
        let mu = moment_map_torus(&z);
        assert_eq!(mu[0], 0.0);
        assert!((mu[1] + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(moment_map_so2(&DomainPoint::origin(4)), 0.0);
    }

    #[test]
    fn residual_near_origin_and_symmetric() {
        let z = DomainPoint::new(real(&[1e-3, 0.0, 0.0])).unwrap();
        let u = real(&[1.0, 0.0, 0.0]);
        let neg: CVec = u.iter().map(|v| -v).collect();
        for j in 1..=2 {
            let r = hamiltonian_residual(j, &z, &u, 1e-5).unwrap();
            assert!(r < 1e-8);
            assert_eq!(r, hamiltonian_residual(j, &z, &neg, 1e-5).unwrap());
        }
    }

    #[test]
    fn residual_step_exits_domain() {
        let z = DomainPoint::new(real(&[0.99, 0.0, 0.0])).unwrap();
        let err = hamiltonian_residual(1, &z, &real(&[1.0, 0.0, 0.0]), 0.1).unwrap_err();
        assert_eq!(err, Error::StepExitsDomain);
    }

    #[test]
    fn hamiltonian_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for n in 3..=5 {
            for _ in 0..30 {
                let z = random_point(&mut rng, n, 0.05);
                let u: CVec = (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
                for j in 1..=torus_rank(n) + 1 {
                    let (fd, ex) = hamiltonian_pair(j, &z, &u, 1e-5).unwrap();
                    assert!((fd - ex).abs() < 1e-6 * (1.0 + ex.abs()), "n={n} j={j}: {fd} vs {ex}");
                }
            }
        }
    }

    #[test]
    fn group_law_and_invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 3..=6 {
            for _ in 0..50 {
                let g = random_group_element(&mut rng, n);
                let h = random_group_element(&mut rng, n);
                let z = random_point(&mut rng, n, 0.05);
                let lhs = act(&g, &act(&h, &z).unwrap()).unwrap();
                let rhs = act(&g.compose(&h).unwrap(), &z).unwrap();
                assert!(close(&lhs, &rhs, 1e-13));
                let gz = act_point(&g, &z).unwrap();
                assert!((delta(&gz) - delta(&z)).abs() < 1e-13);
                assert!((moment_map_so2(&gz) - moment_map_so2(&z)).abs() < 1e-12);
                let tz = act_point(&random_torus_element(&mut rng, n), &z).unwrap();
                let (a, b) = (moment_map_torus(&tz), moment_map_torus(&z));
                assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
                assert_eq!(*b.last().unwrap(), moment_map_so2(&z));
                assert!(moment_map_so2(&z) <= 0.0);
                // Near the boundary only a conditioning-scaled bound is meaningful.
                let w = random_point(&mut rng, n, 0.0);
                let gw = act(&g, &w).unwrap();
                let d = delta(&w);
                let diff = (so2_value(&gw) - so2_value(&w)).abs();
                assert!(diff < 64.0 * f64::EPSILON / (d * d), "{diff} at delta {d}");
            }
        }
    }
}
