//! Gauss–Jacobi rules for the weight (1−t)^a (1+t)^b on [−1, 1].

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::factorial::factorial;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Nodes (ascending) and weights of the `order`-point Gauss–Jacobi rule, by
/// Golub–Welsch on the monic Jacobi recurrence.
pub fn gauss_jacobi_nodes(order: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(a > -1.0 && b > -1.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::ExponentRange { a, b });
    }
    if order == 0 {
        return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
    }
    let ab = a + b;
    let mu0 = if ab + 2.0 < 150.0 {
        2f64.powf(ab + 1.0) * gamma_exactish(a + 1.0) * gamma_exactish(b + 1.0) / gamma_exactish(ab + 2.0)
    } else {
        ((ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(ab + 2.0)).exp()
    };
    let mut j = DMatrix::<f64>::zeros(order, order);
    for k in 0..order {
        let kf = k as f64;
        j[(k, k)] = if k == 0 {
            (b - a) / (ab + 2.0)
        } else {
            (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        if k + 1 < order {
            let m = kf + 1.0;
            let s = 2.0 * m + ab;
            // k = 1 is written with the (m + a + b) factor cancelled so a + b = −1 works.
            let beta = if k == 0 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
            } else {
                4.0 * m * (m + a) * (m + b) * (m + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            j[(k, k + 1)] = beta.sqrt();
            j[(k + 1, k)] = beta.sqrt();
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..order)
        .map(|k| (eig.eigenvalues[k], mu0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs.into_iter().unzip())
}

// Integer and half-integer arguments (the common exponents here) are evaluated
// through factorials, which statrs returns exactly up to 22!.
fn gamma_exactish(x: f64) -> f64 {
    if x.fract() == 0.0 && x >= 1.0 && x <= 171.0 {
        factorial(x as u64 - 1)
    } else if (x - 0.5).fract() == 0.0 && x >= 0.5 && x <= 85.0 {
        let k = (x - 0.5) as u64;
        factorial(2 * k) / (4f64.powi(k as i32) * factorial(k)) * std::f64::consts::PI.sqrt()
    } else {
        gamma(x)
    }
}

pub fn gauss_legendre_nodes(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    gauss_jacobi_nodes(order, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_one_point() {
        let (x, w) = gauss_jacobi_nodes(1, 0.0, 0.0).unwrap();
        assert!(x[0].abs() < 1e-15);
        assert!((w[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_mass_and_symmetry() {
        for order in [1, 2, 7, 64, 128] {
            let (x, w) = gauss_jacobi_nodes(order, -0.5, -0.5).unwrap();
            assert!((w.iter().sum::<f64>() - std::f64::consts::PI).abs() < 1e-13);
            for k in 0..order {
                assert!((x[k] + x[order - 1 - k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn exact_on_polynomials() {
        // ∫ t^2 (1−t)^a (1+t)^b dt against a 3-point rule and a high-order rule
        for (a, b) in [(0.5, 0.0), (2.5, 1.0), (-0.5, 0.5), (0.0, 3.0)] {
            let (x3, w3) = gauss_jacobi_nodes(3, a, b).unwrap();
            let (x, w) = gauss_jacobi_nodes(200, a, b).unwrap();
            let q = |x: &[f64], w: &[f64]| x.iter().zip(w).map(|(t, w)| w * t.powi(5)).sum::<f64>();
            assert!((q(&x3, &w3) - q(&x, &w)).abs() < 1e-13);
        }
    }

    #[test]
    fn sqrt_weight_matches_beta_function() {
        // ∫ (1−t)^{1/2} dt = 2^{3/2} / (3/2)
        let (_, w) = gauss_jacobi_nodes(10, 0.5, 0.0).unwrap();
        assert!((w.iter().sum::<f64>() - 2f64.powf(1.5) / 1.5).abs() < 1e-14);
    }

    #[test]
    fn exponent_range() {
        assert!(matches!(gauss_jacobi_nodes(4, -1.0, 0.0), Err(Error::ExponentRange { .. })));
        assert!(matches!(gauss_jacobi_nodes(4, 0.0, -1.5), Err(Error::ExponentRange { .. })));
    }
}
