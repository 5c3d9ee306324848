//! Integrals over the order interval 0 < x < e1 of the spin factor.
//!
//! With x' = r ω and t = ω_1 the n-dimensional integral becomes
//!
//! ```text
//! ∫_0^1 dx1 ∫_0^{min(x1, 1-x1)} dr ∫_{-1}^1 dt  F(x1, r, t) r^{n-2} (1-t^2)^{(n-4)/2}
//! ```
//!
//! up to the omitted factor vol(S^{n-3}). The x1 range is split at 1/2:
//!
//! * x1 < 1/2: r = x1 ρ, Gauss–Legendre in x1 and ρ.
//! * x1 > 1/2: y = 1 - x1, r = y σ. Then
//!   `((1-x1)^2 - r^2)^{λ-n} r^{n-2} dr = y^{2λ-n-1} (1-σ)^{λ-n} (1+σ)^{λ-n} σ^{n-2} dσ`,
//!   and both algebraic factors go into Gauss–Jacobi weights.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss::{gauss_jacobi_nodes, gauss_legendre_nodes};
use crate::error::{Error, Result};
use crate::mc::{map_chunks, Sum, DEFAULT_CHUNK};
use crate::symbols::SymbolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub order_x1: usize,
    pub order_r: usize,
    pub order_t: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { order_x1: 64, order_r: 64, order_t: 64 }
    }
}

impl QuadSpec {
    pub fn uniform(order: usize) -> Self {
        Self { order_x1: order, order_r: order, order_t: order }
    }

    pub fn doubled(&self) -> Self {
        Self { order_x1: 2 * self.order_x1, order_r: 2 * self.order_r, order_t: 2 * self.order_t }
    }

    fn validate(&self) -> Result<()> {
        if self.order_x1 == 0 || self.order_r == 0 || self.order_t == 0 {
            return Err(Error::InvalidArgument("quadrature orders must be at least 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_cone_args(spec: Option<&SymbolSpec>, n: usize, lambda: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("n must be at least 3, got {n}")));
    }
    if !lambda.is_finite() || lambda <= n as f64 - 1.0 {
        return Err(Error::UnsupportedLambda { lambda, n, reason: format!("cone integrals need lambda > {}", n - 1) });
    }
    if let Some(SymbolSpec::Phase(_)) = spec {
        return Err(Error::Kind("cone integrals need an invariant or moment symbol".into()));
    }
    Ok(())
}

struct Rules {
    lo_x: Vec<(f64, f64)>,
    lo_rho: Vec<(f64, f64, f64)>,
    hi_y: Vec<(f64, f64)>,
    hi_sigma: Vec<(f64, f64, f64)>,
    t: Vec<(f64, f64)>,
}

impl Rules {
    fn new(n: usize, lambda: f64, quad: &QuadSpec) -> Result<Self> {
        let c = lambda - n as f64;
        let by = 2.0 * lambda - n as f64 - 1.0;
        let zip = |(x, w): (Vec<f64>, Vec<f64>)| x.into_iter().zip(w).collect::<Vec<_>>();

        let lo_x = zip(gauss_legendre_nodes(quad.order_x1)?).into_iter().map(|(t, w)| ((1.0 + t) / 4.0, w / 4.0)).collect();
        // (ρ, 1-ρ, weight) so that 1-ρ keeps full precision near ρ = 1
        let lo_rho =
            zip(gauss_legendre_nodes(quad.order_r)?).into_iter().map(|(t, w)| ((1.0 + t) / 2.0, (1.0 - t) / 2.0, w / 2.0)).collect();
        let ys = 4f64.powf(-by - 1.0);
        let hi_y = zip(gauss_jacobi_nodes(quad.order_x1, 0.0, by)?).into_iter().map(|(t, w)| ((1.0 + t) / 4.0, w * ys)).collect();
        let ss = 2f64.powf(-c - 1.0);
        let hi_sigma = zip(gauss_jacobi_nodes(quad.order_r, c, 0.0)?)
            .into_iter()
            .map(|(t, w)| ((1.0 + t) / 2.0, (1.0 - t) / 2.0, w * ss))
            .collect();
        let et = (n as f64 - 4.0) / 2.0;
        let t = zip(gauss_jacobi_nodes(quad.order_t, et, et)?);
        Ok(Self { lo_x, lo_rho, hi_y, hi_sigma, t })
    }

    fn sphere_factor(&self, k1: u32, x1: f64, r: f64) -> f64 {
        if k1 == 0 {
            return self.t.iter().map(|(_, w)| w).sum();
        }
        self.t.iter().map(|(t, w)| w * (x1 + r * t).powi(k1 as i32)).sum()
    }
}

/// Numerator and denominator sums, `a = spec` and `a = 1`, from one pass over the grid.
pub(crate) fn cone_pair(spec: Option<&SymbolSpec>, n: usize, lambda: f64, k1: u32, k2: u32, quad: &QuadSpec) -> Result<(f64, f64)> {
    check_cone_args(spec, n, lambda)?;
    quad.validate()?;
    let rules = Rules::new(n, lambda, quad)?;
    let c = lambda - n as f64;
    let nm2 = n as i32 - 2;
    let k2i = k2 as i32;
    let eval = |u: f64, w: f64, d: f64| -> Result<f64> {
        match spec {
            None => Ok(1.0),
            Some(s) => s.eval_uwd(u, w, d),
        }
    };

    let lo = rules.lo_x.len();
    let parts: Vec<Result<(Sum, Sum)>> = (0..lo + rules.hi_y.len())
        .into_par_iter()
        .map(|i| {
            let mut num = Sum::default();
            let mut den = Sum::default();
            if i < lo {
                let (x1, wx) = rules.lo_x[i];
                let base = wx * x1.powi(n as i32 - 1 + 2 * k2i);
                for &(rho, omr, wr) in &rules.lo_rho {
                    let r = x1 * rho;
                    let d = (1.0 - x1 * (1.0 + rho)) * (1.0 - x1 * omr);
                    let w = x1 * x1 * omr * (1.0 + rho);
                    let g = base * wr * rho.powi(nm2) * (omr * (1.0 + rho)).powi(k2i) * d.powf(c) * rules.sphere_factor(k1, x1, r);
                    num.add(g * eval(x1, w, d)?);
                    den.add(g);
                }
            } else {
                let (y, wy) = rules.hi_y[i - lo];
                let x1 = 1.0 - y;
                for &(sigma, oms, ws) in &rules.hi_sigma {
                    let r = y * sigma;
                    let w = (x1 - r) * (x1 + r);
                    let d = y * y * oms * (1.0 + sigma);
                    let g = wy * ws * sigma.powi(nm2) * (1.0 + sigma).powf(c) * w.powi(k2i) * rules.sphere_factor(k1, x1, r);
                    num.add(g * eval(x1, w, d)?);
                    den.add(g);
                }
            }
            Ok((num, den))
        })
        .collect();
    let mut num = Sum::default();
    let mut den = Sum::default();
    for p in parts {
        let (a, b) = p?;
        num.merge(&a);
        den.merge(&b);
    }
    Ok((num.value(), den.value()))
}

/// `∫ a(E(√x)) (x1+x2)^k1 (x1²−x'·x')^k2 ((1−x1)²−x'·x')^{λ−n} dx` over the order
/// interval, without the vol(S^{n−3}) factor. `None` is the unit symbol.
pub fn cone_integral(spec: Option<&SymbolSpec>, n: usize, lambda: f64, k1: u32, k2: u32, quad: &QuadSpec) -> Result<f64> {
    let (num, den) = cone_pair(spec, n, lambda, k1, k2, quad)?;
    Ok(if spec.is_some() { num } else { den })
}

/// `c_{k1,k2}(f, λ)` as the ratio of two cone integrals.
pub fn eigenvalue_quad(spec: &SymbolSpec, n: usize, lambda: f64, k1: u32, k2: u32, quad: &QuadSpec) -> Result<f64> {
    let (num, den) = cone_pair(Some(spec), n, lambda, k1, k2, quad)?;
    Ok(num / den)
}

/// Cone Monte Carlo: x1 ~ U(0,1), x' uniform in the (n−1)-ball of radius
/// min(x1, 1−x1), ratio estimator with delta-method standard error.
pub fn eigenvalue_mc_cone(spec: &SymbolSpec, n: usize, lambda: f64, k1: u32, k2: u32, samples: usize, seed: u64) -> Result<(f64, f64)> {
    check_cone_args(Some(spec), n, lambda)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let c = lambda - n as f64;
    let dim = n - 1;
    let chunks: Vec<Result<Vec<(f64, f64)>>> = map_chunks(samples, DEFAULT_CHUNK, seed, |_, rng, len| {
        let mut out = Vec::with_capacity(len);
        let mut dir = vec![0.0; dim];
        for _ in 0..len {
            let x1: f64 = rng.random();
            let big_r = x1.min(1.0 - x1);
            let mut norm2 = 0.0;
            for d in dir.iter_mut() {
                *d = rng.sample(StandardNormal);
                norm2 += *d * *d;
            }
            let rad = big_r * rng.random::<f64>().powf(1.0 / dim as f64);
            let r = rad.min(big_r);
            let x2 = r * dir[0] / norm2.sqrt();
            let w = (x1 - r) * (x1 + r);
            let d = (1.0 - x1 - r) * (1.0 - x1 + r);
            let wt = big_r.powi(dim as i32) * (x1 + x2).powi(k1 as i32) * w.powi(k2 as i32) * d.powf(c);
            out.push((wt, spec.eval_uwd(x1, w, d)?));
        }
        Ok(out)
    });
    let mut pairs = Vec::with_capacity(samples);
    for ch in chunks {
        pairs.extend(ch?);
    }
    Ok(ratio_estimate(&pairs))
}

/// Self-normalized mean of `f` under weights `w`, with the delta-method standard error.
pub(crate) fn ratio_estimate(pairs: &[(f64, f64)]) -> (f64, f64) {
    let mut sw = Sum::default();
    let mut swf = Sum::default();
    for &(w, f) in pairs {
        sw.add(w);
        swf.add(w * f);
    }
    let total = sw.value();
    let value = swf.value() / total;
    let mut var = Sum::default();
    for &(w, f) in pairs {
        var.add((w * (f - value)).powi(2));
    }
    (value, var.value().sqrt() / total)
}
