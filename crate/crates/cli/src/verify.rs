//! Built-in check suites. Every check reports a measured value that must stay
//! strictly below its threshold.

use clap::ValueEnum;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use toeplitz_lab::actions::{act_point, hamiltonian_pair, moment_map_so2, random_group_element, torus_rank};
use toeplitz_lab::bergman::{gram_blocks, MCParams};
use toeplitz_lab::geometry::{bergman_kernel, delta, jordan_pair_coeff, jordan_pair_coeff_numeric, metric, DomainPoint};
use toeplitz_lab::jordan::{in_cone, jordan_product, jordan_sqrt, SpinElement};
use toeplitz_lab::polyspaces::{
    binomial, branching_multiplicity, decompose, dim_homogeneous, harmonic_dim, monomials, reconstruct, GaussianRational, Polynomial,
    WeightLabel,
};
use toeplitz_lab::spectral::{eigenvalue_mc_cone, eigenvalue_quad, QuadSpec};
use toeplitz_lab::symbols::{parse_symbol, SymbolSpec};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Jordan,
    Geometry,
    Moment,
    Harmonic,
    Branching,
    Gram,
    Spectral,
    All,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Judged {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self { suite, name: name.into(), measured, threshold }
    }

    pub fn judge(&self, scale: f64) -> Judged {
        let threshold = self.threshold * scale;
        Judged {
            suite: self.suite,
            name: self.name.clone(),
            measured: self.measured,
            threshold,
            pass: self.measured.is_finite() && self.measured < threshold,
        }
    }
}

pub fn run(suite: Suite, cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let all = [Suite::Jordan, Suite::Geometry, Suite::Moment, Suite::Harmonic, Suite::Branching, Suite::Gram, Suite::Spectral];
    let list: Vec<Suite> = if suite == Suite::All { all.to_vec() } else { vec![suite] };
    let mut out = Vec::new();
    for s in list {
        out.extend(match s {
            Suite::Jordan => jordan(cfg),
            Suite::Geometry => geometry(cfg),
            Suite::Moment => moment(cfg),
            Suite::Harmonic => harmonic(cfg),
            Suite::Branching => branching(),
            Suite::Gram => gram(cfg)?,
            Suite::Spectral => spectral(cfg)?,
            Suite::All => unreachable!(),
        });
    }
    Ok(out)
}

fn dims_with(base: &[usize], n: usize) -> Vec<usize> {
    let mut v = base.to_vec();
    if !v.contains(&n) {
        v.push(n);
    }
    v
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let u: Vec<Complex64> = (0..n).map(|_| Complex64::new(normal(rng), normal(rng))).collect();
    let len = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    u.into_iter().map(|c| c / len).collect()
}

/// Uniform-ish point of the open order interval 0 < x < e1.
fn order_interval_point(rng: &mut ChaCha8Rng, n: usize) -> SpinElement {
    let x1: f64 = rng.random_range(1e-3..1.0 - 1e-3);
    let dir: Vec<f64> = (1..n).map(|_| normal(rng)).collect();
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let r = rng.random::<f64>() * x1.min(1.0 - x1) * 0.999;
    SpinElement::new(x1, dir.iter().map(|v| v * r / len).collect()).expect("finite element")
}

/// Point of the domain with Δ above `margin`.
fn domain_point(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> DomainPoint {
    loop {
        let z: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7))).collect();
        if delta(&z) > margin {
            if let Ok(p) = DomainPoint::new(z) {
                return p;
            }
        }
    }
}

fn jordan(cfg: &RunConfig) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for n in dims_with(&[3, 5, 8], cfg.n) {
        let mut worst = 0.0f64;
        let mut outside = 0usize;
        for _ in 0..1000 {
            let x = order_interval_point(&mut rng, n);
            match jordan_sqrt(&x) {
                Ok(y) => {
                    let sq = jordan_product(&y, &y).expect("same dimension");
                    worst = worst.max(sq.max_abs_diff(&x));
                    if !in_cone(&y) {
                        outside += 1;
                    }
                }
                Err(_) => outside += 1,
            }
        }
        out.push(Check::new("jordan", format!("sqrt round trip n={n}"), worst, 1e-12));
        out.push(Check::new("jordan", format!("sqrt outside cone n={n}"), outside as f64, 0.5));
    }
    out
}

fn geometry(cfg: &RunConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let mut worst = 0.0f64;
    for j in 1..=3 {
        for k in 1..=3 {
            for m in 1..=3 {
                for l in 1..=3 {
                    worst = worst.max((jordan_pair_coeff_numeric(3, j, k, m, l) - jordan_pair_coeff(j, k, m, l)).abs());
                }
            }
        }
    }
    out.push(Check::new("geometry", "C_jkml finite differences n=3", worst, 1e-4));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37);
    let n = cfg.n;
    let (mut kern, mut herm) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let z = domain_point(&mut rng, n, 1e-3);
        let k = bergman_kernel(&z, &z, cfg.lambda).expect("diagonal kernel");
        let expect = delta(&z).powf(-cfg.lambda);
        kern = kern.max((k - expect).norm() / expect);
        let g = metric(&z);
        herm = herm.max((&g - g.adjoint()).map(|z| z.norm()).max());
    }
    out.push(Check::new("geometry", format!("K(z,z) = Delta^-lambda n={n}"), kern, 1e-12));
    out.push(Check::new("geometry", format!("metric Hermitian n={n}"), herm, 1e-12));
    let g0 = metric(&DomainPoint::origin(n));
    let id = nalgebra::DMatrix::<Complex64>::identity(n, n);
    out.push(Check::new("geometry", "metric at origin", (g0 - id).map(|z| z.norm()).max(), 1e-15));
    out
}

fn moment(cfg: &RunConfig) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51ed);
    let mut out = Vec::new();
    for n in dims_with(&[3, 4, 5], cfg.n) {
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let z = domain_point(&mut rng, n, 0.05);
            for j in 1..=torus_rank(n) + 1 {
                for _ in 0..2 {
                    let u = unit_direction(&mut rng, n);
                    if let Ok((fd, exact)) = hamiltonian_pair(j, &z, &u, 1e-5) {
                        worst = worst.max((fd - exact).abs() / (1.0 + exact.abs()));
                    }
                }
            }
        }
        out.push(Check::new("moment", format!("Hamiltonian residual n={n}"), worst, 1e-6));
        let mut inv = 0.0f64;
        for _ in 0..1000 {
            let z = domain_point(&mut rng, n, 0.05);
            let g = random_group_element(&mut rng, n);
            let gz = act_point(&g, &z).expect("group action preserves the domain");
            inv = inv.max((moment_map_so2(&gz) - moment_map_so2(&z)).abs());
        }
        out.push(Check::new("moment", format!("SO(2) moment invariance n={n}"), inv, 1e-12));
    }
    out
}

fn harmonic(cfg: &RunConfig) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4a7f);
    let mut out = Vec::new();
    for n in 3..=5usize {
        let (mut bad_rec, mut bad_harm, mut bad_dim) = (0usize, 0usize, 0usize);
        for m in 0..=4u32 {
            let total: usize = (0..=m / 2).map(|k2| harmonic_dim(n, m - 2 * k2)).sum();
            if total != dim_homogeneous(n, m) {
                bad_dim += 1;
            }
            for _ in 0..3 {
                let terms = monomials(n, m).into_iter().map(|a| (a, GaussianRational::from_ints(rng.random_range(-3..=3), rng.random_range(-3..=3))));
                let p = Polynomial::from_terms(n, terms).expect("matching dimension");
                match decompose(&p) {
                    Ok(parts) => {
                        if reconstruct(n, &parts) != p {
                            bad_rec += 1;
                        }
                        bad_harm += parts.values().filter(|h| !h.holomorphic_laplacian().is_zero()).count();
                    }
                    Err(_) => bad_rec += 1,
                }
            }
        }
        out.push(Check::new("harmonic", format!("reconstruction mismatches n={n}"), bad_rec as f64, 0.5));
        out.push(Check::new("harmonic", format!("non-harmonic components n={n}"), bad_harm as f64, 0.5));
        out.push(Check::new("harmonic", format!("dimension identity failures n={n}"), bad_dim as f64, 0.5));
    }
    out
}

fn branching() -> Vec<Check> {
    let mut out = Vec::new();
    for n in 4..=6usize {
        let (mut bad_sum, mut bad_count) = (0usize, 0usize);
        for m in 0..=6u32 {
            let mut total = 0u64;
            for r in 0..=m {
                let mult = branching_multiplicity(n, m, r).unwrap_or(u32::MAX);
                // P^m(C^n) = sum_j z_n^{m-j} P^j(C^{n-1}) and P^j = sum H^{j-2i}
                let counted = (r..=m).filter(|j| (j - r) % 2 == 0).count() as u32;
                if mult != counted {
                    bad_count += 1;
                }
                total += u64::from(mult) * harmonic_dim(n - 1, r) as u64;
            }
            if total != binomial((n as u64) + u64::from(m) - 1, n as u64 - 1) {
                bad_sum += 1;
            }
        }
        out.push(Check::new("branching", format!("dimension sum failures n={n}"), bad_sum as f64, 0.5));
        out.push(Check::new("branching", format!("counting oracle mismatches n={n}"), bad_count as f64, 0.5));
    }
    out
}

fn gram(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let degree = cfg.degree_max.min(2);
    let params = MCParams::new(cfg.n, cfg.lambda, cfg.samples.min(100_000), cfg.seed)?.with_force(cfg.force);
    let table = gram_blocks(degree, &params, cfg.cache_dir.as_deref())?;
    let mut out = vec![Check::new("gram", format!("cross-class |G|/stderr N={degree}"), table.cross_class_max_ratio, 5.0)];
    let c0 = table.class(&WeightLabel { torus_weight: vec![0; torus_rank(cfg.n)], so2_weight: 0 });
    let dev = c0.map(|c| (c.matrix[(0, 0)] - Complex64::new(1.0, 0.0)).norm()).unwrap_or(f64::INFINITY);
    out.push(Check::new("gram", "constant class equals 1", dev, 1e-12));
    let ill = table.classes.iter().filter(|c| c.ill_conditioned).count();
    out.push(Check::new("gram", "ill-conditioned classes", ill as f64, 0.5));
    Ok(out)
}

fn spectral(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let quad = QuadSpec::default();
    let unit = SymbolSpec::unit();
    for n in [3usize, 4] {
        for lambda in [n as f64 + 1.0, n as f64 + 2.5] {
            let mut worst = 0.0f64;
            for k1 in 0..=2 {
                for k2 in 0..=2 {
                    worst = worst.max((eigenvalue_quad(&unit, n, lambda, k1, k2, &quad)? - 1.0).abs());
                }
            }
            out.push(Check::new("spectral", format!("quad unit symbol n={n} lambda={lambda}"), worst, 1e-12));
        }
    }
    let f = parse_symbol("moment: exp(s)")?;
    let (n, lambda) = (cfg.n, cfg.lambda);
    let mut worst = 0.0f64;
    for (k1, k2) in [(0, 0), (1, 0), (0, 1)] {
        let q = eigenvalue_quad(&f, n, lambda, k1, k2, &quad)?;
        let (m, e) = eigenvalue_mc_cone(&f, n, lambda, k1, k2, cfg.samples, cfg.seed)?;
        worst = worst.max((q - m).abs() / e);
    }
    out.push(Check::new("spectral", format!("quad vs cone MC exp(s) n={n} lambda={lambda} (sigmas)"), worst, 3.0));
    let mut drift = 0.0f64;
    for (k1, k2) in [(0, 0), (2, 1)] {
        let a = eigenvalue_quad(&f, n, lambda, k1, k2, &quad)?;
        let b = eigenvalue_quad(&f, n, lambda, k1, k2, &quad.doubled())?;
        drift = drift.max((a - b).abs() / a.abs());
    }
    out.push(Check::new("spectral", format!("order doubling exp(s) n={n} lambda={lambda}"), drift, 1e-8));
    Ok(out)
}
