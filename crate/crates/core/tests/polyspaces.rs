use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toeplitz_lab::actions::random_group_element;
use toeplitz_lab::polyspaces::*;

fn random_poly(rng: &mut ChaCha8Rng, n: usize, m: u32) -> Polynomial {
    let mut terms = Vec::new();
    for a in monomials(n, m) {
        if rng.random_bool(0.6) {
            terms.push((a, GaussianRational::from_ints(rng.random_range(-3..=3), rng.random_range(-3..=3))));
        }
    }
    Polynomial::from_terms(n, terms).unwrap()
}

/// Chain count P^m -> sum_k H^{m-2k}(C^n) -> sum_k sum_{r <= m-2k} H^r(C^{n-1}).
fn branching_by_counting(m: u32) -> BTreeMap<u32, u32> {
    let mut count = BTreeMap::new();
    for k in 0..=m / 2 {
        for r in 0..=m - 2 * k {
            *count.entry(r).or_insert(0) += 1;
        }
    }
    count
}

#[test]
fn decomposition_is_exact_and_harmonic() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in 3..=5 {
        for m in 0..=6 {
            for _ in 0..2 {
                let p = random_poly(&mut rng, n, m);
                let parts = decompose(&p).unwrap();
                assert_eq!(reconstruct(n, &parts), p, "n={n} m={m}");
                for (label, h) in &parts {
                    assert_eq!(label.degree(), m);
                    assert!(h.holomorphic_laplacian().is_zero());
                    assert_eq!(h.homogeneous_degree(), Some(label.k1));
                }
            }
        }
    }
}

#[test]
fn dimension_identity() {
    for n in 3..=6 {
        for m in 0..=8u32 {
            let total: usize = (0..=m / 2).map(|k2| harmonic_dim(n, m - 2 * k2)).sum();
            assert_eq!(total, dim_homogeneous(n, m));
        }
    }
}

#[test]
fn branching_matches_counting_and_dimension() {
    for n in 4..=6 {
        for m in 0..=6 {
            let oracle = branching_by_counting(m);
            let mut total = 0;
            for r in 0..=m {
                let mult = branching_multiplicity(n, m, r).unwrap();
                assert_eq!(mult, oracle[&r], "n={n} m={m} r={r}");
                total += mult as usize * harmonic_dim(n - 1, r);
            }
            assert_eq!(total, dim_homogeneous(n, m));
        }
    }
}

#[test]
fn so2_character_and_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for n in 3..=5 {
        for m in 0..=4 {
            let p = random_poly(&mut rng, n, m).to_float();
            let t = Complex64::from_polar(1.0, rng.random_range(0.0..6.28));
            let g = toeplitz_lab::actions::GroupElement::scalar(n, t).unwrap();
            let out = act_on_poly(&g, &p).unwrap();
            assert!(out.max_coeff_diff(&p.scale(t.powi(-(m as i32)))) < 1e-12);
            let out = act_on_poly(&random_group_element(&mut rng, n), &p).unwrap();
            if !p.terms().is_empty() {
                assert!(out.terms().keys().all(|a| a.degree() == m));
            }
        }
    }
}

#[test]
fn highest_weight_vectors_are_weight_vectors() {
    for n in 3..=6 {
        for k1 in 0..4 {
            for k2 in 0..3 {
                let h = highest_weight_vector(n, k1, k2);
                let w = weight_of(&h).unwrap();
                assert_eq!(w.torus_weight[0], -(k1 as i64));
                assert!(w.torus_weight[1..].iter().all(|&v| v == 0));
                assert_eq!(w.so2_weight, -((k1 + 2 * k2) as i64));
                let parts = decompose(&h).unwrap();
                assert_eq!(parts.len(), 1);
                assert!(parts.contains_key(&BlockLabel { k1, k2 }));
            }
        }
    }
}
