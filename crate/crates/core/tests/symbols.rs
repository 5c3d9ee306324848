use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use toeplitz_lab::actions::{act_point, random_group_element, GroupElement};
use toeplitz_lab::geometry::DomainPoint;
use toeplitz_lab::jordan::{embed_real_form, in_order_interval, jordan_sqrt, SpinElement};
use toeplitz_lab::symbols::*;

fn catalog() -> Vec<SymbolSpec> {
    MOMENT_CATALOG.iter().map(|t| parse_symbol(&format!("moment: {t}")).unwrap()).collect()
}

fn random_domain_point(rng: &mut ChaCha8Rng, n: usize) -> DomainPoint {
    loop {
        let z: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if let Ok(p) = DomainPoint::new(z) {
            if toeplitz_lab::geometry::delta(&p) > 0.05 {
                return p;
            }
        }
    }
}

fn random_interval_point(rng: &mut ChaCha8Rng, n: usize) -> SpinElement {
    loop {
        let v: Vec<f64> = (0..n).map(|k| if k == 0 { rng.random_range(0.0..1.0) } else { rng.random_range(-0.5..0.5) }).collect();
        let x = SpinElement::from_slice(&v).unwrap();
        // The explicit route through sqrt(x) loses ~eps/D relative accuracy in s as
        // D = (1-x1)^2 - x'.x' -> 0, so both faces keep a small margin.
        let r2 = x.tail_norm_sq();
        if in_order_interval(&x) && x.x1() * x.x1() - r2 > 1e-2 && (1.0 - x.x1()).powi(2) - r2 > 1e-2 {
            return x;
        }
    }
}

#[test]
fn cone_point_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let specs = catalog();
    for i in 0..10_000 {
        let n = 3 + i % 4;
        let x = random_interval_point(&mut rng, n);
        let e = embed_real_form(&jordan_sqrt(&x).unwrap());
        let z = DomainPoint::new(e.into_vec()).unwrap();
        for spec in &specs {
            let a = eval_invariant_at_cone_point(spec, &x).unwrap();
            let b = eval_symbol(spec, &z).unwrap().re;
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{spec}: {a} vs {b} at {x:?}");
        }
    }
}

#[test]
fn moment_to_invariant_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let pairs: Vec<(SymbolSpec, SymbolSpec)> =
        catalog().into_iter().map(|s| { let i = moment_to_invariant(&s).unwrap(); (s, i) }).collect();
    for _ in 0..1000 {
        let z = random_domain_point(&mut rng, 4);
        for (m, i) in &pairs {
            let a = eval_symbol(m, &z).unwrap().re;
            let b = eval_symbol(i, &z).unwrap().re;
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn invariant_symbols_are_group_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut specs = catalog();
    specs.push(parse_symbol("invariant: exp(-u)*(1+w)").unwrap());
    for _ in 0..500 {
        let n = rng.random_range(3..7);
        let z = random_domain_point(&mut rng, n);
        let gz = act_point(&random_group_element(&mut rng, n), &z).unwrap();
        for spec in &specs {
            let a = eval_symbol(spec, &z).unwrap().re;
            let b = eval_symbol(spec, &gz).unwrap().re;
            assert!((a - b).abs() < 1e-12, "{spec}");
        }
    }
}

#[test]
fn phase_sums_invariant_and_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let herm = parse_symbol(
        r#"phase: [{"alpha":[1,0,0],"beta":[0,1,0],"coef":[0.5,0.25]},{"alpha":[0,1,0],"beta":[1,0,0],"coef":[0.5,-0.25]},{"alpha":[2,0,0],"beta":[0,0,2],"coef":[1,0]},{"alpha":[0,0,2],"beta":[2,0,0],"coef":[1,0]}]"#,
    )
    .unwrap();
    for _ in 0..1000 {
        let z = random_domain_point(&mut rng, 3);
        let t = Complex64::from_polar(1.0, rng.random_range(0.0..6.3));
        let tz = act_point(&GroupElement::scalar(3, t).unwrap(), &z).unwrap();
        let a = eval_symbol(&herm, &z).unwrap();
        assert!(a.im.abs() < 1e-13);
        assert!((a - eval_symbol(&herm, &tz).unwrap()).norm() < 1e-13);
    }
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..100.0).prop_map(Expr::Const),
        Just(Expr::Var(Var::S)),
        Just(Expr::Var(Var::U)),
        Just(Expr::Var(Var::W)),
    ]
}

fn expr_tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), -4i32..5).prop_map(|(a, k)| Expr::Pow(Box::new(a), k)),
            inner.clone().prop_map(Expr::neg),
            (inner, prop_oneof![Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt), Just(Func::Abs)])
                .prop_map(|(a, f)| Expr::Call(f, Box::new(a))),
        ]
    })
}

proptest! {
    #[test]
    fn print_parse_round_trip(e in expr_tree()) {
        let text = e.to_string();
        prop_assert_eq!(parse_expr(&text, 0).unwrap(), e);
    }
}
