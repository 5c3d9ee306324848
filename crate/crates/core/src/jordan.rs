//! The real spin-factor Jordan algebra on `R^n`, its open cone of squares and
//! the complexified algebra attached to the type-IV domain.
//!
//! Elements are split as `x = x1 e1 + x'` with the distinguished coordinate
//! kept apart from the tail vector, since every formula treats them
//! differently.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

/// A point of the real spin factor `R^n`, `n >= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinElement {
    x1: f64,
    xprime: Vec<f64>,
}

impl SpinElement {
    pub fn new(x1: f64, xprime: Vec<f64>) -> Result<Self> {
        if xprime.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "spin factor needs n >= 3, got n = {}",
                xprime.len() + 1
            )));
        }
        if !x1.is_finite() || xprime.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite spin element entry".into()));
        }
        Ok(Self { x1, xprime })
    }

    /// Builds an element from a flat `n`-vector `(x1, x2, ..., xn)`.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match v.split_first() {
            Some((&x1, rest)) => Self::new(x1, rest.to_vec()),
            None => Err(Error::InvalidArgument("empty spin element".into())),
        }
    }

    /// The unit `e1`.
    pub fn unit(n: usize) -> Self {
        assert!(n >= 3, "spin factor needs n >= 3");
        Self { x1: 1.0, xprime: vec![0.0; n - 1] }
    }

    pub fn zero(n: usize) -> Self {
        assert!(n >= 3, "spin factor needs n >= 3");
        Self { x1: 0.0, xprime: vec![0.0; n - 1] }
    }

    pub fn dim(&self) -> usize {
        self.xprime.len() + 1
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    pub fn xprime(&self) -> &[f64] {
        &self.xprime
    }

    /// `x' . x'`
    pub fn tail_norm_sq(&self) -> f64 {
        self.xprime.iter().map(|v| v * v).sum()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.x1);
        v.extend_from_slice(&self.xprime);
        v
    }

    pub fn sub(&self, other: &SpinElement) -> Result<SpinElement> {
        check_dim(self.dim(), other.dim())?;
        Ok(SpinElement {
            x1: self.x1 - other.x1,
            xprime: self.xprime.iter().zip(&other.xprime).map(|(a, b)| a - b).collect(),
        })
    }

    /// Sup-norm distance, used by the round-trip checks.
    pub fn max_abs_diff(&self, other: &SpinElement) -> f64 {
        self.to_vec()
            .iter()
            .zip(other.to_vec())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A point of the complex spin factor `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpinElement {
    z: Vec<Complex64>,
}

impl ComplexSpinElement {
    pub fn new(z: Vec<Complex64>) -> Result<Self> {
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite complex spin element entry".into()));
        }
        Ok(Self { z })
    }

    pub fn unit(n: usize) -> Self {
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        z[0] = Complex64::new(1.0, 0.0);
        Self { z }
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.z
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.z
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn max_abs_diff(&self, other: &ComplexSpinElement) -> f64 {
        self.z.iter().zip(&other.z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// `x o y = (x1 y1 + x'.y') e1 + (x1 y' + y1 x')`
pub fn jordan_product(x: &SpinElement, y: &SpinElement) -> Result<SpinElement> {
    check_dim(x.dim(), y.dim())?;
    let dot: f64 = x.xprime.iter().zip(&y.xprime).map(|(a, b)| a * b).sum();
    Ok(SpinElement {
        x1: x.x1 * y.x1 + dot,
        xprime: x
            .xprime
            .iter()
            .zip(&y.xprime)
            .map(|(a, b)| x.x1 * b + y.x1 * a)
            .collect(),
    })
}

/// Strict interior of the cone of squares: `x1 > 0` and `x1^2 - x'.x' > 0`.
pub fn in_cone(x: &SpinElement) -> bool {
    x.x1 > 0.0 && x.x1 * x.x1 - x.tail_norm_sq() > 0.0
}

/// The unique square root inside the cone.
///
/// Uses the closed form directly; accuracy degrades as `x` approaches the
/// cone boundary `x1^2 = x'.x'`.
pub fn jordan_sqrt(x: &SpinElement) -> Result<SpinElement> {
    if !in_cone(x) {
        return Err(Error::ConeViolation { x1: x.x1, gap: x.x1 * x.x1 - x.tail_norm_sq() });
    }
    let s = x.x1 + (x.x1 * x.x1 - x.tail_norm_sq()).sqrt();
    let y1 = (s / 2.0).sqrt();
    let scale = 1.0 / (2.0 * s).sqrt();
    Ok(SpinElement { x1: y1, xprime: x.xprime.iter().map(|v| v * scale).collect() })
}

/// Real form embedding `E(x) = x1 e1 + i x'`.
pub fn embed_real_form(x: &SpinElement) -> ComplexSpinElement {
    let mut z = Vec::with_capacity(x.dim());
    z.push(Complex64::new(x.x1, 0.0));
    z.extend(x.xprime.iter().map(|&v| Complex64::new(0.0, v)));
    ComplexSpinElement { z }
}

/// `z o w = (z1 w1 - z'.w') e1 + (z1 w' + w1 z')`
pub fn complex_jordan_product(
    z: &ComplexSpinElement,
    w: &ComplexSpinElement,
) -> Result<ComplexSpinElement> {
    check_dim(z.dim(), w.dim())?;
    let (z1, zt) = z.z.split_first().expect("non-empty");
    let (w1, wt) = w.z.split_first().expect("non-empty");
    let dot: Complex64 = zt.iter().zip(wt).map(|(a, b)| a * b).sum();
    let mut out = Vec::with_capacity(z.dim());
    out.push(z1 * w1 - dot);
    out.extend(zt.iter().zip(wt).map(|(a, b)| z1 * b + w1 * a));
    Ok(ComplexSpinElement { z: out })
}

/// Conjugation with respect to the real form: `z* = conj(z1) e1 - conj(z')`.
pub fn involution(z: &ComplexSpinElement) -> ComplexSpinElement {
    let mut out = Vec::with_capacity(z.dim());
    for (k, c) in z.z.iter().enumerate() {
        out.push(if k == 0 { c.conj() } else { -c.conj() });
    }
    ComplexSpinElement { z: out }
}

/// `0 < x < e1` in the cone order.
pub fn in_order_interval(x: &SpinElement) -> bool {
    let complement = SpinElement {
        x1: 1.0 - x.x1,
        xprime: x.xprime.iter().map(|v| -v).collect(),
    };
    in_cone(x) && in_cone(&complement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn el(v: &[f64]) -> SpinElement {
        SpinElement::from_slice(v).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_examples() {
        let x = el(&[0.3, -1.2, 2.5]);
        assert_eq!(jordan_product(&SpinElement::unit(3), &x).unwrap(), x);
        assert_eq!(
            jordan_product(&el(&[1.0, 1.0, 0.0]), &el(&[0.0, 1.0, 0.0])).unwrap(),
            el(&[1.0, 1.0, 0.0])
        );
        let v = el(&[0.0, 1.0, 0.0]);
        assert_eq!(jordan_product(&v, &v).unwrap(), el(&[1.0, 0.0, 0.0]));
    }

    #[test]
    fn product_dimension_mismatch() {
        let err = jordan_product(&SpinElement::unit(3), &SpinElement::unit(4)).unwrap_err();
        assert_eq!(err.code(), "DIMENSION_MISMATCH");
    }

    #[test]
    fn rejects_small_dimension_and_nan() {
        assert!(SpinElement::new(1.0, vec![0.0]).is_err());
        assert!(SpinElement::new(f64::NAN, vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn cone_examples() {
        assert!(in_cone(&SpinElement::unit(3)));
        assert!(in_cone(&el(&[1.25, 0.75, 0.0])));
        assert!(!in_cone(&el(&[1.0, 1.0, 0.0])));
        assert!(!in_cone(&el(&[-1.0, 0.0, 0.0])));
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(jordan_sqrt(&SpinElement::unit(3)).unwrap(), SpinElement::unit(3));
        let r = jordan_sqrt(&el(&[1.25, 0.75, 0.0])).unwrap();
        let expected = el(&[3.0 / (2.0 * 2f64.sqrt()), 2f64.sqrt() / 4.0, 0.0]);
        assert!(r.max_abs_diff(&expected) < 1e-15);
        let sq = jordan_product(&r, &r).unwrap();
        assert!(sq.max_abs_diff(&el(&[1.25, 0.75, 0.0])) < 1e-12);
        assert_eq!(jordan_sqrt(&el(&[4.0, 0.0, 0.0])).unwrap(), el(&[2.0, 0.0, 0.0]));
    }

    #[test]
    fn sqrt_outside_cone_fails() {
        let err = jordan_sqrt(&el(&[1.0, 1.0, 0.0])).unwrap_err();
        assert_eq!(err.code(), "CONE_VIOLATION");
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed_real_form(&SpinElement::unit(3)), ComplexSpinElement::unit(3));
        assert_eq!(
            embed_real_form(&el(&[1.0, 2.0, 3.0])).into_vec(),
            vec![c(1.0, 0.0), c(0.0, 2.0), c(0.0, 3.0)]
        );
        assert!(embed_real_form(&SpinElement::zero(3)).as_slice().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn complex_product_examples() {
        let z = ComplexSpinElement::new(vec![c(0.2, 1.0), c(-3.0, 0.5), c(1.0, 1.0)]).unwrap();
        assert_eq!(complex_jordan_product(&ComplexSpinElement::unit(3), &z).unwrap(), z);
        let v = ComplexSpinElement::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(
            complex_jordan_product(&v, &v).unwrap().into_vec(),
            vec![c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]
        );
        let p = complex_jordan_product(
            &embed_real_form(&el(&[1.0, 1.0, 0.0])),
            &embed_real_form(&el(&[0.0, 1.0, 0.0])),
        )
        .unwrap();
        assert_eq!(p.into_vec(), vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
    }

    #[test]
    fn involution_examples() {
        let e = ComplexSpinElement::unit(3);
        assert_eq!(involution(&e), e);
        let z = ComplexSpinElement::new(vec![c(0.0, 1.0), c(1.0, 1.0), c(2.0, 0.0)]).unwrap();
        assert_eq!(involution(&z).into_vec(), vec![c(0.0, -1.0), c(-1.0, 1.0), c(-2.0, 0.0)]);
        let fixed = embed_real_form(&el(&[1.0, 2.0, 3.0]));
        assert_eq!(involution(&fixed), fixed);
    }

    #[test]
    fn order_interval_examples() {
        assert!(in_order_interval(&el(&[0.5, 0.0, 0.0])));
        assert!(!in_order_interval(&SpinElement::unit(3)));
        assert!(in_order_interval(&el(&[0.6, 0.3, 0.0])));
    }

    fn spin(n: usize) -> impl Strategy<Value = SpinElement> {
        prop::collection::vec(-2.0f64..2.0, n).prop_map(|v| SpinElement::from_slice(&v).unwrap())
    }

    fn pair(n: usize) -> impl Strategy<Value = (SpinElement, SpinElement)> {
        (spin(n), spin(n))
    }

    proptest! {
        #[test]
        fn product_commutes((x, y) in (3usize..7).prop_flat_map(pair)) {
            prop_assert_eq!(jordan_product(&x, &y).unwrap(), jordan_product(&y, &x).unwrap());
        }

        #[test]
        fn jordan_identity((x, y) in (3usize..7).prop_flat_map(pair)) {
            let x2 = jordan_product(&x, &x).unwrap();
            let lhs = jordan_product(&x2, &jordan_product(&x, &y).unwrap()).unwrap();
            let rhs = jordan_product(&x, &jordan_product(&x2, &y).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn complexification_commutes((x, y) in (3usize..7).prop_flat_map(pair)) {
            let lhs = complex_jordan_product(&embed_real_form(&x), &embed_real_form(&y)).unwrap();
            let rhs = embed_real_form(&jordan_product(&x, &y).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }

        #[test]
        fn involution_properties(
            parts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 8)
        ) {
            let z = ComplexSpinElement::new(parts[..4].iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let w = ComplexSpinElement::new(parts[4..].iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            prop_assert_eq!(involution(&involution(&z)), z.clone());
            let lhs = involution(&complex_jordan_product(&z, &w).unwrap());
            let rhs = complex_jordan_product(&involution(&z), &involution(&w)).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        }

        #[test]
        fn order_interval_closed_form(x in (3usize..7).prop_flat_map(|n| {
            prop::collection::vec(-1.0f64..2.0, n).prop_map(|v| SpinElement::from_slice(&v).unwrap())
        })) {
            let bound = x.x1().min(1.0 - x.x1());
            let closed = x.x1() > 0.0 && x.x1() < 1.0 && x.tail_norm_sq() < bound * bound;
            prop_assert_eq!(in_order_interval(&x), closed);
        }
    }
}
