//! Symbols: moment-map symbols `f(mu^{SO(2)})`, invariant symbols
//! `g(|z|^2, |z^T z|^2)` and `SO(2)`-invariant phase-monomial sums.

mod expr;
mod parser;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::actions::moment_map_so2;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{bilinear, norm_sq, DomainPoint};
use crate::jordan::{in_order_interval, SpinElement};

pub use expr::{Env, Expr, Func, Var};
pub use parser::parse_expr;

/// One term `coef * z^alpha * conj(z)^beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTerm {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    #[serde(with = "complex_pair")]
    pub coef: Complex64,
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSpec {
    Moment(Expr),
    Invariant(Expr),
    Phase(Vec<PhaseTerm>),
}

/// Bounded moment expressions used throughout the test suites.
pub const MOMENT_CATALOG: [&str; 6] = ["1", "s/(s-1)", "1/(1-s)", "exp(s)", "1/(1+s^2)", "s/(1+s^2)"];

impl SymbolSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SymbolSpec::Moment(_) => "moment",
            SymbolSpec::Invariant(_) => "invariant",
            SymbolSpec::Phase(_) => "phase",
        }
    }

    pub fn unit() -> SymbolSpec {
        SymbolSpec::Moment(Expr::Const(1.0))
    }

    /// True for symbols invariant under the full `SO(n) x SO(2)`.
    pub fn is_invariant(&self) -> bool {
        !matches!(self, SymbolSpec::Phase(_))
    }

    /// Value at the invariants `u = |z|^2`, `w = |z^T z|^2`.
    /// Like [`eval_uw`](Self::eval_uw) but with `d = 1 + w - 2u` supplied by the
    /// caller, who can usually form it without cancellation.
    pub fn eval_uwd(&self, u: f64, w: f64, d: f64) -> Result<f64> {
        match self {
            SymbolSpec::Moment(e) => e.eval(&Env { s: (w - u) / d, u, w }),
            SymbolSpec::Invariant(e) => e.eval(&Env { s: 0.0, u, w }),
            SymbolSpec::Phase(_) => Err(Error::Kind("phase symbols are not functions of (u, w)".into())),
        }
    }

    pub fn eval_uw(&self, u: f64, w: f64) -> Result<f64> {
        match self {
            SymbolSpec::Moment(e) => e.eval(&Env { s: (w - u) / (1.0 + w - 2.0 * u), u, w }),
            SymbolSpec::Invariant(e) => e.eval(&Env { s: 0.0, u, w }),
            SymbolSpec::Phase(_) => Err(Error::Kind("phase symbols are not functions of (u, w)".into())),
        }
    }
}

pub fn parse_symbol(text: &str) -> Result<SymbolSpec> {
    let Some((head, body)) = text.split_once(':') else {
        return Err(Error::Parse {
            position: 0,
            message: "expected 'moment:', 'invariant:' or 'phase:' prefix".into(),
        });
    };
    let offset = head.len() + 1;
    match head.trim() {
        "moment" => {
            let e = parse_expr(body, offset)?;
            check_vars(&e, &[Var::S], "moment")?;
            Ok(SymbolSpec::Moment(e))
        }
        "invariant" => {
            let e = parse_expr(body, offset)?;
            check_vars(&e, &[Var::U, Var::W], "invariant")?;
            Ok(SymbolSpec::Invariant(e))
        }
        "phase" => parse_phase(body, offset),
        other => Err(Error::Parse { position: 0, message: format!("unknown symbol kind '{other}'") }),
    }
}

fn check_vars(e: &Expr, allowed: &[Var], kind: &str) -> Result<()> {
    let mut used = Vec::new();
    e.variables(&mut used);
    match used.into_iter().find(|v| !allowed.contains(v)) {
        Some(v) => Err(Error::Variable { variable: v.name().into(), kind: kind.into() }),
        None => Ok(()),
    }
}

fn parse_phase(body: &str, offset: usize) -> Result<SymbolSpec> {
    let terms: Vec<PhaseTerm> = serde_json::from_str(body).map_err(|e| {
        // Column is 1-based within the offending line.
        let line_start: usize = body.split('\n').take(e.line().saturating_sub(1)).map(|l| l.len() + 1).sum();
        Error::Parse { position: offset + line_start + e.column().saturating_sub(1), message: e.to_string() }
    })?;
    if terms.is_empty() {
        return Err(Error::Parse { position: offset, message: "phase symbol needs at least one term".into() });
    }
    let n = terms[0].alpha.len();
    for (index, t) in terms.iter().enumerate() {
        if t.alpha.len() != n || t.beta.len() != n {
            return Err(Error::Parse {
                position: offset,
                message: format!("phase term {index}: alpha and beta must all have length {n}"),
            });
        }
        if !t.coef.re.is_finite() || !t.coef.im.is_finite() {
            return Err(Error::Parse { position: offset, message: format!("phase term {index}: non-finite coefficient") });
        }
        let (a, b) = (t.alpha.iter().sum::<u32>(), t.beta.iter().sum::<u32>());
        if a != b {
            return Err(Error::PhaseWeight { index, alpha: a, beta: b });
        }
    }
    Ok(SymbolSpec::Phase(terms))
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::Moment(e) => write!(f, "moment: {e}"),
            SymbolSpec::Invariant(e) => write!(f, "invariant: {e}"),
            SymbolSpec::Phase(t) => write!(f, "phase: {}", serde_json::to_string(t).map_err(|_| fmt::Error)?),
        }
    }
}

impl Serialize for SymbolSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SymbolSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_symbol(&s).map_err(serde::de::Error::custom)
    }
}

fn phase_value(terms: &[PhaseTerm], z: &[Complex64]) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for t in terms {
        check_dim(z.len(), t.alpha.len())?;
        let mut v = t.coef;
        for (k, zk) in z.iter().enumerate() {
            if t.alpha[k] > 0 {
                v *= zk.powu(t.alpha[k]);
            }
            if t.beta[k] > 0 {
                v *= zk.conj().powu(t.beta[k]);
            }
        }
        acc += v;
    }
    Ok(acc)
}

/// Value of the symbol at a domain point.
pub fn eval_symbol(spec: &SymbolSpec, z: &DomainPoint) -> Result<Complex64> {
    match spec {
        SymbolSpec::Moment(e) => Ok(Complex64::new(e.eval(&Env { s: moment_map_so2(z), u: 0.0, w: 0.0 })?, 0.0)),
        SymbolSpec::Invariant(e) => {
            let env = Env { s: 0.0, u: norm_sq(z), w: bilinear(z, z).norm_sqr() };
            Ok(Complex64::new(e.eval(&env)?, 0.0))
        }
        SymbolSpec::Phase(t) => phase_value(t, z),
    }
}

/// Same as [`eval_symbol`] without the domain certificate; used by samplers that
/// have already established membership.
pub fn eval_symbol_raw(spec: &SymbolSpec, z: &[Complex64]) -> Result<Complex64> {
    match spec {
        SymbolSpec::Phase(t) => phase_value(t, z),
        _ => Ok(Complex64::new(spec.eval_uw(norm_sq(z), bilinear(z, z).norm_sqr())?, 0.0)),
    }
}

/// Symbol at `E(sqrt x)` through `|E(sqrt x)|^2 = x1` and `|E(sqrt x)^T E(sqrt x)|^2 = x1^2 - x'.x'`.
pub fn eval_invariant_at_cone_point(spec: &SymbolSpec, x: &SpinElement) -> Result<f64> {
    if let SymbolSpec::Phase(_) = spec {
        return Err(Error::Kind("phase symbols have no cone representation".into()));
    }
    if !in_order_interval(x) {
        return Err(Error::InvalidArgument("point is not in the order interval 0 < x < e1".into()));
    }
    let u = x.x1();
    spec.eval_uw(u, u * u - x.tail_norm_sq())
}

/// `s := (w - u) / (1 + w - 2u)`
pub fn moment_to_invariant(spec: &SymbolSpec) -> Result<SymbolSpec> {
    match spec {
        SymbolSpec::Moment(e) => {
            let u = || Expr::Var(Var::U);
            let w = || Expr::Var(Var::W);
            let s = Expr::div(
                Expr::sub(w(), u()),
                Expr::sub(Expr::add(Expr::c(1.0), w()), Expr::mul(Expr::c(2.0), u())),
            );
            Ok(SymbolSpec::Invariant(e.substitute(Var::S, &s)))
        }
        other => Err(Error::Kind(format!("expected a moment symbol, got {}", other.kind()))),
    }
}
