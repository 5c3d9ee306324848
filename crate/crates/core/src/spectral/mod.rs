//! Eigenvalues of Toeplitz operators with invariant symbols from cone integrals.

mod cone;
mod gauss;

use std::fmt;
use std::io;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cone::{cone_integral, eigenvalue_mc_cone, eigenvalue_quad, QuadSpec};
pub(crate) use cone::{check_cone_args, ratio_estimate};
pub use gauss::{gauss_jacobi_nodes, gauss_legendre_nodes};

use crate::bergman::{self, MCParams};
use crate::error::{Error, Result};
use crate::polyspaces::blocks_up_to;
use crate::symbols::SymbolSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quad,
    McCone,
    BergmanMc,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quad => "quad",
            Method::McCone => "mc_cone",
            Method::BergmanMc => "bergman_mc",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quad" => Ok(Method::Quad),
            "mc_cone" => Ok(Method::McCone),
            "bergman_mc" => Ok(Method::BergmanMc),
            _ => Err(Error::InvalidArgument(format!("unknown method '{s}' (expected quad, mc_cone or bergman_mc)"))),
        }
    }
}

/// One `c_{k1,k2}(f, λ)` value. `error` is 0 for quadrature and a standard error
/// otherwise; `samples`/`seed` are empty for quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRow {
    pub n: usize,
    pub lambda: f64,
    pub k1: u32,
    pub k2: u32,
    pub method: Method,
    pub value: f64,
    pub error: f64,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    pub quad: QuadSpec,
    pub samples: usize,
    pub seed: u64,
    pub chunk: usize,
    pub force: bool,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { quad: QuadSpec::default(), samples: 1_000_000, seed: 0, chunk: crate::mc::DEFAULT_CHUNK, force: false }
    }
}

/// Rows for every block with k1 + 2 k2 ≤ kmax, ordered by (k1 + 2 k2, k1).
pub fn eigenvalue_table(spec: &SymbolSpec, n: usize, lambda: f64, kmax: u32, method: Method, opts: &TableOptions) -> Result<Vec<EigenvalueRow>> {
    check_cone_args(Some(spec), n, lambda)?;
    let blocks = blocks_up_to(kmax);
    let row = |k1, k2, value, error, mc: bool| EigenvalueRow {
        n,
        lambda,
        k1,
        k2,
        method,
        value,
        error,
        samples: mc.then_some(opts.samples),
        seed: mc.then_some(opts.seed),
    };
    match method {
        Method::Quad => blocks
            .iter()
            .map(|b| Ok(row(b.k1, b.k2, eigenvalue_quad(spec, n, lambda, b.k1, b.k2, &opts.quad)?, 0.0, false)))
            .collect(),
        Method::McCone => blocks
            .iter()
            .map(|b| {
                let (v, e) = eigenvalue_mc_cone(spec, n, lambda, b.k1, b.k2, opts.samples, opts.seed)?;
                Ok(row(b.k1, b.k2, v, e, true))
            })
            .collect(),
        Method::BergmanMc => {
            let params = MCParams::new(n, lambda, opts.samples, opts.seed)?.with_chunk(opts.chunk).with_force(opts.force);
            let set = bergman::SampleSet::draw(&params)?;
            let vals = bergman::rayleigh_eigenvalues(spec, &blocks, &set)?;
            Ok(blocks.iter().zip(vals).map(|(b, (v, e))| row(b.k1, b.k2, v, e, true)).collect())
        }
    }
}

/// Column order of [`write_csv`]; the header comes from the field names of [`EigenvalueRow`].
pub const CSV_HEADER: [&str; 9] = ["n", "lambda", "k1", "k2", "method", "value", "error", "samples", "seed"];

pub fn write_csv<W: io::Write>(rows: &[EigenvalueRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<EigenvalueRow>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(|e| Error::InvalidArgument(format!("csv input failed: {e}")))).collect()
}
