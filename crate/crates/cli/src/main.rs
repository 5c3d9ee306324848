mod config;
mod verify;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;
use toeplitz_lab::actions::{moment_map_so2, moment_map_torus};
use toeplitz_lab::bergman::{self, commutator_of, gram_blocks, TruncationContext, MAX_SUPPORTED_N};
use toeplitz_lab::geometry::DomainPoint;
use toeplitz_lab::spectral::{eigenvalue_table, write_csv, TableOptions};
use toeplitz_lab::symbols::{parse_symbol, SymbolSpec, MOMENT_CATALOG};
use toeplitz_lab::Error;

use config::{CommonArgs, Format, RunConfig, CACHE_ENV};
use verify::Suite;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "+", env!("TOEPLITZ_LAB_GIT_REV"));

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(String),
    ChecksFailed(usize),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                Error::Parse { .. }
                | Error::Variable { .. }
                | Error::PhaseWeight { .. }
                | Error::Kind(_)
                | Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::UnsupportedLambda { .. } => 2,
                Error::NotInDomain { .. } => 4,
                _ => 3,
            },
            CliError::Io(_) => 3,
            CliError::ChecksFailed(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("CONFIG_ERROR: {m}"),
            CliError::Core(e) => format!("{}: {e}", e.code()),
            CliError::Io(m) => format!("IO_ERROR: {m}"),
            CliError::ChecksFailed(k) => format!("{k} check(s) failed"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "toeplitz-lab", version = CODE_VERSION, about = "Toeplitz operators on weighted Bergman spaces of the Lie ball")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues c_{k1,k2} of an invariant symbol for every block with k1 + 2 k2 <= kmax
    Eigenvalues {
        #[arg(long)]
        symbol: String,
    },
    /// Frobenius norm of [T_a, T_b] on the degree <= N truncation, with its noise scale
    Commutator {
        #[arg(long)]
        symbol_a: String,
        #[arg(long)]
        symbol_b: String,
    },
    /// Torus and SO(2) moment maps at a point given as "a+bi, c+di, ..."
    MomentMap {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Truncated Toeplitz matrix (always JSON) with a block-diagonality report
    Toeplitz {
        #[arg(long)]
        symbol: String,
    },
    /// Gram matrices of the torus-weight basis per weight class (always JSON)
    Gram,
    /// Run a built-in check suite
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Multiplies every threshold; 0 makes every check fail
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// Version, defaults and accepted input formats
    Info,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::Eigenvalues { symbol } => cmd_eigenvalues(&cfg, &symbol),
        Command::Commutator { symbol_a, symbol_b } => cmd_commutator(&cfg, &symbol_a, &symbol_b),
        Command::MomentMap { point } => cmd_moment_map(&cfg, &point),
        Command::Toeplitz { symbol } => cmd_toeplitz(&cfg, &symbol),
        Command::Gram => cmd_gram(&cfg),
        Command::Verify { suite, tolerance_scale } => cmd_verify(&cfg, suite, tolerance_scale),
        Command::Info => cmd_info(&cfg),
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn provenance(cfg: &RunConfig) -> serde_json::Value {
    json!({
        "code_version": CODE_VERSION,
        "n": cfg.n,
        "lambda": cfg.lambda,
        "degree_max": cfg.degree_max,
        "samples": cfg.samples,
        "seed": cfg.seed,
    })
}

fn check_symbol_dim(spec: &SymbolSpec, n: usize) -> Result<(), CliError> {
    if let SymbolSpec::Phase(terms) = spec {
        for t in terms {
            if t.alpha.len() != n || t.beta.len() != n {
                return Err(CliError::Core(Error::DimensionMismatch { expected: n, found: t.alpha.len().max(t.beta.len()) }));
            }
        }
    }
    Ok(())
}

fn cmd_eigenvalues(cfg: &RunConfig, symbol: &str) -> Result<(), CliError> {
    let spec = parse_symbol(symbol)?;
    let opts = TableOptions { samples: cfg.samples, seed: cfg.seed, force: cfg.force, ..TableOptions::default() };
    let rows = eigenvalue_table(&spec, cfg.n, cfg.lambda, cfg.kmax, cfg.method, &opts)?;
    let text = match cfg.output {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            String::from_utf8(buf).map_err(|e| CliError::Io(e.to_string()))?
        }
        Format::Json => to_json(&json!({
            "code_version": CODE_VERSION,
            "symbol": spec.to_string(),
            "kmax": cfg.kmax,
            "rows": rows,
        }))?,
    };
    emit(cfg, &text)
}

pub fn verdict(value: f64, noise: f64) -> &'static str {
    if value == 0.0 || value < 5.0 * noise {
        "CONSISTENT_WITH_ZERO"
    } else if value > 10.0 * noise {
        "NONZERO"
    } else {
        "INCONCLUSIVE"
    }
}

fn cmd_commutator(cfg: &RunConfig, a: &str, b: &str) -> Result<(), CliError> {
    let (sa, sb) = (parse_symbol(a)?, parse_symbol(b)?);
    check_symbol_dim(&sa, cfg.n)?;
    check_symbol_dim(&sb, cfg.n)?;
    let ctx = TruncationContext::new(&cfg.mc_params()?, cfg.degree_max)?;
    let ta = ctx.operator(&sa)?;
    let (value, noise) = if sa == sb { commutator_of(&ta, &ta) } else { commutator_of(&ta, &ctx.operator(&sb)?) };
    let v = verdict(value, noise);
    let text = match cfg.output {
        Format::Csv => format!(
            "value,noise,verdict,n,lambda,degree_max,samples,seed\n{value},{noise},{v},{},{},{},{},{}\n",
            cfg.n, cfg.lambda, cfg.degree_max, cfg.samples, cfg.seed
        ),
        Format::Json => {
            let mut out = provenance(cfg);
            out["symbol_a"] = json!(sa.to_string());
            out["symbol_b"] = json!(sb.to_string());
            out["value"] = json!(value);
            out["noise"] = json!(noise);
            out["verdict"] = json!(v);
            to_json(&out)?
        }
    };
    emit(cfg, &text)
}

pub fn parse_point(text: &str) -> Result<Vec<Complex64>, CliError> {
    text.split(',')
        .enumerate()
        .map(|(i, part)| {
            let s: String = part.chars().filter(|c| !c.is_whitespace()).collect();
            s.parse::<Complex64>()
                .ok()
                .filter(|z| z.re.is_finite() && z.im.is_finite())
                .ok_or_else(|| CliError::Config(format!("coordinate {} ('{}') is not a complex literal like 0.5-0.25i", i + 1, part.trim())))
        })
        .collect()
}

fn cmd_moment_map(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    let z = parse_point(text)?;
    if z.len() < 3 {
        return Err(CliError::Config(format!("points need at least 3 coordinates (got {})", z.len())));
    }
    if cfg.n_explicit && cfg.n != z.len() {
        return Err(CliError::Config(format!("--n {} disagrees with the {} coordinates given", cfg.n, z.len())));
    }
    let p = DomainPoint::new(z.clone())?;
    let torus = moment_map_torus(&p);
    let so2 = moment_map_so2(&p);
    let text = match cfg.output {
        Format::Csv => {
            let mut s = String::from("component,value\n");
            for (j, v) in torus.iter().enumerate() {
                let _ = writeln!(s, "torus_{},{v}", j + 1);
            }
            let _ = writeln!(s, "so2,{so2}");
            s
        }
        Format::Json => to_json(&json!({
            "code_version": CODE_VERSION,
            "n": z.len(),
            "point": z.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "torus": torus,
            "so2": so2,
        }))?,
    };
    emit(cfg, &text)
}

#[derive(Debug, Serialize)]
struct FlaggedEntry {
    row: usize,
    col: usize,
    ratio: f64,
}

#[derive(Debug, Serialize)]
struct BlockMean {
    k1: u32,
    k2: u32,
    mean: f64,
    spread_ratio: f64,
}

fn cmd_toeplitz(cfg: &RunConfig, symbol: &str) -> Result<(), CliError> {
    let spec = parse_symbol(symbol)?;
    check_symbol_dim(&spec, cfg.n)?;
    let op = bergman::toeplitz_truncation(&spec, cfg.degree_max, &cfg.mc_params()?)?;
    let owner = op.block_of();
    let mut flagged = Vec::new();
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            let (v, s) = (op.entries[(i, j)].norm(), op.stderr[(i, j)]);
            if owner[i] != owner[j] && v > 5.0 * s {
                flagged.push(FlaggedEntry { row: i, col: j, ratio: if s > 0.0 { v / s } else { f64::MAX } });
            }
        }
    }
    let means: Vec<BlockMean> = op
        .blocks
        .iter()
        .zip(op.block_diagonal_means())
        .map(|(b, (mean, spread_ratio))| BlockMean { k1: b.label.k1, k2: b.label.k2, mean, spread_ratio })
        .collect();
    let out = json!({
        "code_version": CODE_VERSION,
        "operator": op,
        "report": {
            "off_block_max_ratio": op.off_block_max_ratio(),
            "off_block_flagged": flagged,
            "identity_max_ratio": op.identity_max_ratio(),
            "hermitian_max_ratio": op.hermitian_max_ratio(),
            "block_means": means,
        },
    });
    emit(cfg, &to_json(&out)?)
}

fn cmd_gram(cfg: &RunConfig) -> Result<(), CliError> {
    let table = gram_blocks(cfg.degree_max, &cfg.mc_params()?, cfg.cache_dir.as_deref())?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    let out = json!({ "code_version": CODE_VERSION, "table": table });
    emit(cfg, &to_json(&out)?)
}

fn cmd_verify(cfg: &RunConfig, suite: Suite, scale: f64) -> Result<(), CliError> {
    let checks = verify::run(suite, cfg)?;
    let results: Vec<_> = checks.iter().map(|c| c.judge(scale)).collect();
    let failed = results.iter().filter(|r| !r.pass).count();
    let text = match cfg.output {
        Format::Csv => {
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(
                    s,
                    "{} {}/{}: measured {:.3e} threshold {:.3e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.suite,
                    r.name,
                    r.measured,
                    r.threshold
                );
            }
            let _ = writeln!(s, "{} passed, {failed} failed", results.len() - failed);
            s
        }
        Format::Json => to_json(&json!({ "code_version": CODE_VERSION, "tolerance_scale": scale, "checks": results }))?,
    };
    emit(cfg, &text)?;
    if failed > 0 {
        Err(CliError::ChecksFailed(failed))
    } else {
        Ok(())
    }
}

fn cmd_info(cfg: &RunConfig) -> Result<(), CliError> {
    let out = json!({
        "code_version": CODE_VERSION,
        "config": cfg,
        "max_supported_n": MAX_SUPPORTED_N,
        "methods": ["quad", "mc_cone", "bergman_mc"],
        "symbol_forms": [
            "moment: <expr in s>",
            "invariant: <expr in u, w>",
            "phase: [{\"alpha\":[...],\"beta\":[...],\"coef\":[re,im]}, ...]",
        ],
        "moment_catalog": MOMENT_CATALOG,
        "cache_env": CACHE_ENV,
        "exit_codes": { "0": "success", "1": "verify check failed", "2": "parse or config error", "3": "numeric error", "4": "point not in domain" },
    });
    emit(cfg, &to_json(&out)?)
}
