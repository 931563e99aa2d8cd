use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C64;

use qad_core::defect::{build_defect_intertwiner, DefectCase};
use qad_core::intertwiners::{build_l, build_l_inverse, build_rbar};
use qad_core::lattice::{build_defect_hamiltonian, build_transfer_matrix, ChainSpec, DefectArgument};
use qad_core::sampling::Fixed;
use qad_core::sine_gordon::{build_s, build_t_i, build_t_ii, DefectType, TypeI, TypeII};
use qad_core::suite::{run_groups, SgConfig, SuiteConfig, GROUPS};
use qad_core::{Error, LinearOperator, ReprParams, TruncationSpec};

#[derive(Parser)]
#[command(name = "qad")]
#[command(about = "Operators and identity checks for q-oscillator defects in XXZ and sine-Gordon")]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Build one operator and write it as a JSON matrix
    Emit {
        #[arg(value_enum)]
        what: EmitKind,
        #[command(flatten)]
        params: ParamArgs,
        /// Write entries in the transposed index convention
        #[arg(long)]
        transpose: bool,
    },
    /// Run verification groups and write a JSON-lines report
    Verify {
        /// Groups to run, or `all`
        #[arg(required = true, value_parser = group_name)]
        groups: Vec<String>,
        #[command(flatten)]
        params: ParamArgs,
        /// Samples per group
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Fill in wall-clock milliseconds per line (makes reports non-reproducible)
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitKind {
    Rbar,
    #[value(name = "L", alias = "l")]
    L,
    #[value(name = "Linv", alias = "linv")]
    Linv,
    Rr,
    Transfer,
    Hamiltonian,
    Smatrix,
    Tmatrix,
}

#[derive(Args)]
struct ParamArgs {
    /// Deformation parameter, e.g. 0.5 or 0.3+0.4i
    #[arg(long, value_parser = complex)]
    q: Option<C64>,
    #[arg(long, value_parser = complex)]
    zeta: Option<C64>,
    #[arg(long, value_parser = complex)]
    zeta2: Option<C64>,
    #[arg(long, value_parser = complex)]
    zeta3: Option<C64>,
    /// Module parameters r0,r1,r2
    #[arg(long, value_parser = triple)]
    r: Option<[C64; 3]>,
    /// window:a:b | hw:n[:floor] | spin:n
    #[arg(long, default_value = "window:-6:6", value_parser = trunc)]
    trunc: TruncationSpec,
    /// Truncation for the sine-Gordon operators
    #[arg(long, default_value = "window:-4:4", value_parser = trunc)]
    sg_trunc: TruncationSpec,
    #[arg(long, default_value_t = 0.3)]
    gamma: f64,
    #[arg(long, default_value_t = 0.4, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.3, allow_hyphen_values = true)]
    eta: f64,
    #[arg(long, default_value = "1.2", value_parser = complex)]
    nu: C64,
    #[arg(long, default_value = "1.1", value_parser = complex)]
    bplus: C64,
    #[arg(long, default_value = "0.4", value_parser = complex)]
    bminus: C64,
    /// Independent values for conj(b+),conj(b-)
    #[arg(long, value_parser = pair)]
    bbar: Option<[C64; 2]>,
    /// Defect intertwiner case for `emit rr`
    #[arg(long, default_value = "r2zero", value_parser = case)]
    case: DefectCase,
    /// Transmission matrix type for `emit tmatrix`
    #[arg(long = "type", default_value = "I", value_parser = defect_type)]
    kind: DefectType,
    /// Chain length
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    defect_pos: usize,
    /// Defect spectral argument: shifted | scaled[:re[:im]]
    #[arg(long, default_value = "scaled", value_parser = defect_argument)]
    defect_arg: DefectArgument,
    /// Tolerance override for every identity
    #[arg(long, env = "QAD_TOL", value_parser = positive)]
    tol: Option<f64>,
    /// Interior margin override for the lattice checks
    #[arg(long)]
    margin: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn complex(s: &str) -> Result<C64, String> {
    C64::from_str(s.trim()).map_err(|_| format!("`{s}` is not a complex number (e.g. 0.5, 0.3+0.4i)"))
}

fn list<const N: usize>(s: &str) -> Result<[C64; N], String> {
    let parts: Vec<C64> = s.split(',').map(complex).collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| format!("expected {N} comma-separated values, got `{s}`"))
}

fn triple(s: &str) -> Result<[C64; 3], String> {
    list::<3>(s)
}

fn pair(s: &str) -> Result<[C64; 2], String> {
    list::<2>(s)
}

fn trunc(s: &str) -> Result<TruncationSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn case(s: &str) -> Result<DefectCase, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn defect_type(s: &str) -> Result<DefectType, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn defect_argument(s: &str) -> Result<DefectArgument, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got `{s}`")),
    }
}

fn group_name(s: &str) -> Result<String, String> {
    if s == "all" || GROUPS.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!(
            "unknown group `{s}`; expected all or one of {}",
            GROUPS.join(", ")
        ))
    }
}

/// Failures that come from the inputs rather than the numerics.
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::InvalidTruncation(_)
            | Error::EmptyWindow
            | Error::CaseMismatch { .. }
            | Error::OutOfWindow(_)
            | Error::Format(_)
            | Error::UnknownGenerator(_) => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl ParamArgs {
    fn need_q(&self) -> Result<C64, Failure> {
        self.q.ok_or_else(|| Failure::Usage("--q is required".into()))
    }

    fn repr(&self, zeta: C64) -> Result<ReprParams, Failure> {
        let r = self
            .r
            .unwrap_or([C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        Ok(ReprParams::new(self.need_q()?, zeta, r, self.trunc)?)
    }

    fn zeta(&self) -> C64 {
        self.zeta.unwrap_or(C64::new(1.0, 0.0))
    }

    fn write(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn emit(what: EmitKind, p: &ParamArgs, transpose: bool) -> Result<(), Failure> {
    let one = C64::new(1.0, 0.0);
    let op: LinearOperator = match what {
        EmitKind::Rbar => build_rbar(p.zeta(), p.need_q()?)?.op,
        EmitKind::L => build_l(&p.repr(p.zeta())?)?.op,
        EmitKind::Linv => build_l_inverse(&p.repr(p.zeta())?)?.op,
        EmitKind::Rr => {
            let p1 = p.repr(p.zeta())?;
            let p2 = p1.with_zeta(p.zeta2.unwrap_or(one));
            build_defect_intertwiner(p.case, &p1, &p2)?.op
        }
        EmitKind::Transfer => {
            let chain = ChainSpec::new(p.n, p.defect_pos, p.repr(one)?, p.defect_arg)?;
            build_transfer_matrix(&chain, p.zeta())?
        }
        EmitKind::Hamiltonian => {
            let chain = ChainSpec::new(p.n, p.defect_pos, p.repr(one)?, p.defect_arg)?;
            build_defect_hamiltonian(&chain)?
        }
        EmitKind::Smatrix => build_s(p.theta, p.gamma)?,
        EmitKind::Tmatrix => match p.kind {
            DefectType::I => build_t_i(p.theta, p.gamma, &TypeI { eta: p.eta, nu: p.nu }, p.sg_trunc)?.op,
            DefectType::II => {
                let d = TypeII {
                    b_plus: p.bplus,
                    b_minus: p.bminus,
                    b_bar: p.bbar,
                };
                build_t_ii(p.theta, p.gamma, &d, p.sg_trunc)?.op
            }
        },
    };
    let op = if transpose { op.adjoint_spaces_transpose() } else { op };
    let text = serde_json::to_string(&op.to_json()).map_err(|e| Failure::Numerical(e.to_string()))?;
    p.write(&(text + "\n"))
}

fn verify(groups: &[String], p: &ParamArgs, samples: usize, timings: bool) -> Result<bool, Failure> {
    let cfg = SuiteConfig {
        fixed: Fixed {
            q: p.q,
            zeta: [p.zeta, p.zeta2, p.zeta3],
            r: p.r,
        },
        trunc: p.trunc,
        sg_trunc: p.sg_trunc,
        sg: SgConfig {
            gamma: p.gamma,
            theta: p.theta,
            eta: p.eta,
            nu: p.nu,
            b_plus: p.bplus,
            b_minus: p.bminus,
            b_bar: p.bbar,
        },
        samples: samples.max(1),
        seed: p.seed,
        tol: p.tol,
        margin: p.margin,
        chain_len: p.n,
        defect_pos: p.defect_pos,
        timings,
    };
    let names: Vec<&str> = groups.iter().map(String::as_str).collect();
    let out = run_groups(&names, &cfg)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    p.write(&out.to_json_lines())?;
    let failed: Vec<&str> = out
        .lines
        .iter()
        .filter(|l| !l.pass)
        .map(|l| l.identity.as_str())
        .collect();
    eprintln!("{} checks, {} failed", out.lines.len(), failed.len());
    for f in &failed {
        eprintln!("  FAIL {f}");
    }
    Ok(out.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Commands::Emit {
            what,
            params,
            transpose,
        } => emit(*what, params, *transpose).map(|()| true),
        Commands::Verify {
            groups,
            params,
            samples,
            timings,
        } => verify(groups, params, *samples, *timings),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
