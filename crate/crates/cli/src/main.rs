//! `diagonals`: majorisation, Schur-Horn synthesis and projections with a
//! prescribed diagonal, from the command line.
//!
//! Output is line-oriented: `key=value` lines, CSV blocks (a header line
//! followed by rows) and, with `--human`, prose lines starting with `# `.
//! Exit codes: 0 success, 1 infeasible or failed precondition, 2 malformed
//! input, 3 numerical failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use diagonals::carpenter::{
    build_case_a, build_case_b, column_residual_sq, entry_bound_excess, feasibility, FeasibilityCase,
    KadisonReport, SequenceSpec, TruncatedProjection,
};
use diagonals::io::{read_diagonal_input, read_matrix, read_spec, read_vector, write_matrix, write_truncated, DiagonalInput};
use diagonals::majorization::majorization_profile;
use diagonals::schur_horn::{carpenter_finite, schur_check, synthesize_hermitian};
use diagonals::{Error, ToleranceConfig};

const OK: u8 = 0;
const INFEASIBLE: u8 = 1;
const MALFORMED: u8 = 2;
const NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "diagonals", version, about = "Diagonals of Hermitian matrices and projections")]
struct Cli {
    /// Add prose lines (prefixed with `# `) to the report.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether x is majorised by y.
    Majorize {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Build a Hermitian matrix with diagonal x and spectrum y.
    Synth {
        x: PathBuf,
        y: PathBuf,
        #[arg(long = "out-a")]
        out_a: Option<PathBuf>,
        #[arg(long = "out-u")]
        out_u: Option<PathBuf>,
    },
    /// Build a projection with the given diagonal (vector or sequence spec).
    Carpenter {
        input: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Number of truncation steps for sequence specs.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Scan budget for the divergent case.
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        /// Output file (finite input) or directory (sequence spec).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check the structural predicates of a matrix file.
    Verify {
        matrix: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Predicates that must hold for exit status 0.
        #[arg(long, value_enum, value_delimiter = ',')]
        expect: Vec<Predicate>,
    },
    /// Report the Kadison sums and verdict of a sequence spec.
    Obstruction {
        spec: PathBuf,
        /// One or more thresholds in (0, 1), comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        alpha: Vec<f64>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Predicate {
    Hermitian,
    Unitary,
    Projection,
}

struct Report {
    human: bool,
}

impl Report {
    fn kv(&self, key: &str, value: impl std::fmt::Display) {
        println!("{key}={value}");
    }

    fn prose(&self, text: impl AsRef<str>) {
        if self.human {
            println!("# {}", text.as_ref());
        }
    }

    fn kadison(&self, r: &KadisonReport) {
        self.kv("alpha", r.alpha);
        self.kv("a_f", r.a_f);
        self.kv("b_f", r.b_f);
        self.kv("defect", r.defect.map_or("none".to_string(), |d| d.to_string()));
        self.kv("case", r.case);
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_precondition() {
        INFEASIBLE
    } else if e.is_numerical() || matches!(e, Error::BudgetExhausted { .. }) {
        NUMERICAL
    } else {
        MALFORMED
    }
}

fn defect_of(e: &Error) -> Option<f64> {
    match e {
        Error::Infeasible { defect } | Error::NonIntegerSum { defect } | Error::NonIntegerBlock { defect, .. } => {
            Some(*defect)
        }
        Error::NotMajorized { slack } => Some(-slack),
        _ => None,
    }
}

fn fail(e: Error) -> u8 {
    let code = exit_code(&e);
    println!("status=error");
    if let Some(d) = defect_of(&e) {
        println!("defect={d}");
    }
    println!("error={e}");
    eprintln!("diagonals: {e}");
    code
}

fn tolerances(structural: f64) -> Result<ToleranceConfig, Error> {
    let tol = ToleranceConfig {
        structural_tol: structural,
        ..ToleranceConfig::default()
    };
    tol.validate()?;
    Ok(tol)
}

fn majorize(out: &Report, x: &Path, y: &Path, tol: f64) -> Result<u8, Error> {
    let (x, y) = (read_vector(x)?, read_vector(y)?);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter("tol must be finite and non-negative".into()));
    }
    let profile = majorization_profile(&x, &y)?;
    let holds = profile.holds(tol);
    out.kv("verdict", holds);
    out.kv("n", x.len());
    out.kv("total_gap", profile.total_gap);
    out.kv("worst_slack", profile.worst_slack() + 0.0);
    println!("k,slack");
    for (k, s) in profile.slacks.iter().enumerate() {
        println!("{},{s}", k + 1);
    }
    if holds {
        out.prose("x is majorised by y");
        Ok(OK)
    } else {
        out.kv("defect", -profile.worst_slack());
        out.prose("x is not majorised by y");
        Ok(INFEASIBLE)
    }
}

fn synth(out: &Report, x: &Path, y: &Path, out_a: Option<&Path>, out_u: Option<&Path>) -> Result<u8, Error> {
    let (x, y) = (read_vector(x)?, read_vector(y)?);
    let res = synthesize_hermitian(&x, &y, &ToleranceConfig::default())?;
    let r = res.residuals()?;
    out.kv("n", x.len());
    out.kv("hermitian_residual", r.hermitian);
    out.kv("unitary_residual", r.unitary);
    out.kv("reconstruction_residual", r.reconstruction);
    out.kv("diagonal_residual", r.diagonal);
    if let Some(p) = out_a {
        write_matrix(p, &res.a)?;
        out.kv("out_a", p.display());
    }
    if let Some(p) = out_u {
        write_matrix(p, &res.u)?;
        out.kv("out_u", p.display());
    }
    out.prose("A = U diag(y) U* has diagonal x");
    Ok(OK)
}

fn carpenter(
    out: &Report,
    input: &Path,
    alpha: f64,
    depth: usize,
    budget: usize,
    dest: Option<&Path>,
) -> Result<u8, Error> {
    let tol = ToleranceConfig::default();
    match read_diagonal_input(input)? {
        DiagonalInput::Finite(d) => {
            let report = feasibility(&SequenceSpec::finite(&d)?, alpha, &tol)?;
            out.kadison(&report);
            if report.case != FeasibilityCase::CaseBFeasible {
                out.prose("the entries do not sum to an integer");
                return Ok(INFEASIBLE);
            }
            let p = carpenter_finite(&d, &tol)?;
            out.kv("n", p.dim());
            out.kv("trace", p.trace().re);
            out.kv("projection_residual", p.projection_residual());
            out.kv("entry_bound_excess", entry_bound_excess(&p));
            if let Some(path) = dest {
                write_matrix(path, &p)?;
                out.kv("out", path.display());
            }
            out.prose(format!("projection of rank {} with the requested diagonal", p.trace().re.round()));
            Ok(OK)
        }
        DiagonalInput::Spec(spec) => {
            let report = feasibility(&spec, alpha, &tol)?;
            out.kadison(&report);
            let chain = match report.case {
                FeasibilityCase::Infeasible => {
                    out.prose("a_f - b_f is not an integer: no projection has this diagonal");
                    return Ok(INFEASIBLE);
                }
                FeasibilityCase::CaseBFeasible => build_case_b(&spec, alpha, depth, &tol)?,
                FeasibilityCase::CaseA => vec![build_case_a(&spec, depth, budget, &tol)?],
            };
            residual_table(out, &spec, &chain)?;
            if let Some(dir) = dest {
                write_series(out, dir, &chain)?;
            }
            out.prose(match report.case {
                FeasibilityCase::CaseA => "a_f + b_f diverges: block construction",
                _ => "a_f - b_f is an integer: truncations converge column by column",
            });
            Ok(OK)
        }
    }
}

/// Rows `k, bound, observed_max_residual`, the observation taken over all
/// later truncations and all columns covered by `P_k`.
fn residual_table(out: &Report, spec: &SequenceSpec, chain: &[TruncatedProjection]) -> Result<(), Error> {
    out.kv("truncations", chain.len());
    let worst_diag = chain
        .iter()
        .map(|p| p.diagonal_mismatch(spec))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.kv("diagonal_mismatch", worst_diag);
    println!("k,bound,observed_max_residual");
    for (k, pk) in chain.iter().enumerate() {
        let mut observed: f64 = 0.0;
        for later in &chain[k + 1..] {
            for t in 0..pk.covered().len() {
                observed = observed.max(column_residual_sq(later, pk, t)?);
            }
        }
        let bound = pk.residual_bound.map_or("none".to_string(), |b| b.to_string());
        println!("{},{bound},{observed}", pk.depth);
    }
    Ok(())
}

fn write_series(out: &Report, dir: &Path, chain: &[TruncatedProjection]) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::Format(format!("{}: {e}", dir.display())))?;
    for p in chain {
        let stem = format!("P_{:02}", p.depth);
        write_truncated(
            &dir.join(format!("{stem}.json")),
            &dir.join(format!("{stem}.meta.json")),
            p,
        )?;
    }
    out.kv("out", dir.display());
    Ok(())
}

fn verify(out: &Report, path: &Path, tol: f64, expect: &[Predicate]) -> Result<u8, Error> {
    let m = read_matrix(path)?;
    let tol = tolerances(tol)?;
    let scale = m.max_abs().max(1.0);
    let checks = [
        (Predicate::Hermitian, "hermitian", m.hermitian_residual(), m.is_hermitian(tol.structural_tol)),
        (Predicate::Unitary, "unitary", m.unitary_residual(), m.is_unitary(tol.structural_tol)),
        (Predicate::Projection, "projection", m.projection_residual(), m.is_projection(tol.structural_tol)),
    ];
    out.kv("n", m.dim());
    let mut code = OK;
    for (pred, name, residual, holds) in checks {
        out.kv(&format!("{name}_residual"), residual);
        out.kv(&format!("is_{name}"), holds);
        if expect.contains(&pred) && !holds {
            out.prose(format!("expected {name}, residual {residual:e} exceeds {:e}", tol.structural_tol));
            code = INFEASIBLE;
        }
    }
    if checks[0].3 {
        let s = schur_check(&m, &tol)?;
        out.kv("schur_check", s.ok);
        out.kv("schur_worst_slack", s.worst_slack / scale + 0.0);
        if !s.ok {
            return Ok(NUMERICAL);
        }
    } else {
        out.kv("schur_check", "skipped");
    }
    Ok(code)
}

fn obstruction(out: &Report, path: &Path, alphas: &[f64]) -> Result<u8, Error> {
    let spec = read_spec(path)?;
    let tol = ToleranceConfig::default();
    let reports = alphas
        .iter()
        .map(|&a| feasibility(&spec, a, &tol))
        .collect::<Result<Vec<_>, _>>()?;
    let Some(first) = reports.first() else {
        return Err(Error::InvalidParameter("at least one alpha is required".into()));
    };
    out.kadison(first);
    println!("alpha,a_f,b_f,defect,case");
    for r in &reports {
        let defect = r.defect.map_or("none".to_string(), |d| d.to_string());
        println!("{},{},{},{defect},{}", r.alpha, r.a_f, r.b_f, r.case);
    }
    let agree = reports.iter().all(|r| r.case == first.case);
    out.kv("alpha_agreement", agree);
    out.prose(match first.case {
        FeasibilityCase::CaseA => "a_f + b_f diverges: always a diagonal of a projection",
        FeasibilityCase::CaseBFeasible => "a_f - b_f is an integer: a diagonal of a projection",
        FeasibilityCase::Infeasible => "a_f - b_f is not an integer: not a diagonal of a projection",
    });
    Ok(if agree { OK } else { NUMERICAL })
}

fn run(cli: Cli) -> Result<u8, Error> {
    let out = Report { human: cli.human };
    match cli.command {
        Command::Majorize { x, y, tol } => majorize(&out, &x, &y, tol),
        Command::Synth { x, y, out_a, out_u } => synth(&out, &x, &y, out_a.as_deref(), out_u.as_deref()),
        Command::Carpenter {
            input,
            alpha,
            depth,
            budget,
            out: dest,
        } => carpenter(&out, &input, alpha, depth, budget, dest.as_deref()),
        Command::Verify { matrix, tol, expect } => verify(&out, &matrix, tol, &expect),
        Command::Obstruction { spec, alpha } => obstruction(&out, &spec, &alpha),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { MALFORMED } else { OK });
        }
    };
    let code = match run(cli) {
        Ok(code) => {
            if code == OK {
                println!("status=ok");
            }
            code
        }
        Err(e) => fail(e),
    };
    ExitCode::from(code)
}
