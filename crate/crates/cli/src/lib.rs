//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | invalid input |
//! | 2 | structural failure (pattern not chordal) |
//! | 3 | admissibility or positivity failure |
//! | 4 | usage error |

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use schurmult::completion::{
    complete, complete_with_fill_in, counterexample_c4, verify_extension, CompletionError, GridConfig,
};
use schurmult::cones::verify_pmn;
use schurmult::json::{CompletionWire, MatrixWire, MultiplierWire, PatternWire, TwoSidedWire, WireError};
use schurmult::linalg::{psd_check, HermitianMatrix, DEFAULT_PSD_TOL};
use schurmult::multiplier::{
    admissible_chordal, admissible_sampled, schur_apply_masked, Admissibility, BlockMultiplier, KernelProbe,
    PartialBlockMultiplier, SampledAdmissibility,
};
use schurmult::pattern::{clique_tree, is_chordal, Chordality, Pattern};
use schurmult::schur_engine::{factorize, norm_bounds};

pub mod report;

use report::{
    AdmissibilityMethod, AdmissibilityReport, ApplyReport, ChordalReport, CompleteReport, CounterexampleReport,
    FactorizeReport, VerificationWire,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_STRUCTURAL: i32 = 2;
pub const EXIT_ADMISSIBILITY: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "schurmult", version, about = "Positive completion and factorization of block Schur multipliers")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Relative PSD tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Random trials for sampled checks.
    #[arg(long, global = true, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Strategy for non-chordal patterns in `complete`.
    #[arg(long = "fill", global = true, value_enum, default_value_t = FillStrategy::Reject)]
    pub fill: FillStrategy,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FillStrategy {
    Reject,
    Auto,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chordality test of a pattern; prints an elimination order or a chordless cycle.
    Chordal { input: PathBuf },
    /// Admissibility of a partial multiplier.
    Admissible { input: PathBuf },
    /// Positive completion of an admissible partial multiplier.
    Complete { input: PathBuf },
    /// Two-sided factorization of a full multiplier.
    Factorize { input: PathBuf },
    /// Schur action of a multiplier on a scalar kernel.
    Apply { multiplier: PathBuf, kernel: PathBuf },
    /// Min/max cone equivalence check over M_n(M_k).
    VerifyPmn {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Four-cycle obstruction to completion.
    Counterexample {
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 36)]
        phases: usize,
        #[arg(long = "modulus-step", default_value_t = 0.1)]
        modulus_step: f64,
    },
}

/// Early exit carrying a code, a diagnostic and optionally a report to emit.
struct Failure {
    code: i32,
    message: String,
    report: Option<String>,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            report: None,
        }
    }

    fn with_report<T: Serialize>(mut self, report: &T) -> Self {
        self.report = Some(to_json(report));
        self
    }
}

type Outcome = Result<(String, String), Failure>;

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn input_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| input_failure(path, e))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| input_failure(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read_text(path)?).map_err(|e| input_failure(path, e))
}

fn wire<T>(path: &Path, r: Result<T, WireError>) -> Result<T, Failure> {
    r.map_err(|e| input_failure(path, e))
}

/// Accepts a pattern file or a multiplier file.
fn read_pattern(path: &Path) -> Result<Pattern, Failure> {
    let text = read_text(path)?;
    match serde_json::from_str::<PatternWire>(&text) {
        Ok(w) => wire(path, w.to_pattern()),
        Err(pattern_err) => match serde_json::from_str::<MultiplierWire>(&text) {
            Ok(m) => Ok(wire(path, m.to_multiplier())?.pattern().clone()),
            Err(_) => Err(input_failure(path, pattern_err)),
        },
    }
}

fn read_multiplier(path: &Path) -> Result<PartialBlockMultiplier, Failure> {
    let w: MultiplierWire = read_json(path)?;
    wire(path, w.to_multiplier())
}

fn check_config(cfg: &RunConfig) -> Result<(), Failure> {
    if !(cfg.tol >= 0.0 && cfg.tol.is_finite()) {
        return Err(Failure::new(EXIT_USAGE, format!("--tol must be a finite value >= 0, got {}", cfg.tol)));
    }
    if cfg.trials == 0 {
        return Err(Failure::new(EXIT_USAGE, "--trials must be at least 1"));
    }
    Ok(())
}

fn cmd_chordal(input: &Path) -> Outcome {
    let p = read_pattern(input)?;
    match is_chordal(&p) {
        Chordality::Chordal { order } => {
            let tree = clique_tree(&p).expect("chordal pattern has a clique tree");
            let report = ChordalReport {
                n: p.n(),
                chordal: true,
                elimination_order: Some(order.clone()),
                cliques: Some(tree.cliques),
                cycle: None,
            };
            Ok((to_json(&report), format!("chordal; elimination order {order:?}")))
        }
        Chordality::NotChordal { cycle } => {
            let report = ChordalReport {
                n: p.n(),
                chordal: false,
                elimination_order: None,
                cliques: None,
                cycle: Some(cycle.clone()),
            };
            Err(Failure::new(EXIT_STRUCTURAL, format!("not chordal; chordless cycle {cycle:?}")).with_report(&report))
        }
    }
}

fn probe_label(p: &KernelProbe) -> String {
    match p {
        KernelProbe::Basis(x) => format!("basis {x}"),
        KernelProbe::CliqueIndicator(c) => format!("clique indicator {c:?}"),
        KernelProbe::Random(t) => format!("random trial {t}"),
    }
}

fn cmd_admissible(input: &Path, cfg: &RunConfig) -> Outcome {
    let phi = read_multiplier(input)?;
    let report = if is_chordal(phi.pattern()).is_chordal() {
        let verdict = admissible_chordal(&phi, cfg.tol).map_err(|e| input_failure(input, e))?;
        match verdict {
            Admissibility::Admissible => AdmissibilityReport {
                admissible: true,
                method: AdmissibilityMethod::Cliques,
                exact: true,
                clique: None,
                probe: None,
                min_eig: None,
                probes: None,
            },
            Admissibility::Rejected { clique, min_eig } => AdmissibilityReport {
                admissible: false,
                method: AdmissibilityMethod::Cliques,
                exact: true,
                clique: Some(clique),
                probe: None,
                min_eig: Some(min_eig),
                probes: None,
            },
        }
    } else {
        let verdict = admissible_sampled(&phi, cfg.trials, cfg.seed, cfg.tol).map_err(|e| input_failure(input, e))?;
        match verdict {
            SampledAdmissibility::NoViolationFound { probes } => AdmissibilityReport {
                admissible: true,
                method: AdmissibilityMethod::Sampled,
                exact: false,
                clique: None,
                probe: None,
                min_eig: None,
                probes: Some(probes),
            },
            SampledAdmissibility::Violation { probe, min_eig, .. } => AdmissibilityReport {
                admissible: false,
                method: AdmissibilityMethod::Sampled,
                exact: true,
                clique: None,
                probe: Some(probe_label(&probe)),
                min_eig: Some(min_eig),
                probes: None,
            },
        }
    };
    if report.admissible {
        let note = if report.exact {
            "admissible"
        } else {
            "no violation found (pattern not chordal, sampled check only)"
        };
        Ok((to_json(&report), note.to_string()))
    } else {
        let message = match (&report.clique, &report.probe) {
            (Some(c), _) => format!("not admissible: clique {c:?} has minimum eigenvalue {:e}", report.min_eig.unwrap_or(f64::NAN)),
            (_, Some(p)) => format!("not admissible: {p} maps to a kernel with minimum eigenvalue {:e}", report.min_eig.unwrap_or(f64::NAN)),
            _ => "not admissible".into(),
        };
        Err(Failure::new(EXIT_ADMISSIBILITY, message).with_report(&report))
    }
}

fn completion_failure(input: &Path, n: usize, e: CompletionError) -> Failure {
    match e {
        CompletionError::NotChordal { ref cycle } => {
            let report = ChordalReport {
                n,
                chordal: false,
                elimination_order: None,
                cliques: None,
                cycle: Some(cycle.clone()),
            };
            Failure::new(EXIT_STRUCTURAL, format!("{e}; rerun with --fill auto to complete through a chordal supergraph"))
                .with_report(&report)
        }
        CompletionError::NotAdmissible { ref clique, min_eig } | CompletionError::FillInRejected { ref clique, min_eig } => {
            let report = AdmissibilityReport {
                admissible: false,
                method: AdmissibilityMethod::Cliques,
                exact: matches!(e, CompletionError::NotAdmissible { .. }),
                clique: Some(clique.clone()),
                probe: None,
                min_eig: Some(min_eig),
                probes: None,
            };
            Failure::new(EXIT_ADMISSIBILITY, e.to_string()).with_report(&report)
        }
        CompletionError::CompletionFailure { .. } => Failure::new(EXIT_ADMISSIBILITY, e.to_string()),
        other => input_failure(input, other),
    }
}

fn cmd_complete(input: &Path, cfg: &RunConfig) -> Outcome {
    let phi = read_multiplier(input)?;
    let mut notes = Vec::new();
    let (result, added) = match (is_chordal(phi.pattern()).is_chordal(), cfg.fill) {
        (false, FillStrategy::Auto) => {
            notes.push("warning: pattern is not chordal; completing through a chordal supergraph".to_string());
            let out = complete_with_fill_in(&phi, cfg.tol).map_err(|e| completion_failure(input, phi.n(), e))?;
            (out.result, out.added)
        }
        _ => (complete(&phi, cfg.tol).map_err(|e| completion_failure(input, phi.n(), e))?, Vec::new()),
    };
    let ext = verify_extension(&phi, &result.psi, cfg.trials, cfg.seed);
    let report = CompleteReport {
        completion: CompletionWire::from_result(&result, &added),
        verification: VerificationWire::from(&ext),
    };
    if !ext.passed() {
        return Err(Failure::new(
            EXIT_ADMISSIBILITY,
            format!("completion failed verification: {}", ext.failures.join("; ")),
        )
        .with_report(&report));
    }
    notes.push(format!(
        "completed {} entries; minimum eigenvalue {:e}",
        result.filled.len(),
        result.min_eig
    ));
    Ok((to_json(&report), notes.join("\n")))
}

fn cmd_factorize(input: &Path, cfg: &RunConfig) -> Outcome {
    let partial = read_multiplier(input)?;
    let phi = BlockMultiplier::new(partial).map_err(|_| {
        Failure::new(
            EXIT_USAGE,
            format!(
                "{}: multiplier is only partially defined; run `schurmult complete` first",
                input.display()
            ),
        )
    })?;
    let fac = factorize(&phi).map_err(|e| input_failure(input, e))?;
    let bounds = norm_bounds(&phi, &fac, cfg.trials, cfg.seed).map_err(|e| input_failure(input, e))?;
    let report = FactorizeReport {
        factorization: TwoSidedWire::from_factorization(&fac),
        cb_norm_lower: bounds.lower,
        reconstruction_error: fac.reconstruction_error(&phi),
    };
    let kind = if fac.symmetric {
        "symmetric (B_i = A_i*)"
    } else {
        "two-sided"
    };
    let note = format!(
        "{kind} factorization with {} summands; row bound {:.6e}, column bound {:.6e}, cb norm in [{:.6e}, {:.6e}]",
        fac.m,
        fac.row_bound,
        fac.col_bound,
        bounds.lower,
        bounds.upper
    );
    Ok((to_json(&report), note))
}

fn cmd_apply(mult: &Path, kernel: &Path) -> Outcome {
    let phi = read_multiplier(mult)?;
    let k: schurmult::json::KernelWire = read_json(kernel)?;
    let k = wire(kernel, k.to_kernel())?;
    if k.n() != phi.n() {
        return Err(input_failure(kernel, format!("kernel has n = {}, multiplier has n = {}", k.n(), phi.n())));
    }
    if !phi.is_full() && !k.is_supported_in(phi.pattern()) {
        return Err(input_failure(kernel, "kernel is not supported in the multiplier's pattern"));
    }
    let out = schur_apply_masked(&phi, &k).map_err(|e| input_failure(mult, e))?;
    let min_eig = HermitianMatrix::new(out.clone())
        .ok()
        .and_then(|h| psd_check(&h, DEFAULT_PSD_TOL).ok())
        .map(|v| v.min_eig());
    let report = ApplyReport {
        result: MatrixWire::from_matrix(&out),
        min_eig,
    };
    let note = match min_eig {
        Some(e) => format!("output is Hermitian; minimum eigenvalue {e:e}"),
        None => "output is not Hermitian".to_string(),
    };
    Ok((to_json(&report), note))
}

fn cmd_verify_pmn(n: usize, k: usize, cfg: &RunConfig) -> Outcome {
    let report = verify_pmn(n, k, cfg.trials, cfg.seed).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let note = format!(
        "{} trials, {} breaches, max reconstruction error {:e}",
        report.trials, report.breaches, report.max_err
    );
    if report.passed() {
        Ok((to_json(&report), note))
    } else {
        Err(Failure::new(EXIT_ADMISSIBILITY, note).with_report(&report))
    }
}

fn cmd_counterexample(config: GridConfig) -> Outcome {
    let valid = |v: f64| v.is_finite() && v > 0.0;
    if !valid(config.step) || !valid(config.radius) || !valid(config.modulus_step) || config.phases == 0 {
        return Err(Failure::new(EXIT_USAGE, "grid step, radius, modulus step and phase count must be positive"));
    }
    let demo = counterexample_c4(config).map_err(|e| Failure::new(EXIT_INPUT, e.to_string()))?;
    let report = CounterexampleReport::from(&demo);
    let note = format!(
        "edge blocks PSD (minimum eigenvalues {:?}); best completion has minimum eigenvalue {:e}, epsilon = {:e}",
        demo.edge_block_min_eigs,
        demo.real_max_min_eig.max(demo.complex_max_min_eig),
        demo.epsilon
    );
    if demo.certified {
        Ok((to_json(&report), note))
    } else {
        Err(Failure::new(EXIT_ADMISSIBILITY, format!("grid did not certify: {note}")).with_report(&report))
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    check_config(&cli.config)?;
    let cfg = &cli.config;
    match &cli.command {
        Command::Chordal { input } => cmd_chordal(input),
        Command::Admissible { input } => cmd_admissible(input, cfg),
        Command::Complete { input } => cmd_complete(input, cfg),
        Command::Factorize { input } => cmd_factorize(input, cfg),
        Command::Apply { multiplier, kernel } => cmd_apply(multiplier, kernel),
        Command::VerifyPmn { n, k } => cmd_verify_pmn(*n, *k, cfg),
        &Command::Counterexample {
            step,
            radius,
            phases,
            modulus_step,
        } => cmd_counterexample(GridConfig {
            step,
            radius,
            phases,
            modulus_step,
        }),
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(report: &str, out: Option<&Path>, stdout: &mut dyn Write) -> io::Result<()> {
    match out {
        Some(path) => write_atomic(path, report),
        None => stdout.write_all(report.as_bytes()),
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let out = cli.config.out.as_deref();
    let (code, report, message) = match dispatch(&cli) {
        Ok((report, note)) => (EXIT_OK, Some(report), note),
        Err(f) => (f.code, f.report, format!("error: {}", f.message)),
    };
    if let Some(report) = report {
        if let Err(e) = emit(&report, out, stdout) {
            let _ = writeln!(stderr, "error: cannot write report: {e}");
            return EXIT_INPUT;
        }
    }
    if !message.is_empty() {
        let _ = writeln!(stderr, "{message}");
    }
    code
}
