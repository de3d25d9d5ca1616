//! Command-line front end. Exit codes: 0 when every requested verification
//! passes, 1 when one fails, 2 for usage errors, bad parameters or unreadable
//! files.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::constructions::{
    construct, enumerate_families, sweep_params, Convention, FamilyId, FamilyParams,
};
use crate::io::{load_family, save_family, save_report, save_state, IoError};
use crate::mixed::{certify_rho_perp, rho_perp};
use crate::verification::{verify_family, VerificationReport, VerifyConfig, DEFAULT_SEED};

pub const SEED_ENV: &str = "UEBK_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "uebk",
    version,
    about = "Construct and verify unextendible entangled bases with fixed Schmidt number"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one family and write it as JSON.
    Construct(ConstructArgs),
    /// Verify a family file.
    Verify(VerifyArgs),
    /// List the admissible families at (d, d', k) with their member counts.
    Enumerate(DimArgs),
    /// Build and certify the complementary mixed state of a family file.
    RhoPerp(RhoPerpArgs),
    /// Verify every admissible family with d' up to a bound.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct DimArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    dprime: usize,
    #[arg(long)]
    k: usize,
}

#[derive(Debug, Args)]
struct ConstructArgs {
    #[arg(long, value_parser = parse_family_id)]
    family: FamilyId,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    dprime: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "prop2-convention", value_parser = parse_convention)]
    prop2_convention: Option<Convention>,
    #[arg(long = "prop4-convention", value_parser = parse_convention)]
    prop4_convention: Option<Convention>,
    /// Accept k = d (PROP1 and EQ8 only).
    #[arg(long)]
    umeb: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long)]
    tol_orth: Option<f64>,
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides UEBK_SEED; defaults to 42.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    file: PathBuf,
    #[command(flatten)]
    check: CheckArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RhoPerpArgs {
    file: PathBuf,
    #[arg(long)]
    k: usize,
    #[command(flatten)]
    check: CheckArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 10)]
    max_dprime: usize,
    #[command(flatten)]
    check: CheckArgs,
    #[arg(long)]
    report_dir: Option<PathBuf>,
}

fn parse_family_id(s: &str) -> Result<FamilyId, String> {
    s.parse()
        .map_err(|e: crate::constructions::ParamError| e.to_string())
}

fn parse_convention(s: &str) -> Result<Convention, String> {
    s.parse()
        .map_err(|e: crate::constructions::ParamError| e.to_string())
}

/// Flag beats environment beats the default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64, String> {
    match (flag, env) {
        (Some(seed), _) => Ok(seed),
        (None, Some(raw)) => raw
            .trim()
            .parse()
            .map_err(|_| format!("{SEED_ENV}={raw:?} is not an unsigned integer")),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

impl CheckArgs {
    fn config(&self) -> Result<VerifyConfig, String> {
        let defaults = VerifyConfig::default();
        let env = std::env::var(SEED_ENV).ok();
        let config = VerifyConfig {
            tol_orth: self.tol_orth.unwrap_or(defaults.tol_orth),
            tol_rank: self.tol_rank.unwrap_or(defaults.tol_rank),
            trials: self.trials.unwrap_or(defaults.trials),
            seed: resolve_seed(self.seed, env.as_deref())?,
        };
        if config.trials == 0 {
            return Err("--trials must be at least 1".into());
        }
        Ok(config)
    }
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Parse `argv` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Construct(args) => run_construct(args),
        Command::Verify(args) => run_verify(args),
        Command::Enumerate(args) => run_enumerate(args),
        Command::RhoPerp(args) => run_rho_perp(args),
        Command::Sweep(args) => run_sweep(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Verification) => 1,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn run_construct(args: ConstructArgs) -> Result<(), Failure> {
    let convention = match args.family {
        FamilyId::Prop2 => args.prop2_convention,
        FamilyId::Prop4 => args.prop4_convention,
        _ => None,
    };
    if convention.is_none() && (args.prop2_convention.is_some() || args.prop4_convention.is_some())
    {
        return Err(Failure::Usage(format!(
            "{} does not take a convention",
            args.family
        )));
    }
    let params = FamilyParams::from_parts(
        args.family,
        args.d,
        args.dprime,
        args.k,
        args.q,
        args.m,
        convention,
        args.umeb,
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let family = construct(&params).map_err(|e| Failure::Usage(e.to_string()))?;
    save_family(&family, &args.out)?;
    println!(
        "{params}: {} members -> {}",
        family.len(),
        args.out.display()
    );
    Ok(())
}

fn print_report(report: &VerificationReport) {
    println!("family: {}", report.params);
    println!(
        "count: {} (expected {}, actual {})",
        ok_str(report.count.ok),
        report.count.expected,
        report.count.actual
    );
    println!(
        "orthonormality: {} (max deviation {:e})",
        ok_str(report.orthonormality.ok),
        report.orthonormality.max_gram_deviation
    );
    println!(
        "schmidt rank: {} (max coefficient deviation {:e})",
        ok_str(report.schmidt.ok),
        report.schmidt.max_coefficient_deviation
    );
    match (&report.complement_dim, &report.generic_rank) {
        (Some(dim), Some(g)) => println!(
            "unextendibility: {} (complement dim {dim}, generic max rank {} over {} trials, seed {}, structural bound {})",
            ok_str(report.unextendible_ok),
            g.max_rank,
            g.trials,
            g.seed,
            report.structural_bound.map_or("-".to_string(), |b| b.to_string())
        ),
        _ => println!("unextendibility: FAIL (complement not extracted)"),
    }
    if let Some(printed) = &report.printed_form {
        println!(
            "printed complement form: {}",
            if printed.matches {
                "matches"
            } else {
                "differs from observed support"
            }
        );
    }
    println!("verdict: {:?}", report.verdict);
}

fn ok_str(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let config = args.check.config().map_err(Failure::Usage)?;
    let family = load_family(&args.file)?;
    let report = verify_family(&family, &config);
    print_report(&report);
    if let Some(path) = &args.report {
        save_report(&report, path)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

/// One line per admissible family, e.g. `PROP2 q=1: 24 members`.
pub fn enumerate_lines(d: usize, dprime: usize, k: usize) -> Result<Vec<String>, String> {
    let families = enumerate_families(d, dprime, k).map_err(|e| e.to_string())?;
    Ok(families
        .iter()
        .map(|p| {
            let mut name = p.family().to_string();
            if let Some(q) = p.q() {
                name.push_str(&format!(" q={q}"));
            }
            if let Some(m) = p.m_offset() {
                name.push_str(&format!(" m={m}"));
            }
            format!("{name}: {} members", p.expected_count())
        })
        .collect())
}

fn run_enumerate(args: DimArgs) -> Result<(), Failure> {
    for line in enumerate_lines(args.d, args.dprime, args.k).map_err(Failure::Usage)? {
        println!("{line}");
    }
    Ok(())
}

fn run_rho_perp(args: RhoPerpArgs) -> Result<(), Failure> {
    let config = args.check.config().map_err(Failure::Usage)?;
    let family = load_family(&args.file)?;
    let rho = rho_perp(&family).map_err(|e| Failure::Usage(e.to_string()))?;
    let cert = certify_rho_perp(
        &rho,
        family.len(),
        args.k,
        config.trials,
        config.seed,
        config.tol_rank,
    )
    .map_err(|e| Failure::Usage(e.to_string()))?;
    println!("family: {}", family.params());
    println!("trace: {}", cert.trace);
    println!("min eigenvalue: {:e}", cert.min_eigenvalue);
    println!("rank: {} (expected {})", cert.rank, cert.expected_rank);
    println!(
        "max eigenvalue deviation: {:e}",
        cert.max_eigenvalue_deviation
    );
    println!(
        "range max Schmidt rank: {} ({} k={})",
        cert.range.max_rank_observed,
        if cert.range.below_k {
            "below"
        } else {
            "NOT below"
        },
        args.k
    );
    println!("certificate: {}", ok_str(cert.ok));
    if let Some(path) = &args.out {
        save_state(&rho, &cert, path)?;
    }
    if cert.ok {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

/// Verify every family of the sweep in parallel; results keep sweep order.
pub fn sweep_reports(max_dprime: usize, config: &VerifyConfig) -> Vec<VerificationReport> {
    sweep_params(max_dprime)
        .par_iter()
        .map(|p| {
            let family = construct(p).expect("enumerated params are admissible");
            verify_family(&family, config)
        })
        .collect()
}

fn run_sweep(args: SweepArgs) -> Result<(), Failure> {
    let config = args.check.config().map_err(Failure::Usage)?;
    let reports = sweep_reports(args.max_dprime, &config);
    if let Some(dir) = &args.report_dir {
        fs::create_dir_all(dir).map_err(|source| IoError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for report in &reports {
            save_report(report, &dir.join(format!("{}.json", report.params.key())))?;
        }
    }
    let failures: Vec<&VerificationReport> = reports.iter().filter(|r| !r.passed()).collect();
    for r in &failures {
        println!("FAIL {} {:?}", r.params, r.failed);
    }
    println!(
        "sweep d' <= {}: {} families, {} passed, {} failed",
        args.max_dprime,
        reports.len(),
        reports.len() - failures.len(),
        failures.len()
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}
