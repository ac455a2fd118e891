//! `lca` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime/I-O failure, 2 parse or usage error,
//! 3 certificate failure, 4 invalid setting/cost/estimator combination,
//! 5 property-suite failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cost::{CostMatrix, CostSpec};
use crate::error::Error;
use crate::lab::{
    fit_rate, rate_report, run_convergence, theory_rate_family, Benchmark, EstimatorKind, Family,
    DEFAULT_N_MIN,
};
use crate::measure::parse_measure_text;
use crate::settings::{OracleParams, Setting, DEFAULT_ORACLE_M};
use crate::solver::{solve_exact, verify_certificate};
use crate::verify::{run_suite, FaultInjection, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_COMBINATION: i32 = 4;
pub const EXIT_PROPERTY: i32 = 5;

/// Certificate tolerance used by `solve`.
pub const SOLVE_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "lca", version, about = "Exact discrete optimal transport and convergence-rate experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a discrete OT problem between two measure files and print JSON.
    Solve(SolveArgs),
    /// Monte Carlo sweep of the mean absolute deviation over a grid of n.
    Bench(BenchArgs),
    /// Print the theoretical rate of a family, e.g. `rates hoelder a=0.5 d=4`.
    Rates(RatesArgs),
    /// Run randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Source measure file (coordinates then weight per line).
    pub mu: PathBuf,
    /// Target measure file.
    pub nu: PathBuf,
    #[arg(long, default_value = "sql2")]
    pub cost: String,
    /// Rescale the cost matrix onto [0, 1] before solving.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `cube:d1:d2`, `sphere:d1:d2` or `semidiscrete:I:d[:siteSeed]`.
    #[arg(long)]
    pub setting: String,
    #[arg(long, default_value = "sql2")]
    pub cost: String,
    /// `two-sample`, `one-sample-nu` or `one-sample-mu`.
    #[arg(long, default_value = "two-sample")]
    pub estimator: String,
    /// Comma list (`64,128`) or power range (`2^6..2^13`).
    #[arg(long)]
    pub n_grid: Option<String>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ORACLE_M)]
    pub oracle_m: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV output path; metadata goes next to it with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
    /// Smallest n used in the rate fit.
    #[arg(long, default_value_t = DEFAULT_N_MIN)]
    pub n_min: usize,
}

#[derive(Debug, Args)]
pub struct RatesArgs {
    /// general, lipschitz, semiconcave, hoelder or semidiscrete.
    pub family: String,
    /// Parameters as key=value (k=, d=, a=).
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// solver-oracle, certificates, ctransform, decomposition, dependent-coupling or all.
    pub suite: String,
    /// Trials per suite; defaults to each suite's own count.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plant a known bug to check that the suite catches it.
    #[arg(long, value_parser = ["contraction-sign"])]
    pub inject_fault: Option<String>,
}

/// Parses `64,128,256` or `2^a..2^b` into a strictly increasing grid.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::InvalidParameter(format!("bad n grid {s:?}"));
    let s = s.trim();
    let grid: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let exp = |t: &str| -> Result<u32, Error> {
            t.trim()
                .strip_prefix("2^")
                .and_then(|e| e.parse::<u32>().ok())
                .filter(|&e| e < 63)
                .ok_or_else(bad)
        };
        let (a, b) = (exp(lo)?, exp(hi)?);
        if a > b {
            return Err(bad());
        }
        (a..=b).map(|e| 1usize << e).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(format!(
            "n grid {s:?} must be strictly increasing positive integers"
        )));
    }
    Ok(grid)
}

/// Default grid: `2^4..2^13` for one-sample semi-discrete runs, `2^4..2^10`
/// otherwise.
pub fn default_n_grid(setting: &Setting, estimator: EstimatorKind) -> Vec<usize> {
    let top = match (setting, estimator) {
        (Setting::SemiDiscrete(_), EstimatorKind::OneSampleNu) => 13,
        _ => 10,
    };
    (4..=top).map(|e| 1usize << e).collect()
}

/// Theory family whose rate governs a setting: the intrinsic dimension of
/// the lower-dimensional measure with the cost's regularity.
pub fn matching_family(setting: &Setting, cost: &CostSpec) -> Option<Family> {
    let d = match setting {
        Setting::SemiDiscrete(_) => return Some(Family::SemiDiscrete),
        Setting::Cube(c) => c.d1,
        Setting::Sphere(s) => s.d1,
    };
    match cost {
        CostSpec::SqL2 => Some(Family::SemiConcave { d }),
        CostSpec::PowEuclidean(p) if *p == 2.0 => Some(Family::SemiConcave { d }),
        CostSpec::L1 | CostSpec::PowEuclidean(_) => Some(Family::Lipschitz { k: d as f64 }),
        CostSpec::PowCoordinatewise(p) if *p >= 1.0 => Some(Family::Lipschitz { k: d as f64 }),
        CostSpec::PowCoordinatewise(p) => Some(Family::Hoelder { alpha: *p, d }),
        CostSpec::Additive { .. } => None,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, stdout, stderr),
        Command::Bench(a) => cmd_bench(&a, stdout, stderr),
        Command::Rates(a) => cmd_rates(&a, stdout, stderr),
        Command::Verify(a) => cmd_verify(&a, stdout, stderr),
    }
}

fn fail(stderr: &mut dyn Write, code: i32, msg: impl std::fmt::Display) -> i32 {
    let _ = writeln!(stderr, "error: {msg}");
    code
}

#[derive(Serialize)]
struct PlanEntryJson {
    source: usize,
    target: usize,
    mass: f64,
}

#[derive(Serialize)]
struct SolveOutput {
    cost: f64,
    duality_gap: f64,
    certificate_passed: bool,
    plan_entries: Vec<PlanEntryJson>,
    dual_f: Vec<f64>,
    dual_g: Vec<f64>,
}

fn read_measure(path: &Path) -> Result<crate::measure::DiscreteMeasure, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_measure_text(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let mu = match read_measure(&a.mu) {
        Ok(m) => m,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let nu = match read_measure(&a.nu) {
        Ok(m) => m,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let cost: CostSpec = match a.cost.parse() {
        Ok(c) => c,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let c = match CostMatrix::build(&cost, &mu, &nu, a.normalize) {
        Ok(c) => c,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let sol = match solve_exact(&mu, &nu, &c) {
        Ok(s) => s,
        Err(e @ Error::Infeasible(_)) | Err(e @ Error::Overflow(_)) => {
            return fail(stderr, EXIT_CERTIFICATE, e)
        }
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let report = verify_certificate(&sol, &mu, &nu, &c, SOLVE_TOL);
    let out = SolveOutput {
        cost: sol.cost,
        duality_gap: report.duality_gap,
        certificate_passed: report.passed,
        plan_entries: sol
            .plan
            .entries
            .iter()
            .map(|e| PlanEntryJson {
                source: e.source,
                target: e.target,
                mass: e.mass,
            })
            .collect(),
        dual_f: sol.dual_f.clone(),
        dual_g: sol.dual_g.clone(),
    };
    let json = serde_json::to_string_pretty(&out).expect("solution serializes");
    if writeln!(stdout, "{json}").is_err() {
        return EXIT_RUNTIME;
    }
    if report.passed {
        EXIT_OK
    } else {
        fail(stderr, EXIT_CERTIFICATE, format!("certificate failed: {report:?}"))
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

pub fn cmd_bench(a: &BenchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let _ = stdout;
    let setting: Setting = match a.setting.parse() {
        Ok(s) => s,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let cost: CostSpec = match a.cost.parse() {
        Ok(c) => c,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let estimator: EstimatorKind = match a.estimator.parse() {
        Ok(e) => e,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let grid = match &a.n_grid {
        Some(g) => match parse_n_grid(g) {
            Ok(g) => g,
            Err(e) => return fail(stderr, EXIT_PARSE, e),
        },
        None => default_n_grid(&setting, estimator),
    };
    if a.reps < 2 {
        return fail(stderr, EXIT_PARSE, format!("--reps must be >= 2, got {}", a.reps));
    }
    let oracle = match OracleParams::new(a.oracle_m, a.seed) {
        Ok(o) => o,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let sidecar = sidecar_path(&a.out);
    if sidecar == a.out {
        return fail(stderr, EXIT_PARSE, "--out must not end in .json (the sidecar uses it)");
    }
    let threads = a
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
        Ok(p) => p,
        Err(e) => return fail(stderr, EXIT_RUNTIME, e),
    };

    let table = pool.install(|| {
        let bench = Benchmark::prepare(setting, cost.clone(), oracle)?;
        bench.check_estimator(estimator)?;
        run_convergence(&bench, estimator, &grid, a.reps, a.seed)
    });
    let table = match table {
        Ok(t) => t,
        Err(e @ Error::Unsupported(_)) => return fail(stderr, EXIT_COMBINATION, e),
        Err(e) => return fail(stderr, EXIT_RUNTIME, e),
    };

    let written = fs::File::create(&a.out)
        .map_err(Error::from)
        .and_then(|f| table.write_csv(std::io::BufWriter::new(f)))
        .and_then(|_| fs::write(&sidecar, table.metadata_json() + "\n").map_err(Error::from));
    if let Err(e) = written {
        return fail(stderr, EXIT_RUNTIME, e);
    }

    let _ = writeln!(
        stderr,
        "wrote {} rows to {} (metadata {})",
        table.rows.len(),
        a.out.display(),
        sidecar.display()
    );
    match fit_rate(&table, a.n_min) {
        Ok(fit) => {
            let _ = writeln!(
                stderr,
                "fitted slope: {:.4} ± {:.4} over n = {:?}{}",
                fit.slope,
                fit.slope_std_err,
                fit.n_used,
                if fit.dropped_zero { " (zero rows dropped)" } else { "" }
            );
        }
        Err(e) => {
            let _ = writeln!(stderr, "fitted slope: unavailable ({e})");
        }
    }
    if let Some(family) = matching_family(&setting, &cost) {
        if let Ok(rate) = theory_rate_family(&family) {
            let _ = writeln!(
                stderr,
                "theory rate ({family}): {rate}, slope {}",
                rate.asymptotic_slope
            );
        }
    }
    EXIT_OK
}

pub fn cmd_rates(a: &RatesArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let family = match Family::parse(&a.family, &a.params) {
        Ok(f) => f,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    match rate_report(&family) {
        Ok(text) => {
            let _ = write!(stdout, "{text}");
            EXIT_OK
        }
        Err(e) => fail(stderr, EXIT_PARSE, e),
    }
}

pub fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let suites = match Suite::parse_list(&a.suite) {
        Ok(s) => s,
        Err(e) => return fail(stderr, EXIT_PARSE, e),
    };
    let faults = FaultInjection {
        flip_contraction_sign: a.inject_fault.as_deref() == Some("contraction-sign"),
    };
    let mut code = EXIT_OK;
    for suite in suites {
        let trials = a.trials.unwrap_or_else(|| suite.default_trials());
        match run_suite(suite, trials, a.seed, faults) {
            Ok(r) if r.passed() => {
                let _ = writeln!(stdout, "{r}");
            }
            Ok(r) => {
                let _ = writeln!(stderr, "{r}");
                code = EXIT_PROPERTY;
            }
            Err(e) => {
                let _ = writeln!(stderr, "{suite}: error: {e}");
                code = EXIT_PROPERTY;
            }
        }
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_n_grid("4,8,16").unwrap(), vec![4, 8, 16]);
        assert_eq!(parse_n_grid("2^6..2^8").unwrap(), vec![64, 128, 256]);
        for bad in ["8,4", "0,1", "2^5..2^3", "a,b", "", "4,4"] {
            assert!(parse_n_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sidecar_next_to_csv() {
        assert_eq!(sidecar_path(Path::new("out/t.csv")), PathBuf::from("out/t.json"));
        assert_eq!(sidecar_path(Path::new("t")), PathBuf::from("t.json"));
    }

    #[test]
    fn families_for_settings() {
        let s: Setting = "cube:3:10".parse().unwrap();
        assert_eq!(matching_family(&s, &CostSpec::SqL2), Some(Family::SemiConcave { d: 3 }));
        assert_eq!(matching_family(&s, &CostSpec::L1), Some(Family::Lipschitz { k: 3.0 }));
        let s: Setting = "semidiscrete:5:10".parse().unwrap();
        assert_eq!(matching_family(&s, &CostSpec::SqL2), Some(Family::SemiDiscrete));
    }
}
