//! One-sample semi-discrete estimator: finitely supported mu on 5 sites
//! in [0,1]^10, nu uniform. Deviations decay like n^{-1/2}.
//!
//!     cargo run --release --example semidiscrete_rate [max_exponent] [reps]

use lca_lab::cost::CostSpec;
use lca_lab::lab::{fit_rate, run_convergence, Benchmark, EstimatorKind, DEFAULT_N_MIN};
use lca_lab::settings::OracleParams;

fn main() -> lca_lab::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let top: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(11);
    let reps: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(50);

    let bench = Benchmark::prepare("semidiscrete:5:10".parse()?, CostSpec::SqL2, OracleParams::default())?;
    let p = bench.population();
    println!("population cost {:.6} (SE {:.1e})", p.value, p.std_err);

    let grid: Vec<usize> = (6..=top).map(|e| 1 << e).collect();
    let table = run_convergence(&bench, EstimatorKind::OneSampleNu, &grid, reps, 0)?;
    for r in &table.rows {
        println!("n = {:>5}  delta = {:.5} ± {:.5}", r.n, r.delta_hat, r.std_err);
    }
    let fit = fit_rate(&table, DEFAULT_N_MIN)?;
    println!("slope {:.3} ± {:.3} (parametric rate: -0.5)", fit.slope, fit.slope_std_err);
    Ok(())
}
