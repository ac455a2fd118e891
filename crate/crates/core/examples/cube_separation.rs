//! mu uniform on [0,1]^d1 x {0}, nu uniform on [0,1]^10. The two-sample
//! rate follows the smaller dimension d1, not the ambient 10.
//!
//!     cargo run --release --example cube_separation [reps]

use lca_lab::cost::CostSpec;
use lca_lab::lab::{fit_rate, run_convergence, Benchmark, EstimatorKind, DEFAULT_N_MIN};
use lca_lab::settings::OracleParams;

fn main() -> lca_lab::error::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let grid: Vec<usize> = (6..=9).map(|e| 1 << e).collect();
    for d1 in [1, 2, 5, 10] {
        let setting = format!("cube:{d1}:10").parse()?;
        let bench = Benchmark::prepare(setting, CostSpec::SqL2, OracleParams::default())?;
        let table = run_convergence(&bench, EstimatorKind::TwoSample, &grid, reps, 0)?;
        let fit = fit_rate(&table, DEFAULT_N_MIN)?;
        println!(
            "d1 = {d1:>2}: T = {:.3}, slope {:.3}, delta at n = 512: {:.4}",
            bench.population().value,
            fit.slope,
            table.rows.last().map_or(f64::NAN, |r| r.delta_hat)
        );
    }
    Ok(())
}
