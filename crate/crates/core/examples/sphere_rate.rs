//! mu uniform on S^1 embedded in R^6, nu uniform on S^5, squared
//! Euclidean cost. Writes the table as CSV plus JSON metadata.
//!
//!     cargo run --release --example sphere_rate [out.csv]

use std::fs::File;

use lca_lab::cost::CostSpec;
use lca_lab::lab::{fit_rate, run_convergence, Benchmark, EstimatorKind, DEFAULT_N_MIN};
use lca_lab::settings::OracleParams;

fn main() -> lca_lab::error::Result<()> {
    let out = std::env::args().nth(1);
    let bench = Benchmark::prepare("sphere:1:5".parse()?, CostSpec::SqL2, OracleParams::new(2_000_000, 1)?)?;
    let p = bench.population();
    println!("population cost {:.5} ± {:.1e} (14/15 = {:.5})", p.value, p.std_err, 14.0 / 15.0);

    let grid: Vec<usize> = (5..=9).map(|e| 1 << e).collect();
    let table = run_convergence(&bench, EstimatorKind::TwoSample, &grid, 40, 0)?;
    let fit = fit_rate(&table, DEFAULT_N_MIN)?;
    println!("slope {:.3}", fit.slope);
    match out {
        Some(path) => {
            table.write_csv(File::create(&path)?)?;
            println!("wrote {path}");
        }
        None => print!("{}", table.to_csv_string()),
    }
    println!("{}", table.metadata_json());
    Ok(())
}
