//! Exact OT between two small measures, with the dual certificate.
//!
//!     cargo run --example solve_exact

use lca_lab::cost::{CostMatrix, CostSpec};
use lca_lab::measure::DiscreteMeasure;
use lca_lab::solver::{solve_exact, verify_certificate};

fn main() -> lca_lab::error::Result<()> {
    let mu = DiscreteMeasure::new(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], &[0.5, 0.25, 0.25])?;
    let nu = DiscreteMeasure::new(&[[1.0, 1.0], [0.5, 0.5]], &[0.4, 0.6])?;
    let c = CostMatrix::build(&CostSpec::SqL2, &mu, &nu, true)?;

    let sol = solve_exact(&mu, &nu, &c)?;
    println!("T_c(mu, nu) = {:.6}", sol.cost);
    for e in &sol.plan.entries {
        println!("  x{} -> y{}  mass {:.4}", e.source, e.target, e.mass);
    }
    println!("f = {:?}", sol.dual_f);
    println!("g = {:?}", sol.dual_g);

    let report = verify_certificate(&sol, &mu, &nu, &c, 1e-9);
    println!("certificate passed: {} (worst residual {:.1e})", report.passed, report.worst());
    Ok(())
}
