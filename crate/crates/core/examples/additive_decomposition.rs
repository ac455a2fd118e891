//! Under an additive cost the transport cost splits into a low-dimensional
//! OT problem plus a linear residual term.
//!
//!     cargo run --example additive_decomposition

use lca_lab::cost::{CostMatrix, CostSpec};
use lca_lab::lab::decomposition_residual;
use lca_lab::measure::{push_forward_projection, residual_cost_functional, DiscreteMeasure};
use lca_lab::rng::substream;
use lca_lab::solver::solve_exact;
use rand::Rng;

fn main() -> lca_lab::error::Result<()> {
    let (s, d, m, n) = (1, 4, 12, 15);
    let mut rng = substream(11, "additive-example", 0, 0);
    let mu = DiscreteMeasure::uniform_flat(s, (0..m * s).map(|_| rng.random()).collect())?;
    let nu = DiscreteMeasure::uniform_flat(d, (0..n * d).map(|_| rng.random()).collect())?;
    let cost = CostSpec::additive(s, CostSpec::SqL2, CostSpec::SqL2)?;

    let full = solve_exact(&mu, &nu, &CostMatrix::build(&cost, &mu, &nu, false)?)?.cost;
    let head = push_forward_projection(&nu, s)?;
    let inner = solve_exact(&mu, &head, &CostMatrix::build(&CostSpec::SqL2, &mu, &head, false)?)?.cost;
    let resid = residual_cost_functional(&nu, s, &CostSpec::SqL2)?;

    println!("T_c(mu, nu)          = {full:.12}");
    println!("T_c1(mu, p#nu) + R(nu) = {:.12}  ({inner:.6} + {resid:.6})", inner + resid);
    println!("residual              = {:.2e}", decomposition_residual(&mu, &nu, &cost)?);
    Ok(())
}
