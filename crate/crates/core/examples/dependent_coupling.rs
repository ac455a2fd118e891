//! Taking mu_n as the projection of nu_n makes the inner transport free, so
//! T_c(mu_n, nu_n) is just the residual functional.
//!
//!     cargo run --example dependent_coupling

use lca_lab::cost::CostSpec;
use lca_lab::lab::{dependent_coupling_check, CouplingConfig, HeadLaw};
use lca_lab::rng::substream;
use lca_lab::settings::SemiDiscreteConfig;

fn main() -> lca_lab::error::Result<()> {
    let cost = CostSpec::additive(2, CostSpec::SqL2, CostSpec::L1)?;
    let mut cfg = CouplingConfig::new(2, 6)?;
    for n in [10, 50, 200] {
        let r = dependent_coupling_check(&cfg, &cost, n, &mut substream(1, "coupling", n as u64, 0))?;
        println!("uniform head, n = {n:>3}: residual {r:.1e}");
    }
    cfg.head = HeadLaw::Sites(SemiDiscreteConfig::new(4, 2, 42)?);
    let r = dependent_coupling_check(&cfg, &cost, 100, &mut substream(1, "coupling", 100, 1))?;
    println!("four-site head, n = 100: residual {r:.1e}");
    Ok(())
}
