//! Rate classes from the covering-number exponent and for the smooth cost
//! families, plus the entropy-integral bound itself.
//!
//!     cargo run --example theory_rates

use lca_lab::lab::{dudley_rademacher_bound, rate_report, Family};

fn main() -> lca_lab::error::Result<()> {
    let families = [
        Family::General { k: 1.0 },
        Family::General { k: 2.0 },
        Family::General { k: 4.0 },
        Family::SemiDiscrete,
        Family::SemiConcave { d: 4 },
        Family::SemiConcave { d: 10 },
        Family::Hoelder { alpha: 1.5, d: 3 },
        Family::Hoelder { alpha: 1.0, d: 7 },
    ];
    for f in &families {
        println!("{}", rate_report(f)?);
    }

    println!("bound on R_n with K = 1, eps0 = 1:");
    for n in [100u64, 10_000, 1_000_000] {
        let row: Vec<String> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&k| match dudley_rademacher_bound(k, 1.0, 1.0, n) {
                Ok(b) => format!("k={k}: {b:.4}"),
                Err(_) => format!("k={k}: n too small"),
            })
            .collect();
        println!("  n = {n:>7}  {}", row.join("  "));
    }
    Ok(())
}
