//! The c-transform is order reversing, a sup-norm contraction and
//! idempotent after two steps.
//!
//!     cargo run --example ctransform_contraction

use lca_lab::cost::CostMatrix;
use lca_lab::ctransform::{c_transform_xy, contraction_gap, double_transform, feasibility_check, PotentialVector};

fn main() -> lca_lab::error::Result<()> {
    let c = CostMatrix::from_rows(&[vec![0.0, 0.7, 1.0], vec![0.4, 0.1, 0.9], vec![0.8, 0.3, 0.2]])?;
    let f1 = PotentialVector::source(vec![0.3, -0.2, 0.5])?;
    let f2 = PotentialVector::source(vec![0.0, 0.1, 0.1])?;

    let f1c = c_transform_xy(&f1, &c)?;
    let f1cc = double_transform(&f1, &c)?;
    println!("f     = {:?}", f1.values());
    println!("f^c   = {:?}", f1c.values());
    println!("f^cc  = {:?}  (>= f)", f1cc.values());
    println!("f^ccc = {:?}  (= f^c)", c_transform_xy(&f1cc, &c)?.values());
    println!("contraction gap ||f1-f2|| - ||f1^c-f2^c|| = {:.4}", contraction_gap(&f1, &f2, &c)?);

    // f^cc is c-concave, so it is feasible once values sit in [0, 1]
    let shift = f1cc.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let g = PotentialVector::source(f1cc.values().iter().map(|v| v - shift).collect())?;
    println!("shifted f^cc feasible: {}", feasibility_check(&g, &c, 1e-12));
    println!("f itself feasible: {}", feasibility_check(&f1, &c, 1e-12));
    Ok(())
}
