//! Discrete c-transforms on a cost matrix.
//!
//! All transforms act on the matrix's stored values, so for a normalized
//! matrix potentials live in normalized units. The infimum runs over the
//! given support only.

use crate::cost::CostMatrix;
use crate::error::{Error, Result};

/// Which support a potential is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Source,
    Target,
}

/// Finite potential on one side of a cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialVector {
    values: Vec<f64>,
    side: Side,
}

impl PotentialVector {
    pub fn new(values: Vec<f64>, side: Side) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("potential value {v}")));
        }
        Ok(PotentialVector { values, side })
    }

    pub fn source(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Side::Source)
    }

    pub fn target(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Side::Target)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.values)
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc: f64, (x, y)| acc.max((x - y).abs()))
}

/// `g[j] = min_i (C[i][j] − f[i])` on raw slices.
pub(crate) fn transform_to_target(c: &CostMatrix, f: &[f64]) -> Vec<f64> {
    let mut g = vec![f64::INFINITY; c.cols()];
    for (i, &fi) in f.iter().enumerate() {
        for (gj, &cij) in g.iter_mut().zip(c.row(i)) {
            let v = cij - fi;
            if v < *gj {
                *gj = v;
            }
        }
    }
    g
}

/// `f[i] = min_j (C[i][j] − g[j])` on raw slices.
pub(crate) fn transform_to_source(c: &CostMatrix, g: &[f64]) -> Vec<f64> {
    (0..c.rows())
        .map(|i| {
            c.row(i)
                .iter()
                .zip(g)
                .fold(f64::INFINITY, |acc, (cij, gj)| acc.min(cij - gj))
        })
        .collect()
}

fn expect_side(p: &PotentialVector, side: Side, len: usize) -> Result<()> {
    if p.side != side {
        return Err(Error::InvalidParameter(format!(
            "potential is indexed by {:?}, expected {:?}",
            p.side, side
        )));
    }
    if p.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: p.len(),
        });
    }
    Ok(())
}

/// `f^c(y_j) = min_i C[i][j] − f(x_i)`.
pub fn c_transform_xy(f: &PotentialVector, c: &CostMatrix) -> Result<PotentialVector> {
    expect_side(f, Side::Source, c.rows())?;
    PotentialVector::target(transform_to_target(c, &f.values))
}

/// `g^c(x_i) = min_j C[i][j] − g(y_j)`.
pub fn c_transform_yx(g: &PotentialVector, c: &CostMatrix) -> Result<PotentialVector> {
    expect_side(g, Side::Target, c.cols())?;
    PotentialVector::source(transform_to_source(c, &g.values))
}

/// `(f^c)^c`; dominates `f` pointwise, with equality iff `f` is c-concave.
pub fn double_transform(f: &PotentialVector, c: &CostMatrix) -> Result<PotentialVector> {
    c_transform_yx(&c_transform_xy(f, c)?, c)
}

/// Discrete membership test for the feasible class: `‖f‖ ≤ 1`, `‖f^c‖ ≤ 1`
/// and `f = f^{cc}`, each up to `tol`. Requires values in `[0, 1]`.
pub fn feasibility_check(f: &PotentialVector, c: &CostMatrix, tol: f64) -> bool {
    if f.side != Side::Source || f.len() != c.rows() || !c.is_unit_range() {
        return false;
    }
    let fc = transform_to_target(c, &f.values);
    let fcc = transform_to_source(c, &fc);
    f.sup_norm() <= 1.0 + tol
        && sup_norm(&fc) <= 1.0 + tol
        && sup_distance(&fcc, &f.values) <= tol
}

/// `‖f1 − f2‖_∞ − ‖f1^c − f2^c‖_∞`, nonnegative because the c-transform is
/// a sup-norm contraction.
pub fn contraction_gap(f1: &PotentialVector, f2: &PotentialVector, c: &CostMatrix) -> Result<f64> {
    expect_side(f1, Side::Source, c.rows())?;
    expect_side(f2, Side::Source, c.rows())?;
    let g1 = transform_to_target(c, &f1.values);
    let g2 = transform_to_target(c, &f2.values);
    Ok(sup_distance(&f1.values, &f2.values) - sup_distance(&g1, &g2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap() -> CostMatrix {
        CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        sup_distance(a, b) < 1e-12
    }

    #[test]
    fn xy_examples() {
        let c = CostMatrix::from_rows(&[vec![0.3, 0.9], vec![0.5, 0.2]]).unwrap();
        let zero = PotentialVector::source(vec![0.0, 0.0]).unwrap();
        assert!(close(c_transform_xy(&zero, &c).unwrap().values(), &[0.3, 0.2]));

        let single = CostMatrix::from_rows(&[vec![0.2, 0.9]]).unwrap();
        let f = PotentialVector::source(vec![0.1]).unwrap();
        assert!(close(c_transform_xy(&f, &single).unwrap().values(), &[0.1, 0.8]));

        let f = PotentialVector::source(vec![0.3, -0.2]).unwrap();
        assert!(close(c_transform_xy(&f, &swap()).unwrap().values(), &[-0.3, 0.2]));
    }

    #[test]
    fn yx_examples() {
        let c = CostMatrix::from_rows(&[vec![0.3, 0.9], vec![0.5, 0.2]]).unwrap();
        let zero = PotentialVector::target(vec![0.0, 0.0]).unwrap();
        assert!(close(c_transform_yx(&zero, &c).unwrap().values(), &[0.3, 0.2]));
        assert!(close(c_transform_yx(&zero, &swap()).unwrap().values(), &[0.0, 0.0]));
        let g = PotentialVector::target(vec![-0.3, 0.2]).unwrap();
        assert!(close(c_transform_yx(&g, &swap()).unwrap().values(), &[0.3, -0.2]));
    }

    #[test]
    fn side_and_length_are_checked() {
        let f = PotentialVector::source(vec![0.0]).unwrap();
        assert!(c_transform_xy(&f, &swap()).is_err());
        let g = PotentialVector::target(vec![0.0, 0.0]).unwrap();
        assert!(c_transform_xy(&g, &swap()).is_err());
        assert!(PotentialVector::source(vec![f64::NAN]).is_err());
    }

    #[test]
    fn double_transform_examples() {
        let one = CostMatrix::from_rows(&[vec![0.0]]).unwrap();
        let f = PotentialVector::source(vec![10.0]).unwrap();
        assert!(close(c_transform_xy(&f, &one).unwrap().values(), &[-10.0]));
        assert!(close(double_transform(&f, &one).unwrap().values(), &[10.0]));

        // on the swap matrix this f is already c-concave
        let f = PotentialVector::source(vec![0.5, -0.5]).unwrap();
        assert!(close(c_transform_xy(&f, &swap()).unwrap().values(), &[-0.5, 0.5]));
        assert!(close(double_transform(&f, &swap()).unwrap().values(), &[0.5, -0.5]));

        let flat = CostMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let f = PotentialVector::source(vec![0.5, 0.0]).unwrap();
        assert!(close(c_transform_xy(&f, &flat).unwrap().values(), &[-0.5, -0.5]));
        assert!(close(double_transform(&f, &flat).unwrap().values(), &[0.5, 0.5]));
    }

    #[test]
    fn feasibility_examples() {
        let c = swap();
        let zero = PotentialVector::source(vec![0.0, 0.0]).unwrap();
        assert!(feasibility_check(&zero, &c, 1e-9));
        let two = PotentialVector::source(vec![2.0, 2.0]).unwrap();
        assert!(!feasibility_check(&two, &c, 1e-9));
        let flat = CostMatrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let not_concave = PotentialVector::source(vec![0.5, 0.0]).unwrap();
        assert!(!feasibility_check(&not_concave, &flat, 1e-9));
        let big = CostMatrix::from_rows(&[vec![0.0, 3.0]]).unwrap();
        let z = PotentialVector::source(vec![0.0]).unwrap();
        assert!(!feasibility_check(&z, &big, 1e-9));
    }

    #[test]
    fn contraction_examples() {
        let c = swap();
        let f1 = PotentialVector::source(vec![0.0, 0.0]).unwrap();
        assert_eq!(contraction_gap(&f1, &f1, &c).unwrap(), 0.0);
        let shifted = PotentialVector::source(vec![0.7, 0.7]).unwrap();
        assert!(contraction_gap(&f1, &shifted, &c).unwrap().abs() < 1e-15);
        let f2 = PotentialVector::source(vec![0.4, 0.0]).unwrap();
        assert!(close(c_transform_xy(&f2, &c).unwrap().values(), &[-0.4, 0.0]));
        assert!(contraction_gap(&f1, &f2, &c).unwrap().abs() < 1e-15);
    }
}
