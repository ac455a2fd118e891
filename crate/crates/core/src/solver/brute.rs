//! Permutation enumeration for tiny uniform instances.

use itertools::Itertools;

use crate::cost::CostMatrix;
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_N: usize = 8;

/// `(1/n) · min_σ Σ_i C[i][σ(i)]` in original units.
pub fn brute_force_uniform(c: &CostMatrix) -> Result<f64> {
    let n = c.rows();
    if c.cols() != n {
        return Err(Error::InvalidParameter(format!(
            "brute force needs a square matrix, got {}x{}",
            n,
            c.cols()
        )));
    }
    if n == 0 || n > BRUTE_FORCE_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "brute force supports 1 <= n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    let best = (0..n)
        .permutations(n)
        .map(|p| p.iter().enumerate().map(|(i, &j)| c.original(i, j)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    Ok(best / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<f64>]) -> CostMatrix {
        CostMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(brute_force_uniform(&m(&[vec![0.0, 1.0], vec![1.0, 0.0]])).unwrap(), 0.0);
        assert_eq!(brute_force_uniform(&m(&[vec![1.0, 1.0], vec![1.0, 1.0]])).unwrap(), 1.0);
        assert_eq!(brute_force_uniform(&m(&[vec![0.0, 2.0], vec![3.0, 1.0]])).unwrap(), 0.5);
    }

    #[test]
    fn rejects_large_and_rectangular() {
        let big = CostMatrix::from_values(9, 9, vec![0.0; 81]).unwrap();
        assert!(brute_force_uniform(&big).is_err());
        let rect = CostMatrix::from_values(1, 2, vec![0.0; 2]).unwrap();
        assert!(brute_force_uniform(&rect).is_err());
    }

    #[test]
    fn reports_original_units() {
        let c = m(&[vec![0.0, 2.0], vec![3.0, 1.0]]).normalized();
        assert!((brute_force_uniform(&c).unwrap() - 0.5).abs() < 1e-15);
    }
}
