//! Log-log least-squares rate fits.

use crate::error::{Error, Result};

use super::convergence::ConvergenceTable;

/// Default smallest `n` used in a fit.
pub const DEFAULT_N_MIN: usize = 64;

/// OLS fit of `log Δ̂_n = intercept + slope · log n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_err: f64,
    pub n_used: Vec<usize>,
    /// Some row with `n ≥ n_min` had `Δ̂_n = 0` and was left out.
    pub dropped_zero: bool,
}

/// Fits over the rows with `n ≥ n_min` and positive `Δ̂_n`.
pub fn fit_rate(table: &ConvergenceTable, n_min: usize) -> Result<RateFit> {
    let pairs: Vec<(usize, f64)> = table.rows.iter().map(|r| (r.n, r.delta_hat)).collect();
    fit_points(&pairs, n_min)
}

/// [`fit_rate`] on raw `(n, Δ̂_n)` pairs.
pub fn fit_points(points: &[(usize, f64)], n_min: usize) -> Result<RateFit> {
    let mut dropped_zero = false;
    let mut used = Vec::new();
    for &(n, d) in points {
        if n < n_min {
            continue;
        }
        if d > 0.0 && d.is_finite() {
            used.push((n, d));
        } else {
            dropped_zero = true;
        }
    }
    if used.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "rate fit needs at least 3 rows with n >= {n_min} and positive deviation, found {}",
            used.len()
        )));
    }
    let k = used.len() as f64;
    let xs: Vec<f64> = used.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&(_, d)| d.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("rate fit needs distinct n values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let slope_std_err = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        slope_std_err,
        n_used: used.iter().map(|&(n, _)| n).collect(),
        dropped_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<usize> {
        (4..=12).map(|a| 1usize << a).collect()
    }

    #[test]
    fn planted_exponents() {
        let pts: Vec<_> = grid().into_iter().map(|n| (n, (n as f64).powf(-0.5))).collect();
        let f = fit_points(&pts, 64).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert_eq!(f.n_used.first(), Some(&64));

        let pts: Vec<_> = grid().into_iter().map(|n| (n, 7.0 * (n as f64).powf(-1.0 / 3.0))).collect();
        let f = fit_points(&pts, 1).unwrap();
        assert!((f.slope + 1.0 / 3.0).abs() < 1e-12);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn alternating_perturbation() {
        let pts: Vec<_> = grid()
            .into_iter()
            .enumerate()
            .map(|(i, n)| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                (n, (n as f64).powf(-0.5) * (1.0 + 0.01 * s))
            })
            .collect();
        assert!((fit_points(&pts, 1).unwrap().slope + 0.5).abs() < 0.02);
    }

    #[test]
    fn zero_rows_and_short_tables() {
        let mut pts: Vec<_> = grid().into_iter().map(|n| (n, 1.0 / n as f64)).collect();
        pts[6].1 = 0.0;
        let f = fit_points(&pts, 64).unwrap();
        assert!(f.dropped_zero);
        assert_eq!(f.n_used.len(), 6);
        assert!(fit_points(&pts[..4], 64).is_err());
    }
}
