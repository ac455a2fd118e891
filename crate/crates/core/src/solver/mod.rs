//! Exact discrete Kantorovich solver.
//!
//! [`solve_exact`] returns a basic optimal plan, the optimal cost and a pair
//! of dual potentials in original cost units. Square problems with uniform
//! weights on both sides go through a dense assignment solver; everything
//! else through a transportation network simplex with integer supplies
//! (weights scaled by `10^12`). In both cases the duals are finally put in
//! the c-concave gauge `f ← (f^c)^c` with `min f = 0` in stored-value units.

mod assignment;
mod brute;
mod certificate;
mod network_simplex;

pub use brute::{brute_force_uniform, BRUTE_FORCE_MAX_N};
pub use certificate::{verify_certificate, CertificateReport};

use crate::cost::CostMatrix;
use crate::ctransform::{transform_to_source, transform_to_target};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

use self::network_simplex::{FlowError, TransportSimplex};

/// Units per unit of mass in the fixed-point flow core.
pub const MASS_UNITS: f64 = 1e12;

/// Allowed mismatch between the two total masses.
pub const MASS_BALANCE_TOL: f64 = 1e-9;

/// One positive entry of a transport plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

/// Sparse coupling between two discrete measures.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransportPlan {
    pub entries: Vec<PlanEntry>,
}

impl TransportPlan {
    pub fn row_sums(&self, m: usize) -> Vec<f64> {
        let mut s = vec![0.0; m];
        for e in &self.entries {
            s[e.source] += e.mass;
        }
        s
    }

    pub fn col_sums(&self, n: usize) -> Vec<f64> {
        let mut s = vec![0.0; n];
        for e in &self.entries {
            s[e.target] += e.mass;
        }
        s
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ π_ij C_ij` in original units.
    pub fn cost(&self, c: &CostMatrix) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mass * c.original(e.source, e.target))
            .sum()
    }
}

/// Optimal cost, plan and dual potentials, all in original cost units.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution {
    pub cost: f64,
    pub plan: TransportPlan,
    pub dual_f: Vec<f64>,
    pub dual_g: Vec<f64>,
}

impl TransportSolution {
    /// Source potential mapped to the matrix's stored-value units,
    /// `(f − offset) / scale`.
    pub fn normalized_dual_f(&self, c: &CostMatrix) -> Vec<f64> {
        self.dual_f
            .iter()
            .map(|f| (f - c.offset()) / c.scale())
            .collect()
    }

    /// Target potential in stored-value units, `g / scale`.
    pub fn normalized_dual_g(&self, c: &CostMatrix) -> Vec<f64> {
        self.dual_g.iter().map(|g| g / c.scale()).collect()
    }
}

/// `Σ w_i f_i + Σ v_j g_j`.
pub fn dual_objective(
    f: &[f64],
    g: &[f64],
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<f64> {
    if f.len() != mu.len() {
        return Err(Error::LengthMismatch {
            expected: mu.len(),
            found: f.len(),
        });
    }
    if g.len() != nu.len() {
        return Err(Error::LengthMismatch {
            expected: nu.len(),
            found: g.len(),
        });
    }
    let a: f64 = f.iter().zip(mu.weights()).map(|(f, w)| f * w).sum();
    let b: f64 = g.iter().zip(nu.weights()).map(|(g, w)| g * w).sum();
    Ok(a + b)
}

/// Integer masses summing exactly to `MASS_UNITS`, each within one unit of
/// `w · MASS_UNITS` (largest-remainder apportionment).
fn to_units(weights: &[f64]) -> Result<Vec<i64>> {
    let total = MASS_UNITS as i64;
    let scaled: Vec<f64> = weights.iter().map(|w| w * MASS_UNITS).collect();
    if scaled.iter().any(|s| !s.is_finite() || *s > total as f64 * 2.0) {
        return Err(Error::Overflow("weight exceeds fixed-point range".into()));
    }
    let mut units: Vec<i64> = scaled.iter().map(|s| s.floor() as i64).collect();
    let assigned: i64 = units.iter().sum();
    let mut missing = total - assigned;
    if missing < 0 || missing as usize > weights.len() + 1 {
        return Err(Error::Overflow(format!(
            "fixed-point rounding left a residual of {missing} units"
        )));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if missing == 0 {
            break;
        }
        units[k] += 1;
        missing -= 1;
    }
    Ok(units)
}

/// Solves `min_{π ∈ Π(μ, ν)} Σ π_ij C_ij` exactly.
pub fn solve_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    c: &CostMatrix,
) -> Result<TransportSolution> {
    let (m, n) = (mu.len(), nu.len());
    if c.rows() != m || c.cols() != n {
        return Err(Error::ShapeMismatch {
            rows: c.rows(),
            cols: c.cols(),
            m,
            n,
        });
    }
    let sum_mu: f64 = mu.weights().iter().sum();
    let sum_nu: f64 = nu.weights().iter().sum();
    if (sum_mu - sum_nu).abs() > MASS_BALANCE_TOL {
        return Err(Error::Infeasible(format!(
            "total masses differ: {sum_mu} vs {sum_nu}"
        )));
    }

    let (entries, f) = if m == n && mu.is_uniform() && nu.is_uniform() {
        let a = assignment::solve_assignment(n, c.values());
        let entries: Vec<PlanEntry> = a
            .row_to_col
            .iter()
            .enumerate()
            .map(|(i, &j)| PlanEntry {
                source: i,
                target: j,
                mass: mu.weights()[i],
            })
            .collect();
        (entries, a.u)
    } else {
        let supply = to_units(mu.weights())?;
        let demand = to_units(nu.weights())?;
        let sol = TransportSimplex::new(c.values(), &supply, &demand)
            .run()
            .map_err(|FlowError::Infeasible| {
                Error::Infeasible("flow core found no feasible plan".into())
            })?;
        let entries = sol
            .flows
            .iter()
            .map(|&(i, j, x)| PlanEntry {
                source: i,
                target: j,
                mass: x as f64 / MASS_UNITS,
            })
            .collect();
        (entries, sol.f)
    };

    let (f, g) = canonical_gauge(c, &f);
    let lp_cost: f64 = entries
        .iter()
        .map(|e| e.mass * c.value(e.source, e.target))
        .sum();
    let mass: f64 = entries.iter().map(|e| e.mass).sum();
    let (scale, offset) = (c.scale(), c.offset());
    Ok(TransportSolution {
        cost: scale * lp_cost + offset * mass,
        plan: TransportPlan { entries },
        dual_f: f.iter().map(|v| scale * v + offset).collect(),
        dual_g: g.iter().map(|v| scale * v).collect(),
    })
}

/// `f ← (f^c)^c`, shifted so `min f = 0`, and `g = f^c`. For values in
/// `[0, 1]` this places `f` in `[0, 1]` and `g` in `[−1, 1]`.
fn canonical_gauge(c: &CostMatrix, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let g = transform_to_target(c, f);
    let mut f = transform_to_source(c, &g);
    let shift = f.iter().copied().fold(f64::INFINITY, f64::min);
    for v in &mut f {
        *v -= shift;
    }
    let g = transform_to_target(c, &f);
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostSpec;
    use crate::measure::validate_measure;

    fn line(points: &[f64], weights: &[f64]) -> DiscreteMeasure {
        let pts: Vec<[f64; 1]> = points.iter().map(|&p| [p]).collect();
        validate_measure(&pts, weights).unwrap()
    }

    #[test]
    fn dirac_to_dirac() {
        let mu = line(&[0.0], &[1.0]);
        let nu = line(&[1.0], &[1.0]);
        let c = CostMatrix::build(&CostSpec::L1, &mu, &nu, false).unwrap();
        let s = solve_exact(&mu, &nu, &c).unwrap();
        assert_eq!(s.cost, 1.0);
        assert_eq!(s.plan.entries, vec![PlanEntry { source: 0, target: 0, mass: 1.0 }]);
    }

    #[test]
    fn identical_uniform_measures() {
        let mu = line(&[0.0, 1.0], &[0.5, 0.5]);
        let c = CostMatrix::build(&CostSpec::L1, &mu, &mu, false).unwrap();
        assert_eq!(solve_exact(&mu, &mu, &c).unwrap().cost, 0.0);
    }

    #[test]
    fn shifted_two_point_masses() {
        // couplings are π00 = t, π01 = 0.3 − t, π10 = 0.7 − t, π11 = t; cost 1 − 2t, t ≤ 0.3
        let mu = line(&[0.0, 1.0], &[0.3, 0.7]);
        let nu = line(&[0.0, 1.0], &[0.7, 0.3]);
        let c = CostMatrix::build(&CostSpec::L1, &mu, &nu, false).unwrap();
        let s = solve_exact(&mu, &nu, &c).unwrap();
        assert!((s.cost - 0.4).abs() < 1e-12);
        assert!(verify_certificate(&s, &mu, &nu, &c, 1e-9).passed);
    }

    #[test]
    fn dual_objective_examples() {
        let mu = line(&[0.0, 1.0], &[0.25, 0.75]);
        let nu = line(&[0.0], &[1.0]);
        assert_eq!(dual_objective(&[0.0, 0.0], &[0.0], &mu, &nu).unwrap(), 0.0);
        assert!((dual_objective(&[2.0, 2.0], &[3.0], &mu, &nu).unwrap() - 5.0).abs() < 1e-15);
        assert_eq!(dual_objective(&[1.0, -1.0], &[0.0], &mu, &nu).unwrap(), -0.5);
        assert!(dual_objective(&[1.0], &[0.0], &mu, &nu).is_err());
    }

    #[test]
    fn shape_and_balance_errors() {
        let mu = line(&[0.0, 1.0], &[0.5, 0.5]);
        let nu = line(&[0.0], &[1.0]);
        let c = CostMatrix::from_values(1, 1, vec![0.0]).unwrap();
        assert!(matches!(solve_exact(&mu, &nu, &c), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn fixed_point_units_are_exact() {
        let w = vec![1.0 / 3.0; 3];
        let u = to_units(&w).unwrap();
        assert_eq!(u.iter().sum::<i64>(), MASS_UNITS as i64);
        for (&x, &wi) in u.iter().zip(&w) {
            assert!((x as f64 - wi * MASS_UNITS).abs() <= 1.0);
        }
        let w = vec![1.0 / 8192.0; 8192];
        let u = to_units(&w).unwrap();
        assert_eq!(u.iter().sum::<i64>(), MASS_UNITS as i64);
    }

    #[test]
    fn gauge_lands_in_unit_class() {
        let mu = line(&[0.0, 0.4, 1.0], &[0.2, 0.3, 0.5]);
        let nu = line(&[0.1, 0.9], &[0.6, 0.4]);
        let c = CostMatrix::build(&CostSpec::SqL2, &mu, &nu, true).unwrap();
        let s = solve_exact(&mu, &nu, &c).unwrap();
        let f = s.normalized_dual_f(&c);
        let g = s.normalized_dual_g(&c);
        assert!(f.iter().all(|v| (-1e-12..=1.0 + 1e-12).contains(v)));
        assert!(g.iter().all(|v| v.abs() <= 1.0 + 1e-12));
        assert!(verify_certificate(&s, &mu, &nu, &c, 1e-9).passed);
    }
}
