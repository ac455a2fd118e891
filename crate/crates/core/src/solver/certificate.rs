//! Floating-point optimality certificate for a transport solution.

use crate::cost::CostMatrix;
use crate::measure::DiscreteMeasure;

use super::{dual_objective, TransportSolution};

/// Residuals of the primal/dual optimality conditions, in original units.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    /// Max |row sum − source weight|.
    pub source_marginal: f64,
    /// Max |column sum − target weight|.
    pub target_marginal: f64,
    /// Max over cells of `f_i + g_j − C_ij`, clipped at 0.
    pub dual_feasibility: f64,
    /// Max over plan entries of `|f_i + g_j − C_ij|`.
    pub complementary_slackness: f64,
    /// `|cost − dual objective|`.
    pub duality_gap: f64,
    /// Max |plan cost − reported cost|.
    pub cost_mismatch: f64,
    /// Entries with nonpositive mass or indices out of range.
    pub malformed_entries: usize,
    pub passed: bool,
}

impl CertificateReport {
    pub fn worst(&self) -> f64 {
        [
            self.source_marginal,
            self.target_marginal,
            self.dual_feasibility,
            self.complementary_slackness,
            self.duality_gap,
            self.cost_mismatch,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Checks marginals, dual feasibility, complementary slackness and the
/// duality gap against `tol`. Never fails; shape problems show up as
/// malformed entries or infinite residuals.
pub fn verify_certificate(
    sol: &TransportSolution,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    c: &CostMatrix,
    tol: f64,
) -> CertificateReport {
    let (m, n) = (mu.len(), nu.len());
    let shapes_ok = c.rows() == m
        && c.cols() == n
        && sol.dual_f.len() == m
        && sol.dual_g.len() == n;
    if !shapes_ok {
        return CertificateReport {
            source_marginal: f64::INFINITY,
            target_marginal: f64::INFINITY,
            dual_feasibility: f64::INFINITY,
            complementary_slackness: f64::INFINITY,
            duality_gap: f64::INFINITY,
            cost_mismatch: f64::INFINITY,
            malformed_entries: sol.plan.len(),
            passed: false,
        };
    }

    let mut rows = vec![0.0; m];
    let mut cols = vec![0.0; n];
    let mut malformed = 0;
    let mut slack: f64 = 0.0;
    let mut plan_cost = 0.0;
    for e in &sol.plan.entries {
        if e.source >= m || e.target >= n || !(e.mass > 0.0) {
            malformed += 1;
            continue;
        }
        rows[e.source] += e.mass;
        cols[e.target] += e.mass;
        let cij = c.original(e.source, e.target);
        plan_cost += e.mass * cij;
        slack = slack.max((sol.dual_f[e.source] + sol.dual_g[e.target] - cij).abs());
    }
    let marginal = |sums: &[f64], w: &[f64]| {
        sums.iter()
            .zip(w)
            .fold(0.0, |acc: f64, (s, w)| acc.max((s - w).abs()))
    };
    let source_marginal = marginal(&rows, mu.weights());
    let target_marginal = marginal(&cols, nu.weights());

    let mut feas: f64 = 0.0;
    for (i, &fi) in sol.dual_f.iter().enumerate() {
        for (j, &gj) in sol.dual_g.iter().enumerate() {
            feas = feas.max(fi + gj - c.original(i, j));
        }
    }
    let dual = dual_objective(&sol.dual_f, &sol.dual_g, mu, nu).unwrap_or(f64::NAN);
    let duality_gap = (sol.cost - dual).abs();
    let cost_mismatch = (sol.cost - plan_cost).abs();

    let mut report = CertificateReport {
        source_marginal,
        target_marginal,
        dual_feasibility: feas,
        complementary_slackness: slack,
        duality_gap,
        cost_mismatch,
        malformed_entries: malformed,
        passed: false,
    };
    // NaN residuals compare false and therefore fail
    report.passed = malformed == 0 && report.worst() <= tol && !duality_gap.is_nan();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostSpec;
    use crate::measure::validate_measure;
    use crate::solver::{solve_exact, PlanEntry, TransportPlan};

    fn setup() -> (DiscreteMeasure, DiscreteMeasure, CostMatrix) {
        let mu = validate_measure(&[[0.0], [1.0]], &[0.3, 0.7]).unwrap();
        let nu = validate_measure(&[[0.0], [1.0]], &[0.7, 0.3]).unwrap();
        let c = CostMatrix::build(&CostSpec::L1, &mu, &nu, false).unwrap();
        (mu, nu, c)
    }

    #[test]
    fn solver_output_passes() {
        let (mu, nu, c) = setup();
        let s = solve_exact(&mu, &nu, &c).unwrap();
        assert!(verify_certificate(&s, &mu, &nu, &c, 1e-9).passed);
    }

    #[test]
    fn wrong_marginals_fail() {
        let (mu, nu, c) = setup();
        let mut s = solve_exact(&mu, &nu, &c).unwrap();
        s.plan = TransportPlan {
            entries: vec![PlanEntry { source: 0, target: 0, mass: 1.0 }],
        };
        let r = verify_certificate(&s, &mu, &nu, &c, 1e-9);
        assert!(!r.passed);
        assert!(r.source_marginal > 0.1);
    }

    #[test]
    fn perturbed_duals_fail() {
        let (mu, nu, c) = setup();
        let mut s = solve_exact(&mu, &nu, &c).unwrap();
        s.dual_f[0] += 1.0;
        let r = verify_certificate(&s, &mu, &nu, &c, 1e-9);
        assert!(!r.passed);
        assert!(r.dual_feasibility > 0.5);
    }
}
