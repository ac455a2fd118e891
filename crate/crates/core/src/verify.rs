//! Randomized property suites behind `lca verify`.
//!
//! Trial `t` of a suite draws from the substream `(seed, suite, 0, t)`, so a
//! failing trial can be replayed from the printed seed and index alone.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::cost::{CostMatrix, CostSpec};
use crate::ctransform::{sup_distance, transform_to_source, transform_to_target};
use crate::error::{Error, Result};
use crate::lab::{decomposition_residual, dependent_coupling_check, CouplingConfig};
use crate::measure::DiscreteMeasure;
use crate::rng::{substream, Stream};
use crate::solver::{brute_force_uniform, solve_exact, verify_certificate};

/// A named property suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    SolverOracle,
    Certificates,
    CTransform,
    Decomposition,
    DependentCoupling,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::SolverOracle,
        Suite::Certificates,
        Suite::CTransform,
        Suite::Decomposition,
        Suite::DependentCoupling,
    ];

    pub fn default_trials(&self) -> usize {
        match self {
            Suite::SolverOracle | Suite::Certificates => 1000,
            Suite::CTransform => 10_000,
            Suite::Decomposition => 500,
            Suite::DependentCoupling => 100,
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s.trim() == "all" {
            Ok(Suite::ALL.to_vec())
        } else {
            Ok(vec![s.parse()?])
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::SolverOracle => "solver-oracle",
            Suite::Certificates => "certificates",
            Suite::CTransform => "ctransform",
            Suite::Decomposition => "decomposition",
            Suite::DependentCoupling => "dependent-coupling",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.to_string() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Planted faults used to check that the suites can fail.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FaultInjection {
    /// Negates the contraction gap before it is checked.
    pub flip_contraction_sign: bool,
}

/// First failing trial of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub trial: usize,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub passed_trials: usize,
    pub failure: Option<Counterexample>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(f, "{}: {} trials passed (seed {})", self.suite, self.trials, self.seed),
            Some(c) => write!(
                f,
                "{}: FAILED at trial {} of {} (seed {})\n{}",
                self.suite, c.trial, self.trials, self.seed, c.detail
            ),
        }
    }
}

/// Runs `trials` trials of `suite`, stopping at the first failure.
pub fn run_suite(suite: Suite, trials: usize, seed: u64, faults: FaultInjection) -> Result<SuiteReport> {
    let label = suite.to_string();
    for t in 0..trials {
        let mut rng = substream(seed, &label, 0, t as u64);
        let outcome = match suite {
            Suite::SolverOracle => solver_oracle_trial(&mut rng),
            Suite::Certificates => certificate_trial(&mut rng),
            Suite::CTransform => ctransform_trial(&mut rng, faults),
            Suite::Decomposition => decomposition_trial(&mut rng),
            Suite::DependentCoupling => dependent_coupling_trial(&mut rng),
        }?;
        if let Err(detail) = outcome {
            return Ok(SuiteReport {
                suite,
                seed,
                trials,
                passed_trials: t,
                failure: Some(Counterexample { trial: t, detail }),
            });
        }
    }
    Ok(SuiteReport {
        suite,
        seed,
        trials,
        passed_trials: trials,
        failure: None,
    })
}

/// Outer `Err` is an unexpected library error; inner `Err` a property
/// violation with its counterexample dump.
type Trial = Result<std::result::Result<(), String>>;

fn random_weights(rng: &mut Stream, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k)
        .map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random::<f64>() })
        .map(|w| w + 1e-6)
        .collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|w| w / s).collect()
}

/// Measure on distinct 1-D points `0, 1, …` with the given weights; the
/// solver only ever sees the cost matrix, so the locations are immaterial.
fn indexed_measure(weights: Vec<f64>) -> Result<DiscreteMeasure> {
    let coords = (0..weights.len()).map(|i| i as f64).collect();
    DiscreteMeasure::from_flat(1, coords, weights)
}

fn random_matrix(rng: &mut Stream, m: usize, n: usize) -> Result<CostMatrix> {
    CostMatrix::from_values(m, n, (0..m * n).map(|_| rng.random::<f64>()).collect())
}

fn dump_matrix(c: &CostMatrix) -> String {
    (0..c.rows())
        .map(|i| format!("{:?}", c.row(i)))
        .collect::<Vec<_>>()
        .join("\n")
}

fn solver_oracle_trial(rng: &mut Stream) -> Trial {
    let n = rng.random_range(1..=7);
    let c = random_matrix(rng, n, n)?;
    let u = indexed_measure(vec![1.0 / n as f64; n])?;
    let got = solve_exact(&u, &u, &c)?.cost;
    let want = brute_force_uniform(&c)?;
    if (got - want).abs() > 1e-9 {
        return Ok(Err(format!(
            "solver cost {got} vs brute force {want}\nC =\n{}",
            dump_matrix(&c)
        )));
    }
    Ok(Ok(()))
}

fn certificate_trial(rng: &mut Stream) -> Trial {
    let m = rng.random_range(1..=50);
    let n = rng.random_range(1..=50);
    let mu = indexed_measure(random_weights(rng, m))?;
    let nu = indexed_measure(random_weights(rng, n))?;
    let c = random_matrix(rng, m, n)?;
    let c = if rng.random_bool(0.5) { c.normalized() } else { c };
    let sol = solve_exact(&mu, &nu, &c)?;
    let r = verify_certificate(&sol, &mu, &nu, &c, 1e-9);
    let marginal_tol = 1e-12 * m.max(n) as f64;
    let marginal = r.source_marginal.max(r.target_marginal);
    if !r.passed || marginal > marginal_tol || sol.plan.len() > m + n - 1 {
        return Ok(Err(format!(
            "{m}x{n} instance: {r:?}, plan entries {}\nmu = {:?}\nnu = {:?}\nC =\n{}",
            sol.plan.len(),
            mu.weights(),
            nu.weights(),
            dump_matrix(&c)
        )));
    }
    Ok(Ok(()))
}

fn ctransform_trial(rng: &mut Stream, faults: FaultInjection) -> Trial {
    let m = rng.random_range(1..=8);
    let n = rng.random_range(1..=8);
    let c = random_matrix(rng, m, n)?;
    let f1: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let f2: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let g1 = transform_to_target(&c, &f1);
    let g2 = transform_to_target(&c, &f2);
    let mut gap = sup_distance(&f1, &f2) - sup_distance(&g1, &g2);
    if faults.flip_contraction_sign {
        gap = -gap;
    }
    let fail = |what: &str| {
        Ok(Err(format!(
            "{what}\nf1 = {f1:?}\nf2 = {f2:?}\nC =\n{}",
            dump_matrix(&c)
        )))
    };
    if gap < -1e-12 {
        return fail(&format!("contraction gap {gap} < -1e-12"));
    }
    let f1cc = transform_to_source(&c, &g1);
    let f1ccc = transform_to_target(&c, &f1cc);
    if sup_distance(&f1ccc, &g1) > 1e-12 {
        return fail("f^ccc differs from f^c");
    }
    if f1cc.iter().zip(&f1).any(|(a, b)| *a < b - 1e-12) {
        return fail("f^cc is not above f");
    }
    // order reversal on a pointwise larger potential
    let above: Vec<f64> = f2.iter().zip(&f1).map(|(a, b)| a.abs() + b).collect();
    let g_above = transform_to_target(&c, &above);
    if g1.iter().zip(&g_above).any(|(a, b)| *a < b - 1e-12) {
        return fail("f1 <= f2 but f1^c is not above f2^c");
    }
    Ok(Ok(()))
}

fn random_separable(rng: &mut Stream) -> CostSpec {
    match rng.random_range(0..3) {
        0 => CostSpec::L1,
        1 => CostSpec::SqL2,
        _ => CostSpec::PowCoordinatewise(rng.random_range(0.5..3.0)),
    }
}

fn random_cloud(rng: &mut Stream, dim: usize, k: usize) -> Result<DiscreteMeasure> {
    let coords = (0..dim * k).map(|_| rng.random::<f64>()).collect();
    DiscreteMeasure::from_flat(dim, coords, random_weights(rng, k))
}

fn decomposition_trial(rng: &mut Stream) -> Trial {
    let s = rng.random_range(1..=3);
    let d = rng.random_range(s..=6);
    let cost = CostSpec::additive(s, random_separable(rng), random_separable(rng))?;
    let (m, n) = (rng.random_range(1..=20), rng.random_range(1..=20));
    let mu = random_cloud(rng, s, m)?;
    let mut nu = random_cloud(rng, d, n)?;
    if rng.random_bool(0.3) {
        // repeated heads make the projection merge atoms
        let mut coords = nu.coords().to_vec();
        let first: Vec<f64> = coords[..s].to_vec();
        for p in coords.chunks_exact_mut(d) {
            p[..s].copy_from_slice(&first);
        }
        nu = DiscreteMeasure::from_flat(d, coords, nu.weights().to_vec())?;
    }
    let r = decomposition_residual(&mu, &nu, &cost)?;
    if r > 1e-9 {
        return Ok(Err(format!(
            "decomposition residual {r} for cost {cost}\nmu = {:?} / {:?}\nnu = {:?} / {:?}",
            mu.coords(),
            mu.weights(),
            nu.coords(),
            nu.weights()
        )));
    }
    Ok(Ok(()))
}

fn dependent_coupling_trial(rng: &mut Stream) -> Trial {
    let cfg = CouplingConfig::new(1, 3)?;
    let cost = CostSpec::additive(1, CostSpec::SqL2, CostSpec::SqL2)?;
    let r = dependent_coupling_check(&cfg, &cost, 50, rng)?;
    if r > 1e-9 {
        return Ok(Err(format!("dependent-coupling residual {r} at n = 50")));
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_briefly() {
        for suite in Suite::ALL {
            let r = run_suite(suite, 20, 1, FaultInjection::default()).unwrap();
            assert!(r.passed(), "{r}");
        }
    }

    #[test]
    fn planted_fault_is_caught() {
        let faults = FaultInjection {
            flip_contraction_sign: true,
        };
        let r = run_suite(Suite::CTransform, 1000, 1, faults).unwrap();
        assert!(!r.passed());
        assert!(r.to_string().contains("contraction gap"));
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 5);
        assert_eq!(Suite::parse_list("ctransform").unwrap(), vec![Suite::CTransform]);
        assert!(Suite::parse_list("everything").is_err());
    }
}
