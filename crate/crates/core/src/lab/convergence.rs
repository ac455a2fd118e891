//! Monte Carlo estimation of `Δ_n = E|T̂_n − T_c(μ, ν)|`.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::{CostMatrix, CostSpec};
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Point};
use crate::rng::{substream, Stream};
use crate::settings::{
    c_projection, population_cost, projection_cost, projection_weights, sample_cube, sample_sphere,
    semidiscrete_mu_weights, semidiscrete_sites, OracleParams, PopulationCost, SampleSide,
    SemiDiscreteConfig, Setting,
};
use crate::solver::solve_exact;
use crate::stats::mean_and_se;

/// Which empirical OT cost estimates `T_c(μ, ν)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// `T_c(μ̂_n, ν)`
    OneSampleMu,
    /// `T_c(μ, ν̂_n)`
    OneSampleNu,
    /// `T_c(μ̂_n, ν̂_n)` with independent samples
    TwoSample,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::OneSampleMu => "one-sample-mu",
            EstimatorKind::OneSampleNu => "one-sample-nu",
            EstimatorKind::TwoSample => "two-sample",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "one-sample-mu" => Ok(EstimatorKind::OneSampleMu),
            "one-sample-nu" => Ok(EstimatorKind::OneSampleNu),
            "two-sample" => Ok(EstimatorKind::TwoSample),
            other => Err(Error::InvalidParameter(format!("unknown estimator {other:?}"))),
        }
    }
}

/// A setting and cost with everything the estimators need precomputed:
/// the population cost and, for the semi-discrete family, the sites and
/// their weights.
#[derive(Debug, Clone)]
pub struct Benchmark {
    setting: Setting,
    cost: CostSpec,
    oracle: OracleParams,
    population: PopulationCost,
    sites: Vec<Point>,
    site_measure: Option<DiscreteMeasure>,
}

impl Benchmark {
    pub fn prepare(setting: Setting, cost: CostSpec, oracle: OracleParams) -> Result<Self> {
        let population = population_cost(&setting, &cost, &oracle)?;
        let (sites, site_measure) = match &setting {
            Setting::SemiDiscrete(cfg) => {
                let w = semidiscrete_mu_weights(cfg, &cost, &oracle.for_site_weights(cfg))?;
                (semidiscrete_sites(cfg), Some(w))
            }
            _ => (Vec::new(), None),
        };
        Ok(Benchmark {
            setting,
            cost,
            oracle,
            population,
            sites,
            site_measure,
        })
    }

    /// Semi-discrete benchmark on explicitly given sites; `cfg` only names
    /// the run and must match the number and dimension of the sites.
    pub fn semidiscrete_with_sites(
        cfg: SemiDiscreteConfig,
        sites: Vec<Point>,
        cost: CostSpec,
        oracle: OracleParams,
    ) -> Result<Self> {
        if sites.len() != cfg.sites || sites.iter().any(|p| p.dim() != cfg.dim) {
            return Err(Error::InvalidParameter(format!(
                "sites do not match I={}, d={}",
                cfg.sites, cfg.dim
            )));
        }
        let (value, std_err) = projection_cost(&sites, &cost, &oracle)?;
        let weights = projection_weights(&sites, &cost, &oracle.for_site_weights(&cfg))?;
        Ok(Benchmark {
            setting: Setting::SemiDiscrete(cfg),
            cost,
            oracle,
            population: PopulationCost {
                value,
                std_err,
                oracle_m: Some(oracle.mc_samples),
                asserted_only: false,
            },
            sites,
            site_measure: Some(weights),
        })
    }

    pub fn setting(&self) -> &Setting {
        &self.setting
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn oracle(&self) -> &OracleParams {
        &self.oracle
    }

    pub fn population(&self) -> &PopulationCost {
        &self.population
    }

    /// The finitely supported `μ` of the semi-discrete family.
    pub fn site_measure(&self) -> Option<&DiscreteMeasure> {
        self.site_measure.as_ref()
    }

    /// One-sample estimators need the fixed side to be finitely supported;
    /// only the semi-discrete `μ` is.
    pub fn check_estimator(&self, estimator: EstimatorKind) -> Result<()> {
        match (estimator, &self.setting) {
            (EstimatorKind::TwoSample, _) => Ok(()),
            (EstimatorKind::OneSampleNu, Setting::SemiDiscrete(_)) => Ok(()),
            (EstimatorKind::OneSampleMu, s) => Err(Error::Unsupported(format!(
                "{estimator} needs a finitely supported nu, which {s} does not have"
            ))),
            (EstimatorKind::OneSampleNu, s) => Err(Error::Unsupported(format!(
                "{estimator} needs a finitely supported mu, which {s} does not have"
            ))),
        }
    }

    /// Empirical measure of `n` i.i.d. draws from one side.
    pub fn sample(&self, side: SampleSide, n: usize, rng: &mut Stream) -> Result<DiscreteMeasure> {
        use rand::Rng;
        match &self.setting {
            Setting::Cube(cfg) => sample_cube(cfg, side, n, rng),
            Setting::Sphere(cfg) => sample_sphere(cfg, side, n, rng),
            Setting::SemiDiscrete(cfg) => {
                if n == 0 {
                    return Err(Error::InvalidParameter("sample size must be >= 1".into()));
                }
                let d = cfg.dim;
                let mut coords = vec![0.0; n * d];
                for v in coords.iter_mut() {
                    *v = rng.random::<f64>();
                }
                if side == SampleSide::Mu {
                    // μ = 𝔭_#ν, so projecting fresh uniform draws samples μ exactly
                    let mut projected = Vec::with_capacity(n * d);
                    for y in coords.chunks_exact(d) {
                        let i = c_projection(y, &self.sites, &self.cost);
                        projected.extend_from_slice(self.sites[i].coords());
                    }
                    coords = projected;
                }
                DiscreteMeasure::uniform_flat(d, coords)
            }
        }
    }

    /// One draw of `T̂_n`.
    pub fn estimate(&self, estimator: EstimatorKind, n: usize, rng: &mut Stream) -> Result<f64> {
        self.check_estimator(estimator)?;
        let (mu, nu) = match estimator {
            EstimatorKind::TwoSample => {
                let mu = self.sample(SampleSide::Mu, n, rng)?;
                let nu = self.sample(SampleSide::Nu, n, rng)?;
                (mu, nu)
            }
            EstimatorKind::OneSampleNu => {
                let mu = self.site_measure.clone().expect("checked above");
                (mu, self.sample(SampleSide::Nu, n, rng)?)
            }
            EstimatorKind::OneSampleMu => unreachable!("rejected by check_estimator"),
        };
        let c = CostMatrix::build(&self.cost, &mu, &nu, false)?;
        Ok(solve_exact(&mu, &nu, &c)?.cost)
    }

    /// Label keying the random substreams of this benchmark.
    fn stream_label(&self) -> String {
        self.setting.to_string()
    }
}

/// `(Δ̂_n, SE)`: mean and standard error of `|T̂_n − T_pop|` over `reps`
/// repetitions. Repetition `r` draws from its own substream keyed by
/// `(master_seed, setting, n, r)`; results are summed in repetition order.
pub fn empirical_deviation(
    bench: &Benchmark,
    estimator: EstimatorKind,
    n: usize,
    reps: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    if reps < 2 {
        return Err(Error::InvalidParameter(format!("reps must be >= 2, got {reps}")));
    }
    bench.check_estimator(estimator)?;
    let label = bench.stream_label();
    let truth = bench.population.value;
    let deviations = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(master_seed, &label, n as u64, r as u64);
            bench.estimate(estimator, n, &mut rng).map(|t| (t - truth).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(mean_and_se(&deviations))
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub delta_hat: f64,
    pub std_err: f64,
    pub reps: usize,
}

/// Run metadata stored in the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableMetadata {
    pub setting: String,
    pub cost: String,
    pub estimator: String,
    pub master_seed: u64,
    pub population_cost: f64,
    #[serde(rename = "populationCostSE")]
    pub population_cost_se: f64,
    pub oracle_m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population_cost_label: Option<String>,
}

/// `Δ̂_n` with standard errors over a grid of `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub metadata: TableMetadata,
}

pub const CSV_HEADER: [&str; 4] = ["n", "delta_hat", "std_err", "reps"];

impl ConvergenceTable {
    pub fn ns(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    /// CSV with header `n,delta_hat,std_err,reps`; floats use the shortest
    /// representation that parses back to the same value.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.delta_hat.to_string(),
                r.std_err.to_string(),
                r.reps.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Vec<ConvergenceRow>> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(|e| Error::Parse { line: 1, message: e.to_string() })?;
        if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
            return Err(Error::Parse {
                line: 1,
                message: format!("unexpected header {headers:?}"),
            });
        }
        r.deserialize()
            .enumerate()
            .map(|(i, row)| {
                row.map_err(|e| Error::Parse {
                    line: i + 2,
                    message: e.to_string(),
                })
            })
            .collect()
    }

    pub fn metadata_json(&self) -> String {
        serde_json::to_string_pretty(&self.metadata).expect("metadata serializes")
    }

    pub fn from_parts(rows: Vec<ConvergenceRow>, metadata_json: &str) -> Result<Self> {
        let metadata = serde_json::from_str(metadata_json).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        Ok(ConvergenceTable { rows, metadata })
    }
}

/// One `empirical_deviation` row per `n` in the grid.
pub fn run_convergence(
    bench: &Benchmark,
    estimator: EstimatorKind,
    n_grid: &[usize],
    reps: usize,
    master_seed: u64,
) -> Result<ConvergenceTable> {
    if n_grid.is_empty() {
        return Err(Error::InvalidParameter("n grid is empty".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || n_grid[0] == 0 {
        return Err(Error::InvalidParameter(format!(
            "n grid must be strictly increasing positive integers, got {n_grid:?}"
        )));
    }
    bench.check_estimator(estimator)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let (delta_hat, std_err) = empirical_deviation(bench, estimator, n, reps, master_seed)?;
        rows.push(ConvergenceRow {
            n,
            delta_hat,
            std_err,
            reps,
        });
    }
    let p = bench.population();
    Ok(ConvergenceTable {
        rows,
        metadata: TableMetadata {
            setting: bench.setting().to_string(),
            cost: bench.cost().to_string(),
            estimator: estimator.to_string(),
            master_seed,
            population_cost: p.value,
            population_cost_se: p.std_err,
            oracle_m: p.oracle_m,
            population_cost_label: p.asserted_only.then(|| "paper-asserted oracle".to_string()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle() -> OracleParams {
        OracleParams::new(20_000, 5).unwrap()
    }

    #[test]
    fn estimator_strings() {
        for s in ["one-sample-mu", "one-sample-nu", "two-sample"] {
            assert_eq!(s.parse::<EstimatorKind>().unwrap().to_string(), s);
        }
        assert!("both".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn estimator_combinations() {
        let cube = Benchmark::prepare("cube:1:2".parse().unwrap(), CostSpec::SqL2, oracle()).unwrap();
        assert!(cube.check_estimator(EstimatorKind::TwoSample).is_ok());
        assert!(cube.check_estimator(EstimatorKind::OneSampleMu).is_err());
        assert!(cube.check_estimator(EstimatorKind::OneSampleNu).is_err());
        let sd = Benchmark::prepare("semidiscrete:2:2:1".parse().unwrap(), CostSpec::SqL2, oracle()).unwrap();
        assert!(sd.check_estimator(EstimatorKind::OneSampleNu).is_ok());
        assert!(sd.check_estimator(EstimatorKind::TwoSample).is_ok());
        assert!(sd.check_estimator(EstimatorKind::OneSampleMu).is_err());
    }

    #[test]
    fn deviation_is_deterministic_and_nonnegative() {
        let b = Benchmark::prepare("cube:1:1".parse().unwrap(), CostSpec::SqL2, oracle()).unwrap();
        let a = empirical_deviation(&b, EstimatorKind::TwoSample, 2, 2, 11).unwrap();
        assert_eq!(a, empirical_deviation(&b, EstimatorKind::TwoSample, 2, 2, 11).unwrap());
        assert!(a.0 >= 0.0 && a.1 >= 0.0);
        assert!(empirical_deviation(&b, EstimatorKind::TwoSample, 2, 1, 11).is_err());
    }

    #[test]
    fn one_point_semidiscrete_deviation() {
        // T̂ = |Y − 1/2| and T = 1/4, so Δ_1 = E| |Y − 1/2| − 1/4 | = 1/8
        let cfg = SemiDiscreteConfig::new(1, 1, 0).unwrap();
        let b = Benchmark::semidiscrete_with_sites(
            cfg,
            vec![Point::new(vec![0.5]).unwrap()],
            CostSpec::L1,
            OracleParams::new(1_000_000, 2).unwrap(),
        )
        .unwrap();
        assert!((b.population().value - 0.25).abs() < 3.0 * b.population().std_err);
        let (d, se) = empirical_deviation(&b, EstimatorKind::OneSampleNu, 1, 4000, 9).unwrap();
        assert!((d - 0.125).abs() < 3.0 * se, "{d} ± {se}");
    }

    #[test]
    fn table_shape_and_round_trip() {
        let b = Benchmark::prepare("sphere:1:2".parse().unwrap(), CostSpec::L1, oracle()).unwrap();
        let t = run_convergence(&b, EstimatorKind::TwoSample, &[4, 8], 2, 3).unwrap();
        assert_eq!(t.ns(), vec![4, 8]);
        assert!(t.rows.iter().all(|r| r.delta_hat >= 0.0));
        assert_eq!(t.metadata.population_cost_label.as_deref(), Some("paper-asserted oracle"));
        let csv = t.to_csv_string();
        assert!(csv.starts_with("n,delta_hat,std_err,reps\n"));
        let back = ConvergenceTable::from_parts(
            ConvergenceTable::read_csv(csv.as_bytes()).unwrap(),
            &t.metadata_json(),
        )
        .unwrap();
        assert_eq!(back, t);
        assert!(run_convergence(&b, EstimatorKind::TwoSample, &[8, 4], 2, 3).is_err());
    }
}
