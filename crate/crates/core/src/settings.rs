//! Benchmark families: cube, sphere and semi-discrete, with samplers and
//! population-cost oracles.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cost::CostSpec;
use crate::error::{Error, Result};
use crate::measure::{DiscreteMeasure, Point};
use crate::rng::{derive_seed, substream, Stream};
use crate::stats::MeanVar;

/// Site seed used when a semi-discrete setting string omits it.
pub const DEFAULT_SITE_SEED: u64 = 42;

/// Default Monte Carlo size for population costs.
pub const DEFAULT_ORACLE_M: u64 = 10_000_000;

/// Smallest accepted Monte Carlo size.
pub const MIN_ORACLE_M: u64 = 10_000;

/// Monte Carlo oracles are split into this many independent substreams,
/// whatever the thread count.
const ORACLE_CHUNKS: u64 = 64;

/// Which measure of a setting to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSide {
    Mu,
    Nu,
}

/// `μ = Unif([0,1]^{d1} × {0}^{d2−d1})`, `ν = Unif([0,1]^{d2})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeConfig {
    pub d1: usize,
    pub d2: usize,
}

impl CubeConfig {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        check_dims(d1, d2)?;
        Ok(CubeConfig { d1, d2 })
    }
}

/// `μ = Unif(S^{d1} × {0}^{d2−d1})`, `ν = Unif(S^{d2})`, points in `R^{d2+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereConfig {
    pub d1: usize,
    pub d2: usize,
}

impl SphereConfig {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        check_dims(d1, d2)?;
        Ok(SphereConfig { d1, d2 })
    }
}

fn check_dims(d1: usize, d2: usize) -> Result<()> {
    if d1 == 0 || d1 > d2 {
        return Err(Error::InvalidParameter(format!(
            "dimensions must satisfy 1 <= d1 <= d2, got d1={d1}, d2={d2}"
        )));
    }
    Ok(())
}

/// `ν = Unif([0,1]^d)` and `μ` the c-projection of `ν` onto `I` fixed sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SemiDiscreteConfig {
    pub sites: usize,
    pub dim: usize,
    pub site_seed: u64,
}

impl SemiDiscreteConfig {
    pub fn new(sites: usize, dim: usize, site_seed: u64) -> Result<Self> {
        if sites == 0 || dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "semi-discrete setting needs I >= 1 and d >= 1, got I={sites}, d={dim}"
            )));
        }
        Ok(SemiDiscreteConfig {
            sites,
            dim,
            site_seed,
        })
    }
}

/// Monte Carlo size and seed of a numerical oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleParams {
    pub mc_samples: u64,
    pub seed: u64,
}

impl OracleParams {
    pub fn new(mc_samples: u64, seed: u64) -> Result<Self> {
        if mc_samples < MIN_ORACLE_M {
            return Err(Error::InvalidParameter(format!(
                "oracle sample size {mc_samples} is below {MIN_ORACLE_M}"
            )));
        }
        Ok(OracleParams { mc_samples, seed })
    }

    /// Oracle used for the site weights of a semi-discrete setting:
    /// `10^6 · min(I, 10)` draws on a seed derived from `self.seed`.
    pub fn for_site_weights(&self, cfg: &SemiDiscreteConfig) -> OracleParams {
        OracleParams {
            mc_samples: 1_000_000 * cfg.sites.min(10) as u64,
            seed: derive_seed(self.seed, "site-weights"),
        }
    }
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            mc_samples: DEFAULT_ORACLE_M,
            seed: 0,
        }
    }
}

/// One of the three benchmark families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Cube(CubeConfig),
    Sphere(SphereConfig),
    SemiDiscrete(SemiDiscreteConfig),
}

impl Setting {
    /// Ambient dimension of sampled points.
    pub fn ambient_dim(&self) -> usize {
        match self {
            Setting::Cube(c) => c.d2,
            Setting::Sphere(s) => s.d2 + 1,
            Setting::SemiDiscrete(s) => s.dim,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::Cube(c) => write!(f, "cube:{}:{}", c.d1, c.d2),
            Setting::Sphere(s) => write!(f, "sphere:{}:{}", s.d1, s.d2),
            Setting::SemiDiscrete(s) => {
                write!(f, "semidiscrete:{}:{}:{}", s.sites, s.dim, s.site_seed)
            }
        }
    }
}

impl FromStr for Setting {
    type Err = Error;

    /// `cube:d1:d2`, `sphere:d1:d2` or `semidiscrete:I:d[:siteSeed]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let int = |tok: &str| -> Result<u64> {
            tok.parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad integer {tok:?} in setting {s:?}")))
        };
        match parts.as_slice() {
            ["cube", a, b] => Ok(Setting::Cube(CubeConfig::new(int(a)? as usize, int(b)? as usize)?)),
            ["sphere", a, b] => Ok(Setting::Sphere(SphereConfig::new(
                int(a)? as usize,
                int(b)? as usize,
            )?)),
            ["semidiscrete", i, d] => Ok(Setting::SemiDiscrete(SemiDiscreteConfig::new(
                int(i)? as usize,
                int(d)? as usize,
                DEFAULT_SITE_SEED,
            )?)),
            ["semidiscrete", i, d, seed] => Ok(Setting::SemiDiscrete(SemiDiscreteConfig::new(
                int(i)? as usize,
                int(d)? as usize,
                int(seed)?,
            )?)),
            _ => Err(Error::InvalidParameter(format!("unrecognized setting {s:?}"))),
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    Ok(())
}

/// `n` i.i.d. uniform points from the cube setting, weights `1/n`.
pub fn sample_cube<R: Rng + ?Sized>(
    cfg: &CubeConfig,
    side: SampleSide,
    n: usize,
    rng: &mut R,
) -> Result<DiscreteMeasure> {
    check_n(n)?;
    let active = match side {
        SampleSide::Mu => cfg.d1,
        SampleSide::Nu => cfg.d2,
    };
    let mut coords = vec![0.0; n * cfg.d2];
    for p in coords.chunks_exact_mut(cfg.d2) {
        for v in &mut p[..active] {
            *v = rng.random::<f64>();
        }
    }
    DiscreteMeasure::uniform_flat(cfg.d2, coords)
}

/// Fills `out` with a uniform point on the unit sphere of `R^{out.len()}`.
fn unit_gaussian_direction<R: Rng + ?Sized>(out: &mut [f64], rng: &mut R) {
    loop {
        let mut sq = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            sq += *v * *v;
        }
        if sq > 0.0 {
            let inv = 1.0 / sq.sqrt();
            for v in out.iter_mut() {
                *v *= inv;
            }
            return;
        }
    }
}

/// `n` i.i.d. uniform points on `S^{d1}` (zero padded) or `S^{d2}`.
pub fn sample_sphere<R: Rng + ?Sized>(
    cfg: &SphereConfig,
    side: SampleSide,
    n: usize,
    rng: &mut R,
) -> Result<DiscreteMeasure> {
    check_n(n)?;
    let dim = cfg.d2 + 1;
    let active = match side {
        SampleSide::Mu => cfg.d1 + 1,
        SampleSide::Nu => dim,
    };
    let mut coords = vec![0.0; n * dim];
    for p in coords.chunks_exact_mut(dim) {
        unit_gaussian_direction(&mut p[..active], rng);
    }
    DiscreteMeasure::uniform_flat(dim, coords)
}

/// The `I` sites of a semi-discrete setting, uniform in `[0,1]^d` and fixed
/// by the site seed.
pub fn semidiscrete_sites(cfg: &SemiDiscreteConfig) -> Vec<Point> {
    let mut rng = substream(cfg.site_seed, "semidiscrete-sites", cfg.sites as u64, cfg.dim as u64);
    (0..cfg.sites)
        .map(|_| {
            let coords = (0..cfg.dim).map(|_| rng.random::<f64>()).collect();
            Point::new(coords).expect("uniform draws are finite")
        })
        .collect()
}

/// `argmin_i c(x_i, y)`, lowest index on ties.
pub fn c_projection<P: AsRef<[f64]>>(y: &[f64], sites: &[P], cost: &CostSpec) -> usize {
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (i, x) in sites.iter().enumerate() {
        let c = cost.eval_unchecked(x.as_ref(), y);
        if c < best_cost {
            best_cost = c;
            best = i;
        }
    }
    best
}

fn check_semidiscrete_cost(cfg: &SemiDiscreteConfig, cost: &CostSpec) -> Result<()> {
    if matches!(cost, CostSpec::Additive { .. }) {
        return Err(Error::Unsupported(format!(
            "cost {cost} is not defined between sites and points of dimension {}",
            cfg.dim
        )));
    }
    Ok(())
}

/// Runs `draw` `m` times over `ORACLE_CHUNKS` fixed substreams and merges
/// the chunk results in chunk order.
fn chunked<T, F, G>(seed: u64, label: &str, m: u64, init: G, draw: F) -> Vec<T>
where
    T: Send,
    G: Fn() -> T + Sync,
    F: Fn(&mut T, &mut Stream) + Sync,
{
    (0..ORACLE_CHUNKS)
        .into_par_iter()
        .map(|k| {
            let len = m / ORACLE_CHUNKS + u64::from(k < m % ORACLE_CHUNKS);
            let mut rng = substream(seed, label, m, k);
            let mut acc = init();
            for _ in 0..len {
                draw(&mut acc, &mut rng);
            }
            acc
        })
        .collect()
}

fn monte_carlo_mean<F>(seed: u64, label: &str, m: u64, sample: F) -> (f64, f64)
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    let parts = chunked(seed, label, m, MeanVar::default, |acc, rng| acc.push(sample(rng)));
    let mut total = MeanVar::default();
    for p in &parts {
        total.merge(p);
    }
    (total.mean, total.std_err())
}

/// Site weights `μ({x_i})` estimated as the fraction of `M` uniform draws
/// whose c-projection is `i`, exactly normalized.
pub fn semidiscrete_mu_weights(
    cfg: &SemiDiscreteConfig,
    cost: &CostSpec,
    oracle: &OracleParams,
) -> Result<DiscreteMeasure> {
    check_semidiscrete_cost(cfg, cost)?;
    projection_weights(&semidiscrete_sites(cfg), cost, oracle)
}

fn check_sites(sites: &[Point], cost: &CostSpec) -> Result<usize> {
    let dim = sites.first().ok_or(Error::EmptySupport)?.dim();
    if let Some(p) = sites.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    if matches!(cost, CostSpec::Additive { .. }) {
        return Err(Error::Unsupported(format!("cost {cost} cannot drive a c-projection")));
    }
    Ok(dim)
}

/// [`semidiscrete_mu_weights`] for explicitly given sites in `[0,1]^d`.
pub fn projection_weights(sites: &[Point], cost: &CostSpec, oracle: &OracleParams) -> Result<DiscreteMeasure> {
    let dim = check_sites(sites, cost)?;
    let m = oracle.mc_samples;
    if m == 0 {
        return Err(Error::InvalidParameter("oracle needs at least one draw".into()));
    }
    let parts = chunked(
        oracle.seed,
        "site-weights",
        m,
        || (vec![0u64; sites.len()], vec![0.0; dim]),
        |(counts, y), rng| {
            for v in y.iter_mut() {
                *v = rng.random::<f64>();
            }
            counts[c_projection(y, sites, cost)] += 1;
        },
    );
    let mut counts = vec![0u64; sites.len()];
    for (part, _) in &parts {
        for (c, p) in counts.iter_mut().zip(part) {
            *c += p;
        }
    }
    let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
    DiscreteMeasure::new(sites, &weights)
}

/// `E min_i c(x_i, Y)` for `Y ~ Unif([0,1]^d)` by Monte Carlo, with its
/// standard error: the semi-discrete population cost for given sites.
pub fn projection_cost(sites: &[Point], cost: &CostSpec, oracle: &OracleParams) -> Result<(f64, f64)> {
    let dim = check_sites(sites, cost)?;
    OracleParams::new(oracle.mc_samples, oracle.seed)?;
    Ok(monte_carlo_mean(oracle.seed, "population/semidiscrete", oracle.mc_samples, |rng| {
        let y: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let i = c_projection(&y, sites, cost);
        cost.eval_unchecked(sites[i].coords(), &y)
    }))
}

/// Coordinate `k` of the sphere symmetry map: the first `head` coordinates
/// of `y` rescaled to unit norm, the rest zeroed.
fn symmetry_coordinate(y: &[f64], head: usize, k: usize) -> f64 {
    if k >= head {
        return 0.0;
    }
    let norm = y[..head].iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        y[k] / norm
    } else if k == 0 {
        1.0
    } else {
        0.0
    }
}

/// Map from `S^{d2}` onto `S^{d1} × {0}^{d2−d1}` along which the sphere
/// population cost is evaluated.
pub fn sphere_symmetry_map(y: &[f64], d1: usize) -> Vec<f64> {
    let head = (d1 + 1).min(y.len());
    (0..y.len()).map(|k| symmetry_coordinate(y, head, k)).collect()
}

/// Population cost `T_c(μ, ν)` of a setting with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationCost {
    pub value: f64,
    pub std_err: f64,
    /// Monte Carlo size, `None` for closed forms.
    pub oracle_m: Option<u64>,
    /// Sphere with a cost other than squared Euclidean: the symmetry map is
    /// assumed optimal rather than certified.
    pub asserted_only: bool,
}

/// `T_c(μ, ν)` for a setting: closed form for the cube, Monte Carlo along
/// the known optimal map for the sphere and the semi-discrete family.
pub fn population_cost(setting: &Setting, cost: &CostSpec, oracle: &OracleParams) -> Result<PopulationCost> {
    match setting {
        Setting::Cube(cfg) => {
            let mean = cost.uniform_coordinate_mean().ok_or_else(|| {
                Error::Unsupported(format!("cube oracle needs a coordinatewise cost, got {cost}"))
            })?;
            Ok(PopulationCost {
                value: (cfg.d2 - cfg.d1) as f64 * mean,
                std_err: 0.0,
                oracle_m: None,
                asserted_only: false,
            })
        }
        Setting::Sphere(cfg) => {
            let sql2 = match cost {
                CostSpec::SqL2 => true,
                CostSpec::PowEuclidean(p) if *p == 2.0 => true,
                CostSpec::L1 => false,
                other => {
                    return Err(Error::Unsupported(format!(
                        "sphere oracle supports l1 and sql2, got {other}"
                    )))
                }
            };
            OracleParams::new(oracle.mc_samples, oracle.seed)?;
            let dim = cfg.d2 + 1;
            let head = cfg.d1 + 1;
            let label = format!("population/{setting}/{cost}");
            let (value, std_err) = monte_carlo_mean(oracle.seed, &label, oracle.mc_samples, |rng| {
                let mut y = [0.0f64; 64];
                let mut buf;
                let y: &mut [f64] = if dim <= 64 {
                    &mut y[..dim]
                } else {
                    buf = vec![0.0; dim];
                    &mut buf
                };
                unit_gaussian_direction(y, rng);
                let mut c = 0.0;
                for (k, &v) in y.iter().enumerate() {
                    let d = (symmetry_coordinate(y, head, k) - v).abs();
                    c += if sql2 { d * d } else { d };
                }
                c
            });
            Ok(PopulationCost {
                value,
                std_err,
                oracle_m: Some(oracle.mc_samples),
                asserted_only: !sql2,
            })
        }
        Setting::SemiDiscrete(cfg) => {
            check_semidiscrete_cost(cfg, cost)?;
            let (value, std_err) = projection_cost(&semidiscrete_sites(cfg), cost, oracle)?;
            Ok(PopulationCost {
                value,
                std_err,
                oracle_m: Some(oracle.mc_samples),
                asserted_only: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> Stream {
        Stream::seed_from_u64(seed)
    }

    #[test]
    fn cube_samples() {
        let cfg = CubeConfig::new(1, 3).unwrap();
        let mu = sample_cube(&cfg, SampleSide::Mu, 1, &mut rng(1)).unwrap();
        let p = mu.point(0);
        assert!((0.0..=1.0).contains(&p[0]) && p[1] == 0.0 && p[2] == 0.0);
        let nu = sample_cube(&cfg, SampleSide::Nu, 4, &mut rng(1)).unwrap();
        assert_eq!(nu.weights(), &[0.25; 4]);
        assert!(nu.coords().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(nu, sample_cube(&cfg, SampleSide::Nu, 4, &mut rng(1)).unwrap());
    }

    #[test]
    fn sphere_samples_are_unit_and_padded() {
        let cfg = SphereConfig::new(1, 2).unwrap();
        let mu = sample_sphere(&cfg, SampleSide::Mu, 200, &mut rng(2)).unwrap();
        for p in mu.points() {
            let norm: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert_eq!(p[2], 0.0);
        }
    }

    #[test]
    fn sphere_mean_is_centered() {
        let cfg = SphereConfig::new(2, 2).unwrap();
        let n = 100_000;
        let nu = sample_sphere(&cfg, SampleSide::Nu, n, &mut rng(3)).unwrap();
        // each coordinate has variance 1/3 on S^2
        let se = (1.0f64 / 3.0 / n as f64).sqrt();
        for k in 0..3 {
            let mean: f64 = nu.points().map(|p| p[k]).sum::<f64>() / n as f64;
            assert!(mean.abs() < 5.0 * se, "coordinate {k} mean {mean}");
        }
    }

    #[test]
    fn sites_are_fixed_by_seed() {
        let a = SemiDiscreteConfig::new(5, 3, 1).unwrap();
        let b = SemiDiscreteConfig::new(5, 3, 2).unwrap();
        assert_eq!(semidiscrete_sites(&a), semidiscrete_sites(&a));
        assert_ne!(semidiscrete_sites(&a), semidiscrete_sites(&b));
        assert!(semidiscrete_sites(&a)
            .iter()
            .all(|p| p.coords().iter().all(|v| (0.0..=1.0).contains(v))));
        assert_eq!(semidiscrete_sites(&SemiDiscreteConfig::new(1, 2, 9).unwrap()).len(), 1);
    }

    #[test]
    fn projection_examples() {
        let sites = [[0.0], [1.0]];
        assert_eq!(c_projection(&[0.2], &sites, &CostSpec::L1), 0);
        assert_eq!(c_projection(&[0.5], &sites, &CostSpec::L1), 0);
        assert_eq!(c_projection(&[0.9], &sites, &CostSpec::L1), 1);
        assert_eq!(c_projection(&[0.9], &[[0.3]], &CostSpec::L1), 0);
    }

    #[test]
    fn site_weights() {
        let cfg = SemiDiscreteConfig::new(1, 4, 42).unwrap();
        let w = semidiscrete_mu_weights(&cfg, &CostSpec::SqL2, &OracleParams::new(10_000, 1).unwrap()).unwrap();
        assert_eq!(w.weights(), &[1.0]);
    }

    #[test]
    fn two_site_weights_and_cost() {
        let sites = vec![Point::new(vec![0.0]).unwrap(), Point::new(vec![1.0]).unwrap()];
        let o = OracleParams::new(1_000_000, 3).unwrap();
        let w = projection_weights(&sites, &CostSpec::L1, &o).unwrap();
        assert!((w.weights()[0] - 0.5).abs() < 0.002);
        assert_eq!(w.weights().iter().sum::<f64>(), 1.0);
        let (v, se) = projection_cost(&sites, &CostSpec::L1, &o).unwrap();
        assert!((v - 0.25).abs() < 3.0 * se, "{v} ± {se}");
    }

    #[test]
    fn centered_site_cost() {
        let sites = vec![Point::new(vec![0.5; 10]).unwrap()];
        let (v, se) = projection_cost(&sites, &CostSpec::SqL2, &OracleParams::new(1_000_000, 4).unwrap()).unwrap();
        assert!((v - 10.0 / 12.0).abs() < 3.0 * se, "{v} ± {se}");
    }

    #[test]
    fn cube_closed_forms() {
        let o = OracleParams::default();
        let c = |s: &str, cost: CostSpec| population_cost(&s.parse().unwrap(), &cost, &o).unwrap().value;
        assert_eq!(c("cube:1:10", CostSpec::SqL2), 3.0);
        assert_eq!(c("cube:2:10", CostSpec::L1), 4.0);
        assert_eq!(c("cube:4:4", CostSpec::L1), 0.0);
        assert_eq!(c("cube:4:4", CostSpec::PowCoordinatewise(0.5)), 0.0);
        assert!(population_cost(&"cube:1:2".parse().unwrap(), &CostSpec::PowEuclidean(1.0), &o).is_err());
    }

    #[test]
    fn setting_strings() {
        for s in ["cube:1:10", "sphere:1:5", "semidiscrete:5:10:7"] {
            assert_eq!(s.parse::<Setting>().unwrap().to_string(), s);
        }
        assert_eq!(
            "semidiscrete:5:10".parse::<Setting>().unwrap().to_string(),
            "semidiscrete:5:10:42"
        );
        for bad in ["cube:2:1", "cube:0:3", "torus:1:2", "sphere:1", "semidiscrete:0:3"] {
            assert!(bad.parse::<Setting>().is_err(), "{bad}");
        }
    }
}
