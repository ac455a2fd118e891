//! Exact identities for additive costs `c(x, y) = c₁(x, y₁) + c₂(y₂)`.

use rand::Rng;

use crate::cost::{CostMatrix, CostSpec};
use crate::error::{Error, Result};
use crate::measure::{push_forward_projection, residual_cost_functional, DiscreteMeasure};
use crate::settings::{semidiscrete_sites, SemiDiscreteConfig};
use crate::solver::solve_exact;

fn additive_parts(cost: &CostSpec) -> Result<(usize, &CostSpec, &CostSpec)> {
    match cost {
        CostSpec::Additive {
            split,
            inner,
            residual,
        } => Ok((*split, inner, residual)),
        other => Err(Error::InvalidCost(format!("expected an additive cost, got {other}"))),
    }
}

fn transport_cost(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostSpec) -> Result<f64> {
    let c = CostMatrix::build(cost, mu, nu, false)?;
    Ok(solve_exact(mu, nu, &c)?.cost)
}

/// `R_{c₂}(ν)`, zero when no residual coordinates remain.
fn residual_term(nu: &DiscreteMeasure, split: usize, residual: &CostSpec) -> Result<f64> {
    if split == nu.dim() {
        Ok(0.0)
    } else {
        residual_cost_functional(nu, split, residual)
    }
}

/// `|T_c(μ, ν) − T_{c₁}(μ, 𝔭_#ν) − R_{c₂}(ν)|` with both transport costs
/// solved exactly.
pub fn decomposition_residual(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &CostSpec) -> Result<f64> {
    let (split, inner, residual) = additive_parts(cost)?;
    if mu.dim() != split || nu.dim() < split {
        return Err(Error::InvalidParameter(format!(
            "split {split} incompatible with source dim {} and target dim {}",
            mu.dim(),
            nu.dim()
        )));
    }
    let full = transport_cost(mu, nu, cost)?;
    let projected = push_forward_projection(nu, split)?;
    let reduced = transport_cost(mu, &projected, inner)?;
    let r = residual_term(nu, split, residual)?;
    Ok((full - reduced - r).abs())
}

/// Distribution of the first coordinate block of `ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeadLaw {
    /// `Unif([0,1]^split)`
    Uniform,
    /// Uniform over the sites of a semi-discrete setting of dimension `split`;
    /// repeated sites make the projected sample genuinely non-uniform.
    Sites(SemiDiscreteConfig),
}

/// `ν` on `R^dim` whose first `split` coordinates follow `head` and whose
/// remaining coordinates are `Unif[0,1]` (or identically zero).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub split: usize,
    pub dim: usize,
    pub head: HeadLaw,
    pub zero_residual: bool,
}

impl CouplingConfig {
    pub fn new(split: usize, dim: usize) -> Result<Self> {
        let cfg = CouplingConfig {
            split,
            dim,
            head: HeadLaw::Uniform,
            zero_residual: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.split == 0 || self.split > self.dim {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= split <= dim, got split={}, dim={}",
                self.split, self.dim
            )));
        }
        if let HeadLaw::Sites(s) = &self.head {
            if s.dim != self.split {
                return Err(Error::InvalidParameter(format!(
                    "site dimension {} differs from split {}",
                    s.dim, self.split
                )));
            }
        }
        Ok(())
    }
}

/// Samples `ν̂_n`, sets `μ̂_n = 𝔭_#ν̂_n` and returns
/// `|T_c(μ̂_n, ν̂_n) − R_{c₂}(ν̂_n)|`. The inner transport is free because
/// `c₁(y₁, y₁) = 0`, so this is zero up to round-off.
pub fn dependent_coupling_check<R: Rng + ?Sized>(
    cfg: &CouplingConfig,
    cost: &CostSpec,
    n: usize,
    rng: &mut R,
) -> Result<f64> {
    cfg.validate()?;
    let (split, _, residual) = additive_parts(cost)?;
    if split != cfg.split {
        return Err(Error::InvalidParameter(format!(
            "cost split {split} differs from configured split {}",
            cfg.split
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be >= 1".into()));
    }
    let sites = match &cfg.head {
        HeadLaw::Sites(s) => semidiscrete_sites(s),
        HeadLaw::Uniform => Vec::new(),
    };
    let mut coords = Vec::with_capacity(n * cfg.dim);
    for _ in 0..n {
        match cfg.head {
            HeadLaw::Uniform => coords.extend((0..split).map(|_| rng.random::<f64>())),
            HeadLaw::Sites(_) => {
                let i = rng.random_range(0..sites.len());
                coords.extend_from_slice(sites[i].coords());
            }
        }
        for _ in split..cfg.dim {
            coords.push(if cfg.zero_residual { 0.0 } else { rng.random::<f64>() });
        }
    }
    let nu = DiscreteMeasure::uniform_flat(cfg.dim, coords)?;
    let mu = push_forward_projection(&nu, split)?;
    let t = transport_cost(&mu, &nu, cost)?;
    let r = residual_term(&nu, split, residual)?;
    Ok((t - r).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn sq_add(split: usize) -> CostSpec {
        CostSpec::additive(split, CostSpec::SqL2, CostSpec::SqL2).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let l1 = CostSpec::additive(1, CostSpec::L1, CostSpec::L1).unwrap();
        let mu = DiscreteMeasure::dirac(&[0.0]).unwrap();
        let nu = DiscreteMeasure::dirac(&[0.0, 3.0]).unwrap();
        assert_eq!(decomposition_residual(&mu, &nu, &l1).unwrap(), 0.0);

        let mu = DiscreteMeasure::uniform_flat(1, vec![0.0, 1.0]).unwrap();
        let nu = DiscreteMeasure::uniform_flat(2, vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let c = CostMatrix::build(&sq_add(1), &mu, &nu, false).unwrap();
        assert!((solve_exact(&mu, &nu, &c).unwrap().cost - 2.5).abs() < 1e-12);
        assert!(decomposition_residual(&mu, &nu, &sq_add(1)).unwrap() < 1e-9);
        assert!(decomposition_residual(&mu, &nu, &CostSpec::SqL2).is_err());
    }

    #[test]
    fn dependent_coupling_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let cfg = CouplingConfig::new(1, 3).unwrap();
        assert!(dependent_coupling_check(&cfg, &sq_add(1), 1, &mut rng).unwrap() < 1e-12);
        assert!(dependent_coupling_check(&cfg, &sq_add(1), 50, &mut rng).unwrap() < 1e-9);
        let zero = CouplingConfig {
            zero_residual: true,
            ..cfg
        };
        assert_eq!(dependent_coupling_check(&zero, &sq_add(1), 20, &mut rng).unwrap(), 0.0);
        let sites = CouplingConfig {
            head: HeadLaw::Sites(SemiDiscreteConfig::new(3, 2, 42).unwrap()),
            ..CouplingConfig::new(2, 4).unwrap()
        };
        assert!(dependent_coupling_check(&sites, &sq_add(2), 50, &mut rng).unwrap() < 1e-9);
        assert!(dependent_coupling_check(&cfg, &sq_add(2), 5, &mut rng).is_err());
    }
}
