//! Theoretical convergence rates of the empirical OT cost and the explicit
//! entropy-integral bound on the Rademacher complexity of the dual class.

use std::fmt;

use crate::error::{Error, Result};

/// Shape of the rate `n ↦ r(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateClass {
    /// `n^{-1/2}`
    Param,
    /// `n^{-1/2} log n`
    ParamLog,
    /// `n^{-e}` with `e ∈ (0, 1/2)`
    Poly(f64),
}

/// A rate class with its log-log slope as `n → ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryRate {
    pub class: RateClass,
    pub asymptotic_slope: f64,
}

impl TheoryRate {
    pub fn param() -> Self {
        TheoryRate {
            class: RateClass::Param,
            asymptotic_slope: -0.5,
        }
    }

    pub fn param_log() -> Self {
        TheoryRate {
            class: RateClass::ParamLog,
            asymptotic_slope: -0.5,
        }
    }

    pub fn poly(e: f64) -> Result<Self> {
        if !(e > 0.0 && e < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "polynomial rate exponent {e} outside (0, 1/2)"
            )));
        }
        Ok(TheoryRate {
            class: RateClass::Poly(e),
            asymptotic_slope: -e,
        })
    }

    pub fn class_name(&self) -> &'static str {
        match self.class {
            RateClass::Param => "param",
            RateClass::ParamLog => "param-log",
            RateClass::Poly(_) => "poly",
        }
    }
}

impl fmt::Display for TheoryRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class {
            RateClass::Param => write!(f, "n^(-1/2)"),
            RateClass::ParamLog => write!(f, "n^(-1/2) log n"),
            RateClass::Poly(e) => match rational(e) {
                Some((p, q)) => write!(f, "n^(-{p}/{q})"),
                None => write!(f, "n^(-{})", decimal(e)),
            },
        }
    }
}

/// `p/q` in lowest terms with `q ≤ 10^4`, if `e` is such a fraction.
fn rational(e: f64) -> Option<(u64, u64)> {
    (1..=10_000u64).find_map(|q| {
        let p = (e * q as f64).round();
        (p >= 1.0 && (e * q as f64 - p).abs() < 1e-9).then_some((p as u64, q))
    })
}

/// At most six decimals, trailing zeros removed.
fn decimal(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Rate for a dual class whose uniform metric entropy grows like `ε^{-k}`.
pub fn theory_rate_general(k: f64) -> Result<TheoryRate> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("entropy exponent k={k} must be > 0")));
    }
    if k < 2.0 {
        Ok(TheoryRate::param())
    } else if k == 2.0 {
        Ok(TheoryRate::param_log())
    } else {
        TheoryRate::poly(1.0 / k)
    }
}

/// Cost/measure families with a known rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    General { k: f64 },
    SemiDiscrete,
    Lipschitz { k: f64 },
    SemiConcave { d: usize },
    Hoelder { alpha: f64, d: usize },
}

impl Family {
    /// Parses a family name with `key=value` parameters, e.g.
    /// `("hoelder", ["a=0.5", "d=4"])`.
    pub fn parse<S: AsRef<str>>(name: &str, params: &[S]) -> Result<Self> {
        let mut kv = Vec::new();
        for p in params {
            for tok in p.as_ref().split_whitespace() {
                let (k, v) = tok.split_once('=').ok_or_else(|| {
                    Error::InvalidParameter(format!("parameter {tok:?} is not key=value"))
                })?;
                kv.push((k.to_string(), v.to_string()));
            }
        }
        let get = |keys: &[&str]| -> Result<String> {
            kv.iter()
                .find(|(k, _)| keys.contains(&k.as_str()))
                .map(|(_, v)| v.clone())
                .ok_or_else(|| Error::InvalidParameter(format!("{name} needs {}=", keys[0])))
        };
        let real = |keys: &[&str]| -> Result<f64> {
            let v = get(keys)?;
            v.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number {v:?}")))
        };
        let int = |keys: &[&str]| -> Result<usize> {
            let v = get(keys)?;
            v.parse::<usize>()
                .map_err(|_| Error::InvalidParameter(format!("bad integer {v:?}")))
        };
        let allowed: &[&str] = match name {
            "general" | "lipschitz" => &["k"],
            "semidiscrete" | "semi-discrete" => &[],
            "semiconcave" | "semi-concave" => &["d"],
            "hoelder" | "holder" => &["a", "alpha", "d"],
            other => return Err(Error::InvalidParameter(format!("unknown family {other:?}"))),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("{name} takes no parameter {k:?}")));
        }
        let family = match name {
            "general" => Family::General { k: real(&["k"])? },
            "lipschitz" => Family::Lipschitz { k: real(&["k"])? },
            "semidiscrete" | "semi-discrete" => Family::SemiDiscrete,
            "semiconcave" | "semi-concave" => Family::SemiConcave { d: int(&["d"])? },
            _ => Family::Hoelder {
                alpha: real(&["a", "alpha"])?,
                d: int(&["d"])?,
            },
        };
        Ok(family)
    }

    /// Symbolic form of the polynomial exponent, e.g. `2/d`.
    pub fn symbolic_exponent(&self) -> &'static str {
        match self {
            Family::General { .. } | Family::Lipschitz { .. } => "1/k",
            Family::SemiConcave { .. } => "2/d",
            Family::Hoelder { .. } => "a/d",
            Family::SemiDiscrete => "1/2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::General { k } => write!(f, "general k={k}"),
            Family::SemiDiscrete => write!(f, "semidiscrete"),
            Family::Lipschitz { k } => write!(f, "lipschitz k={k}"),
            Family::SemiConcave { d } => write!(f, "semiconcave d={d}"),
            Family::Hoelder { alpha, d } => write!(f, "hoelder a={alpha} d={d}"),
        }
    }
}

pub fn theory_rate_family(family: &Family) -> Result<TheoryRate> {
    match *family {
        Family::General { k } | Family::Lipschitz { k } => theory_rate_general(k),
        Family::SemiDiscrete => Ok(TheoryRate::param()),
        Family::SemiConcave { d } => match d {
            0 => Err(Error::InvalidParameter("dimension d must be >= 1".into())),
            1..=3 => Ok(TheoryRate::param()),
            4 => Ok(TheoryRate::param_log()),
            _ => TheoryRate::poly(2.0 / d as f64),
        },
        Family::Hoelder { alpha, d } => {
            if !(alpha > 0.0 && alpha <= 2.0) {
                return Err(Error::InvalidParameter(format!(
                    "Hoelder exponent a={alpha} must lie in (0, 2]"
                )));
            }
            if d == 0 {
                return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
            }
            let d = d as f64;
            if d < 2.0 * alpha {
                Ok(TheoryRate::param())
            } else if d == 2.0 * alpha {
                Ok(TheoryRate::param_log())
            } else {
                TheoryRate::poly(alpha / d)
            }
        }
    }
}

/// Multi-line description of a family's rate for terminal output.
pub fn rate_report(family: &Family) -> Result<String> {
    let rate = theory_rate_family(family)?;
    let mut out = format!("family: {family}\nclass: {}\n", rate.class_name());
    match rate.class {
        RateClass::Poly(e) => {
            out += &format!("rate: n^(-{}) = n^(-{})\n", family.symbolic_exponent(), decimal(e));
            out += &format!("exact exponent: {rate}\n");
        }
        _ => out += &format!("rate: {rate}\n"),
    }
    out += &format!("asymptotic log-log slope: {}\n", decimal(rate.asymptotic_slope));
    Ok(out)
}

/// Entropy-integral bound on `R_n(F_c)` when `log N(ε, F_c, ‖·‖_∞) ≤ K ε^{-k}`
/// for `ε ≤ ε₀`, evaluated at the δ that gives the stated rate. With
/// `K̃ = √(32K)`:
///
/// * `k < 2` (δ = 0): `K̃ (ε₀^{1−k/2}/(1−k/2) + (1−ε₀)/ε₀^{k/2}) n^{-1/2}`
/// * `k = 2` (δ = 4n^{-1/2}): `(8 + K̃ log ε₀ + K̃(1−ε₀)/ε₀) n^{-1/2} + (K̃/2) n^{-1/2} log n`
/// * `k > 2` (δ = 4n^{-1/k}): the `k < 2` term plus `(8 + K̃/(k/2−1)) n^{-1/k}`
///
/// The last two require `δ ≤ ε₀`; smaller `n` is an error.
pub fn dudley_rademacher_bound(k: f64, big_k: f64, eps0: f64, n: u64) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k={k} must be > 0")));
    }
    if !(big_k > 0.0 && big_k.is_finite()) {
        return Err(Error::InvalidParameter(format!("K={big_k} must be > 0")));
    }
    if !(eps0 > 0.0 && eps0 <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps0={eps0} must lie in (0, 1]")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let kt = (32.0 * big_k).sqrt();
    let nf = n as f64;
    let root = nf.powf(-0.5);
    let head = |k: f64| kt * (eps0.powf(1.0 - k / 2.0) / (1.0 - k / 2.0) + (1.0 - eps0) / eps0.powf(k / 2.0)) * root;
    let check_delta = |delta: f64| -> Result<()> {
        if delta > eps0 {
            return Err(Error::InvalidParameter(format!(
                "n={n} too small: delta={delta} exceeds eps0={eps0}"
            )));
        }
        Ok(())
    };
    if k < 2.0 {
        Ok(head(k))
    } else if k == 2.0 {
        check_delta(4.0 * root)?;
        Ok((8.0 + kt * eps0.ln() + kt * (1.0 - eps0) / eps0) * root + kt / 2.0 * root * nf.ln())
    } else {
        check_delta(4.0 * nf.powf(-1.0 / k))?;
        Ok(head(k) + (8.0 + kt / (k / 2.0 - 1.0)) * nf.powf(-1.0 / k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_cases() {
        assert_eq!(theory_rate_general(1.0).unwrap().class, RateClass::Param);
        assert_eq!(theory_rate_general(2.0).unwrap().class, RateClass::ParamLog);
        let r = theory_rate_general(4.0).unwrap();
        assert_eq!(r.class, RateClass::Poly(0.25));
        assert_eq!(r.asymptotic_slope, -0.25);
        assert!(theory_rate_general(0.0).is_err());
    }

    #[test]
    fn family_cases() {
        let sc = theory_rate_family(&Family::SemiConcave { d: 10 }).unwrap();
        assert_eq!(sc.class, RateClass::Poly(0.2));
        assert_eq!(sc.to_string(), "n^(-1/5)");
        let h = theory_rate_family(&Family::Hoelder { alpha: 1.5, d: 3 }).unwrap();
        assert_eq!(h.class, RateClass::ParamLog);
        assert_eq!(theory_rate_family(&Family::SemiDiscrete).unwrap().class, RateClass::Param);
        assert_eq!(
            theory_rate_family(&Family::Hoelder { alpha: 0.5, d: 4 }).unwrap().to_string(),
            "n^(-1/8)"
        );
        assert!(theory_rate_family(&Family::Hoelder { alpha: 2.5, d: 4 }).is_err());
        assert_eq!(theory_rate_family(&Family::SemiConcave { d: 4 }).unwrap().class, RateClass::ParamLog);
        assert_eq!(theory_rate_family(&Family::SemiConcave { d: 3 }).unwrap().class, RateClass::Param);
    }

    #[test]
    fn reports() {
        let r = rate_report(&Family::parse("semiconcave", &["d=10"]).unwrap()).unwrap();
        assert!(r.contains("n^(-2/d) = n^(-0.2)"), "{r}");
        let r = rate_report(&Family::parse("general", &["k=2"]).unwrap()).unwrap();
        assert!(r.contains("n^(-1/2) log n"), "{r}");
        let r = rate_report(&Family::parse("hoelder", &["a=0.5 d=4"]).unwrap()).unwrap();
        assert!(r.contains("n^(-1/8)"), "{r}");
        assert!(Family::parse("torus", &["d=1"]).is_err());
        assert!(Family::parse("general", &["d=1"]).is_err());
    }

    #[test]
    fn dudley_examples() {
        let b = dudley_rademacher_bound(1.0, 1.0, 1.0, 100).unwrap();
        assert!((b - 2.0 * 32f64.sqrt() / 10.0).abs() < 1e-12);
        let b = dudley_rademacher_bound(4.0, 1.0, 1.0, 10_000).unwrap();
        assert!((b - (-(32f64.sqrt()) * 0.01 + (8.0 + 32f64.sqrt()) * 0.1)).abs() < 1e-12);
        assert!(dudley_rademacher_bound(4.0, 1.0, 1.0, 100).is_err());
        assert!(dudley_rademacher_bound(2.0, 1.0, 1.0, 15).is_err());
        assert!(dudley_rademacher_bound(2.0, 1.0, 1.0, 16).is_ok());
    }
}
