//! Ground cost functions and dense cost matrices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Declarative description of a ground cost `c(x, y)` on Euclidean points.
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    /// `Σ |x_k − y_k|`
    L1,
    /// `Σ (x_k − y_k)²`
    SqL2,
    /// `‖x − y‖^p`, `p ≥ 1`
    PowEuclidean(f64),
    /// `Σ |x_k − y_k|^p`, `p > 0`
    PowCoordinatewise(f64),
    /// `c(x, y) = inner(x, y[..split]) + residual(0, y[split..])`.
    Additive {
        split: usize,
        inner: Box<CostSpec>,
        residual: Box<CostSpec>,
    },
}

impl CostSpec {
    pub fn pow_euclidean(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidCost(format!("pow-euclid exponent {p} must be >= 1")));
        }
        Ok(CostSpec::PowEuclidean(p))
    }

    pub fn pow_coordinatewise(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidCost(format!("pow-coord exponent {p} must be > 0")));
        }
        Ok(CostSpec::PowCoordinatewise(p))
    }

    /// Additive cost; both parts must be coordinatewise separable.
    pub fn additive(split: usize, inner: CostSpec, residual: CostSpec) -> Result<Self> {
        for part in [&inner, &residual] {
            if matches!(part, CostSpec::Additive { .. }) {
                return Err(Error::InvalidCost("additive parts cannot be additive".into()));
            }
            if !part.is_separable() {
                return Err(Error::InvalidCost(format!(
                    "{part} does not decompose across coordinate blocks"
                )));
            }
        }
        if split == 0 {
            return Err(Error::InvalidCost("additive split must be >= 1".into()));
        }
        Ok(CostSpec::Additive {
            split,
            inner: Box::new(inner),
            residual: Box::new(residual),
        })
    }

    /// Whether `c(x, y) = Σ_k h(x_k − y_k)` for a single scalar `h`.
    pub fn is_separable(&self) -> bool {
        match self {
            CostSpec::L1 | CostSpec::SqL2 | CostSpec::PowCoordinatewise(_) => true,
            CostSpec::PowEuclidean(p) => *p == 2.0,
            CostSpec::Additive { .. } => false,
        }
    }

    /// `E h(U)` for `U ~ Unif[0, 1]`, the per-coordinate cost against the
    /// origin, for separable kinds.
    pub fn uniform_coordinate_mean(&self) -> Option<f64> {
        match self {
            CostSpec::L1 => Some(0.5),
            CostSpec::SqL2 => Some(1.0 / 3.0),
            CostSpec::PowCoordinatewise(p) => Some(1.0 / (p + 1.0)),
            CostSpec::PowEuclidean(p) if *p == 2.0 => Some(1.0 / 3.0),
            _ => None,
        }
    }

    /// Evaluates `c(x, y)`, checking dimensions.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self {
            CostSpec::Additive { split, .. } => {
                if x.len() != *split {
                    return Err(Error::DimensionMismatch {
                        expected: *split,
                        found: x.len(),
                    });
                }
                if y.len() < *split {
                    return Err(Error::DimensionMismatch {
                        expected: *split,
                        found: y.len(),
                    });
                }
            }
            _ => {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        found: y.len(),
                    });
                }
            }
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Evaluates the cost against the origin, `c(0, y)`, for non-additive kinds.
    pub fn eval_from_origin(&self, y: &[f64]) -> Result<f64> {
        if matches!(self, CostSpec::Additive { .. }) {
            return Err(Error::InvalidCost("residual cost cannot be additive".into()));
        }
        Ok(self.eval_pair(y.iter().map(|&v| v.abs())))
    }

    /// Evaluation without dimension checks; callers guarantee compatible inputs.
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CostSpec::Additive {
                split,
                inner,
                residual,
            } => {
                let (head, tail) = y.split_at(*split);
                inner.eval_unchecked(x, head) + residual.eval_pair(tail.iter().map(|v| v.abs()))
            }
            _ => self.eval_pair(x.iter().zip(y).map(|(a, b)| (a - b).abs())),
        }
    }

    fn eval_pair(&self, diffs: impl Iterator<Item = f64>) -> f64 {
        match self {
            CostSpec::L1 => diffs.sum(),
            CostSpec::SqL2 => diffs.map(|d| d * d).sum(),
            CostSpec::PowEuclidean(p) => {
                let sq: f64 = diffs.map(|d| d * d).sum();
                if *p == 2.0 {
                    sq
                } else {
                    sq.sqrt().powf(*p)
                }
            }
            CostSpec::PowCoordinatewise(p) => diffs.map(|d| d.powf(*p)).sum(),
            CostSpec::Additive { .. } => unreachable!("additive handled by caller"),
        }
    }

    /// Dimension of the source points the cost expects, if fixed by the spec.
    pub fn source_dim(&self) -> Option<usize> {
        match self {
            CostSpec::Additive { split, .. } => Some(*split),
            _ => None,
        }
    }
}

/// `c(x, y)` with dimension checks.
pub fn eval_cost(spec: &CostSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.eval(x, y)
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::L1 => write!(f, "l1"),
            CostSpec::SqL2 => write!(f, "sql2"),
            CostSpec::PowEuclidean(p) => write!(f, "pow-euclid:{p}"),
            CostSpec::PowCoordinatewise(p) => write!(f, "pow-coord:{p}"),
            CostSpec::Additive {
                split,
                inner,
                residual,
            } => write!(f, "additive:{split}:{inner}:{residual}"),
        }
    }
}

fn parse_base<'a>(tokens: &mut impl Iterator<Item = &'a str>) -> Result<CostSpec> {
    let name = tokens
        .next()
        .ok_or_else(|| Error::InvalidCost("missing cost name".into()))?;
    let mut exponent = |kind: &str| -> Result<f64> {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::InvalidCost(format!("{kind} needs an exponent")))?;
        tok.parse::<f64>()
            .map_err(|_| Error::InvalidCost(format!("bad exponent {tok:?}")))
    };
    match name {
        "l1" => Ok(CostSpec::L1),
        "sql2" => Ok(CostSpec::SqL2),
        "pow-euclid" => CostSpec::pow_euclidean(exponent(name)?),
        "pow-coord" => CostSpec::pow_coordinatewise(exponent(name)?),
        other => Err(Error::InvalidCost(format!("unknown cost {other:?}"))),
    }
}

impl FromStr for CostSpec {
    type Err = Error;

    /// Accepts `l1`, `sql2`, `pow-euclid:p`, `pow-coord:p` and
    /// `additive:s:<inner>:<residual>`.
    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.trim().split(':');
        let spec = if s.trim().starts_with("additive:") {
            tokens.next();
            let split_tok = tokens
                .next()
                .ok_or_else(|| Error::InvalidCost("additive needs a split".into()))?;
            let split = split_tok
                .parse::<usize>()
                .map_err(|_| Error::InvalidCost(format!("bad split {split_tok:?}")))?;
            let inner = parse_base(&mut tokens)?;
            let residual = parse_base(&mut tokens)?;
            CostSpec::additive(split, inner, residual)?
        } else {
            parse_base(&mut tokens)?
        };
        if let Some(extra) = tokens.next() {
            return Err(Error::InvalidCost(format!("trailing token {extra:?} in {s:?}")));
        }
        Ok(spec)
    }
}

/// Dense `m × n` cost matrix with an affine map back to original units:
/// `original = scale · value + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    scale: f64,
    offset: f64,
}

impl CostMatrix {
    /// Wraps row-major values (original units, scale 1, offset 0).
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptySupport);
        }
        if values.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::NonFinite(format!("cost entry {v} (entries must be finite and >= 0)")));
        }
        Ok(CostMatrix {
            rows,
            cols,
            values,
            scale: 1.0,
            offset: 0.0,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("ragged cost matrix".into()));
        }
        Self::from_values(m, n, rows.concat())
    }

    /// Evaluates `spec` on all support pairs.
    pub fn build(
        spec: &CostSpec,
        x: &DiscreteMeasure,
        y: &DiscreteMeasure,
        normalize: bool,
    ) -> Result<Self> {
        let (dx, dy) = (x.dim(), y.dim());
        match spec {
            CostSpec::Additive { split, .. } => {
                if dx != *split || dy < *split {
                    return Err(Error::DimensionMismatch {
                        expected: *split,
                        found: dx,
                    });
                }
            }
            _ => {
                if dx != dy {
                    return Err(Error::DimensionMismatch {
                        expected: dx,
                        found: dy,
                    });
                }
            }
        }
        let mut values = Vec::with_capacity(x.len() * y.len());
        for p in x.points() {
            for q in y.points() {
                values.push(spec.eval_unchecked(p, q));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("cost value {v}")));
        }
        let matrix = Self::from_values(x.len(), y.len(), values)?;
        Ok(if normalize { matrix.normalized() } else { matrix })
    }

    /// Affinely maps the entries onto `[0, 1]`, folding the map into
    /// `scale`/`offset` so original units are preserved.
    pub fn normalized(&self) -> Self {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let range = hi - lo;
        let (values, step) = if range > 0.0 {
            (self.values.iter().map(|v| ((v - lo) / range).clamp(0.0, 1.0)).collect(), range)
        } else {
            (vec![0.0; self.values.len()], 1.0)
        };
        CostMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
            scale: self.scale * step,
            offset: self.scale * lo + self.offset,
        }
    }

    /// Same values, original units mapped through `a · c + b` (`a > 0`).
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && b.is_finite()) {
            return Err(Error::InvalidParameter(format!("affine map {a}·c + {b}")));
        }
        Ok(CostMatrix {
            scale: a * self.scale,
            offset: a * self.offset + b,
            ..self.clone()
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Stored values (normalized units when normalized).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    /// Entry in original units.
    pub fn original(&self, i: usize, j: usize) -> f64 {
        self.scale * self.value(i, j) + self.offset
    }

    /// True when all stored values lie in `[0, 1]`.
    pub fn is_unit_range(&self) -> bool {
        self.values.iter().all(|&v| (0.0..=1.0).contains(&v))
    }
}

/// Free-function form of [`CostMatrix::build`].
pub fn cost_matrix(
    spec: &CostSpec,
    x: &DiscreteMeasure,
    y: &DiscreteMeasure,
    normalize: bool,
) -> Result<CostMatrix> {
    CostMatrix::build(spec, x, y, normalize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::validate_measure;

    #[test]
    fn eval_examples() {
        assert_eq!(CostSpec::SqL2.eval(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(CostSpec::L1.eval(&[0.5], &[0.5]).unwrap(), 0.0);
        let add = CostSpec::additive(1, CostSpec::SqL2, CostSpec::SqL2).unwrap();
        assert_eq!(add.eval(&[0.0], &[1.0, 2.0]).unwrap(), 5.0);
        assert!(add.eval(&[0.0, 0.0], &[1.0, 2.0]).is_err());
        assert!(CostSpec::L1.eval(&[0.0], &[1.0, 2.0]).is_err());
        let pe = CostSpec::pow_euclidean(3.0).unwrap();
        assert!((pe.eval(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 125.0).abs() < 1e-9);
        let pc = CostSpec::pow_coordinatewise(0.5).unwrap();
        assert!((pc.eval(&[0.0, 0.0], &[4.0, 9.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn additive_rejects_non_separable_parts() {
        assert!(CostSpec::additive(1, CostSpec::PowEuclidean(3.0), CostSpec::L1).is_err());
        assert!(CostSpec::additive(1, CostSpec::PowEuclidean(2.0), CostSpec::L1).is_ok());
        let add = CostSpec::additive(1, CostSpec::L1, CostSpec::L1).unwrap();
        assert!(CostSpec::additive(1, add, CostSpec::L1).is_err());
        assert!(CostSpec::pow_euclidean(0.5).is_err());
        assert!(CostSpec::pow_coordinatewise(0.0).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in [
            "l1",
            "sql2",
            "pow-euclid:3",
            "pow-coord:0.5",
            "additive:2:sql2:l1",
            "additive:1:pow-coord:1.5:pow-coord:2.5",
        ] {
            let spec: CostSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
            assert_eq!(spec.to_string().parse::<CostSpec>().unwrap(), spec);
        }
        for bad in ["l2", "pow-euclid", "pow-euclid:x", "additive:1:sql2", "sql2:3", "additive:1:pow-euclid:3:l1"] {
            assert!(bad.parse::<CostSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn matrix_examples() {
        let zero = validate_measure(&[[0.0]], &[1.0]).unwrap();
        let m = CostMatrix::build(&CostSpec::SqL2, &zero, &zero, true).unwrap();
        assert_eq!(m.values(), &[0.0]);
        assert_eq!((m.scale(), m.offset()), (1.0, 0.0));

        let x = validate_measure(&[[0.0], [1.0]], &[0.5, 0.5]).unwrap();
        let m = CostMatrix::build(&CostSpec::L1, &x, &x, false).unwrap();
        assert_eq!(m.values(), &[0.0, 1.0, 1.0, 0.0]);

        let x = validate_measure(&[[0.0], [2.0]], &[0.5, 0.5]).unwrap();
        let y = validate_measure(&[[1.0]], &[1.0]).unwrap();
        let m = CostMatrix::build(&CostSpec::SqL2, &x, &y, true).unwrap();
        assert_eq!(m.values(), &[0.0, 0.0]);
        assert_eq!((m.scale(), m.offset()), (1.0, 1.0));
        assert_eq!(m.original(1, 0), 1.0);
    }

    #[test]
    fn normalization_is_affine() {
        let m = CostMatrix::from_values(2, 2, vec![1.0, 3.0, 5.0, 2.0]).unwrap();
        let n = m.normalized();
        assert!(n.is_unit_range());
        assert_eq!(n.scale(), 4.0);
        assert_eq!(n.offset(), 1.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!((n.original(i, j) - m.value(i, j)).abs() < 1e-12);
            }
        }
        let a = n.affine(2.0, -1.0).unwrap();
        assert!((a.original(0, 1) - 5.0).abs() < 1e-12);
    }
}
