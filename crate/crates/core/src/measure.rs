//! Finite weighted point clouds in Euclidean space.
//!
//! [`DiscreteMeasure`] is the only measure representation the solver sees.
//! Construction validates weights, merges duplicate support points and
//! re-normalizes the weights so that they sum to one.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::cost::CostSpec;
use crate::error::{Error, Result};

/// Input tolerance on the total weight before exact re-normalization.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A point with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("point must have dimension >= 1".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {c}")));
        }
        Ok(Point(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Read access to a weighted point set; implemented by probability measures
/// and by signed combinations of them.
pub trait WeightedPoints {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn point(&self, i: usize) -> &[f64];
    fn weight(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Probability measure with finitely many atoms, stored as a flat
/// row-major coordinate buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates and canonicalizes a measure given as separate points.
    pub fn new<P: AsRef<[f64]>>(points: &[P], weights: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let dim = points[0].as_ref().len();
        if dim == 0 {
            return Err(Error::InvalidParameter("point must have dimension >= 1".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, weights.to_vec())
    }

    /// Validates and canonicalizes a measure given as a flat coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("point must have dimension >= 1".into()));
        }
        if weights.is_empty() {
            return Err(Error::EmptySupport);
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::LengthMismatch {
                expected: dim * weights.len(),
                found: coords.len(),
            });
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("coordinate {c}")));
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite(format!("weight {value}")));
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }

        let (coords, mut weights) = merge_duplicates(dim, coords, weights);
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(DiscreteMeasure {
            dim,
            coords,
            weights,
        })
    }

    /// Uniform empirical measure on the given flat point buffer.
    pub fn uniform_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() {
            return Err(Error::EmptySupport);
        }
        let n = coords.len() / dim;
        let w = 1.0 / n as f64;
        Self::from_flat(dim, coords, vec![w; n])
    }

    /// Dirac mass at a single point.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::from_flat(point.len(), point.to_vec(), vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// True when every atom carries the same weight.
    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|&w| w == w0)
    }

    /// Push-forward under the projection onto the first `keep` coordinates.
    pub fn project(&self, keep: usize) -> Result<Self> {
        push_forward_projection(self, keep)
    }
}

impl WeightedPoints for DiscreteMeasure {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn point(&self, i: usize) -> &[f64] {
        DiscreteMeasure::point(self, i)
    }
    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

/// Finite signed combination of atoms, e.g. the difference of an empirical
/// measure and its population counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl SignedMeasure {
    /// Builds `Σ coef_k · measure_k`; all measures must share one dimension.
    pub fn combination(terms: &[(f64, &DiscreteMeasure)]) -> Result<Self> {
        let first = terms.first().ok_or(Error::EmptySupport)?;
        let dim = first.1.dim();
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for &(coef, m) in terms {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            coords.extend_from_slice(m.coords());
            weights.extend(m.weights().iter().map(|w| coef * w));
        }
        Ok(SignedMeasure {
            dim,
            coords,
            weights,
        })
    }
}

impl WeightedPoints for SignedMeasure {
    fn dim(&self) -> usize {
        self.dim
    }
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }
    fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }
}

fn coord_key(p: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 denote the same point
    p.iter().map(|&c| (c + 0.0).to_bits()).collect()
}

/// Merges repeated points, keeping first-occurrence order.
fn merge_duplicates(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = weights.len();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(n);
    let mut out_coords = Vec::with_capacity(coords.len());
    let mut out_weights: Vec<f64> = Vec::with_capacity(n);
    for (p, &w) in coords.chunks_exact(dim).zip(&weights) {
        match index.get(&coord_key(p)) {
            Some(&k) => out_weights[k] += w,
            None => {
                index.insert(coord_key(p), out_weights.len());
                out_coords.extend_from_slice(p);
                out_weights.push(w);
            }
        }
    }
    (out_coords, out_weights)
}

/// Checks raw points and weights and returns the canonical measure.
pub fn validate_measure<P: AsRef<[f64]>>(points: &[P], weights: &[f64]) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(points, weights)
}

/// Image of `measure` under `y ↦ (y_1, …, y_keep)`, with merged duplicates.
pub fn push_forward_projection(measure: &DiscreteMeasure, keep: usize) -> Result<DiscreteMeasure> {
    if keep == 0 || keep > measure.dim() {
        return Err(Error::InvalidParameter(format!(
            "projection keeps {keep} of {} coordinates",
            measure.dim()
        )));
    }
    let mut coords = Vec::with_capacity(measure.len() * keep);
    for p in measure.points() {
        coords.extend_from_slice(&p[..keep]);
    }
    DiscreteMeasure::from_flat(keep, coords, measure.weights().to_vec())
}

/// `R(ν) = Σ_j w_j · residual(0, y_j[split..])` for probability or signed measures.
pub fn residual_cost_functional<M: WeightedPoints + ?Sized>(
    measure: &M,
    split: usize,
    residual: &CostSpec,
) -> Result<f64> {
    let dim = measure.dim();
    if split >= dim {
        return Err(Error::InvalidParameter(format!(
            "split {split} leaves no residual coordinates in dimension {dim}"
        )));
    }
    let mut total = 0.0;
    for i in 0..measure.len() {
        let tail = &measure.point(i)[split..];
        total += measure.weight(i) * residual.eval_from_origin(tail)?;
    }
    Ok(total)
}

/// Parses the text measure format: one atom per line, coordinates followed
/// by the weight, `#` starts a comment line.
pub fn parse_measure_text(text: &str) -> Result<DiscreteMeasure> {
    let mut dim: Option<usize> = None;
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if fields.len() < 2 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: "expected at least one coordinate and a weight".into(),
            });
        }
        let d = fields.len() - 1;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {expected} coordinates, found {d}"),
                })
            }
            _ => {}
        }
        coords.extend_from_slice(&fields[..d]);
        weights.push(fields[d]);
    }
    let dim = dim.ok_or(Error::EmptySupport)?;
    DiscreteMeasure::from_flat(dim, coords, weights)
}

/// Inverse of [`parse_measure_text`].
pub fn write_measure_text(measure: &DiscreteMeasure) -> String {
    let mut out = String::new();
    for (p, w) in measure.points().zip(measure.weights()) {
        for c in p {
            let _ = write!(out, "{c} ");
        }
        let _ = writeln!(out, "{w}");
    }
    out
}
