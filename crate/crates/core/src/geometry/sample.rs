use super::Plane;
use crate::quadrature::compensated_sum;
use crate::{Error, Point, Result};

/// Quadrature representation of a `d`-dimensional measure: positions,
/// tangent planes and positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSample<const N: usize> {
    dim: usize,
    points: Vec<Point<N>>,
    planes: Vec<Plane<N>>,
    weights: Vec<f64>,
}

impl<const N: usize> WeightedSample<N> {
    pub fn new(
        dim: usize,
        points: Vec<Point<N>>,
        planes: Vec<Plane<N>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if points.len() != planes.len() || points.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "sample lengths differ: {} points, {} planes, {} weights",
                points.len(),
                planes.len(),
                weights.len()
            )));
        }
        if let Some(p) = planes.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.dim(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-positive weight {w}")));
        }
        Ok(Self {
            dim,
            points,
            planes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point<N>] {
        &self.points
    }

    pub fn planes(&self) -> &[Plane<N>] {
        &self.planes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.weights.iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point<N>, &Plane<N>, f64)> {
        self.points
            .iter()
            .zip(&self.planes)
            .zip(&self.weights)
            .map(|((x, p), w)| (x, p, *w))
    }
}
