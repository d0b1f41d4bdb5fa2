//! Exact 3-D solids and their crossing lists along straight lines.
//!
//! A [`Solid`] is a CSG tree over spheres, axis-aligned boxes and finite
//! cylinders. Intersecting it with a [`Line`] yields a sorted list of
//! closed parameter spans; flattening the spans gives the [`CrossingList`]
//! `x_0 <= x_1 <= ... <= x_{2n-1}` consumed by the histogram recorders.
//! Tangent contacts appear as a duplicated parameter.

mod interval;
mod solid;
mod vector;

pub use interval::Span;
pub use solid::{Aabb, Body, BoundingSphere, Solid};
pub use vector::{Direction3, Line, Mat3, Point3, Vec3};

use alloc::vec::Vec;

/// Relative tangency tolerance: crossings closer than this times the
/// bounding-sphere radius collapse into a duplicated pair.
pub const TANGENCY_TOLERANCE: f64 = 1e-9;

/// Sorted boundary crossings of a line with a body.
///
/// Consecutive pairs `(params[2k], params[2k+1])` are the in-body
/// intervals. Zero-length intervals (tangents, coincident zone faces) are
/// kept; the recorders skip them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CrossingList {
    params: Vec<f64>,
}

impl CrossingList {
    pub fn from_spans(spans: &[Span]) -> Self {
        let mut params = Vec::with_capacity(2 * spans.len());
        for s in spans {
            params.push(s.enter);
            params.push(s.exit);
        }
        Self { params }
    }

    /// Builds a list from raw parameters. Panics if the length is odd or
    /// the values are not sorted.
    pub fn from_params(params: Vec<f64>) -> Self {
        assert!(params.len().is_multiple_of(2), "crossing list must have even length");
        assert!(
            params.windows(2).all(|w| w[0] <= w[1]),
            "crossing list must be sorted"
        );
        Self { params }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Number of in-body intervals `n`.
    pub fn n_intervals(&self) -> usize {
        self.params.len() / 2
    }

    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.params.chunks_exact(2).map(|c| (c[0], c[1]))
    }

    /// Sum of in-body interval lengths.
    pub fn chord_length_sum(&self) -> f64 {
        self.intervals().map(|(a, b)| b - a).sum()
    }

    /// Crossings of the same line traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        Self {
            params: self.params.iter().rev().map(|t| -t).collect(),
        }
    }
}
