//! Euclidean points, datasets and the shell-cost factor.

use crate::error::{invalid, Error, Result};

/// Class identifier attached to a labeled point.
pub type Label = u32;

/// A finite collection of points of one dimension, stored row-major,
/// optionally with one class label per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    coords: Vec<f64>,
    labels: Option<Vec<Label>>,
}

impl Dataset {
    /// Builds a dataset from row-major coordinates.
    ///
    /// Rejects a zero dimension, a coordinate count that is not a multiple
    /// of `dim`, non-finite coordinates and a label count that differs from
    /// the point count.
    pub fn new(dim: usize, coords: Vec<f64>, labels: Option<Vec<Label>>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                point: pos / dim,
                coord: pos % dim,
            });
        }
        let n = coords.len() / dim;
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::LabelCount {
                    expected: n,
                    found: l.len(),
                });
            }
        }
        Ok(Self { dim, coords, labels })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new(), None)
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>], labels: Option<Vec<Label>>) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn with_labels(self, labels: Vec<Label>) -> Result<Self> {
        Self::new(self.dim, self.coords, Some(labels))
    }

    /// Checks that `q` can be compared against this dataset's points.
    pub fn check_query(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: q.len(),
            });
        }
        if let Some(coord) = q.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: 0, coord });
        }
        Ok(())
    }

    /// Euclidean distance from `q` to every point, in index order.
    pub fn distances_to(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_query(q)?;
        Ok(self.points().map(|p| l2_unchecked(p, q)).collect())
    }
}

/// A point index paired with its distance to some query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceRecord {
    pub index: usize,
    pub distance: f64,
}

/// Euclidean distance between two points of equal length.
pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(l2_unchecked(a, b))
}

#[inline]
pub(crate) fn l2_unchecked(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum::<f64>()
        .sqrt()
}

/// Floating-point width used by the concentration experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    F32,
    #[default]
    F64,
}

impl Precision {
    pub fn bits(self) -> u32 {
        match self {
            Precision::F32 => 32,
            Precision::F64 => 64,
        }
    }
}

/// Relative cost of accepting an approximation `epsilon` in dimension `r`
/// when cost scales with the volume of the shell between the exact and the
/// approximate radius: `(1+epsilon)^(r-1)`, or `(r-1)·ln(1+epsilon)` in log
/// space.
///
/// Linear mode reports [`Error::Overflow`] instead of returning infinity.
pub fn shell_cost_factor(epsilon: f64, r: usize, log_space: bool) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    if r == 0 {
        return Err(invalid("r", "dimension must be at least 1"));
    }
    let log = (r - 1) as f64 * epsilon.ln_1p();
    if log_space {
        return Ok(log);
    }
    let v = log.exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { epsilon, r })
    }
}
