//! Synthetic dataset generators.
//!
//! All generators draw coordinates row-major, point by point, so a caller
//! that draws a query from the same generator first and then a dataset gets
//! the same numbers as a streaming consumer reading the same stream.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::space::{Dataset, Label};

/// One point with i.i.d. standard normal coordinates.
pub fn gaussian_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `n` points in `d` dimensions with i.i.d. standard normal coordinates.
pub fn gaussian_dataset<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Dataset> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    let coords = (0..n * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Dataset::new(d, coords, None)
}

/// `n` points drawn uniformly from the integer grid `{0, ..., extent-1}^d`.
/// Repeated points are expected.
pub fn grid_dataset<R: Rng + ?Sized>(n: usize, d: usize, extent: u32, rng: &mut R) -> Result<Dataset> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    if extent == 0 {
        return Err(invalid("extent", "grid extent must be at least 1"));
    }
    let coords = (0..n * d)
        .map(|_| f64::from(rng.random_range(0..extent)))
        .collect();
    Dataset::new(d, coords, None)
}

/// Balanced two-class Gaussian mixture with unit covariance and class means
/// at `±(separation/2)·e₁`. Class 0 sits on the negative side.
pub fn gaussian_mixture<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    separation: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if d == 0 {
        return Err(invalid("d", "dimension must be at least 1"));
    }
    if !separation.is_finite() || separation < 0.0 {
        return Err(invalid("separation", "must be finite and >= 0"));
    }
    let mut coords = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, label) = mixture_point(d, separation, rng);
        coords.extend_from_slice(&x);
        labels.push(label);
    }
    Dataset::new(d, coords, Some(labels))
}

/// A single labeled draw from [`gaussian_mixture`]'s distribution.
pub fn mixture_point<R: Rng + ?Sized>(d: usize, separation: f64, rng: &mut R) -> (Vec<f64>, Label) {
    let label: Label = if rng.random_bool(0.5) { 1 } else { 0 };
    let mut x = gaussian_point(d, rng);
    let shift = separation / 2.0;
    x[0] += if label == 1 { shift } else { -shift };
    (x, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn empty_gaussian() {
        let ds = gaussian_dataset(0, 5, &mut RngStream::new(1, 0).rng()).unwrap();
        assert!(ds.is_empty());
        assert_eq!(ds.dim(), 5);
    }

    #[test]
    fn gaussian_grand_mean() {
        let (n, d) = (1000, 100);
        let ds = gaussian_dataset(n, d, &mut RngStream::new(11, 2).rng()).unwrap();
        let mean = ds.coords().iter().sum::<f64>() / (n * d) as f64;
        assert!(mean.abs() <= 4.0 / ((n * d) as f64).sqrt(), "{mean}");
        let var = ds.coords().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n * d) as f64;
        assert!((var - 1.0).abs() < 0.02, "{var}");
    }

    #[test]
    fn generators_are_deterministic() {
        let s = RngStream::new(5, 9);
        assert_eq!(
            gaussian_dataset(20, 3, &mut s.rng()).unwrap(),
            gaussian_dataset(20, 3, &mut s.rng()).unwrap()
        );
        assert_eq!(
            grid_dataset(20, 3, 10, &mut s.rng()).unwrap(),
            grid_dataset(20, 3, 10, &mut s.rng()).unwrap()
        );
        assert_eq!(
            gaussian_mixture(20, 3, 2.0, &mut s.rng()).unwrap(),
            gaussian_mixture(20, 3, 2.0, &mut s.rng()).unwrap()
        );
    }

    #[test]
    fn single_cell_grid_is_all_origin() {
        let ds = grid_dataset(5, 2, 1, &mut RngStream::new(0, 0).rng()).unwrap();
        assert_eq!(ds.len(), 5);
        assert!(ds.coords().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn grid_range_and_frequencies() {
        let n = 10_000;
        let ds = grid_dataset(n, 1, 10, &mut RngStream::new(3, 1).rng()).unwrap();
        let mut counts = [0usize; 10];
        for &c in ds.coords() {
            assert_eq!(c.fract(), 0.0);
            assert!((0.0..10.0).contains(&c));
            counts[c as usize] += 1;
        }
        let bound = 4.0 * (0.1 * 0.9 / n as f64).sqrt();
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((f - 0.1).abs() <= bound, "{f}");
        }
        assert!(grid_dataset(1, 1, 0, &mut RngStream::new(3, 1).rng()).is_err());
    }

    #[test]
    fn mixture_means() {
        let ds = gaussian_mixture(4000, 4, 2.0, &mut RngStream::new(8, 0).rng()).unwrap();
        let labels = ds.labels().unwrap();
        let (mut s0, mut n0, mut s1, mut n1) = (0.0, 0, 0.0, 0);
        for (p, &l) in ds.points().zip(labels) {
            if l == 0 {
                s0 += p[0];
                n0 += 1;
            } else {
                s1 += p[0];
                n1 += 1;
            }
        }
        assert!((s0 / n0 as f64 + 1.0).abs() < 0.1);
        assert!((s1 / n1 as f64 - 1.0).abs() < 0.1);
        assert!((n0 as f64 / 4000.0 - 0.5).abs() < 4.0 * (0.25f64 / 4000.0).sqrt());
    }
}
