//! Coordinate boxes and low-discrepancy sampling inside them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

/// Default exclusion width as a fraction of each axis length.
pub const DEFAULT_MARGIN_FRACTION: f64 = 0.05;
/// Minimum distance kept from a polar singularity (`r = 0`, `r = π`).
pub const POLAR_MARGIN: f64 = 0.05;

/// An open coordinate box with per-axis margins keeping samples away from
/// coordinate singularities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    margin: Vec<f64>,
    periodic: Vec<bool>,
}

impl ChartDomain {
    /// Box with default margins (5% of each axis length) and no periodic axes.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let margin = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| DEFAULT_MARGIN_FRACTION * (u - l))
            .collect();
        let periodic = vec![false; lower.len()];
        Self::with_margins(lower, upper, margin, periodic)
    }

    pub fn with_margins(
        lower: Vec<f64>,
        upper: Vec<f64>,
        margin: Vec<f64>,
        periodic: Vec<bool>,
    ) -> Result<Self> {
        let n = lower.len();
        if n < 2 {
            return Err(GeometryError::InvalidParameter(format!(
                "chart dimension must be at least 2, got {n}"
            )));
        }
        if upper.len() != n || margin.len() != n || periodic.len() != n {
            return Err(GeometryError::InvalidParameter(
                "chart bound, margin and periodic arrays must have equal length".into(),
            ));
        }
        for i in 0..n {
            if !(margin[i] >= 0.0) {
                return Err(GeometryError::InvalidParameter(format!(
                    "axis {i}: margin must be non-negative"
                )));
            }
            if !(lower[i] + 2.0 * margin[i] < upper[i]) {
                return Err(GeometryError::InvalidParameter(format!(
                    "axis {i}: empty sampling region [{} + 2·{}, {}]",
                    lower[i], margin[i], upper[i]
                )));
            }
        }
        Ok(Self {
            lower,
            upper,
            margin,
            periodic,
        })
    }

    /// Mark an axis as an angle coordinate.
    pub fn periodic(mut self, axis: usize) -> Self {
        self.periodic[axis] = true;
        self
    }

    /// Widen the margin of a polar axis so it stays at least [`POLAR_MARGIN`]
    /// away from both ends.
    pub fn polar(mut self, axis: usize) -> Self {
        self.margin[axis] = self.margin[axis].max(POLAR_MARGIN);
        self
    }

    pub fn set_margin(&mut self, axis: usize, margin: f64) -> Result<()> {
        if !(margin >= 0.0 && self.lower[axis] + 2.0 * margin < self.upper[axis]) {
            return Err(GeometryError::InvalidParameter(format!(
                "axis {axis}: margin {margin} leaves no sampling region"
            )));
        }
        self.margin[axis] = margin;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn margin(&self) -> &[f64] {
        &self.margin
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    /// Sampling interval of one axis (bounds shrunk by the margin).
    pub fn sampling_interval(&self, axis: usize) -> (f64, f64) {
        (
            self.lower[axis] + self.margin[axis],
            self.upper[axis] - self.margin[axis],
        )
    }

    /// Centre of the box.
    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Check that `point` lies in the margined interior.
    pub fn check_interior(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        for (axis, &value) in point.iter().enumerate() {
            let (low, high) = self.sampling_interval(axis);
            // Periodic axes accept any value; the metric is periodic there.
            if self.periodic[axis] {
                continue;
            }
            if !(value >= low && value <= high) {
                return Err(GeometryError::OutsideDomain {
                    axis,
                    value,
                    low,
                    high,
                });
            }
        }
        Ok(())
    }

    /// `count` points of a Halton sequence over the margined box. The seed
    /// selects a random shift of the sequence (Cranley–Patterson rotation), so
    /// different seeds give different but equally well-spread point sets.
    pub fn halton_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        (0..count)
            .map(|k| {
                (0..n)
                    .map(|axis| {
                        let u = (radical_inverse(k as u64 + 1, PRIMES[axis]) + shift[axis]).fract();
                        let (low, high) = self.sampling_interval(axis);
                        low + u * (high - low)
                    })
                    .collect()
            })
            .collect()
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while k > 0 {
        out += (k % base) as f64 * scale;
        k /= base;
        scale *= inv;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_region() {
        let err = ChartDomain::with_margins(vec![0.0, 0.0], vec![1.0, 1.0], vec![0.5, 0.1], vec![false; 2]);
        assert!(err.is_err());
        assert!(ChartDomain::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn halton_points_stay_in_margins() {
        let d = ChartDomain::new(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 5.0]).unwrap();
        let pts = d.halton_points(500, 7);
        for p in &pts {
            d.check_interior(p).unwrap();
        }
        assert_eq!(pts, d.halton_points(500, 7));
        assert_ne!(pts, d.halton_points(500, 8));
    }

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn outside_point_is_a_domain_error() {
        let d = ChartDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            d.check_interior(&[0.01, 0.5]),
            Err(GeometryError::OutsideDomain { axis: 0, .. })
        ));
    }
}
