//! Smoothness of warped metrics at the ends of the profile interval, decided
//! by least-squares Taylor fits near each end.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::profile::Profile;
use crate::error::{GeometryError, Result};

/// Forbidden Taylor coefficients must stay below this.
pub const BOUNDARY_THRESHOLD: f64 = 1e-6;
/// Fits with a worse design condition number are inconclusive.
pub const MAX_CONDITION: f64 = 1e10;
/// Default number of fit samples near an end.
pub const FIT_POINTS: usize = 40;
const FIT_DEGREE: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Origin,
    Far,
}

impl End {
    pub fn label(self) -> &'static str {
        match self {
            End::Origin => "origin",
            End::Far => "far end",
        }
    }
}

/// Which expansion is required.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Join profile `γ`: odd with unit slope at the origin, even with
    /// value `1/c` at the far end.
    Join,
    /// Warped factor of a conformal gradient field: `γ²` must be
    /// `t² + O(t⁴)` at either end.
    Gcvf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub end: End,
    pub mode: BoundaryMode,
    /// Fitted `a_k` of `y(t) = Σ a_k t^k`, `t` the distance to the end.
    pub coefficients: Vec<f64>,
    /// Indices of the coefficients that are checked, with their targets.
    pub forbidden: Vec<(usize, f64)>,
    pub max_forbidden: f64,
    pub condition_number: f64,
    pub sample_count: usize,
    pub window: f64,
    pub passed: bool,
    /// Verdict on tabulated data is only as good as the interpolant.
    pub approximate: bool,
}

impl BoundaryReport {
    /// Turn a failing verdict into the construction error.
    pub fn into_result(self) -> Result<Self> {
        if self.passed {
            return Ok(self);
        }
        let detail = self
            .forbidden
            .iter()
            .map(|&(k, target)| format!("a{k} = {:.3e} (expected {target})", self.coefficients[k]))
            .collect::<Vec<_>>()
            .join(", ");
        Err(GeometryError::BoundaryCondition {
            end: self.end.label().to_string(),
            detail: format!(
                "max forbidden coefficient {:.3e} exceeds {BOUNDARY_THRESHOLD:e}; {detail}",
                self.max_forbidden
            ),
        })
    }
}

fn chebyshev_nodes(count: usize) -> Vec<f64> {
    // Nodes on (0, 1], clustered at both ends of the window.
    (0..count)
        .map(|k| 0.5 * (1.0 - ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos()))
        .collect()
}

/// Least-squares Taylor fit of `γ` (or `γ²`) near one end of `(0, l)`.
pub fn analyze(
    gamma: &Profile,
    l: f64,
    c: f64,
    end: End,
    mode: BoundaryMode,
    sample_count: usize,
) -> Result<BoundaryReport> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("profile interval length must be positive, got {l}")));
    }
    if mode == BoundaryMode::Join && !(c > 0.0) {
        return Err(GeometryError::InvalidParameter(format!("c must be positive, got {c}")));
    }
    if sample_count <= FIT_DEGREE {
        return Err(GeometryError::InvalidParameter(format!(
            "boundary fit needs more than {FIT_DEGREE} samples"
        )));
    }
    let window = (0.1f64).min(l / 4.0);
    let taus = chebyshev_nodes(sample_count);
    let mut y = Vec::with_capacity(sample_count);
    for &tau in &taus {
        let t = tau * window;
        let s = match end {
            End::Origin => t,
            End::Far => l - t,
        };
        let g = gamma.value(s)?;
        y.push(match mode {
            BoundaryMode::Join => g,
            BoundaryMode::Gcvf => g * g,
        });
    }
    let design = DMatrix::from_fn(sample_count, FIT_DEGREE + 1, |i, k| taus[i].powi(k as i32));
    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition_number <= MAX_CONDITION) {
        return Err(GeometryError::InconclusiveFit(format!(
            "{} fit condition number {condition_number:.3e} exceeds {MAX_CONDITION:e}",
            end.label()
        )));
    }
    let scaled = svd
        .solve(&DVector::from_vec(y), 0.0)
        .map_err(|e| GeometryError::InconclusiveFit(e.to_string()))?;
    let coefficients: Vec<f64> = scaled
        .iter()
        .enumerate()
        .map(|(k, b)| b / window.powi(k as i32))
        .collect();
    if coefficients.iter().any(|a| !a.is_finite()) {
        return Err(GeometryError::InconclusiveFit("non-finite fitted coefficients".into()));
    }
    let forbidden: Vec<(usize, f64)> = match (mode, end) {
        (BoundaryMode::Join, End::Origin) => vec![(0, 0.0), (1, 1.0), (2, 0.0)],
        (BoundaryMode::Join, End::Far) => vec![(0, 1.0 / c), (1, 0.0), (3, 0.0)],
        (BoundaryMode::Gcvf, _) => vec![(0, 0.0), (1, 0.0), (2, 1.0), (3, 0.0)],
    };
    let max_forbidden = forbidden
        .iter()
        .map(|&(k, target)| (coefficients[k] - target).abs())
        .fold(0.0, f64::max);
    Ok(BoundaryReport {
        end,
        mode,
        coefficients,
        forbidden,
        max_forbidden,
        condition_number,
        sample_count,
        window,
        passed: max_forbidden <= BOUNDARY_THRESHOLD,
        approximate: gamma.is_tabulated(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::profile::ProfileSpec;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn poly(c: &[f64]) -> Profile {
        Profile::from_spec(&ProfileSpec::Polynomial { coefficients: c.to_vec() }).unwrap()
    }

    #[test]
    fn sine_passes_at_both_join_ends() {
        let o = analyze(&Profile::sin(), FRAC_PI_2, 1.0, End::Origin, BoundaryMode::Join, FIT_POINTS).unwrap();
        assert!(o.passed, "{o:?}");
        assert!((o.coefficients[3] + 1.0 / 6.0).abs() < 1e-5);
        let f = analyze(&Profile::sin(), FRAC_PI_2, 1.0, End::Far, BoundaryMode::Join, FIT_POINTS).unwrap();
        assert!(f.passed, "{f:?}");
        assert!(o.condition_number < MAX_CONDITION);
    }

    #[test]
    fn even_term_at_origin_fails() {
        let r = analyze(&poly(&[0.0, 1.0, 1.0]), 1.0, 1.0, End::Origin, BoundaryMode::Join, FIT_POINTS).unwrap();
        assert!(!r.passed);
        assert!((r.max_forbidden - 1.0).abs() < 1e-8);
        let err = r.into_result().unwrap_err();
        assert!(err.to_string().starts_with("origin boundary condition"));
    }

    #[test]
    fn wrong_far_constant_fails() {
        let r = analyze(&Profile::sin(), FRAC_PI_2, 1.1, End::Far, BoundaryMode::Join, FIT_POINTS).unwrap();
        assert!(!r.passed);
        assert!(r.into_result().unwrap_err().to_string().starts_with("far end"));
    }

    #[test]
    fn squared_sine_passes_gcvf_mode_on_both_ends() {
        for end in [End::Origin, End::Far] {
            let r = analyze(&Profile::sin(), PI, 1.0, end, BoundaryMode::Gcvf, FIT_POINTS).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn verdicts_survive_refinement() {
        let cases = [
            (Profile::sin(), End::Origin, 1.0),
            (poly(&[0.0, 1.0, 1.0]), End::Origin, 1.0),
            (Profile::sin(), End::Far, 1.1),
        ];
        for (g, end, c) in cases {
            let a = analyze(&g, FRAC_PI_2, c, end, BoundaryMode::Join, FIT_POINTS).unwrap();
            let b = analyze(&g, FRAC_PI_2, c, end, BoundaryMode::Join, 2 * FIT_POINTS).unwrap();
            assert_eq!(a.passed, b.passed);
        }
    }
}
