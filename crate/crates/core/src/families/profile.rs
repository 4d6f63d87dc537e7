//! One-variable profile functions `γ(s)`, `λ(s)` evaluable in Taylor arithmetic.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use super::spline::QuinticSpline;
use crate::error::{GeometryError, Result};
use crate::taylor::{TaylorScalar, MAX_ORDER};

/// Absolute tolerance of the quadrature behind integrated profiles.
pub const QUADRATURE_TOLERANCE: f64 = 1e-12;

/// Declarative description of a profile, as it appears in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Sin,
    Cos,
    /// `Σ c_k s^k`.
    Polynomial { coefficients: Vec<f64> },
    /// `sin s · (1 + ε sin² s)`.
    PerturbedSin { epsilon: f64 },
    /// Quintic-spline interpolant of a table.
    Tabulated { s: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug)]
enum Kind {
    Sin,
    Cos,
    Polynomial(Vec<f64>),
    PerturbedSin(f64),
    Tabulated(QuinticSpline),
    /// `c ∫_s^l γ(t) dt`.
    Integrated { gamma: Profile, l: f64, c: f64 },
}

/// A smooth function of one variable. Cheap to clone.
#[derive(Clone, Debug)]
pub struct Profile {
    kind: Arc<Kind>,
    label: String,
}

impl Profile {
    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        let (kind, label) = match spec {
            ProfileSpec::Sin => (Kind::Sin, "sin".to_string()),
            ProfileSpec::Cos => (Kind::Cos, "cos".to_string()),
            ProfileSpec::Polynomial { coefficients } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(GeometryError::InvalidParameter(
                        "polynomial profile needs finite coefficients".into(),
                    ));
                }
                (Kind::Polynomial(coefficients.clone()), format!("polynomial{coefficients:?}"))
            }
            ProfileSpec::PerturbedSin { epsilon } => {
                if !epsilon.is_finite() {
                    return Err(GeometryError::InvalidParameter("perturbed_sin epsilon must be finite".into()));
                }
                (Kind::PerturbedSin(*epsilon), format!("perturbed_sin({epsilon})"))
            }
            ProfileSpec::Tabulated { s, values } => (
                Kind::Tabulated(QuinticSpline::interpolate(s, values)?),
                format!("tabulated({} points)", s.len()),
            ),
        };
        Ok(Self {
            kind: Arc::new(kind),
            label,
        })
    }

    pub fn sin() -> Self {
        Self::from_spec(&ProfileSpec::Sin).unwrap()
    }

    /// `λ(s) = c ∫_s^l γ(t) dt`, so `λ(l) = 0` and `λ′ = −cγ`.
    pub fn integrated(gamma: &Profile, l: f64, c: f64) -> Result<Self> {
        if !(c > 0.0) || !l.is_finite() {
            return Err(GeometryError::InvalidParameter(format!(
                "integrated profile needs c > 0 and finite l (c = {c}, l = {l})"
            )));
        }
        Ok(Self {
            label: format!("{c}*int_s^{l} {}", gamma.label),
            kind: Arc::new(Kind::Integrated {
                gamma: gamma.clone(),
                l,
                c,
            }),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True for profiles backed by sampled data.
    pub fn is_tabulated(&self) -> bool {
        match &*self.kind {
            Kind::Tabulated(_) => true,
            Kind::Integrated { gamma, .. } => gamma.is_tabulated(),
            _ => false,
        }
    }

    /// Taylor coefficients `φ^{(m)}(s0)/m!` for `m = 0..=order`.
    pub fn series(&self, s0: f64, order: u8) -> Result<Vec<f64>> {
        let order = order.min(MAX_ORDER);
        let var = TaylorScalar::variable(s0, 0, 1, order);
        let jet = match &*self.kind {
            Kind::Sin => var.sin(),
            Kind::Cos => var.cos(),
            Kind::Polynomial(c) => {
                let mut acc = var.constant_like(*c.last().unwrap());
                for a in c.iter().rev().skip(1) {
                    acc = &(&acc * &var) + *a;
                }
                acc
            }
            Kind::PerturbedSin(eps) => {
                let s = var.sin();
                &s * &(s.square() * *eps + 1.0)
            }
            Kind::Tabulated(sp) => {
                if s0 < sp.start() || s0 > sp.end() {
                    return Err(GeometryError::OutsideDomain {
                        axis: 0,
                        value: s0,
                        low: sp.start(),
                        high: sp.end(),
                    });
                }
                sp.jet(s0, order)
            }
            Kind::Integrated { gamma, l, c } => {
                let g = |t: f64| gamma.value(t).unwrap_or(f64::NAN);
                let mut out = vec![c * integrate(&g, s0, *l, QUADRATURE_TOLERANCE)?];
                if order > 0 {
                    let gs = gamma.series(s0, order - 1)?;
                    out.extend(gs.iter().enumerate().map(|(k, gk)| -c * gk / (k + 1) as f64));
                }
                return Ok(out);
            }
        };
        let mut out = jet.coefficients().to_vec();
        out.resize(order as usize + 1, 0.0);
        Ok(out)
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.series(s, 0)?[0])
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        Ok(self.series(s, 1)?[1])
    }

    /// The profile composed with an arbitrary Taylor scalar.
    pub fn jet(&self, s: &TaylorScalar) -> Result<TaylorScalar> {
        Ok(s.compose(&self.series(s.value(), s.order())?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn integrated_sine_is_cosine() {
        let lam = Profile::integrated(&Profile::sin(), FRAC_PI_2, 1.0).unwrap();
        for i in 0..20 {
            let s = 0.05 + i as f64 * 0.07;
            let ser = lam.series(s, 3).unwrap();
            assert!((ser[0] - s.cos()).abs() < 1e-10);
            assert!((ser[1] + s.sin()).abs() < 1e-14);
            assert!((ser[2] + 0.5 * s.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn integrated_constant_is_linear() {
        let one = Profile::from_spec(&ProfileSpec::Polynomial { coefficients: vec![1.0] }).unwrap();
        let lam = Profile::integrated(&one, 1.0, 2.0).unwrap();
        for s in [0.0, 0.25, 0.9] {
            assert!((lam.value(s).unwrap() - 2.0 * (1.0 - s)).abs() < 1e-13);
        }
    }

    #[test]
    fn perturbed_sine_series_matches_closed_form_derivative() {
        let p = Profile::from_spec(&ProfileSpec::PerturbedSin { epsilon: 0.1 }).unwrap();
        let s: f64 = 0.7;
        let d = s.cos() * (1.0 + 0.3 * s.sin().powi(2));
        assert!((p.derivative(s).unwrap() - d).abs() < 1e-14);
    }

    #[test]
    fn multivariate_composition() {
        let x = TaylorScalar::variables(&[0.4, 1.0], 2);
        let s = &x[0] * &x[1];
        let a = Profile::sin().jet(&s).unwrap();
        assert!((a.coefficients()[0] - s.value().sin()).abs() < 1e-15);
        assert_eq!(a.coefficients(), s.sin().coefficients());
    }

    #[test]
    fn tabulated_rejects_points_outside_table() {
        let s: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let p = Profile::from_spec(&ProfileSpec::Tabulated { values: s.clone(), s }).unwrap();
        assert!(p.value(0.5).is_ok());
        assert!(p.value(1.5).is_err());
        assert!(p.is_tabulated());
    }
}
