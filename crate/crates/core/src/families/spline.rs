//! Quintic B-spline interpolation of tabulated profiles.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::taylor::TaylorScalar;

const DEGREE: usize = 5;

/// C⁴ quintic interpolant through `(s_i, y_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuinticSpline {
    knots: Vec<f64>,
    coeffs: Vec<f64>,
}

impl QuinticSpline {
    /// Interpolate strictly increasing abscissae (at least six points).
    pub fn interpolate(s: &[f64], y: &[f64]) -> Result<Self> {
        let n = s.len();
        if y.len() != n {
            return Err(GeometryError::InvalidParameter(format!(
                "tabulated profile: {n} abscissae but {} values",
                y.len()
            )));
        }
        if n < DEGREE + 1 {
            return Err(GeometryError::InvalidParameter(format!(
                "tabulated profile needs at least {} points, got {n}",
                DEGREE + 1
            )));
        }
        if s.windows(2).any(|w| !(w[0] < w[1])) || s.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(GeometryError::InvalidParameter(
                "tabulated profile abscissae must be finite and strictly increasing".into(),
            ));
        }
        // Clamped knots with averaged interior knots (Schoenberg–Whitney holds).
        let mut knots = vec![s[0]; DEGREE + 1];
        for j in 1..n - DEGREE {
            knots.push(s[j..j + DEGREE].iter().sum::<f64>() / DEGREE as f64);
        }
        knots.extend(std::iter::repeat(s[n - 1]).take(DEGREE + 1));

        let mut spline = Self {
            knots,
            coeffs: vec![0.0; n],
        };
        let a = DMatrix::from_fn(n, n, |i, j| spline.basis(j, s[i]));
        let rhs = DVector::from_column_slice(y);
        let sol = a.lu().solve(&rhs).ok_or_else(|| {
            GeometryError::InvalidParameter("tabulated profile: singular collocation system".into())
        })?;
        spline.coeffs = sol.iter().copied().collect();
        Ok(spline)
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn end(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    fn span(&self, x: f64) -> usize {
        let n = self.coeffs.len();
        let mut k = DEGREE;
        while k < n - 1 && x >= self.knots[k + 1] {
            k += 1;
        }
        k
    }

    /// Single basis function by de Boor on a unit coefficient vector.
    fn basis(&self, j: usize, x: f64) -> f64 {
        let k = self.span(x);
        if j + DEGREE < k || j > k {
            return 0.0;
        }
        let mut d: Vec<f64> = (0..=DEGREE).map(|r| if r + k - DEGREE == j { 1.0 } else { 0.0 }).collect();
        self.de_boor_in_place(k, x, &mut d);
        d[DEGREE]
    }

    fn de_boor_in_place(&self, k: usize, x: f64, d: &mut [f64]) {
        let t = &self.knots;
        for r in 1..=DEGREE {
            for j in (r..=DEGREE).rev() {
                let i = j + k - DEGREE;
                let a = (x - t[i]) / (t[i + DEGREE + 1 - r] - t[i]);
                d[j] = (1.0 - a) * d[j - 1] + a * d[j];
            }
        }
    }

    /// Value and derivatives at `x` as a univariate Taylor expansion of the
    /// polynomial piece containing `x`.
    pub fn jet(&self, x: f64, order: u8) -> TaylorScalar {
        let k = self.span(x);
        let t = &self.knots;
        let var = TaylorScalar::variable(x, 0, 1, order);
        let mut d: Vec<TaylorScalar> = (0..=DEGREE).map(|j| var.constant_like(self.coeffs[j + k - DEGREE])).collect();
        for r in 1..=DEGREE {
            for j in (r..=DEGREE).rev() {
                let i = j + k - DEGREE;
                let a = (&var - t[i]) * (1.0 / (t[i + DEGREE + 1 - r] - t[i]));
                d[j] = &(&(1.0 - &a) * &d[j - 1]) + &(&a * &d[j]);
            }
        }
        d.swap_remove(DEGREE)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x, 0).value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_quintic_polynomials_exactly() {
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) + x.powi(5);
        let s: Vec<f64> = (0..12).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = s.iter().map(|&x| p(x)).collect();
        let sp = QuinticSpline::interpolate(&s, &y).unwrap();
        for x in [0.0, 0.03, 0.47, 0.81, 1.1] {
            let j = sp.jet(x, 2);
            assert!((j.value() - p(x)).abs() < 1e-12);
            let dp = -2.0 + 1.5 * x * x + 5.0 * x.powi(4);
            assert!((j.coefficients()[1] - dp).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolates_samples_of_sine() {
        let s: Vec<f64> = (0..40).map(|i| i as f64 * 0.04).collect();
        let y: Vec<f64> = s.iter().map(|x| x.sin()).collect();
        let sp = QuinticSpline::interpolate(&s, &y).unwrap();
        for (x, v) in s.iter().zip(&y) {
            assert!((sp.value(*x) - v).abs() < 1e-13);
        }
        assert!((sp.value(0.5) - 0.5f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(QuinticSpline::interpolate(&[0.0, 1.0], &[0.0, 1.0]).is_err());
        let s = [0.0, 0.2, 0.1, 0.3, 0.4, 0.5];
        assert!(QuinticSpline::interpolate(&s, &[0.0; 6]).is_err());
    }
}
