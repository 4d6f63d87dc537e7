//! Finite-difference reference values, independent of the Taylor engine.

#![allow(dead_code)]

use nalgebra::DMatrix;
use twistorlab_core::{MetricField, TaylorScalar, TensorField};

pub const STEP: f64 = 1e-3;

/// Central difference with one Richardson step (error O(h⁴)).
pub fn derivative(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], axis: usize, h: f64) -> Vec<f64> {
    let central = |h: f64| {
        let mut p = x.to_vec();
        let mut m = x.to_vec();
        p[axis] += h;
        m[axis] -= h;
        f(&p).iter().zip(f(&m)).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>()
    };
    let coarse = central(h);
    let fine = central(h / 2.0);
    fine.iter().zip(coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect()
}

pub fn metric_values(m: &MetricField, x: &[f64]) -> Vec<f64> {
    m.matrix_at(x).into_data()
}

/// `Γ^k_ij` as a flat `[k][i][j]` array.
pub fn christoffel(m: &MetricField, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let g = metric_values(m, x);
    let ginv = DMatrix::from_row_slice(n, n, &g).try_inverse().expect("invertible metric");
    let f = |y: &[f64]| metric_values(m, y);
    let dg: Vec<Vec<f64>> = (0..n).map(|l| derivative(&f, x, l, h)).collect();
    let d = |l: usize, i: usize, j: usize| dg[l][i * n + j];
    let mut out = vec![0.0; n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                out[(k * n + i) * n + j] = (0..n)
                    .map(|l| 0.5 * ginv[(k, l)] * (d(i, j, l) + d(j, i, l) - d(l, i, j)))
                    .sum();
            }
        }
    }
    out
}

/// `R^l_kij` as a flat `[l][k][i][j]` array, from differences of the
/// difference quotient Christoffel symbols.
pub fn riemann(m: &MetricField, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let gam = christoffel(m, x, h);
    let f = |y: &[f64]| christoffel(m, y, h);
    let dgam: Vec<Vec<f64>> = (0..n).map(|a| derivative(&f, x, a, h)).collect();
    let g = |k: usize, i: usize, j: usize| gam[(k * n + i) * n + j];
    let dg = |a: usize, k: usize, i: usize, j: usize| dgam[a][(k * n + i) * n + j];
    let mut out = vec![0.0; n * n * n * n];
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = dg(i, l, j, k) - dg(j, l, i, k);
                    for p in 0..n {
                        r += g(l, i, p) * g(p, j, k) - g(l, j, p) * g(p, i, k);
                    }
                    out[((l * n + k) * n + i) * n + j] = r;
                }
            }
        }
    }
    out
}

pub fn field_values(v: &TensorField, x: &[f64]) -> Vec<f64> {
    let coords = TaylorScalar::variables(x, 0);
    v.evaluate_at(&coords).unwrap().values().into_data()
}

/// `(L_ξ g)_ij = ξ^k ∂_k g_ij + g_kj ∂_i ξ^k + g_ik ∂_j ξ^k`.
pub fn lie_derivative_of_metric(m: &MetricField, xi: &TensorField, x: &[f64], h: f64) -> Vec<f64> {
    let n = x.len();
    let g = metric_values(m, x);
    let v = field_values(xi, x);
    let fg = |y: &[f64]| metric_values(m, y);
    let fv = |y: &[f64]| field_values(xi, y);
    let dg: Vec<Vec<f64>> = (0..n).map(|k| derivative(&fg, x, k, h)).collect();
    let dv: Vec<Vec<f64>> = (0..n).map(|i| derivative(&fv, x, i, h)).collect();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += v[k] * dg[k][i * n + j] + g[k * n + j] * dv[i][k] + g[i * n + k] * dv[j][k];
            }
            out[i * n + j] = s;
        }
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
