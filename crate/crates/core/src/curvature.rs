//! Christoffel symbols, Riemann, Ricci and sectional curvature at a point,
//! plus the algebraic curvature identities used as sanity checks.
//!
//! Sign convention: `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z`, so the
//! round unit sphere has sectional curvature +1 and Killing fields satisfy
//! `∇²_{X,Y}ξ = R(X,ξ)Y`.

use crate::error::Result;
use crate::metric::{FramePoint, MetricField, PointGeometry};
use crate::tensor::{Slot, Tensor};

/// `Γ^k_ij` at `point`, stored as `[k, i, j]`.
pub fn christoffel(metric: &MetricField, point: &[f64]) -> Result<Tensor<f64>> {
    Ok(metric.geometry(point, 1)?.christoffel().values())
}

/// `R^l_{kij}` at `point`, stored as `[l, k, i, j]`.
pub fn riemann(metric: &MetricField, point: &[f64]) -> Result<Tensor<f64>> {
    Ok(metric.geometry(point, 2)?.riemann()?.clone())
}

/// Ricci curvature as a bilinear form and as the metric-dual endomorphism.
#[derive(Clone, Debug)]
pub struct Ricci {
    /// `Ric_jk`.
    pub form: Tensor<f64>,
    /// `Ric^i_k = g^{ij} Ric_jk`.
    pub endomorphism: Tensor<f64>,
}

pub fn ricci(metric: &MetricField, point: &[f64]) -> Result<Ricci> {
    ricci_at(&metric.geometry(point, 2)?)
}

/// Ricci tensor from point geometry: `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)`.
pub fn ricci_at(geo: &PointGeometry) -> Result<Ricci> {
    let r = geo.riemann()?;
    // R^i_{k i j} summed over i → Ric_jk; the contraction leaves [k, j]
    let form = r.trace(0, 2).permute(&[1, 0]);
    let endomorphism = geo.frame().inverse.contract_with(1, &form, 0);
    let endomorphism = endomorphism.with_slots(vec![Slot::Contra, Slot::Co]);
    Ok(Ricci { form, endomorphism })
}

/// Orthonormal frame at `point` (Gram–Schmidt in axis order).
pub fn orthonormal_frame(metric: &MetricField, point: &[f64]) -> Result<FramePoint> {
    Ok(metric.geometry(point, 1)?.frame().clone())
}

/// Fully covariant `R_{lkij} = g_{lp} R^p_{kij}`.
pub fn lowered_riemann(geo: &PointGeometry) -> Result<Tensor<f64>> {
    let r = geo.riemann()?;
    let g = &geo.frame().metric;
    Ok(g.contract_with(1, r, 0).with_slots(vec![Slot::Co; 4]))
}

/// Riemann tensor in the orthonormal frame: `Rf[l,k,i,j] = ⟨e_l, R(e_i,e_j)e_k⟩`.
pub fn frame_riemann(geo: &PointGeometry) -> Result<Tensor<f64>> {
    Ok(geo.frame().to_frame(geo.riemann()?))
}

/// Sectional curvature of the plane spanned by coordinate vectors `x`, `y`.
pub fn sectional_curvature(geo: &PointGeometry, x: &[f64], y: &[f64]) -> Result<f64> {
    let low = lowered_riemann(geo)?;
    let g = &geo.frame().metric;
    let n = geo.dim();
    let mut num = 0.0;
    // ⟨R(X,Y)Y, X⟩ = R_{l k i j} X^l Y^k X^i Y^j
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    num += low.get(&[l, k, i, j]) * x[l] * y[k] * x[i] * y[j];
                }
            }
        }
    }
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] * g.get(&[i, j]) * b[j];
            }
        }
        s
    };
    let area = ip(x, x) * ip(y, y) - ip(x, y).powi(2);
    Ok(num / area)
}

/// Sectional curvatures of all coordinate planes `(i, j)`, `i < j`.
pub fn coordinate_sectional_curvatures(geo: &PointGeometry) -> Result<Vec<((usize, usize), f64)>> {
    let n = geo.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut x = vec![0.0; n];
            let mut y = vec![0.0; n];
            x[i] = 1.0;
            y[j] = 1.0;
            out.push(((i, j), sectional_curvature(geo, &x, &y)?));
        }
    }
    Ok(out)
}

pub fn scalar_curvature(geo: &PointGeometry) -> Result<f64> {
    let ric = ricci_at(geo)?;
    Ok(ric.endomorphism.trace(0, 1).data()[0])
}

/// Eigenvalues of the Ricci endomorphism, ascending.
pub fn ricci_eigenvalues(geo: &PointGeometry) -> Result<Vec<f64>> {
    let ric = ricci_at(geo)?;
    let frame_ric = geo.frame().to_frame(&ric.form);
    let n = geo.dim();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| *frame_ric.get(&[i, j]));
    let sym = (&m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

/// Residuals of the algebraic symmetries of the lowered curvature tensor,
/// each normalized by `max |R_{lkij}|`.
#[derive(Clone, Copy, Debug)]
pub struct CurvatureSymmetries {
    pub first_bianchi: f64,
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
}

pub fn curvature_symmetries(geo: &PointGeometry) -> Result<CurvatureSymmetries> {
    let r = lowered_riemann(geo)?;
    let n = geo.dim();
    let scale = r.max_abs() + 1e-30;
    let (mut bianchi, mut anti, mut pair) = (0.0f64, 0.0f64, 0.0f64);
    for l in 0..n {
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let v = r.get(&[l, k, i, j]);
                    // R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0 with Z = ∂_k
                    let b = v + r.get(&[l, i, j, k]) + r.get(&[l, j, k, i]);
                    bianchi = bianchi.max(b.abs());
                    anti = anti
                        .max((v + r.get(&[l, k, j, i])).abs())
                        .max((v + r.get(&[k, l, i, j])).abs());
                    pair = pair.max((v - r.get(&[i, j, l, k])).abs());
                }
            }
        }
    }
    Ok(CurvatureSymmetries {
        first_bianchi: bianchi / scale,
        antisymmetry: anti / scale,
        pair_symmetry: pair / scale,
    })
}

/// `max |∇_a g_ij|` normalized by `max |∂_a g_ij| + 1`.
pub fn metric_compatibility(geo: &PointGeometry) -> Result<f64> {
    let dg = geo.covariant_derivative(geo.metric())?.values();
    let n = geo.dim();
    let mut partial_scale: f64 = 0.0;
    for a in 0..n {
        for c in geo.metric().data() {
            partial_scale = partial_scale.max(c.partial(a).value().abs());
        }
    }
    Ok(dg.max_abs() / (partial_scale + 1.0))
}
