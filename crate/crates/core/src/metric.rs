//! Metric fields on a chart and their local jets at a point.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::chart::ChartDomain;
use crate::error::{GeometryError, Result};
use crate::taylor::{Scalar, TaylorScalar};
use crate::tensor::{Slot, Tensor};

/// Highest order at which point geometry is built. Third derivatives of the
/// metric are enough for second covariant derivatives of `∇ξ`.
pub const MAX_GEOMETRY_ORDER: u8 = 3;

/// Tolerance on `|⟨e_i, e_j⟩ − δ_ij|` for a constructed frame.
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// Component map of a field: chart coordinates (as Taylor scalars) to a
/// row-major component array.
pub type ComponentFn = Arc<dyn Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync>;

/// A Riemannian metric `g_ij(x)` on a chart.
#[derive(Clone)]
pub struct MetricField {
    name: String,
    domain: ChartDomain,
    eval: ComponentFn,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish()
    }
}

impl MetricField {
    /// `eval` returns the full `n×n` component matrix; only the upper triangle
    /// is read, the lower one is mirrored so `g` is exactly symmetric.
    pub fn new(
        name: impl Into<String>,
        domain: ChartDomain,
        eval: impl Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
        }
    }

    /// Diagonal metric from its diagonal entries.
    pub fn diagonal(
        name: impl Into<String>,
        domain: ChartDomain,
        diag: impl Fn(&[TaylorScalar]) -> Vec<TaylorScalar> + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, domain, move |x| {
            let n = x.len();
            let d = diag(x);
            let zero = x[0].zero_like();
            let mut out = vec![zero; n * n];
            for (i, v) in d.into_iter().enumerate() {
                out[i * n + i] = v;
            }
            out
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &ChartDomain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: ChartDomain) -> Self {
        assert_eq!(domain.dim(), self.dim());
        self.domain = domain;
        self
    }

    /// Components at the given coordinate expansion.
    pub fn evaluate(&self, coords: &[TaylorScalar]) -> Tensor<TaylorScalar> {
        let n = self.dim();
        let raw = (self.eval)(coords);
        assert_eq!(raw.len(), n * n, "metric component count");
        Tensor::from_fn(n, vec![Slot::Co, Slot::Co], |idx| {
            let (i, j) = (idx[0].min(idx[1]), idx[0].max(idx[1]));
            raw[i * n + j].clone()
        })
    }

    /// Plain component matrix at a point, without the interior check.
    pub fn matrix_at(&self, point: &[f64]) -> Tensor<f64> {
        self.evaluate(&TaylorScalar::variables(point, 0)).values()
    }

    /// Constant rescaling `factor · g`.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}*{factor}", self.name),
            domain: self.domain.clone(),
            eval: Arc::new(move |x| inner(x).into_iter().map(|c| c * factor).collect()),
        }
    }

    /// Conformal corruption `(1 + epsilon · sin x_axis) · g`.
    pub fn conformally_perturbed(&self, axis: usize, epsilon: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            name: format!("{}~perturbed", self.name),
            domain: self.domain.clone(),
            eval: Arc::new(move |x| {
                let w = x[axis].sin() * epsilon + 1.0;
                inner(x).into_iter().map(|c| &c * &w).collect()
            }),
        }
    }

    /// Local jets of the metric and its connection at `point`.
    pub fn geometry(&self, point: &[f64], order: u8) -> Result<PointGeometry> {
        self.domain.check_interior(point)?;
        PointGeometry::build(self, point, order)
    }
}

/// Product of two `n×n` matrices of scalars stored row-major.
pub(crate) fn matmul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = a[0].zero_like();
            for k in 0..n {
                acc.add_product(&a[i * n + k], &b[k * n + j]);
            }
            out.push(acc);
        }
    }
    out
}

/// Inverse of a matrix of Taylor scalars by Newton iteration from the
/// inverse of its value. Fails if the value is not positive definite when
/// `require_spd` is set, or not invertible otherwise.
pub(crate) fn invert_taylor_matrix(
    m: &[TaylorScalar],
    n: usize,
    require_spd: bool,
) -> Result<Vec<TaylorScalar>> {
    let value = DMatrix::from_fn(n, n, |i, j| m[i * n + j].value());
    let inv0 = if require_spd {
        value
            .clone()
            .cholesky()
            .ok_or_else(|| GeometryError::SingularMetric("Cholesky factorization failed".into()))?
            .inverse()
    } else {
        value
            .clone()
            .try_inverse()
            .ok_or_else(|| GeometryError::SingularMetric("matrix not invertible".into()))?
    };
    if inv0.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::SingularMetric("non-finite inverse".into()));
    }
    let template = &m[0];
    let order = m.iter().map(|x| x.order()).min().unwrap_or(0);
    let mut x: Vec<TaylorScalar> = (0..n * n)
        .map(|k| template.constant_like(inv0[(k / n, k % n)]).truncate(order))
        .collect();
    // Each Newton step doubles the number of correct orders.
    let mut correct = 1u8;
    while correct <= order {
        let gx = matmul(m, &x, n);
        let two_minus: Vec<TaylorScalar> = gx
            .iter()
            .enumerate()
            .map(|(k, v)| if k / n == k % n { 2.0 - v } else { -v })
            .collect();
        x = matmul(&x, &two_minus, n);
        correct = correct.saturating_mul(2);
    }
    Ok(x)
}

/// Numeric data at one point: metric, connection and an orthonormal frame.
#[derive(Clone, Debug)]
pub struct FramePoint {
    pub point: Vec<f64>,
    pub metric: Tensor<f64>,
    pub inverse: Tensor<f64>,
    /// `Γ^k_ij` stored as `[k, i, j]`.
    pub christoffel: Tensor<f64>,
    /// `frame[a]` = coordinate components of `e_a`.
    pub frame: Vec<Vec<f64>>,
    /// `coframe[a]` = coordinate components of the dual 1-form `e_a^♭`.
    pub coframe: Vec<Vec<f64>>,
}

impl FramePoint {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Gram–Schmidt on the coordinate basis in axis order.
    pub(crate) fn gram_schmidt(metric: &Tensor<f64>) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let n = metric.dim();
        let inner = |a: &[f64], b: &[f64]| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += a[i] * metric.get(&[i, j]) * b[j];
                }
            }
            s
        };
        let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            for e in &frame {
                let p = inner(&v, e);
                for (vi, ei) in v.iter_mut().zip(e) {
                    *vi -= p * ei;
                }
            }
            let norm_sq = inner(&v, &v);
            if !(norm_sq > 0.0) || !norm_sq.is_finite() {
                return Err(GeometryError::SingularMetric(format!(
                    "Gram–Schmidt breakdown at axis {k}"
                )));
            }
            let norm = norm_sq.sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            frame.push(v);
        }
        let coframe = frame
            .iter()
            .map(|e| {
                (0..n)
                    .map(|i| (0..n).map(|j| metric.get(&[i, j]) * e[j]).sum())
                    .collect()
            })
            .collect();
        Ok((frame, coframe))
    }

    /// `max |⟨e_i, e_j⟩ − δ_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let ip: f64 = (0..n).map(|i| self.coframe[a][i] * self.frame[b][i]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// Express a coordinate tensor in the orthonormal frame. Every slot of the
    /// result refers to the frame, where upper and lower indices coincide; the
    /// result is tagged all-covariant.
    pub fn to_frame(&self, t: &Tensor<f64>) -> Tensor<f64> {
        let n = self.dim();
        let mut cur = t.clone();
        for s in 0..t.rank() {
            let basis = match t.slots()[s] {
                Slot::Co => &self.frame,
                Slot::Contra => &self.coframe,
            };
            let src = cur.clone();
            let mut src_idx = vec![0usize; t.rank()];
            cur = Tensor::from_fn(n, src.slots().to_vec(), |idx| {
                src_idx.copy_from_slice(idx);
                let mut acc = 0.0;
                for i in 0..n {
                    src_idx[s] = i;
                    acc += basis[idx[s]][i] * src.get(&src_idx);
                }
                acc
            });
        }
        cur.with_slots(vec![Slot::Co; t.rank()])
    }

    /// Coordinate components of the vector with frame components `v`.
    pub fn vector_from_frame(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|a| v[a] * self.frame[a][i]).sum())
            .collect()
    }
}

/// Taylor jets of the metric, its inverse and the Christoffel symbols at a
/// point, together with the numeric [`FramePoint`] and (order ≥ 2) the
/// Riemann tensor.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    order: u8,
    coords: Vec<TaylorScalar>,
    metric: Tensor<TaylorScalar>,
    inverse: Tensor<TaylorScalar>,
    christoffel: Tensor<TaylorScalar>,
    frame: FramePoint,
    riemann: Option<Tensor<f64>>,
}

impl PointGeometry {
    fn build(field: &MetricField, point: &[f64], order: u8) -> Result<Self> {
        if order == 0 {
            return Err(GeometryError::OrderBudget {
                needed: 1,
                available: 0,
            });
        }
        if order > MAX_GEOMETRY_ORDER {
            return Err(GeometryError::OrderBudget {
                needed: order,
                available: MAX_GEOMETRY_ORDER,
            });
        }
        let n = field.dim();
        let coords = TaylorScalar::variables(point, order);
        let metric = field.evaluate(&coords);
        if metric.data().iter().any(|c| !c.value().is_finite()) {
            return Err(GeometryError::SingularMetric("non-finite metric component".into()));
        }
        let inv = invert_taylor_matrix(metric.data(), n, true)?;
        let inverse = Tensor::from_vec(n, vec![Slot::Contra, Slot::Contra], inv);

        // dg[l, i, j] = ∂_l g_ij
        let dg: Vec<TaylorScalar> = (0..n * n * n)
            .map(|f| {
                let (l, ij) = (f / (n * n), f % (n * n));
                metric.data()[ij].partial(l)
            })
            .collect();
        let dg_at = |l: usize, i: usize, j: usize| &dg[l * n * n + i * n + j];
        let zero = dg[0].zero_like();
        let christoffel = Tensor::from_fn(n, vec![Slot::Contra, Slot::Co, Slot::Co], |idx| {
            let (k, i, j) = (idx[0], idx[1], idx[2]);
            let mut acc = zero.clone();
            for l in 0..n {
                let mut bracket = dg_at(i, j, l).clone();
                bracket += dg_at(j, i, l);
                bracket -= dg_at(l, i, j);
                acc.add_product(inverse.get(&[k, l]), &bracket);
            }
            acc * 0.5
        });

        let metric_values = metric.values();
        let (frame_vecs, coframe) = FramePoint::gram_schmidt(&metric_values)?;
        let frame = FramePoint {
            point: point.to_vec(),
            metric: metric_values,
            inverse: inverse.values(),
            christoffel: christoffel.values(),
            frame: frame_vecs,
            coframe,
        };

        let mut geo = Self {
            order,
            coords,
            metric,
            inverse,
            christoffel,
            frame,
            riemann: None,
        };
        if order >= 2 {
            geo.riemann = Some(geo.compute_riemann());
        }
        Ok(geo)
    }

    /// `R^l_{kij}` = `dx^l(R(∂_i, ∂_j) ∂_k)` with
    /// `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
    fn compute_riemann(&self) -> Tensor<f64> {
        let n = self.dim();
        let g = &self.christoffel;
        let gv = &self.frame.christoffel;
        Tensor::from_fn(
            n,
            vec![Slot::Contra, Slot::Co, Slot::Co, Slot::Co],
            |idx| {
                let (l, k, i, j) = (idx[0], idx[1], idx[2], idx[3]);
                let mut r = g.get(&[l, j, k]).first_derivative(i) - g.get(&[l, i, k]).first_derivative(j);
                for m in 0..n {
                    r += gv.get(&[l, i, m]) * gv.get(&[m, j, k]) - gv.get(&[l, j, m]) * gv.get(&[m, i, k]);
                }
                r
            },
        )
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn point(&self) -> &[f64] {
        &self.frame.point
    }

    /// Coordinate functions as Taylor scalars (for evaluating fields).
    pub fn coords(&self) -> &[TaylorScalar] {
        &self.coords
    }

    pub fn metric(&self) -> &Tensor<TaylorScalar> {
        &self.metric
    }

    pub fn inverse(&self) -> &Tensor<TaylorScalar> {
        &self.inverse
    }

    pub fn christoffel(&self) -> &Tensor<TaylorScalar> {
        &self.christoffel
    }

    pub fn frame(&self) -> &FramePoint {
        &self.frame
    }

    /// Riemann tensor `R^l_{kij}` at the point; needs order ≥ 2.
    pub fn riemann(&self) -> Result<&Tensor<f64>> {
        self.riemann.as_ref().ok_or(GeometryError::OrderBudget {
            needed: 2,
            available: self.order,
        })
    }

    /// Covariant derivative of a tensor jet; the derivative index is prepended.
    pub fn covariant_derivative(&self, t: &Tensor<TaylorScalar>) -> Result<Tensor<TaylorScalar>> {
        let n = self.dim();
        let order = t.data().iter().map(|c| c.order()).min().unwrap_or(0);
        if order == 0 {
            return Err(GeometryError::OrderBudget {
                needed: 1,
                available: 0,
            });
        }
        let rank = t.rank();
        let mut slots = vec![Slot::Co];
        slots.extend_from_slice(t.slots());
        let mut src = vec![0usize; rank];
        Ok(Tensor::from_fn(n, slots, |idx| {
            let a = idx[0];
            let rest = &idx[1..];
            let mut acc = t.get(rest).partial(a);
            for s in 0..rank {
                src.copy_from_slice(rest);
                for m in 0..n {
                    src[s] = m;
                    match t.slots()[s] {
                        Slot::Contra => {
                            acc.add_product(self.christoffel.get(&[rest[s], a, m]), t.get(&src))
                        }
                        Slot::Co => {
                            let term = self.christoffel.get(&[m, a, rest[s]]) * t.get(&src);
                            acc -= &term;
                        }
                    }
                }
            }
            acc
        }))
    }

    /// Lower every contravariant slot with the metric.
    pub fn lower_all(&self, t: &Tensor<TaylorScalar>) -> Tensor<TaylorScalar> {
        self.retype_all(t, Slot::Contra, &self.metric, Slot::Co)
    }

    /// Raise every covariant slot with the inverse metric.
    pub fn raise_all(&self, t: &Tensor<TaylorScalar>) -> Tensor<TaylorScalar> {
        self.retype_all(t, Slot::Co, &self.inverse, Slot::Contra)
    }

    fn retype_all(
        &self,
        t: &Tensor<TaylorScalar>,
        from: Slot,
        with: &Tensor<TaylorScalar>,
        to: Slot,
    ) -> Tensor<TaylorScalar> {
        let mut cur = t.clone();
        for s in 0..t.rank() {
            if t.slots()[s] != from {
                continue;
            }
            // contract slot s with `with`, then move the new index back to s
            let c = cur.contract_with(s, with, 0);
            let r = t.rank();
            let mut perm: Vec<usize> = (0..r - 1).collect();
            perm.insert(s, r - 1);
            let mut slots = c.slots().to_vec();
            slots[r - 1] = to;
            cur = c.with_slots(slots).permute(&perm);
        }
        cur
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane_polar() -> MetricField {
        let d = ChartDomain::new(vec![0.5, 0.0], vec![2.0, 6.0]).unwrap();
        MetricField::diagonal("polar", d, |x| vec![x[0].constant_like(1.0), x[0].square()])
    }

    #[test]
    fn metric_is_mirrored_symmetric() {
        let d = ChartDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let m = MetricField::new("skewed", d, |x| {
            let one = x[0].constant_like(1.0);
            // lower-left entry deliberately wrong; only the upper triangle counts
            vec![one.clone() + 1.0, x[0].clone() * 0.1, one.clone() * 99.0, one + 2.0]
        });
        let g = m.matrix_at(&[0.5, 0.5]);
        assert_eq!(g.get(&[0, 1]), g.get(&[1, 0]));
    }

    #[test]
    fn taylor_inverse_matches_exact_inverse_jet() {
        // g = diag(1, r^2) → g^{θθ} = r^{-2}: at r0 = 1.5, coefficients r0^{-2}, -2 r0^{-3}, 3 r0^{-4}
        let geo = plane_polar().geometry(&[1.5, 3.0], 3).unwrap();
        let inv = geo.inverse().get(&[1, 1]);
        let r0: f64 = 1.5;
        assert!((inv.value() - r0.powi(-2)).abs() < 1e-15);
        assert!((inv.coefficient(&[1, 0]) + 2.0 * r0.powi(-3)).abs() < 1e-14);
        assert!((inv.coefficient(&[2, 0]) - 3.0 * r0.powi(-4)).abs() < 1e-14);
        assert!((inv.coefficient(&[3, 0]) + 4.0 * r0.powi(-5)).abs() < 1e-14);
    }

    #[test]
    fn diagonal_frame_rescales_axes() {
        let d = ChartDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let m = MetricField::diagonal("diag", d, |x| vec![x[0].constant_like(4.0), x[0].constant_like(9.0)]);
        let geo = m.geometry(&[0.5, 0.5], 1).unwrap();
        let f = geo.frame();
        assert_eq!(f.frame[0], vec![0.5, 0.0]);
        assert!((f.frame[1][1] - 1.0 / 3.0).abs() < 1e-16);
        assert!(f.orthonormality_defect() < FRAME_TOLERANCE);
    }

    #[test]
    fn order_zero_geometry_is_rejected() {
        let err = plane_polar().geometry(&[1.0, 1.0], 0).unwrap_err();
        assert!(matches!(err, GeometryError::OrderBudget { .. }));
    }

    #[test]
    fn indefinite_metric_is_singular() {
        let d = ChartDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let m = MetricField::diagonal("bad", d, |x| vec![x[0].constant_like(1.0), x[0].constant_like(-1.0)]);
        assert!(matches!(
            m.geometry(&[0.5, 0.5], 1),
            Err(GeometryError::SingularMetric(_))
        ));
    }
}
