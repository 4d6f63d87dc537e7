//! Exterior calculus on a chart and the 2-form / skew-endomorphism dictionary.
//!
//! Forms are stored as fully antisymmetric covariant arrays. Wedge uses the
//! determinant convention, `(α∧β)(X,Y) = α(X)β(Y) − α(Y)β(X)` for 1-forms, and
//! the interior product contracts the first slot. The codifferential is
//! `δω = −Σ e_i ⌟ ∇_{e_i} ω`.

use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};
use crate::fields::TensorField;
use crate::metric::{FramePoint, PointGeometry};
use crate::taylor::{Scalar, TaylorScalar};
use crate::tensor::{multi_indices, permutation_sign, Slot, Tensor};

fn require_form<S: Scalar>(t: &Tensor<S>, what: &str) -> Result<usize> {
    if t.slots().iter().any(|s| *s != Slot::Co) {
        return Err(GeometryError::ValenceMismatch(format!(
            "{what}: expected a form (all covariant slots), got {:?}",
            t.slots()
        )));
    }
    Ok(t.rank())
}

/// `(positions of α, positions of β, sign)` for every (p,q)-shuffle.
fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    crate::fields::increasing_tuples(p + q, p)
        .into_iter()
        .map(|left| {
            let right: Vec<usize> = (0..p + q).filter(|i| !left.contains(i)).collect();
            let mut order = left.clone();
            order.extend_from_slice(&right);
            let sign = permutation_sign(&order);
            (left, right, sign)
        })
        .collect()
}

/// Wedge product of two forms.
pub fn wedge<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Result<Tensor<S>> {
    let p = require_form(a, "wedge")?;
    let q = require_form(b, "wedge")?;
    let n = a.dim();
    if p + q > n {
        return Ok(Tensor::filled(n, vec![Slot::Co; p + q], a.data()[0].zero_like()));
    }
    let sh = shuffles(p, q);
    let zero = a.data()[0].zero_like();
    let mut ia = vec![0usize; p];
    let mut ib = vec![0usize; q];
    Ok(Tensor::from_fn(n, vec![Slot::Co; p + q], |idx| {
        let mut acc = zero.clone();
        if permutation_sign(idx) == 0.0 {
            return acc;
        }
        for (left, right, sign) in &sh {
            for (k, &pos) in left.iter().enumerate() {
                ia[k] = idx[pos];
            }
            for (k, &pos) in right.iter().enumerate() {
                ib[k] = idx[pos];
            }
            let mut term = zero.clone();
            term.add_product(a.get(&ia), b.get(&ib));
            acc.add_scaled(*sign, &term);
        }
        acc
    }))
}

/// Interior product `X ⌟ ω`.
pub fn interior<S: Scalar>(x: &Tensor<S>, omega: &Tensor<S>) -> Result<Tensor<S>> {
    if x.rank() != 1 {
        return Err(GeometryError::ValenceMismatch("interior: X must be a vector".into()));
    }
    if require_form(omega, "interior")? == 0 {
        return Err(GeometryError::ValenceMismatch("interior: ω has degree 0".into()));
    }
    Ok(x.contract_with(0, omega, 0))
}

/// Exterior derivative of a form given as Taylor jets (order drops by one).
pub fn exterior_derivative_jet(omega: &Tensor<TaylorScalar>) -> Result<Tensor<TaylorScalar>> {
    let p = require_form(omega, "exterior derivative")?;
    let n = omega.dim();
    if p > n {
        return Err(GeometryError::ValenceMismatch(format!(
            "exterior derivative of a {p}-form in dimension {n}"
        )));
    }
    let order = omega.data().iter().map(|c| c.order()).min().unwrap_or(0);
    if order == 0 {
        return Err(GeometryError::OrderBudget {
            needed: 1,
            available: 0,
        });
    }
    let zero = omega.data()[0].zero_like().truncate(order - 1);
    if p == n {
        // Top-degree forms are closed.
        return Ok(Tensor::filled(n, vec![Slot::Co; p + 1], zero));
    }
    let mut rest = vec![0usize; p];
    Ok(Tensor::from_fn(n, vec![Slot::Co; p + 1], |idx| {
        let mut acc = zero.clone();
        for k in 0..=p {
            let mut m = 0;
            for (pos, &i) in idx.iter().enumerate() {
                if pos != k {
                    rest[m] = i;
                    m += 1;
                }
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc.add_scaled(sign, &omega.get(&rest).partial(idx[k]));
        }
        acc
    }))
}

/// Codifferential of a form jet, `δω = −g^{ab} (∇_a ω)(∂_b, …)`.
pub fn codifferential_jet(geo: &PointGeometry, omega: &Tensor<TaylorScalar>) -> Result<Tensor<TaylorScalar>> {
    let p = require_form(omega, "codifferential")?;
    if p == 0 {
        return Err(GeometryError::ValenceMismatch("codifferential of a function".into()));
    }
    let nabla = geo.covariant_derivative(omega)?;
    let raised = geo.inverse().contract_with(1, &nabla, 0);
    Ok(raised.trace(0, 1).scaled(-1.0))
}

/// `|ω|²` with the form normalization `(1/p!) ω_I ω^I`, as a jet.
pub fn form_norm_sq_jet(geo: &PointGeometry, omega: &Tensor<TaylorScalar>) -> Result<TaylorScalar> {
    let p = require_form(omega, "form norm")?;
    let raised = geo.raise_all(omega);
    let mut acc = omega.data()[0].zero_like();
    for (a, b) in omega.data().iter().zip(raised.data()) {
        acc.add_product(a, b);
    }
    let fact: f64 = (1..=p).map(|k| k as f64).product();
    Ok(acc * (1.0 / fact))
}

/// Metric dual of a vector field jet.
pub fn flat(geo: &PointGeometry, x: &Tensor<TaylorScalar>) -> Tensor<TaylorScalar> {
    geo.lower_all(x)
}

/// Metric dual of a 1-form jet.
pub fn sharp(geo: &PointGeometry, w: &Tensor<TaylorScalar>) -> Tensor<TaylorScalar> {
    geo.raise_all(w)
}

/// Contract slot 0 of `t` with a coordinate vector.
pub fn along(t: &Tensor<f64>, x: &[f64]) -> Tensor<f64> {
    let v = Tensor::from_vec(t.dim(), vec![Slot::Contra], x.to_vec());
    v.contract_with(0, t, 0)
}

/// Frame-summed codifferential from the numeric covariant derivative
/// `(∇ω)[a, b, …]`: `δω = −Σ_i (∇_{e_i} ω)(e_i, …)`.
pub fn codifferential_from_derivative(frame: &FramePoint, nabla: &Tensor<f64>) -> Tensor<f64> {
    let mut out: Option<Tensor<f64>> = None;
    for e in &frame.frame {
        let term = along(&along(nabla, e), e);
        out = Some(match out {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    out.expect("non-empty frame").scaled(-1.0)
}

/// `−Σ_i (∇²T)(e_i, e_i, …)` from the numeric second covariant derivative.
pub fn frame_trace_pair(frame: &FramePoint, nabla2: &Tensor<f64>) -> Tensor<f64> {
    codifferential_from_derivative(frame, nabla2)
}

fn field_form_jet(geo: &PointGeometry, field: &TensorField, what: &str) -> Result<Tensor<TaylorScalar>> {
    if field.form_degree().is_none() {
        return Err(GeometryError::ValenceMismatch(format!(
            "{what}: field '{}' is not a form",
            field.name()
        )));
    }
    field.evaluate(geo)
}

/// `dω` at the point.
pub fn exterior_derivative(geo: &PointGeometry, field: &TensorField) -> Result<Tensor<f64>> {
    let w = field_form_jet(geo, field, "exterior derivative")?;
    Ok(exterior_derivative_jet(&w)?.values())
}

/// `δω` at the point (orthonormal frame sum).
pub fn codifferential(geo: &PointGeometry, field: &TensorField) -> Result<Tensor<f64>> {
    let w = field_form_jet(geo, field, "codifferential")?;
    if w.rank() == 0 {
        return Err(GeometryError::ValenceMismatch("codifferential of a function".into()));
    }
    let nabla = geo.covariant_derivative(&w)?.values();
    Ok(codifferential_from_derivative(geo.frame(), &nabla))
}

/// `∇_X T` at the point; `x` holds coordinate components.
pub fn covariant_derivative(geo: &PointGeometry, field: &TensorField, x: &[f64]) -> Result<Tensor<f64>> {
    let t = field.evaluate(geo)?;
    Ok(along(&geo.covariant_derivative(&t)?.values(), x))
}

/// Full second covariant derivative jet `(∇²T)[a, b, …] = ∇²_{∂_a,∂_b} T`.
pub fn second_covariant_derivative_jet(
    geo: &PointGeometry,
    t: &Tensor<TaylorScalar>,
) -> Result<Tensor<TaylorScalar>> {
    let first = geo.covariant_derivative(t)?;
    geo.covariant_derivative(&first).map_err(|e| match e {
        GeometryError::OrderBudget { .. } => GeometryError::OrderBudget {
            needed: 2,
            available: t.data().iter().map(|c| c.order()).min().unwrap_or(0),
        },
        other => other,
    })
}

/// `∇²_{X,Y} T = ∇_X(∇T)(Y, …)` at the point.
pub fn second_covariant_derivative(
    geo: &PointGeometry,
    field: &TensorField,
    x: &[f64],
    y: &[f64],
) -> Result<Tensor<f64>> {
    let t = field.evaluate(geo)?;
    let n2 = second_covariant_derivative_jet(geo, &t)?.values();
    Ok(along(&along(&n2, x), y))
}

/// Rough and Hodge Laplacians of a 1-form at a point.
#[derive(Clone, Debug)]
pub struct Laplacians {
    /// `∇*∇ω = −Σ ∇²_{e_i,e_i} ω`.
    pub rough: Tensor<f64>,
    /// `Δω = dδω + δdω`.
    pub hodge: Tensor<f64>,
}

pub fn laplacians_of_jet(geo: &PointGeometry, omega: &Tensor<TaylorScalar>) -> Result<Laplacians> {
    if require_form(omega, "Laplacian")? != 1 {
        return Err(GeometryError::ValenceMismatch("Laplacians are implemented on 1-forms".into()));
    }
    let rough = frame_trace_pair(geo.frame(), &second_covariant_derivative_jet(geo, omega)?.values());
    let delta = codifferential_jet(geo, omega)?;
    // δω is a function: dδω is its gradient
    let d_delta = Tensor::from_fn(geo.dim(), vec![Slot::Co], |i| delta.data()[0].partial(i[0]).value());
    let d_omega = exterior_derivative_jet(omega)?;
    let delta_d = codifferential_from_derivative(geo.frame(), &geo.covariant_derivative(&d_omega)?.values());
    Ok(Laplacians {
        rough,
        hodge: d_delta.add(&delta_d),
    })
}

/// Rough and Hodge Laplacians of a 1-form field.
pub fn laplacians_on_1forms(geo: &PointGeometry, field: &TensorField) -> Result<Laplacians> {
    let w = field_form_jet(geo, field, "Laplacian")?;
    laplacians_of_jet(geo, &w)
}

/// `(R(∂_a, ∂_b)·T)[a, b, …]`, the curvature acting on a coordinate tensor as
/// a derivation.
pub fn curvature_action(riemann: &Tensor<f64>, t: &Tensor<f64>) -> Tensor<f64> {
    let n = t.dim();
    let rank = t.rank();
    let mut slots = vec![Slot::Co, Slot::Co];
    slots.extend_from_slice(t.slots());
    let mut src = vec![0usize; rank];
    Tensor::from_fn(n, slots, |idx| {
        let (a, b) = (idx[0], idx[1]);
        let rest = &idx[2..];
        let mut acc = 0.0;
        for s in 0..rank {
            src.copy_from_slice(rest);
            for m in 0..n {
                src[s] = m;
                let r = match t.slots()[s] {
                    Slot::Contra => *riemann.get(&[rest[s], m, a, b]),
                    Slot::Co => -*riemann.get(&[m, rest[s], a, b]),
                };
                acc += r * t.get(&src);
            }
        }
        acc
    })
}

/// Ricci identity `∇²_{X,Y}T − ∇²_{Y,X}T = R(X,Y)·T` over all coordinate
/// pairs, as `‖lhs − rhs‖ / (‖lhs‖ + ‖rhs‖ + 1e-30)`.
pub fn ricci_identity_residual(geo: &PointGeometry, t: &Tensor<TaylorScalar>) -> Result<f64> {
    let n2 = second_covariant_derivative_jet(geo, t)?.values();
    let mut perm: Vec<usize> = (0..n2.rank()).collect();
    perm.swap(0, 1);
    let lhs = n2.sub(&n2.permute(&perm));
    let rhs = curvature_action(geo.riemann()?, &t.values());
    Ok(relative_gap(&lhs, &rhs))
}

/// `‖a − b‖ / (‖a‖ + ‖b‖ + 1e-30)` in Frobenius norm.
pub fn relative_gap(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.sub(b).frobenius() / (a.frobenius() + b.frobenius() + 1e-30)
}

/// A 2-form in an orthonormal frame together with its skew endomorphism
/// `U_X = u(X, ·)^♯`, i.e. `U e_a = Σ_b u_ab e_b`.
#[derive(Clone, Debug)]
pub struct TwoFormAsEndo {
    form: Tensor<f64>,
    endo: DMatrix<f64>,
}

impl TwoFormAsEndo {
    /// From frame components `u_ab`.
    pub fn from_frame_form(form: Tensor<f64>) -> Result<Self> {
        if require_form(&form, "two-form")? != 2 {
            return Err(GeometryError::ValenceMismatch("expected a 2-form".into()));
        }
        let n = form.dim();
        let endo = DMatrix::from_fn(n, n, |b, a| *form.get(&[a, b]));
        Ok(Self { form, endo })
    }

    /// From coordinate components, using the frame at the point.
    pub fn from_coordinate_form(frame: &FramePoint, form: &Tensor<f64>) -> Result<Self> {
        Self::from_frame_form(frame.to_frame(form))
    }

    /// From an endomorphism matrix in the frame (column `a` is `U e_a`).
    pub fn from_endo(endo: DMatrix<f64>) -> Self {
        let n = endo.nrows();
        let form = Tensor::from_fn(n, vec![Slot::Co, Slot::Co], |i| endo[(i[1], i[0])]);
        Self { form, endo }
    }

    pub fn dim(&self) -> usize {
        self.endo.nrows()
    }

    pub fn form(&self) -> &Tensor<f64> {
        &self.form
    }

    pub fn endo(&self) -> &DMatrix<f64> {
        &self.endo
    }

    /// `U(x)` for frame components `x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (&self.endo * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// `max |½ Σ e_i ∧ U(e_i) − u|`.
    pub fn reconstruction_residual(&self) -> f64 {
        let n = self.dim();
        let mut rebuilt = Tensor::zeros(n, vec![Slot::Co, Slot::Co]);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let ue = self.apply(&e);
            let w = wedge(
                &Tensor::from_vec(n, vec![Slot::Co], e),
                &Tensor::from_vec(n, vec![Slot::Co], ue),
            )
            .expect("1-forms");
            rebuilt = rebuilt.combine(0.5, &w);
        }
        rebuilt.max_abs_diff(&self.form)
    }

    /// `⟨u,u⟩` as a tensor: `Σ u_ab²`.
    pub fn tensor_norm_sq(&self) -> f64 {
        self.form.data().iter().map(|x| x * x).sum()
    }

    /// `−tr(U²)`, equal to [`Self::tensor_norm_sq`].
    pub fn trace_norm_sq(&self) -> f64 {
        -(&self.endo * &self.endo).trace()
    }

    /// `|u|²` as a form by the combinatorial contraction `Σ_{a<b} u_ab²`.
    pub fn form_norm_sq(&self) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for a in 0..n {
            for b in a + 1..n {
                s += self.form.get(&[a, b]).powi(2);
            }
        }
        s
    }

    /// `|u|²` as a form via `½ Σ ⟨U e_i, U e_i⟩`.
    pub fn form_norm_sq_by_frame(&self) -> f64 {
        0.5 * self.endo.iter().map(|x| x * x).sum::<f64>()
    }

    /// Singular values of `U`, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        let mut sv: Vec<f64> = self.endo.clone().svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        sv
    }

    /// Number of singular values above `rel * σ_max`.
    pub fn rank(&self, rel: f64) -> usize {
        let sv = self.singular_values();
        let top = sv.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > rel * top).count()
    }
}

/// Endomorphism of the 2-form `Σ_k A(e_k) ∧ U(e_k)`.
pub fn derivation_as_endo(a: &DMatrix<f64>, u: &TwoFormAsEndo) -> Result<DMatrix<f64>> {
    let n = u.dim();
    let mut w = Tensor::zeros(n, vec![Slot::Co, Slot::Co]);
    for k in 0..n {
        let ae: Vec<f64> = a.column(k).iter().copied().collect();
        let ue: Vec<f64> = u.endo().column(k).iter().copied().collect();
        let term = wedge(
            &Tensor::from_vec(n, vec![Slot::Co], ae),
            &Tensor::from_vec(n, vec![Slot::Co], ue),
        )?;
        w = w.add(&term);
    }
    Ok(TwoFormAsEndo::from_frame_form(w)?.endo().clone())
}

/// Agreement of the two curvature-type actions of a skew endomorphism `A` on
/// a 2-form `u`: the derivation `Σ A e_k ∧ u(e_k)` versus the commutator
/// `A∘U − U∘A`. Returns the relative gap.
pub fn derivation_commutator_residual(a: &DMatrix<f64>, u: &TwoFormAsEndo) -> Result<f64> {
    let lhs = derivation_as_endo(a, u)?;
    let rhs = a * u.endo() - u.endo() * a;
    Ok((&lhs - &rhs).norm() / (lhs.norm() + rhs.norm() + 1e-30))
}

/// Alternation check: `max |ω_I − sgn(σ) ω_{σ(I)}|` over transpositions of
/// adjacent slots.
pub fn alternation_defect(t: &Tensor<f64>) -> f64 {
    let r = t.rank();
    let mut worst: f64 = 0.0;
    for idx in multi_indices(t.dim(), r) {
        for s in 0..r.saturating_sub(1) {
            let mut sw = idx.clone();
            sw.swap(s, s + 1);
            worst = worst.max((t.get(&idx) + t.get(&sw)).abs());
        }
    }
    worst
}
