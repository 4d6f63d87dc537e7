use nalgebra::DMatrix;

use super::{one_form, unit, EPS_DEN};
use crate::curvature::{frame_riemann, ricci_at};
use crate::error::{GeometryError, Result};
use crate::fields::TensorField;
use crate::forms::{codifferential_jet, exterior_derivative_jet, form_norm_sq_jet, wedge, TwoFormAsEndo};
use crate::metric::{MetricField, PointGeometry, MAX_GEOMETRY_ORDER};
use crate::taylor::TaylorScalar;
use crate::tensor::{Slot, Tensor};

/// A metric with a distinguished Killing vector field `ξ`.
#[derive(Clone, Debug)]
pub struct KillingInstance {
    pub name: String,
    pub metric: MetricField,
    pub xi: TensorField,
}

impl KillingInstance {
    pub fn new(name: impl Into<String>, metric: MetricField, xi: TensorField) -> Result<Self> {
        if xi.dim() != metric.dim() || xi.slots() != [Slot::Contra] {
            return Err(GeometryError::ValenceMismatch(format!(
                "Killing field '{}' must be a vector field of dimension {}",
                xi.name(),
                metric.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            metric,
            xi,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// All derived quantities at one point (geometry order 3).
    pub fn at(&self, point: &[f64]) -> Result<KillingPoint> {
        let geo = self.metric.geometry(point, MAX_GEOMETRY_ORDER)?;
        KillingPoint::compute(geo, &self.xi)
    }
}

fn gradient(s: &TaylorScalar, n: usize) -> Vec<f64> {
    (0..n).map(|i| s.first_derivative(i)).collect()
}

fn frame_vector(geo: &PointGeometry, v: &[f64], slot: Slot) -> Vec<f64> {
    let t = Tensor::from_vec(geo.dim(), vec![slot], v.to_vec());
    geo.frame().to_frame(&t).into_data()
}

/// Everything the Killing-field identities need at one point, expressed in
/// the orthonormal frame (`u = ½dξ♭`, `f` from `δu = (1−n) f ξ`).
#[derive(Clone, Debug)]
pub struct KillingPoint {
    pub geo: PointGeometry,
    /// `ξ♭` as a jet (order of the geometry).
    pub xi_flat_jet: Tensor<TaylorScalar>,
    /// Frame components of `ξ`.
    pub xi: Vec<f64>,
    pub xi_norm: f64,
    /// `(∇_{e_a} ξ♭)(e_b)`.
    pub nabla_xi: Tensor<f64>,
    pub u: TwoFormAsEndo,
    /// `(∇_{e_a} u)(e_b, e_c)`.
    pub nabla_u: Tensor<f64>,
    /// `(∇²_{e_a,e_b} u)(e_c, e_d)`.
    pub nabla2_u: Tensor<f64>,
    pub delta_u: Vec<f64>,
    /// `⟨∇²_{e_a,e_b} ξ, e_c⟩`.
    pub nabla2_xi: Tensor<f64>,
    /// `f = ⟨δu, ξ⟩ / ((1−n)|ξ|²)`.
    pub f_delta: f64,
    pub df: Vec<f64>,
    /// Least-squares `f` in `∇_X u = f X∧ξ`.
    pub f_fit: f64,
    pub f_fit_residual: f64,
    /// `d(|u|²)` with the form norm.
    pub d_u_norm_sq: Vec<f64>,
    /// `d(|ξ|²)`.
    pub d_xi_norm_sq: Vec<f64>,
    /// `(∇²_{e_a,e_b} dλ)(e_c)` for `λ = |ξ|²`.
    pub nabla2_dlambda: Tensor<f64>,
    pub riemann: Tensor<f64>,
    pub ricci: DMatrix<f64>,
}

impl KillingPoint {
    pub fn compute(geo: PointGeometry, xi_field: &TensorField) -> Result<Self> {
        if geo.order() < MAX_GEOMETRY_ORDER {
            return Err(GeometryError::OrderBudget {
                needed: MAX_GEOMETRY_ORDER,
                available: geo.order(),
            });
        }
        let n = geo.dim();
        let frame = geo.frame().clone();
        let xi_jet = xi_field.evaluate(&geo)?;
        let xi_flat_jet = geo.lower_all(&xi_jet);
        let xi = frame_vector(&geo, &xi_jet.values().into_data(), Slot::Contra);
        let xi_norm = super::norm(&xi);

        let nabla_xi = frame.to_frame(&geo.covariant_derivative(&xi_flat_jet)?.values());
        let u_jet = exterior_derivative_jet(&xi_flat_jet)?.scaled(0.5);
        let u = TwoFormAsEndo::from_coordinate_form(&frame, &u_jet.values())?;
        let nabla_u_jet = geo.covariant_derivative(&u_jet)?;
        let nabla_u = frame.to_frame(&nabla_u_jet.values());
        let nabla2_u = frame.to_frame(&geo.covariant_derivative(&nabla_u_jet)?.values());
        let delta_u_jet = codifferential_jet(&geo, &u_jet)?;
        let delta_u = frame.to_frame(&delta_u_jet.values()).into_data();
        let nabla2_xi = frame.to_frame(&geo.covariant_derivative(&geo.covariant_derivative(&xi_jet)?)?.values());

        // f as a jet so that df is available
        let mut inner = delta_u_jet.data()[0].zero_like();
        for i in 0..n {
            inner.add_product(delta_u_jet.get(&[i]), &xi_jet.get(&[i]).truncate(1));
        }
        let lambda_jet = {
            let mut s = xi_flat_jet.data()[0].zero_like();
            for i in 0..n {
                s.add_product(xi_flat_jet.get(&[i]), xi_jet.get(&[i]));
            }
            s
        };
        let (f_delta, df) = if xi_norm > 0.0 {
            let f_jet = inner * lambda_jet.truncate(1).recip() * (1.0 / (1.0 - n as f64));
            (f_jet.value(), frame_vector(&geo, &gradient(&f_jet, n), Slot::Co))
        } else {
            (f64::NAN, vec![f64::NAN; n])
        };

        let (mut num, mut den) = (0.0, 0.0);
        let mut pieces = Vec::with_capacity(n);
        for a in 0..n {
            let lhs = crate::forms::along(&nabla_u, &unit(n, a));
            let basis = wedge(&one_form(&unit(n, a)), &one_form(&xi))?;
            num += lhs.data().iter().zip(basis.data()).map(|(p, q)| p * q).sum::<f64>();
            den += basis.data().iter().map(|q| q * q).sum::<f64>();
            pieces.push((lhs, basis));
        }
        let f_fit = if den > 0.0 { num / den } else { 0.0 };
        let (mut r2, mut l2) = (0.0, 0.0);
        for (lhs, basis) in &pieces {
            r2 += lhs.combine(-f_fit, basis).data().iter().map(|x| x * x).sum::<f64>();
            l2 += lhs.data().iter().map(|x| x * x).sum::<f64>();
        }
        let f_fit_residual = r2.sqrt() / (l2.sqrt() + f_fit.abs() * den.sqrt() + EPS_DEN);

        let u_norm_jet = form_norm_sq_jet(&geo, &u_jet)?;
        let d_u_norm_sq = frame_vector(&geo, &gradient(&u_norm_jet, n), Slot::Co);
        let d_xi_norm_sq = frame_vector(&geo, &gradient(&lambda_jet, n), Slot::Co);
        let dlambda_jet = Tensor::from_fn(n, vec![Slot::Co], |i| lambda_jet.partial(i[0]));
        let nabla2_dlambda = frame.to_frame(
            &geo.covariant_derivative(&geo.covariant_derivative(&dlambda_jet)?)?.values(),
        );

        let riemann = frame_riemann(&geo)?;
        let ric = frame.to_frame(&ricci_at(&geo)?.form);
        let ricci = DMatrix::from_fn(n, n, |i, j| 0.5 * (ric.get(&[i, j]) + ric.get(&[j, i])));

        Ok(Self {
            geo,
            xi_flat_jet,
            xi,
            xi_norm,
            nabla_xi,
            u,
            nabla_u,
            nabla2_u,
            delta_u,
            nabla2_xi,
            f_delta,
            df,
            f_fit,
            f_fit_residual,
            d_u_norm_sq,
            d_xi_norm_sq,
            nabla2_dlambda,
            riemann,
            ricci,
        })
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn point(&self) -> &[f64] {
        self.geo.point()
    }

    /// `|sym ∇ξ♭| / (|∇ξ♭| + ε)`.
    pub fn killing_residual(&self) -> f64 {
        let sym = self.nabla_xi.add(&self.nabla_xi.permute(&[1, 0])).scaled(0.5);
        sym.frobenius() / (self.nabla_xi.frobenius() + EPS_DEN)
    }

    /// `∇_X ξ = U(X)`: gap between `∇ξ♭` and `u`.
    pub fn derivative_is_u_residual(&self) -> f64 {
        crate::forms::relative_gap(&self.nabla_xi, self.u.form())
    }

    /// Kostant: `∇²_{X,Y}ξ = R(X,ξ)Y` over all frame pairs.
    pub fn kostant_residual(&self) -> f64 {
        let n = self.dim();
        let rhs = Tensor::from_fn(n, vec![Slot::Co; 3], |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            (0..n).map(|m| self.xi[m] * self.riemann.get(&[c, b, a, m])).sum()
        });
        crate::forms::relative_gap(&self.nabla2_xi, &rhs)
    }

    /// Twistor residual of `u = ½dξ♭`.
    pub fn twistor_residual(&self) -> Result<f64> {
        let u_jet = exterior_derivative_jet(&self.xi_flat_jet)?.scaled(0.5);
        super::twistor_residual_jet(&self.geo, &u_jet)
    }

    /// `|∇_ξ u| / (|ξ||∇u| + ε)`.
    pub fn nabla_xi_u_residual(&self) -> f64 {
        let t = crate::forms::along(&self.nabla_u, &self.xi);
        t.frobenius() / (self.xi_norm * self.nabla_u.frobenius() + EPS_DEN)
    }

    /// `|ξ∧δu| / (|ξ|(|δu| + |∇u|) + ε)`.
    pub fn collinearity_residual(&self) -> Result<f64> {
        let w = wedge(&one_form(&self.xi), &one_form(&self.delta_u))?;
        let scale = self.xi_norm * (super::norm(&self.delta_u) + self.nabla_u.frobenius());
        Ok(w.frobenius() / (scale + EPS_DEN))
    }

    /// `|f_fit − f_δ| / (|f_fit| + |f_δ| + |∇u|/|ξ| + ε)`.
    pub fn f_agreement_residual(&self) -> f64 {
        (self.f_fit - self.f_delta).abs()
            / (self.f_fit.abs() + self.f_delta.abs() + self.nabla_u.frobenius() / self.xi_norm + EPS_DEN)
    }

    /// Natural size of `df` from the second derivatives it is built from;
    /// keeps identities that are linear in `df` meaningful when `f` is constant.
    fn df_scale(&self) -> f64 {
        let x = self.xi_norm;
        self.nabla2_u.frobenius() / x + self.nabla_u.frobenius() * self.nabla_xi.frobenius() / (x * x)
    }

    fn u_of(&self, v: &[f64]) -> Vec<f64> {
        // u(V) as a 1-form: u(V)(Y) = u(V, Y)
        let n = self.dim();
        (0..n)
            .map(|b| (0..n).map(|a| v[a] * self.u.form().get(&[a, b])).sum())
            .collect()
    }

    /// `u(ξ)∧df + u(df)∧ξ = 0`.
    pub fn symmetric_df_residual(&self) -> Result<f64> {
        let t1 = wedge(&one_form(&self.u_of(&self.xi)), &one_form(&self.df))?;
        let t2 = wedge(&one_form(&self.u_of(&self.df)), &one_form(&self.xi))?;
        let scale = self.u.tensor_norm_sq().sqrt() * self.xi_norm * (2.0 * super::norm(&self.df) + self.df_scale());
        Ok(t1.add(&t2).frobenius() / (scale + EPS_DEN))
    }

    /// `u(df)∧ξ = 0`.
    pub fn wedge_df_residual(&self) -> Result<f64> {
        let t = wedge(&one_form(&self.u_of(&self.df)), &one_form(&self.xi))?;
        let scale = self.u.tensor_norm_sq().sqrt() * self.xi_norm * (super::norm(&self.df) + self.df_scale());
        Ok(t.frobenius() / (scale + EPS_DEN))
    }

    /// `d(|u|²) = −2f u(ξ) = f d(|ξ|²)`, all three computed independently;
    /// the largest pairwise gap over the sum of the three norms plus their
    /// natural size `2|u||∇u| + 2|f||ξ|(|u| + |∇ξ|)`, which keeps the ratio
    /// meaningful when all three vanish (constant `|ξ|`).
    pub fn gradient_norm_residual(&self) -> f64 {
        let a = &self.d_u_norm_sq;
        let b: Vec<f64> = self.u_of(&self.xi).iter().map(|x| -2.0 * self.f_delta * x).collect();
        let c: Vec<f64> = self.d_xi_norm_sq.iter().map(|x| self.f_delta * x).collect();
        let gap = |p: &[f64], q: &[f64]| super::norm(&p.iter().zip(q).map(|(x, y)| x - y).collect::<Vec<_>>());
        let worst = gap(a, &b).max(gap(a, &c)).max(gap(&b, &c));
        let u = self.u.tensor_norm_sq().sqrt();
        let natural = 2.0 * u * self.nabla_u.frobenius()
            + 2.0 * self.f_delta.abs() * self.xi_norm * (u + self.nabla_xi.frobenius());
        worst / (super::norm(a) + super::norm(&b) + super::norm(&c) + natural + EPS_DEN)
    }

    /// `|ξ∧u| / (|ξ||u| + ε)`.
    pub fn xi_wedge_u_residual(&self) -> Result<f64> {
        let w = wedge(&one_form(&self.xi), self.u.form())?;
        Ok(w.frobenius() / (self.xi_norm * self.u.form().frobenius() + EPS_DEN))
    }

    /// `u = ξ∧u(ξ)/|ξ|²`.
    pub fn rank_two_form_residual(&self) -> Result<f64> {
        let rhs = wedge(&one_form(&self.xi), &one_form(&self.u_of(&self.xi)))?
            .scaled(1.0 / (self.xi_norm * self.xi_norm));
        Ok(crate::forms::relative_gap(self.u.form(), &rhs))
    }

    /// `Ric(ξ)` in the frame.
    pub fn ricci_xi(&self) -> Vec<f64> {
        (&self.ricci * nalgebra::DVector::from_column_slice(&self.xi)).as_slice().to_vec()
    }

    /// `∇²_{X,Y}dλ + c(2X(λ)Y + Y(λ)X + dλ⟨X,Y⟩) = 0` over frame pairs.
    pub fn tanno_gallot_residual(&self, c: f64) -> f64 {
        let n = self.dim();
        let dl = &self.d_xi_norm_sq;
        let t = Tensor::from_fn(n, vec![Slot::Co; 3], |i| {
            let (a, b, k) = (i[0], i[1], i[2]);
            let d = |p: usize, q: usize| if p == q { 1.0 } else { 0.0 };
            c * (2.0 * dl[a] * d(b, k) + dl[b] * d(a, k) + dl[k] * d(a, b))
        });
        self.nabla2_dlambda.add(&t).frobenius() / (self.nabla2_dlambda.frobenius() + t.frobenius() + EPS_DEN)
    }
}
