//! Twistor, Killing and Sasakian residual operators, plus the identity
//! suites built on them.

mod killing;
mod records;
mod suites;

pub use killing::{KillingInstance, KillingPoint};
pub use records::{IdentityRecord, Status, Tolerances};
pub use suites::{
    classify, curvature_sanity_suite, gcvf_suite, killing_suite, killing_twistor_suite, random_one_form,
    random_skew, sasakian_case_checks, sasakian_suite, section3_suite, twistor_suite, weitzenboeck_suite,
    ClassTag, Classification, FStatistics, KillingSamples, SuiteOutcome, RANK_THRESHOLD, SUPPORT_CUTOFF,
};

use nalgebra::DMatrix;

use crate::error::{GeometryError, Result};
use crate::fields::TensorField;
use crate::forms::{codifferential_from_derivative, exterior_derivative_jet, interior, wedge};
use crate::metric::PointGeometry;
use crate::taylor::TaylorScalar;
use crate::tensor::{Slot, Tensor};

/// Denominator floor used by every normalized residual.
pub const EPS_DEN: f64 = 1e-30;

pub(crate) fn unit(n: usize, a: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[a] = 1.0;
    e
}

pub(crate) fn one_form(v: &[f64]) -> Tensor<f64> {
    Tensor::from_vec(v.len(), vec![Slot::Co], v.to_vec())
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Twistor residual of a form jet:
/// `max_X |∇_Xω − X⌟dω/(p+1) + X∧δω/(n−p+1)| / (|∇ω| + |ω| + ε)` over the
/// orthonormal frame, all norms taken in the frame.
pub fn twistor_residual_jet(geo: &PointGeometry, omega: &Tensor<TaylorScalar>) -> Result<f64> {
    let n = geo.dim();
    let p = omega.rank();
    if omega.slots().iter().any(|s| *s != Slot::Co) || p == 0 || p > n {
        return Err(GeometryError::ValenceMismatch(format!(
            "twistor residual needs a p-form with 1 ≤ p ≤ {n}, got rank {p}"
        )));
    }
    let frame = geo.frame();
    let nabla = geo.covariant_derivative(omega)?.values();
    let delta = codifferential_from_derivative(frame, &nabla);
    let d = exterior_derivative_jet(omega)?.values();
    let nf = frame.to_frame(&nabla);
    let df = frame.to_frame(&d);
    let deltaf = frame.to_frame(&delta);
    let wf = frame.to_frame(&omega.values());
    let denom = nf.frobenius() + wf.frobenius() + EPS_DEN;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let e = unit(n, a);
        let lhs = crate::forms::along(&nf, &e);
        let x = Tensor::from_vec(n, vec![Slot::Contra], e.clone());
        let t1 = interior(&x, &df)?.scaled(1.0 / (p + 1) as f64);
        let t2 = wedge(&one_form(&e), &deltaf)?.scaled(1.0 / (n - p + 1) as f64);
        let r = lhs.sub(&t1).add(&t2);
        worst = worst.max(r.frobenius());
    }
    Ok(worst / denom)
}

/// Twistor residual of a form field at a geometry point.
pub fn twistor_residual(geo: &PointGeometry, field: &TensorField) -> Result<f64> {
    twistor_residual_jet(geo, &field.evaluate(geo)?)
}

/// Killing residual of a vector field jet: `|sym ∇ξ♭| / (|∇ξ♭| + ε)`.
pub fn killing_residual_jet(geo: &PointGeometry, xi: &Tensor<TaylorScalar>) -> Result<f64> {
    if xi.rank() != 1 || xi.slots()[0] != Slot::Contra {
        return Err(GeometryError::ValenceMismatch("Killing residual needs a vector field".into()));
    }
    let nabla = geo.frame().to_frame(&geo.covariant_derivative(&geo.lower_all(xi))?.values());
    let sym = nabla.add(&nabla.permute(&[1, 0])).scaled(0.5);
    Ok(sym.frobenius() / (nabla.frobenius() + EPS_DEN))
}

pub fn killing_residual(geo: &PointGeometry, xi: &TensorField) -> Result<f64> {
    killing_residual_jet(geo, &xi.evaluate(geo)?)
}

/// Sasakian residuals at one point.
#[derive(Clone, Copy, Debug)]
pub struct SasakianResidual {
    /// `max_X |∇_X u − k ξ∧X| / (|∇_X u| + k|ξ∧X| + ε)`.
    pub structure: f64,
    /// `max_{X,Y} |∇²_{X,Y}ξ − k(⟨ξ,Y⟩X − ⟨X,Y⟩ξ)|`, normalized the same way.
    pub second_derivative: f64,
}

pub fn sasakian_residual(kp: &KillingPoint, k: f64) -> Result<SasakianResidual> {
    if !(k > 0.0) {
        return Err(GeometryError::InvalidParameter(format!("Sasakian constant must be positive, got {k}")));
    }
    let n = kp.dim();
    let xi = one_form(&kp.xi);
    let mut structure: f64 = 0.0;
    let mut second: f64 = 0.0;
    for a in 0..n {
        let e = unit(n, a);
        let lhs = crate::forms::along(&kp.nabla_u, &e);
        let rhs = wedge(&xi, &one_form(&e))?.scaled(k);
        let r = lhs.sub(&rhs).frobenius() / (lhs.frobenius() + rhs.frobenius() + EPS_DEN);
        structure = structure.max(r);
        for b in 0..n {
            let l: Vec<f64> = (0..n).map(|c| *kp.nabla2_xi.get(&[a, b, c])).collect();
            let r: Vec<f64> = (0..n)
                .map(|c| {
                    let x = if c == a { 1.0 } else { 0.0 };
                    let xy = if a == b { 1.0 } else { 0.0 };
                    k * (kp.xi[b] * x - xy * kp.xi[c])
                })
                .collect();
            let diff: Vec<f64> = l.iter().zip(&r).map(|(p, q)| p - q).collect();
            second = second.max(norm(&diff) / (norm(&l) + norm(&r) + EPS_DEN));
        }
    }
    Ok(SasakianResidual {
        structure,
        second_derivative: second,
    })
}

/// `R_ω = ½ Σ_j R(e_j, ω e_j)` as a frame matrix (column `k` is `R_ω e_k`).
pub fn curvature_endomorphism(riemann_frame: &Tensor<f64>, omega: &DMatrix<f64>) -> DMatrix<f64> {
    let n = omega.nrows();
    DMatrix::from_fn(n, n, |l, k| {
        let mut s = 0.0;
        for j in 0..n {
            for m in 0..n {
                s += omega[(m, j)] * riemann_frame.get(&[l, k, j, m]);
            }
        }
        0.5 * s
    })
}

/// Residual of `(n−2)(R_ω∘u − u∘R_ω) = (R_u∘ω − ω∘R_u) + (u∘Ric∘ω − ω∘Ric∘u)`,
/// divided by the sum of the Frobenius norms of its six terms. Refuses
/// `n ≤ 3`.
pub fn curvature_commutator_identity(
    riemann_frame: &Tensor<f64>,
    ricci: &DMatrix<f64>,
    u: &DMatrix<f64>,
    omega: &DMatrix<f64>,
) -> Result<f64> {
    let n = u.nrows();
    if n <= 3 {
        return Err(GeometryError::NotApplicable(format!(
            "curvature commutator identity assumes dimension > 3, got {n}"
        )));
    }
    let r_om = curvature_endomorphism(riemann_frame, omega);
    let r_u = curvature_endomorphism(riemann_frame, u);
    let c = (n - 2) as f64;
    let terms = [
        &r_om * u * c,
        u * &r_om * c,
        &r_u * omega,
        omega * &r_u,
        u * ricci * omega,
        omega * ricci * u,
    ];
    let resid = &terms[0] - &terms[1] - &terms[2] + &terms[3] - &terms[4] + &terms[5];
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    Ok(resid.norm() / (scale + EPS_DEN))
}

/// `(n−3)(R_u∘u − u∘R_u)` relative to the size of its terms.
pub fn self_commutator_residual(riemann_frame: &Tensor<f64>, u: &DMatrix<f64>) -> Result<f64> {
    let n = u.nrows();
    if n <= 3 {
        return Err(GeometryError::NotApplicable(format!(
            "self-commutator identity assumes dimension > 3, got {n}"
        )));
    }
    let r_u = curvature_endomorphism(riemann_frame, u);
    let a = &r_u * u;
    let b = u * &r_u;
    Ok((&a - &b).norm() / (a.norm() + b.norm() + EPS_DEN))
}

/// `|U²Ric − Ric U²| / (|U²||Ric| + ε)`.
pub fn ricci_commutation(ricci: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<f64> {
    let n = u.nrows();
    if n <= 3 {
        return Err(GeometryError::NotApplicable(format!(
            "Ricci commutation is asserted for dimension > 3, got {n}"
        )));
    }
    let u2 = u * u;
    let c = &u2 * ricci - ricci * &u2;
    Ok(c.norm() / (u2.norm() * ricci.norm() + EPS_DEN))
}

/// Residual of `∇²_{X,Y}u = (1/(n−2)) Y ∧ Σ_j e_j⌟(R(X,e_j)·u)` over all frame
/// pairs, as a whole-tensor relative gap. `nabla2_u[a,b,c,d]` holds
/// `(∇²_{e_a,e_b} u)_{cd}` in the frame.
pub fn second_derivative_identity(
    riemann_frame: &Tensor<f64>,
    u: &DMatrix<f64>,
    nabla2_u: &Tensor<f64>,
) -> Result<f64> {
    let n = u.nrows();
    if n <= 3 {
        return Err(GeometryError::NotApplicable(format!(
            "second-derivative identity assumes dimension > 3, got {n}"
        )));
    }
    let mut lhs_sq = 0.0;
    let mut rhs_sq = 0.0;
    let mut diff_sq = 0.0;
    for a in 0..n {
        // Σ_j e_j ⌟ (R(e_a, e_j)·u), with R(X,Y)·u = [R(X,Y), U] in endomorphism form
        let mut contracted = vec![0.0; n];
        for j in 0..n {
            let r = DMatrix::from_fn(n, n, |l, k| *riemann_frame.get(&[l, k, a, j]));
            let w = &r * u - u * &r;
            // form component (j, d) is ⟨W e_j, e_d⟩
            for d in 0..n {
                contracted[d] += w[(d, j)];
            }
        }
        let contracted = one_form(&contracted);
        for b in 0..n {
            let rhs = wedge(&one_form(&unit(n, b)), &contracted)?.scaled(1.0 / (n - 2) as f64);
            for c in 0..n {
                for d in 0..n {
                    let l = *nabla2_u.get(&[a, b, c, d]);
                    let r = *rhs.get(&[c, d]);
                    lhs_sq += l * l;
                    rhs_sq += r * r;
                    diff_sq += (l - r) * (l - r);
                }
            }
        }
    }
    Ok(diff_sq.sqrt() / (lhs_sq.sqrt() + rhs_sq.sqrt() + EPS_DEN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use crate::metric::MetricField;

    fn flat(n: usize) -> MetricField {
        let d = ChartDomain::new(vec![-1.0; n], vec![1.0; n]).unwrap();
        MetricField::diagonal("flat", d, move |x| vec![x[0].constant_like(1.0); n])
    }

    #[test]
    fn parallel_form_is_twistor() {
        let geo = flat(3).geometry(&[0.1, 0.2, 0.3], 2).unwrap();
        let w = TensorField::form("c", 3, 2, |x| vec![x[0].constant_like(1.0), x[0].constant_like(-2.0), x[0].constant_like(0.5)]);
        assert_eq!(twistor_residual(&geo, &w).unwrap(), 0.0);
    }

    #[test]
    fn non_twistor_form_is_detected() {
        let geo = flat(3).geometry(&[0.1, 0.2, 0.3], 2).unwrap();
        let w = TensorField::one_form("x dy", 3, |x| vec![x[0].zero_like(), x[0].clone(), x[0].zero_like()]);
        assert!(twistor_residual(&geo, &w).unwrap() > 0.1);
    }

    #[test]
    fn killing_residuals_on_flat_plane() {
        let geo = flat(2).geometry(&[0.3, -0.4], 2).unwrap();
        let rot = TensorField::vector("rot", 2, |x| vec![-x[1].clone(), x[0].clone()]);
        assert_eq!(killing_residual(&geo, &rot).unwrap(), 0.0);
        let stretch = TensorField::vector("stretch", 2, |x| vec![x[0].clone(), x[0].zero_like()]);
        assert!((killing_residual(&geo, &stretch).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn commutator_identity_refuses_low_dimension() {
        let r = Tensor::zeros(3, vec![Slot::Co; 4]);
        let m = DMatrix::zeros(3, 3);
        assert!(matches!(
            curvature_commutator_identity(&r, &m, &m, &m),
            Err(GeometryError::NotApplicable(_))
        ));
    }

    #[test]
    fn commutator_identity_with_zero_u_is_zero() {
        let n = 4;
        let r = Tensor::from_fn(n, vec![Slot::Co; 4], |i| (i[0] + 2 * i[1] + 3 * i[2] + 5 * i[3]) as f64);
        let zero = DMatrix::zeros(n, n);
        let om = DMatrix::from_fn(n, n, |i, j| i as f64 - j as f64);
        let ric = DMatrix::identity(n, n);
        assert_eq!(curvature_commutator_identity(&r, &ric, &zero, &om).unwrap(), 0.0);
    }
}
