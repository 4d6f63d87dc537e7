use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::killing::{KillingInstance, KillingPoint};
use super::records::{IdentityRecord, Tolerances};
use super::{norm, EPS_DEN};
use crate::curvature::{coordinate_sectional_curvatures, curvature_symmetries, metric_compatibility};
use crate::error::GeometryError;
use crate::fields::TensorField;
use crate::forms::{laplacians_of_jet, Laplacians};
use crate::metric::{MetricField, PointGeometry, FRAME_TOLERANCE, MAX_GEOMETRY_ORDER};
use crate::tensor::Tensor;

/// Points with `|ξ| < SUPPORT_CUTOFF · max|ξ|` are outside the support of `ξ`.
pub const SUPPORT_CUTOFF: f64 = 1e-6;
/// Threshold for the rank of `U`, relative to its largest singular value.
pub const RANK_THRESHOLD: f64 = 1e-7;

/// Records of one suite plus, for the Killing-with-twistor-derivative suite,
/// the dichotomy classification.
#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub records: Vec<IdentityRecord>,
    pub classification: Option<Classification>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    #[serde(rename = "f-constant")]
    FConstant,
    #[serde(rename = "rank-2")]
    RankTwo,
    #[serde(rename = "unclassified")]
    Unclassified,
}

impl ClassTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassTag::FConstant => "f-constant",
            ClassTag::RankTwo => "rank-2",
            ClassTag::Unclassified => "unclassified",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FStatistics {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl FStatistics {
    pub fn from_values(v: &[f64]) -> Self {
        let count = v.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                std: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
            };
        }
        let mean = v.iter().sum::<f64>() / count as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
        Self {
            count,
            mean,
            std: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `std / mean|f|` (infinite when the mean vanishes and the spread does not).
    pub fn relative_std(&self) -> f64 {
        let m = self.mean.abs();
        if self.std == 0.0 {
            0.0
        } else {
            self.std / m
        }
    }
}

/// Outcome of the "f constant or u of rank 2" dichotomy over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub tag: ClassTag,
    pub f: FStatistics,
    pub relative_std_f: f64,
    pub tolerance_f: f64,
    /// Points where `U` has exactly two singular values above threshold.
    pub rank_two_points: usize,
    pub evaluated_points: usize,
    pub max_xi_wedge_u: f64,
    /// Singular values of `U` at the first evaluated point.
    pub sample_singular_values: Vec<f64>,
}

/// Killing-field data at every sample point, evaluated in parallel.
pub struct KillingSamples {
    pub points: Vec<Vec<f64>>,
    pub evaluated: Vec<Result<KillingPoint, GeometryError>>,
    pub max_xi: f64,
}

impl KillingSamples {
    pub fn evaluate(instance: &KillingInstance, points: &[Vec<f64>]) -> Self {
        let evaluated: Vec<_> = points.par_iter().map(|p| instance.at(p)).collect();
        let max_xi = evaluated
            .iter()
            .filter_map(|r| r.as_ref().ok())
            .map(|k| k.xi_norm)
            .fold(0.0, f64::max);
        Self {
            points: points.to_vec(),
            evaluated,
            max_xi,
        }
    }

    pub fn in_support(&self, k: &KillingPoint) -> bool {
        k.xi_norm >= SUPPORT_CUTOFF * self.max_xi && k.xi_norm > 0.0
    }

    /// Points with data and inside the support of `ξ`.
    pub fn supported(&self) -> impl Iterator<Item = (usize, &KillingPoint)> {
        self.evaluated
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().ok().map(|k| (i, k)))
            .filter(|(_, k)| self.in_support(k))
    }
}

/// Apply `per_point` to every evaluated point, turning evaluation errors into
/// failed records for each listed identity.
fn per_point(
    samples: &KillingSamples,
    identities: &[(&str, f64)],
    skip_outside_support: bool,
    mut f: impl FnMut(usize, &KillingPoint) -> Vec<IdentityRecord>,
) -> Vec<IdentityRecord> {
    let mut out = Vec::new();
    for (i, r) in samples.evaluated.iter().enumerate() {
        let pt = &samples.points[i];
        match r {
            Err(e) => {
                for (name, tol) in identities {
                    out.push(IdentityRecord::failed(name, Some(i), pt, *tol, e.to_string()));
                }
            }
            Ok(k) if skip_outside_support && !samples.in_support(k) => {
                for (name, tol) in identities {
                    out.push(
                        IdentityRecord::skipped(name, Some(i), pt, *tol, "outside the support of xi")
                            .with_aux("xi_norm", k.xi_norm),
                    );
                }
            }
            Ok(k) => out.extend(f(i, k)),
        }
    }
    out
}

fn from_result(name: &str, i: usize, pt: &[f64], tol: f64, r: Result<f64, GeometryError>) -> IdentityRecord {
    match r {
        Ok(v) => IdentityRecord::evaluated(name, Some(i), pt, v, tol),
        Err(GeometryError::NotApplicable(why)) => IdentityRecord::not_applicable(name, Some(i), pt, tol, why),
        Err(e) => IdentityRecord::failed(name, Some(i), pt, tol, e.to_string()),
    }
}

/// Killing equation, `∇ξ = u`, and the Kostant formula.
pub fn killing_suite(samples: &KillingSamples, tol: &Tolerances) -> SuiteOutcome {
    let ids = [
        ("killing_equation", tol.order1),
        ("covariant_derivative_is_u", tol.order1),
        ("kostant_formula", tol.order2),
    ];
    let records = per_point(samples, &ids, false, |i, k| {
        let pt = k.point();
        vec![
            IdentityRecord::evaluated(ids[0].0, Some(i), pt, k.killing_residual(), ids[0].1)
                .with_aux("xi_norm", k.xi_norm),
            IdentityRecord::evaluated(ids[1].0, Some(i), pt, k.derivative_is_u_residual(), ids[1].1),
            IdentityRecord::evaluated(ids[2].0, Some(i), pt, k.kostant_residual(), ids[2].1),
        ]
    });
    SuiteOutcome {
        records,
        classification: None,
    }
}

/// Twistor equation for `u = ½dξ♭`.
pub fn twistor_suite(samples: &KillingSamples, tolerance: f64) -> SuiteOutcome {
    let ids = [("twistor_equation_u", tolerance)];
    let records = per_point(samples, &ids, false, |i, k| {
        let pt = k.point();
        vec![from_result(ids[0].0, i, pt, tolerance, k.twistor_residual())
            .with_aux("u_norm_sq_form", k.u.form_norm_sq())
            .with_aux("u_norm_sq_tensor", k.u.tensor_norm_sq())]
    });
    SuiteOutcome {
        records,
        classification: None,
    }
}

/// Classify the samples: `f` constant (relative spread ≤ `tol_f`, or `f` ≈ 0)
/// takes priority; otherwise rank 2 if `ξ∧u ≈ 0` and `rank U = 2` everywhere.
pub fn classify(samples: &KillingSamples, tol: &Tolerances) -> Classification {
    let pts: Vec<&KillingPoint> = samples.supported().map(|(_, k)| k).collect();
    let fs: Vec<f64> = pts.iter().map(|k| k.f_delta).collect();
    let stats = FStatistics::from_values(&fs);
    let tolerance_f = tol.order2;
    let rel = stats.relative_std();
    let f_tiny = stats.min.abs().max(stats.max.abs()) <= tolerance_f;
    let mut rank_two_points = 0;
    let mut max_xi_wedge_u: f64 = 0.0;
    for k in &pts {
        if k.u.rank(RANK_THRESHOLD) == 2 {
            rank_two_points += 1;
        }
        max_xi_wedge_u = max_xi_wedge_u.max(k.xi_wedge_u_residual().unwrap_or(f64::INFINITY));
    }
    let tag = if pts.is_empty() {
        ClassTag::Unclassified
    } else if rel <= tolerance_f || f_tiny {
        ClassTag::FConstant
    } else if max_xi_wedge_u <= tol.order2 && rank_two_points == pts.len() {
        ClassTag::RankTwo
    } else {
        ClassTag::Unclassified
    };
    Classification {
        tag,
        f: stats,
        relative_std_f: rel,
        tolerance_f,
        rank_two_points,
        evaluated_points: pts.len(),
        max_xi_wedge_u,
        sample_singular_values: pts.first().map(|k| k.u.singular_values()).unwrap_or_default(),
    }
}

/// The Killing-with-twistor-derivative suite: `∇_ξ u = 0`, `ξ∧δu = 0`, the
/// reduced twistor equation `∇_X u = f X∧ξ`, agreement of the two `f`
/// extractions, the three `df` identities, and the dichotomy.
pub fn killing_twistor_suite(samples: &KillingSamples, tol: &Tolerances) -> SuiteOutcome {
    let t2 = tol.order2;
    let ids = [
        ("nabla_xi_u_vanishes", t2),
        ("xi_wedge_delta_u_vanishes", t2),
        ("reduced_twistor_equation", t2),
        ("f_extractions_agree", t2),
        ("u_xi_wedge_df_symmetric", t2),
        ("gradient_of_u_norm", t2),
        ("u_df_wedge_xi_vanishes", t2),
    ];
    let mut records = per_point(samples, &ids, true, |i, k| {
        let pt = k.point();
        vec![
            IdentityRecord::evaluated(ids[0].0, Some(i), pt, k.nabla_xi_u_residual(), t2),
            from_result(ids[1].0, i, pt, t2, k.collinearity_residual()),
            IdentityRecord::evaluated(ids[2].0, Some(i), pt, k.f_fit_residual, t2).with_aux("f", k.f_fit),
            IdentityRecord::evaluated(ids[3].0, Some(i), pt, k.f_agreement_residual(), t2)
                .with_aux("f_fit", k.f_fit)
                .with_aux("f_delta", k.f_delta),
            from_result(ids[4].0, i, pt, t2, k.symmetric_df_residual()),
            IdentityRecord::evaluated(ids[5].0, Some(i), pt, k.gradient_norm_residual(), t2)
                .with_aux("u_norm_sq_form", k.u.form_norm_sq())
                .with_aux("xi_norm_sq", k.xi_norm * k.xi_norm),
            from_result(ids[6].0, i, pt, t2, k.wedge_df_residual()),
        ]
    });

    let class = classify(samples, tol);
    let empty: [f64; 0] = [];
    let mut global = if class.tag == ClassTag::Unclassified {
        IdentityRecord::failed(
            "dichotomy",
            None,
            &empty,
            class.tolerance_f,
            "neither f constant nor u of rank 2 with xi∧u = 0",
        )
    } else {
        IdentityRecord::evaluated("dichotomy", None, &empty, 0.0, class.tolerance_f)
            .with_note(class.tag.as_str())
    };
    global = global
        .with_aux("f_mean", class.f.mean)
        .with_aux("f_std", class.f.std)
        .with_aux("f_relative_std", class.relative_std_f)
        .with_aux("rank_two_points", class.rank_two_points as f64)
        .with_aux("evaluated_points", class.evaluated_points as f64)
        .with_aux("max_xi_wedge_u", class.max_xi_wedge_u);
    records.push(global);

    if class.tag == ClassTag::RankTwo {
        let ids = [("xi_wedge_u_vanishes", t2), ("rank_two_decomposition", t2)];
        records.extend(per_point(samples, &ids, true, |i, k| {
            let pt = k.point();
            let sv = k.u.singular_values();
            let above = k.u.rank(RANK_THRESHOLD) as f64;
            vec![
                from_result(ids[0].0, i, pt, t2, k.xi_wedge_u_residual()).with_aux("rank_u", above),
                from_result(ids[1].0, i, pt, t2, k.rank_two_form_residual())
                    .with_aux("sigma_1", sv.first().copied().unwrap_or(0.0))
                    .with_aux("sigma_3", sv.get(2).copied().unwrap_or(0.0)),
            ]
        }));
    }
    SuiteOutcome {
        records,
        classification: Some(class),
    }
}

/// Sasakian structure with constant `k`: `∇_X u = kξ∧X`, the matching second
/// derivative of `ξ`, and constant length of `ξ`.
pub fn sasakian_suite(samples: &KillingSamples, k_const: f64, tol: &Tolerances) -> SuiteOutcome {
    let t2 = tol.order2;
    let ids = [("sasakian_structure", t2), ("sasakian_second_derivative", t2)];
    let mut records = per_point(samples, &ids, false, |i, k| {
        let pt = k.point();
        match super::sasakian_residual(k, k_const) {
            Ok(r) => vec![
                IdentityRecord::evaluated(ids[0].0, Some(i), pt, r.structure, t2),
                IdentityRecord::evaluated(ids[1].0, Some(i), pt, r.second_derivative, t2),
            ],
            Err(e) => ids
                .iter()
                .map(|(n, t)| IdentityRecord::failed(n, Some(i), pt, *t, e.to_string()))
                .collect(),
        }
    });
    let norms: Vec<f64> = samples.evaluated.iter().filter_map(|r| r.as_ref().ok()).map(|k| k.xi_norm).collect();
    let st = FStatistics::from_values(&norms);
    let empty: [f64; 0] = [];
    records.push(
        IdentityRecord::evaluated("constant_length", None, &empty, st.std / (st.mean.abs() + EPS_DEN), tol.order1)
            .with_aux("xi_norm_mean", st.mean)
            .with_aux("xi_norm_std", st.std),
    );
    SuiteOutcome {
        records,
        classification: None,
    }
}

fn frame_one_form(geo: &PointGeometry, t: &Tensor<f64>) -> Vec<f64> {
    geo.frame().to_frame(t).into_data()
}

fn rel3(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / (norm(a) + norm(b) + EPS_DEN)
}

/// Constant-`f` branch: `Ric(ξ) = (n−1)cξ` and `Ric(ξ) = ∇*∇ξ` with
/// `c = −f`, plus the Tanno–Gallot equation for `λ = |ξ|²` when `λ` varies.
pub fn sasakian_case_checks(
    samples: &KillingSamples,
    classification: &Classification,
    tol: &Tolerances,
) -> SuiteOutcome {
    let t2 = tol.order2;
    let ids = [
        ("ricci_of_xi", t2),
        ("ricci_equals_rough_laplacian", t2),
        ("tanno_gallot", tol.order3),
    ];
    let c = -classification.f.mean;
    let applicable = classification.tag == ClassTag::FConstant && c > tol.order2;
    if !applicable {
        let why = if classification.tag != ClassTag::FConstant {
            format!("classification is {}, not f-constant", classification.tag.as_str())
        } else {
            "c = 0: xi is parallel".to_string()
        };
        let mut records = Vec::new();
        for (i, pt) in samples.points.iter().enumerate() {
            for (n, t) in ids {
                records.push(IdentityRecord::not_applicable(n, Some(i), pt, t, why.clone()));
            }
        }
        return SuiteOutcome {
            records,
            classification: None,
        };
    }
    let lambdas: Vec<f64> = samples.supported().map(|(_, k)| k.xi_norm * k.xi_norm).collect();
    let ls = FStatistics::from_values(&lambdas);
    let lambda_varies = ls.std > 1e-6 * ls.mean.abs();
    let records = per_point(samples, &ids, true, |i, k| {
        let pt = k.point();
        let n = k.dim();
        let ric = k.ricci_xi();
        let target: Vec<f64> = k.xi.iter().map(|x| (n as f64 - 1.0) * c * x).collect();
        let mut out = vec![IdentityRecord::evaluated(ids[0].0, Some(i), pt, rel3(&ric, &target), t2).with_aux("c", c)];
        match laplacians_of_jet(&k.geo, &k.xi_flat_jet) {
            Ok(Laplacians { rough, .. }) => {
                let rough = frame_one_form(&k.geo, &rough);
                out.push(IdentityRecord::evaluated(ids[1].0, Some(i), pt, rel3(&ric, &rough), t2));
            }
            Err(e) => out.push(IdentityRecord::failed(ids[1].0, Some(i), pt, t2, e.to_string())),
        }
        if lambda_varies {
            out.push(IdentityRecord::evaluated(ids[2].0, Some(i), pt, k.tanno_gallot_residual(c), ids[2].1));
        } else {
            out.push(IdentityRecord::not_applicable(ids[2].0, Some(i), pt, ids[2].1, "|xi|^2 is constant"));
        }
        out
    });
    SuiteOutcome {
        records,
        classification: None,
    }
}

/// Bochner–Weitzenböck pair: `∇*∇ξ = ½Δξ` for the Killing 1-form and
/// `Δω = ∇*∇ω + Ric(ω)` for `ξ♭` and for a seeded random 1-form.
pub fn weitzenboeck_suite(samples: &KillingSamples, random_form: &TensorField, tol: &Tolerances) -> SuiteOutcome {
    let t2 = tol.order2;
    let ids = [
        ("killing_rough_equals_half_hodge", t2),
        ("bochner_formula_xi", t2),
        ("bochner_formula_random_form", t2),
    ];
    let records = per_point(samples, &ids, false, |i, k| {
        let pt = k.point();
        let bochner = |l: &Laplacians, w: &Tensor<f64>| -> f64 {
            let hodge = frame_one_form(&k.geo, &l.hodge);
            let rough = frame_one_form(&k.geo, &l.rough);
            let wf = frame_one_form(&k.geo, w);
            let ric = (&k.ricci * nalgebra::DVector::from_column_slice(&wf)).as_slice().to_vec();
            let r: Vec<f64> = (0..hodge.len()).map(|a| hodge[a] - rough[a] - ric[a]).collect();
            norm(&r) / (norm(&hodge) + norm(&rough) + norm(&ric) + EPS_DEN)
        };
        let mut out = Vec::new();
        match laplacians_of_jet(&k.geo, &k.xi_flat_jet) {
            Ok(l) => {
                let hodge = frame_one_form(&k.geo, &l.hodge);
                let rough = frame_one_form(&k.geo, &l.rough);
                let half: Vec<f64> = hodge.iter().map(|x| 0.5 * x).collect();
                out.push(IdentityRecord::evaluated(ids[0].0, Some(i), pt, rel3(&rough, &half), t2));
                out.push(IdentityRecord::evaluated(ids[1].0, Some(i), pt, bochner(&l, &k.xi_flat_jet.values()), t2));
            }
            Err(e) => {
                out.push(IdentityRecord::failed(ids[0].0, Some(i), pt, t2, e.to_string()));
                out.push(IdentityRecord::failed(ids[1].0, Some(i), pt, t2, e.to_string()));
            }
        }
        let r = random_form
            .evaluate(&k.geo)
            .and_then(|w| laplacians_of_jet(&k.geo, &w).map(|l| bochner(&l, &w.values())));
        out.push(from_result(ids[2].0, i, pt, t2, r));
        out
    });
    SuiteOutcome {
        records,
        classification: None,
    }
}

/// Curvature identities for closed twistor 2-forms (`n > 3` only): the
/// commutator identity for seeded random skew `ω`, its `ω = u` case, Ricci
/// commutation with `U²`, and the second-derivative identity.
pub fn section3_suite(samples: &KillingSamples, omegas: &[DMatrix<f64>], tol: &Tolerances) -> SuiteOutcome {
    let t2 = tol.order2;
    let ids = [
        ("curvature_commutator_identity", t2),
        ("self_commutator_identity", t2),
        ("ricci_commutes_with_u_squared", t2),
        ("second_derivative_identity", tol.order3),
    ];
    let records = per_point(samples, &ids, false, |i, k| {
        let pt = k.point();
        let n = k.dim();
        if n <= 3 {
            return ids
                .iter()
                .map(|(name, t)| {
                    IdentityRecord::not_applicable(name, Some(i), pt, *t, format!("assumes dimension n > 3, got {n}"))
                })
                .collect();
        }
        let tw = k.twistor_residual().unwrap_or(f64::INFINITY);
        if !(tw <= t2) {
            return ids
                .iter()
                .map(|(name, t)| {
                    IdentityRecord::not_applicable(name, Some(i), pt, *t, "u is not a closed twistor form here")
                        .with_aux("twistor_residual", tw)
                })
                .collect();
        }
        let u = k.u.endo();
        let mut worst: f64 = 0.0;
        let mut err = None;
        for om in omegas {
            match super::curvature_commutator_identity(&k.riemann, &k.ricci, u, om) {
                Ok(r) => worst = worst.max(r),
                Err(e) => err = Some(e),
            }
        }
        let co = match err {
            Some(e) => Err(e),
            None => Ok(worst),
        };
        vec![
            from_result(ids[0].0, i, pt, t2, co).with_aux("omega_count", omegas.len() as f64),
            from_result(ids[1].0, i, pt, t2, super::self_commutator_residual(&k.riemann, u)),
            from_result(ids[2].0, i, pt, t2, super::ricci_commutation(&k.ricci, u)),
            from_result(
                ids[3].0,
                i,
                pt,
                ids[3].1,
                super::second_derivative_identity(&k.riemann, u, &k.nabla2_u),
            ),
        ]
    });
    SuiteOutcome {
        records,
        classification: None,
    }
}

/// `count` random skew-symmetric frame matrices with entries in (−1, 1).
pub fn random_skew(n: usize, count: usize, seed: u64) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            &a - a.transpose()
        })
        .collect()
}

/// A seeded smooth 1-form with affine, quadratic and trigonometric terms.
pub fn random_one_form(n: usize, seed: u64) -> TensorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let c1: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let c2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    TensorField::one_form(format!("random[{seed}]"), n, move |x| {
        (0..n)
            .map(|i| {
                let mut s = x[0].constant_like(c0[i]);
                for j in 0..n {
                    s += &(&x[j] * c1[i][j]);
                }
                let j = (i + 1) % n;
                s += &((&x[i] * &x[j]) * c2[i]);
                s += &(x[j].sin() * 0.5);
                s
            })
            .collect()
    })
}

/// Algebraic curvature sanity at each point: Bianchi, antisymmetry, pair
/// symmetry, metric compatibility, frame orthonormality and (when known) the
/// constant sectional curvature, as a relative error (absolute when it is 0).
pub fn curvature_sanity_suite(
    metric: &MetricField,
    points: &[Vec<f64>],
    expected_sectional: Option<f64>,
    tol: &Tolerances,
) -> SuiteOutcome {
    let t1 = tol.order1;
    let per: Vec<Vec<IdentityRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            let geo = match metric.geometry(pt, 2) {
                Ok(g) => g,
                Err(e) => {
                    return ["first_bianchi", "curvature_antisymmetry", "pair_symmetry", "metric_compatibility"]
                        .iter()
                        .map(|n| IdentityRecord::failed(n, Some(i), pt, t1, e.to_string()))
                        .collect()
                }
            };
            let mut out = Vec::new();
            match curvature_symmetries(&geo) {
                Ok(s) => {
                    out.push(IdentityRecord::evaluated("first_bianchi", Some(i), pt, s.first_bianchi, t1));
                    out.push(IdentityRecord::evaluated("curvature_antisymmetry", Some(i), pt, s.antisymmetry, t1));
                    out.push(IdentityRecord::evaluated("pair_symmetry", Some(i), pt, s.pair_symmetry, t1));
                }
                Err(e) => out.push(IdentityRecord::failed("first_bianchi", Some(i), pt, t1, e.to_string())),
            }
            out.push(from_result("metric_compatibility", i, pt, t1, metric_compatibility(&geo)));
            out.push(IdentityRecord::evaluated(
                "frame_orthonormality",
                Some(i),
                pt,
                geo.frame().orthonormality_defect(),
                FRAME_TOLERANCE,
            ));
            if let Some(k) = expected_sectional {
                let r = coordinate_sectional_curvatures(&geo).map(|ks| {
                    ks.iter()
                        .map(|(_, v)| (v - k).abs() / if k == 0.0 { 1.0 } else { k.abs() })
                        .fold(0.0, f64::max)
                });
                out.push(from_result("constant_sectional_curvature", i, pt, tol.order2, r).with_aux("expected", k));
            }
            out
        })
        .collect();
    SuiteOutcome {
        records: per.into_iter().flatten().collect(),
        classification: None,
    }
}

/// Gradient conformal field checks on a warped factor: `∇_Y X = αY` with the
/// supplied `α`, `α = −δX/m`, and the twistor equation for `X♭`.
pub fn gcvf_suite(
    metric: &MetricField,
    x: &TensorField,
    alpha: &(dyn Fn(&[f64]) -> f64 + Sync),
    points: &[Vec<f64>],
    tol: &Tolerances,
) -> SuiteOutcome {
    let t2 = tol.order2;
    let ids = ["conformal_gradient_equation", "alpha_from_divergence", "twistor_one_form"];
    let per: Vec<Vec<IdentityRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(i, pt)| {
            let run = || -> Result<Vec<IdentityRecord>, GeometryError> {
                let geo = metric.geometry(pt, MAX_GEOMETRY_ORDER)?;
                let n = geo.dim();
                let xj = x.evaluate(&geo)?;
                let xf = geo.lower_all(&xj);
                let nabla = geo.frame().to_frame(&geo.covariant_derivative(&xf)?.values());
                let a = alpha(pt);
                let ident = Tensor::from_fn(n, nabla.slots().to_vec(), |i| if i[0] == i[1] { a } else { 0.0 });
                let eq = crate::forms::relative_gap(&nabla, &ident);
                let delta = crate::forms::codifferential_jet(&geo, &xf)?.values().data()[0];
                let a_div = -delta / n as f64;
                let agree = (a - a_div).abs() / (a.abs() + a_div.abs() + EPS_DEN);
                let tw = super::twistor_residual_jet(&geo, &xf)?;
                Ok(vec![
                    IdentityRecord::evaluated(ids[0], Some(i), pt, eq, t2).with_aux("alpha", a),
                    IdentityRecord::evaluated(ids[1], Some(i), pt, agree, t2).with_aux("alpha_div", a_div),
                    IdentityRecord::evaluated(ids[2], Some(i), pt, tw, t2),
                ])
            };
            run().unwrap_or_else(|e| {
                ids.iter()
                    .map(|n| IdentityRecord::failed(n, Some(i), pt, t2, e.to_string()))
                    .collect()
            })
        })
        .collect();
    SuiteOutcome {
        records: per.into_iter().flatten().collect(),
        classification: None,
    }
}
