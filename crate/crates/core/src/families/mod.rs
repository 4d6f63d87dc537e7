//! Constructors for the metric families with Killing fields whose covariant
//! derivative is a twistor form, plus their profile machinery.

mod boundary;
mod profile;
mod quadrature;
mod spline;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use boundary::{analyze, BoundaryMode, BoundaryReport, End, BOUNDARY_THRESHOLD, FIT_POINTS, MAX_CONDITION};
pub use profile::{Profile, ProfileSpec, QUADRATURE_TOLERANCE};
pub use quadrature::integrate;
pub use spline::QuinticSpline;

use crate::chart::ChartDomain;
use crate::error::{GeometryError, Result};
use crate::fields::{constant_vector, TensorField};
use crate::metric::MetricField;
use crate::taylor::{TaylorScalar, MAX_ORDER};
use crate::twistor::KillingInstance;

/// Largest supported manifold dimension.
pub const MAX_DIM: usize = 6;

/// A family and its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    RoundSphere { n: usize, radius: f64 },
    SasakianSphere { k: f64 },
    WarpedMappingTorus { n: usize, a: f64 },
    /// `c = None` selects `c = 1/γ(l)`.
    RiemannianJoin { n: usize, gamma: ProfileSpec, l: f64, c: Option<f64> },
    GcvfFactor { m: usize, gamma: ProfileSpec, l: f64, c: f64 },
    Flat { n: usize },
}

impl FamilySpec {
    pub fn tag(&self) -> &'static str {
        match self {
            FamilySpec::RoundSphere { .. } => "round_sphere",
            FamilySpec::SasakianSphere { .. } => "sasakian_sphere",
            FamilySpec::WarpedMappingTorus { .. } => "warped_mapping_torus",
            FamilySpec::RiemannianJoin { .. } => "riemannian_join",
            FamilySpec::GcvfFactor { .. } => "gcvf_factor",
            FamilySpec::Flat { .. } => "flat",
        }
    }

    pub fn build(&self) -> Result<FamilyInstance> {
        match self {
            FamilySpec::RoundSphere { n, radius } => round_sphere(*n, *radius),
            FamilySpec::SasakianSphere { k } => sasakian_sphere(*k),
            FamilySpec::WarpedMappingTorus { n, a } => warped_mapping_torus(*n, *a),
            FamilySpec::RiemannianJoin { n, gamma, l, c } => {
                riemannian_join(*n, &Profile::from_spec(gamma)?, *l, *c)
            }
            FamilySpec::GcvfFactor { m, gamma, l, c } => gcvf_factor(*m, &Profile::from_spec(gamma)?, *l, *c),
            FamilySpec::Flat { n } => flat(*n),
        }
        .map(|mut inst| {
            if inst.expected_sectional.is_none() {
                inst.expected_sectional = self.round_curvature();
            }
            inst.spec = Some(self.clone());
            inst
        })
    }
}

/// Scalar function on the chart with its plain value.
pub type ChartFunction = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A gradient conformal vector field `∇_Y X = αY` on a warped factor.
#[derive(Clone)]
pub struct GcvfData {
    pub metric: MetricField,
    pub field: TensorField,
    pub alpha: ChartFunction,
}

impl std::fmt::Debug for GcvfData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GcvfData")
            .field("metric", &self.metric)
            .field("field", &self.field)
            .finish_non_exhaustive()
    }
}

/// Profile data of a join or warped factor: `g = ds² + γ²g_S + λ²dθ²`.
#[derive(Clone, Debug)]
pub struct WarpProfiles {
    pub gamma: Profile,
    pub lambda: Option<Profile>,
    pub l: f64,
    pub c: f64,
}

/// A constructed family instance.
#[derive(Clone, Debug)]
pub struct FamilyInstance {
    pub spec: Option<FamilySpec>,
    pub metric: MetricField,
    /// Killing fields; the distinguished one comes first.
    pub killing: Vec<KillingInstance>,
    pub gcvf: Option<GcvfData>,
    /// Constant sectional curvature, when the metric is a space form.
    pub expected_sectional: Option<f64>,
    /// Sasakian constant of the distinguished field, when it is one.
    pub sasakian_k: Option<f64>,
    pub profiles: Option<WarpProfiles>,
    pub boundary: Vec<BoundaryReport>,
    /// Angle axis used for the conformal corruption.
    pub corruption_axis: usize,
    /// Radial coordinate along which profiles are tabulated.
    pub profile_axis: usize,
}

impl FamilyInstance {
    fn new(metric: MetricField, fields: Vec<TensorField>, corruption_axis: usize) -> Result<Self> {
        let killing = fields
            .into_iter()
            .map(|f| KillingInstance::new(f.name().to_string(), metric.clone(), f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            spec: None,
            metric,
            killing,
            gcvf: None,
            expected_sectional: None,
            sasakian_k: None,
            profiles: None,
            boundary: Vec::new(),
            corruption_axis,
            profile_axis: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn distinguished(&self) -> &KillingInstance {
        &self.killing[0]
    }

    /// The same fields on the conformally corrupted metric
    /// `(1 + ε sin x_axis)·g`; nothing about the original survives.
    pub fn corrupted(&self, epsilon: f64) -> Result<Self> {
        let metric = self.metric.conformally_perturbed(self.corruption_axis, epsilon);
        let fields = self.killing.iter().map(|k| k.xi.clone()).collect();
        let mut out = Self::new(metric, fields, self.corruption_axis)?;
        out.spec = self.spec.clone();
        out.profile_axis = self.profile_axis;
        Ok(out)
    }
}

fn check_dim(n: usize, min: usize, what: &str) -> Result<()> {
    if n < min || n > MAX_DIM {
        return Err(GeometryError::InvalidParameter(format!(
            "{what}: dimension must be in {min}..={MAX_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// Diagonal of the unit-sphere metric in nested polar angles
/// `dφ₁² + sin²φ₁(dφ₂² + sin²φ₂(…))`.
fn unit_sphere_diag(angles: &[TaylorScalar]) -> Vec<TaylorScalar> {
    let mut out = Vec::with_capacity(angles.len());
    let mut f = angles[0].constant_like(1.0);
    for a in angles {
        out.push(f.clone());
        f = &f * &a.sin().square();
    }
    out
}

/// Unit-sphere point in ℝ^{m+1} for `m` nested angles.
fn unit_sphere_point(angles: &[TaylorScalar]) -> Vec<TaylorScalar> {
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut prod = angles[0].constant_like(1.0);
    for a in angles {
        out.push(&prod * &a.cos());
        prod = &prod * &a.sin();
    }
    out.push(prod);
    out
}

/// Bounds for `m` nested angles: polar in `(0, π)`, the last one periodic in `(0, 2π)`.
fn angle_bounds(m: usize) -> (Vec<f64>, Vec<f64>) {
    let lower = vec![0.0; m];
    let mut upper = vec![PI; m];
    if m > 0 {
        upper[m - 1] = 2.0 * PI;
    }
    (lower, upper)
}

/// Box from concatenated bounds; `polar` axes keep away from their ends and
/// `periodic` axes are flagged as angles.
fn domain(lower: Vec<f64>, upper: Vec<f64>, polar: &[usize], periodic: &[usize]) -> Result<ChartDomain> {
    let mut d = ChartDomain::new(lower, upper)?;
    for &a in polar {
        d = d.polar(a);
    }
    for &a in periodic {
        d = d.periodic(a);
    }
    Ok(d)
}

fn with_nan_on_error(x: &[TaylorScalar], r: Result<Vec<TaylorScalar>>) -> Vec<TaylorScalar> {
    r.unwrap_or_else(|_| vec![x[0].constant_like(f64::NAN); x.len()])
}

/// Round sphere `Sⁿ(ρ)` in polar coordinates
/// `g = dr² + ρ²sin²(r/ρ) g_{S^{n−1}}`, with every rotation generator
/// `x_p∂_q − x_q∂_p` of the ambient ℝ^{n+1} as a Killing field. The
/// distinguished field rotates the last ambient plane, i.e. it is the
/// coordinate field of the last angle.
pub fn round_sphere(n: usize, radius: f64) -> Result<FamilyInstance> {
    check_dim(n, 2, "round sphere")?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let (mut lower, mut upper) = angle_bounds(n - 1);
    lower.insert(0, 0.0);
    upper.insert(0, PI * radius);
    let polar: Vec<usize> = (0..n - 1).collect();
    let dom = domain(lower, upper, &polar, &[n - 1])?;
    let metric = MetricField::diagonal(format!("round_sphere(n={n}, radius={radius})"), dom, move |x| {
        round_diag(x, radius)
    });
    let mut fields = vec![sphere_rotation(n, radius, n - 1, n)];
    for p in 0..=n {
        for q in p + 1..=n {
            if (p, q) != (n - 1, n) {
                fields.push(sphere_rotation(n, radius, p, q));
            }
        }
    }
    let mut inst = FamilyInstance::new(metric, fields, n - 1)?;
    inst.expected_sectional = Some(1.0 / (radius * radius));
    Ok(inst)
}

fn round_diag(x: &[TaylorScalar], radius: f64) -> Vec<TaylorScalar> {
    let w = (&x[0] * (1.0 / radius)).sin().square() * (radius * radius);
    let mut out = vec![x[0].constant_like(1.0)];
    out.extend(unit_sphere_diag(&x[1..]).into_iter().map(|d| &d * &w));
    out
}

fn round_embedding(x: &[TaylorScalar], radius: f64) -> Vec<TaylorScalar> {
    let t = &x[0] * (1.0 / radius);
    let (c, s) = (t.cos() * radius, t.sin() * radius);
    let mut out = vec![c];
    out.extend(unit_sphere_point(&x[1..]).into_iter().map(|y| &y * &s));
    out
}

/// Pull back the ambient rotation `x_p e_q − x_q e_p` through the
/// embedding: `ξ^i = g^{ii} ⟨∂_iX, V⟩`. Expects the identity coordinate
/// expansion, as produced by point geometry.
fn sphere_rotation(n: usize, radius: f64, p: usize, q: usize) -> TensorField {
    TensorField::vector(format!("rotation_{p}{q}"), n, move |x| {
        let order = x[0].order();
        assert!(order < MAX_ORDER, "rotation field needs one spare Taylor order");
        let base: Vec<f64> = x.iter().map(|c| c.value()).collect();
        let y = TaylorScalar::variables(&base, order + 1);
        let emb = round_embedding(&y, radius);
        let diag = round_diag(x, radius);
        let (xp, xq) = (emb[p].truncate(order), emb[q].truncate(order));
        (0..n)
            .map(|i| {
                let lowered = &(&emb[q].partial(i) * &xp) - &(&emb[p].partial(i) * &xq);
                &lowered / &diag[i]
            })
            .collect()
    })
}

/// Round `S³` of curvature `k` in Hopf coordinates
/// `g = ρ²(dη² + cos²η dφ₁² + sin²η dφ₂²)`, `ρ = 1/√k`, with the Hopf
/// field `ξ = ∂φ₁ + ∂φ₂` (constant length `ρ`) and the anti-Hopf field.
pub fn sasakian_sphere(k: f64) -> Result<FamilyInstance> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("k must be positive, got {k}")));
    }
    let rho2 = 1.0 / k;
    let dom = domain(vec![0.0, 0.0, 0.0], vec![PI / 2.0, 2.0 * PI, 2.0 * PI], &[0], &[1, 2])?;
    let metric = MetricField::diagonal(format!("sasakian_sphere(k={k})"), dom, move |x| {
        vec![
            x[0].constant_like(rho2),
            x[0].cos().square() * rho2,
            x[0].sin().square() * rho2,
        ]
    });
    let fields = vec![
        constant_vector("hopf", vec![0.0, 1.0, 1.0]),
        constant_vector("anti_hopf", vec![0.0, 1.0, -1.0]),
    ];
    let mut inst = FamilyInstance::new(metric, fields, 1)?;
    inst.expected_sectional = Some(k);
    inst.sasakian_k = Some(k);
    Ok(inst)
}

/// Warped mapping torus `λ(r)²dθ² + g_{S^{n−1}}`, `λ = a + cos r`, over the
/// round `S^{n−1}` in polar coordinates `(r, angles)`; `θ` has period 1 and
/// the gluing isometry is the identity. `ξ = ∂θ`.
pub fn warped_mapping_torus(n: usize, a: f64) -> Result<FamilyInstance> {
    check_dim(n, 3, "warped mapping torus")?;
    if !(a > 1.0 && a.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!(
            "warping λ = a + cos r must stay positive: need a > 1, got {a}"
        )));
    }
    let (mut lower, mut upper) = angle_bounds(n - 2);
    lower.splice(0..0, [0.0, 0.0]);
    upper.splice(0..0, [1.0, PI]);
    let polar: Vec<usize> = (1..n - 1).collect();
    let dom = domain(lower, upper, &polar, &[0, n - 1])?;
    let metric = MetricField::diagonal(format!("warped_mapping_torus(n={n}, a={a})"), dom, move |x| {
        let lam = x[1].cos() + a;
        let mut out = vec![lam.square(), x[1].constant_like(1.0)];
        let w = x[1].sin().square();
        out.extend(unit_sphere_diag(&x[2..]).into_iter().map(|d| &d * &w));
        out
    });
    let mut xi = vec![0.0; n];
    xi[0] = 1.0;
    let mut inst = FamilyInstance::new(metric, vec![constant_vector("d_theta", xi)], 0)?;
    inst.profile_axis = 1;

    // ∇λ = −sin r ∂r on the base is conformal with α = −cos r.
    let base = round_sphere(n - 1, 1.0)?.metric;
    let field = TensorField::vector("grad_lambda", n - 1, move |x| {
        let mut v = vec![x[0].zero_like(); x.len()];
        v[0] = -x[0].sin();
        v
    });
    inst.gcvf = Some(GcvfData {
        metric: base,
        field,
        alpha: Arc::new(|p: &[f64]| -p[0].cos()),
    });
    Ok(inst)
}

/// Warped metric `ds² + γ(s)² g_{S^{m−1}}` on `(0, l) × S^{m−1}`.
fn warped_factor(name: String, m: usize, gamma: &Profile, l: f64) -> Result<MetricField> {
    let (mut lower, mut upper) = angle_bounds(m - 1);
    lower.insert(0, 0.0);
    upper.insert(0, l);
    let polar: Vec<usize> = (0..m - 1).collect();
    let dom = domain(lower, upper, &polar, &[m - 1])?;
    let gamma = gamma.clone();
    Ok(MetricField::diagonal(name, dom, move |x| {
        let r = gamma.jet(&x[0]).map(|g| {
            let w = g.square();
            let mut out = vec![x[0].constant_like(1.0)];
            out.extend(unit_sphere_diag(&x[1..]).into_iter().map(|d| &d * &w));
            out
        });
        with_nan_on_error(x, r)
    }))
}

fn gcvf_data(metric: MetricField, gamma: &Profile, c: f64) -> GcvfData {
    let m = metric.dim();
    let g = gamma.clone();
    let field = TensorField::vector("c_gamma_ds", m, move |x| {
        let mut v = vec![x[0].zero_like(); x.len()];
        v[0] = g.jet(&x[0]).map(|j| j * c).unwrap_or_else(|_| x[0].constant_like(f64::NAN));
        v
    });
    let g = gamma.clone();
    GcvfData {
        metric,
        field,
        alpha: Arc::new(move |p: &[f64]| c * g.derivative(p[0]).unwrap_or(f64::NAN)),
    }
}

fn is_round_profile(gamma: &ProfileSpec) -> bool {
    matches!(gamma, ProfileSpec::Sin)
}

/// Riemannian join `ds² + γ²(s) g_{S^{n−2}} + λ²(s) dθ²` on
/// `(0, l) × S^{n−2} × S¹` with `λ(s) = c∫_s^l γ` and `ξ = ∂θ`. Both ends of
/// `γ` are checked by the boundary analyzer before anything is built.
pub fn riemannian_join(n: usize, gamma: &Profile, l: f64, c: Option<f64>) -> Result<FamilyInstance> {
    check_dim(n, 3, "riemannian join")?;
    if !(l > 0.0 && l.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("l must be positive, got {l}")));
    }
    let c = match c {
        Some(c) => c,
        None => 1.0 / gamma.value(l)?,
    };
    if !(c > 0.0 && c.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("c must be positive, got {c}")));
    }
    let mut reports = Vec::new();
    for end in [End::Origin, End::Far] {
        reports.push(analyze(gamma, l, c, end, BoundaryMode::Join, FIT_POINTS)?.into_result()?);
    }
    let lambda = Profile::integrated(gamma, l, c)?;

    let (mut lower, mut upper) = angle_bounds(n - 2);
    lower.insert(0, 0.0);
    upper.insert(0, l);
    lower.push(0.0);
    upper.push(2.0 * PI);
    let polar: Vec<usize> = (0..n - 2).collect();
    let dom = domain(lower, upper, &polar, &[n - 2, n - 1])?;
    let (g2, l2) = (gamma.clone(), lambda.clone());
    let metric = MetricField::diagonal(
        format!("riemannian_join(n={n}, gamma={}, l={l}, c={c})", gamma.label()),
        dom,
        move |x| {
            let r = g2.jet(&x[0]).and_then(|g| {
                let lam = l2.jet(&x[0])?;
                let w = g.square();
                let mut out = vec![x[0].constant_like(1.0)];
                out.extend(unit_sphere_diag(&x[1..n - 1]).into_iter().map(|d| &d * &w));
                out.push(lam.square());
                Ok(out)
            });
            with_nan_on_error(x, r)
        },
    );
    let mut xi = vec![0.0; n];
    xi[n - 1] = 1.0;
    let mut rot = vec![0.0; n];
    rot[n - 2] = 1.0;
    let fields = vec![constant_vector("d_theta", xi), constant_vector("sphere_rotation", rot)];
    let mut inst = FamilyInstance::new(metric, fields, n - 1)?;
    let factor = warped_factor(format!("join_factor(m={})", n - 1), n - 1, gamma, l)?;
    inst.gcvf = Some(gcvf_data(factor, gamma, c));
    inst.boundary = reports;
    inst.profiles = Some(WarpProfiles {
        gamma: gamma.clone(),
        lambda: Some(lambda),
        l,
        c,
    });
    Ok(inst)
}

/// Warped factor `ds² + γ²(s) g_{S^{m−1}}` carrying the gradient conformal
/// field `X = cγ ∂s` with `α = cγ′`; `γ²` is checked at both ends. The
/// Killing field is the rotation of the last sphere angle.
pub fn gcvf_factor(m: usize, gamma: &Profile, l: f64, c: f64) -> Result<FamilyInstance> {
    check_dim(m, 2, "gcvf factor")?;
    if !(l > 0.0 && l.is_finite() && c > 0.0 && c.is_finite()) {
        return Err(GeometryError::InvalidParameter(format!("need l > 0 and c > 0, got l = {l}, c = {c}")));
    }
    let mut reports = Vec::new();
    for end in [End::Origin, End::Far] {
        reports.push(analyze(gamma, l, c, end, BoundaryMode::Gcvf, FIT_POINTS)?.into_result()?);
    }
    let metric = warped_factor(format!("gcvf_factor(m={m}, gamma={}, l={l})", gamma.label()), m, gamma, l)?;
    let mut rot = vec![0.0; m];
    rot[m - 1] = 1.0;
    let mut inst = FamilyInstance::new(metric.clone(), vec![constant_vector("sphere_rotation", rot)], m - 1)?;
    inst.gcvf = Some(gcvf_data(metric, gamma, c));
    inst.boundary = reports;
    inst.profiles = Some(WarpProfiles {
        gamma: gamma.clone(),
        lambda: None,
        l,
        c,
    });
    Ok(inst)
}

/// Euclidean metric on `(−1, 1)ⁿ` with the parallel field `∂x₀` and the
/// rotation `x₀∂₁ − x₁∂₀`.
pub fn flat(n: usize) -> Result<FamilyInstance> {
    check_dim(n, 2, "flat chart")?;
    let dom = ChartDomain::new(vec![-1.0; n], vec![1.0; n])?;
    let metric = MetricField::diagonal(format!("flat(n={n})"), dom, move |x| {
        vec![x[0].constant_like(1.0); x.len()]
    });
    let mut e0 = vec![0.0; n];
    e0[0] = 1.0;
    let rotation = TensorField::vector("rotation_01", n, |x| {
        let mut v = vec![x[0].zero_like(); x.len()];
        v[0] = -&x[1];
        v[1] = x[0].clone();
        v
    });
    let mut inst = FamilyInstance::new(metric, vec![constant_vector("translation", e0), rotation], 0)?;
    inst.expected_sectional = Some(0.0);
    Ok(inst)
}

impl FamilySpec {
    /// Known constant sectional curvature of the family, used to tag joins
    /// and factors whose profile is the round one.
    pub fn round_curvature(&self) -> Option<f64> {
        match self {
            FamilySpec::RiemannianJoin { gamma, l, c, .. }
                if is_round_profile(gamma) && (l - PI / 2.0).abs() < 1e-12 && c.map_or(true, |c| (c - 1.0).abs() < 1e-12) =>
            {
                Some(1.0)
            }
            FamilySpec::GcvfFactor { gamma, l, .. } if is_round_profile(gamma) && (l - PI).abs() < 1e-12 => Some(1.0),
            _ => None,
        }
    }
}
