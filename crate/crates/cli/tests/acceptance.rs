//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use twistorlab_cli::runner::build_instance;
use twistorlab_cli::{parse_config, run, to_json};
use twistorlab_core::curvature::{christoffel, coordinate_sectional_curvatures, ricci, riemann, scalar_curvature};
use twistorlab_core::families::{
    self, analyze, BoundaryMode, End, FamilyInstance, Profile, ProfileSpec, FIT_POINTS,
};
use twistorlab_core::twistor::{
    classify, killing_twistor_suite, random_one_form, random_skew, sasakian_residual, section3_suite,
    weitzenboeck_suite, ClassTag, FStatistics, KillingSamples,
};
use twistorlab_core::{IdentityRecord, KillingInstance, Status, Tolerances};

const SEED: u64 = 42;

/// Outcome of one criterion: named checks with their measured values.
struct Criterion {
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new() -> Self {
        Self { checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    /// `value ≤ bound`, recorded with both numbers; NaN fails.
    fn at_most(&mut self, what: &str, value: f64, bound: f64) {
        self.check(format!("{what} {value:.2e} <= {bound:.0e}"), value <= bound);
    }

    fn at_least(&mut self, what: &str, value: f64, bound: f64) {
        self.check(format!("{what} {value:.2e} >= {bound:.2e}"), value >= bound);
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(_, ok)| *ok)
    }
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn samples(inst: &KillingInstance, count: usize) -> KillingSamples {
    KillingSamples::evaluate(inst, &inst.metric.domain().halton_points(count, SEED))
}

fn perturbed_join(n: usize) -> FamilyInstance {
    let gamma = Profile::from_spec(&ProfileSpec::PerturbedSin { epsilon: 0.1 }).unwrap();
    families::riemannian_join(n, &gamma, FRAC_PI_2, None).unwrap()
}

/// Largest residual of `identity`, or NaN if any record of it is not a pass
/// or if there is no record at all.
fn max_passing(records: &[IdentityRecord], identity: &str) -> f64 {
    let mine: Vec<&IdentityRecord> = records.iter().filter(|r| r.identity == identity).collect();
    if mine.is_empty() || mine.iter().any(|r| r.status == Status::Fail || r.status == Status::NotApplicable) {
        return f64::NAN;
    }
    let evaluated: Vec<f64> = mine.iter().filter_map(|r| r.residual).collect();
    if evaluated.is_empty() {
        return f64::NAN;
    }
    evaluated.into_iter().fold(0.0, f64::max)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm(&d) / (norm(a) + norm(b) + 1e-30)
}

fn curvature_engine() -> Criterion {
    let start = Instant::now();
    let mut c = Criterion::new();

    let flat = families::flat(3).unwrap();
    let (mut gam, mut rie, mut ric): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for p in flat.metric.domain().halton_points(200, SEED) {
        gam = gam.max(christoffel(&flat.metric, &p).unwrap().max_abs());
        rie = rie.max(riemann(&flat.metric, &p).unwrap().max_abs());
        ric = ric.max(ricci(&flat.metric, &p).unwrap().form.max_abs());
    }
    c.at_most("flat Christoffel", gam, 1e-12);
    c.at_most("flat Riemann", rie, 1e-12);
    c.at_most("flat Ricci", ric, 1e-12);

    let mut worst: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for n in [2, 3, 4] {
        for r in [1.0, 2.0] {
            let inst = families::round_sphere(n, r).unwrap();
            let k = 1.0 / (r * r);
            for p in inst.metric.domain().halton_points(200, SEED) {
                let geo = inst.metric.geometry(&p, 2).unwrap();
                for (_, ks) in coordinate_sectional_curvatures(&geo).unwrap() {
                    worst = worst.max((ks - k).abs() / k);
                }
            }
            for p in inst.metric.domain().halton_points(5, SEED) {
                let g = christoffel(&inst.metric, &p).unwrap().into_data();
                let g_fd = support::christoffel(&inst.metric, &p, support::STEP);
                oracle = oracle.max(support::max_abs_diff(&g, &g_fd) / (1.0 + support::max_abs(&g)));
                let rm = riemann(&inst.metric, &p).unwrap().into_data();
                let rm_fd = support::riemann(&inst.metric, &p, support::STEP);
                oracle = oracle.max(support::max_abs_diff(&rm, &rm_fd) / (1.0 + support::max_abs(&rm)));
            }
        }
    }
    c.at_most("sphere sectional relative error", worst, 1e-8);
    c.at_most("difference oracle gap", oracle, 1e-6);
    let secs = start.elapsed().as_secs_f64();
    c.check(format!("runtime {secs:.2}s < 10s"), secs < 10.0);
    c
}

fn weitzenboeck_pair() -> Criterion {
    let mut c = Criterion::new();
    let tol = Tolerances::default();
    let mut fields: Vec<KillingInstance> = families::round_sphere(3, 1.0).unwrap().killing;
    fields.extend(families::sasakian_sphere(1.0).unwrap().killing);
    let random = random_one_form(3, SEED);
    let (mut ff1, mut ff2, mut rand): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in &fields {
        let out = weitzenboeck_suite(&samples(k, 200), &random, &tol);
        ff1 = ff1.max(max_passing(&out.records, "killing_rough_equals_half_hodge"));
        ff2 = ff2.max(max_passing(&out.records, "bochner_formula_xi"));
        rand = rand.max(max_passing(&out.records, "bochner_formula_random_form"));
    }
    c.check(format!("{} fields", fields.len()), fields.len() == 8);
    c.at_most("rough = half Hodge", ff1, 1e-7);
    c.at_most("Bochner on xi", ff2, 1e-7);
    c.at_most("Bochner on a random 1-form", rand, 1e-7);
    c
}

fn sasakian_case() -> Criterion {
    let mut c = Criterion::new();
    let inst = families::sasakian_sphere(1.0).unwrap();
    let s = samples(inst.distinguished(), 200);
    let pts: Vec<_> = s.evaluated.iter().map(|r| r.as_ref().unwrap()).collect();
    let (mut right, mut wrong, mut ric): (f64, f64, f64) = (0.0, f64::INFINITY, 0.0);
    for k in &pts {
        let r = sasakian_residual(k, 1.0).unwrap();
        right = right.max(r.structure.max(r.second_derivative));
        let w = sasakian_residual(k, 2.0).unwrap();
        wrong = wrong.min(w.structure.max(w.second_derivative));
        let two_xi: Vec<f64> = k.xi.iter().map(|x| 2.0 * x).collect();
        ric = ric.max(relative_gap(&k.ricci_xi(), &two_xi));
    }
    c.at_most("sasakian residual k=1", right, 1e-8);
    let norms: Vec<f64> = pts.iter().map(|k| k.xi_norm).collect();
    c.at_most("|xi| stddev", FStatistics::from_values(&norms).std, 1e-10);
    c.at_most("Ric(xi) = 2 xi", ric, 1e-8);
    let class = classify(&s, &Tolerances::default());
    c.check(format!("classified {}", class.tag.as_str()), class.tag == ClassTag::FConstant);
    let f_gap = (class.f.min.abs() - 1.0).abs().max((class.f.max.abs() - 1.0).abs());
    c.at_most("||f| - 1|", f_gap, 1e-8);
    c.at_least("wrong-k control residual (k=2, min over points)", wrong, 0.1);
    c
}

fn section3_identities() -> Criterion {
    let mut c = Criterion::new();
    let tol = Tolerances::default();
    for n in [4, 5] {
        let inst = perturbed_join(n);
        let omegas = random_skew(n, 10, SEED);
        let out = section3_suite(&samples(inst.distinguished(), 100), &omegas, &tol);
        c.at_most(&format!("n={n} co"), max_passing(&out.records, "curvature_commutator_identity"), 1e-7);
        c.at_most(&format!("n={n} ru"), max_passing(&out.records, "self_commutator_identity"), 1e-8);
        c.at_most(&format!("n={n} Ricci"), max_passing(&out.records, "ricci_commutes_with_u_squared"), 1e-7);
        c.at_most(&format!("n={n} iu"), max_passing(&out.records, "second_derivative_identity"), 1e-6);
    }
    c
}

fn rank_two_case() -> Criterion {
    let mut c = Criterion::new();
    let tol = Tolerances::default();
    let inst = families::warped_mapping_torus(4, 2.0).unwrap();
    let s = samples(inst.distinguished(), 200);
    let mut killing: f64 = 0.0;
    let mut xi_dxi: f64 = 0.0;
    for r in &s.evaluated {
        let k = r.as_ref().unwrap();
        killing = killing.max(k.killing_residual());
        xi_dxi = xi_dxi.max(k.xi_wedge_u_residual().unwrap());
    }
    c.at_most("Killing", killing, 1e-9);
    let out = killing_twistor_suite(&s, &tol);
    for (label, id) in [
        ("nf", "nabla_xi_u_vanishes"),
        ("col", "xi_wedge_delta_u_vanishes"),
        ("sym", "u_xi_wedge_df_symmetric"),
        ("gy", "gradient_of_u_norm"),
        ("we", "u_df_wedge_xi_vanishes"),
    ] {
        c.at_most(label, max_passing(&out.records, id), 1e-7);
    }
    c.at_most("xi wedge d(xi)", xi_dxi, 1e-9);
    let class = out.classification.unwrap();
    c.check(format!("classified {}", class.tag.as_str()), class.tag == ClassTag::RankTwo);
    c.check(
        format!("rank 2 at {}/{} points", class.rank_two_points, class.evaluated_points),
        class.evaluated_points > 0 && class.rank_two_points == class.evaluated_points,
    );
    c.at_least("stddev(f)", class.f.std, 10.0 * class.tolerance_f);
    c
}

fn round_reconstruction() -> Criterion {
    let mut c = Criterion::new();
    for n in [3, 4] {
        let inst = families::riemannian_join(n, &Profile::sin(), FRAC_PI_2, Some(1.0)).unwrap();
        let target = (n * (n - 1)) as f64;
        let mut scal: f64 = 0.0;
        for p in inst.metric.domain().halton_points(200, SEED) {
            let geo = inst.metric.geometry(&p, 2).unwrap();
            scal = scal.max((scalar_curvature(&geo).unwrap() - target).abs());
        }
        c.at_most(&format!("n={n} |scal - n(n-1)|"), scal, 1e-6);
        let lambda = inst.profiles.as_ref().and_then(|w| w.lambda.clone()).unwrap();
        let gap = (1..200)
            .map(|i| {
                let s = FRAC_PI_2 * i as f64 / 200.0;
                (lambda.value(s).unwrap() - s.cos()).abs()
            })
            .fold(0.0, f64::max);
        c.at_most(&format!("n={n} |lambda - cos|"), gap, 1e-10);
    }
    for n in [4, 5] {
        let inst = perturbed_join(n);
        let s = samples(inst.distinguished(), 200);
        let mut tw: f64 = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in &s.evaluated {
            let k = r.as_ref().unwrap();
            tw = tw.max(k.twistor_residual().unwrap());
            for (_, ks) in coordinate_sectional_curvatures(&k.geo).unwrap() {
                lo = lo.min(ks);
                hi = hi.max(ks);
            }
        }
        c.at_most(&format!("perturbed n={n} twistor"), tw, 1e-6);
        c.check(format!("perturbed n={n} sectional spread {:.3} > 0.01", hi - lo), hi - lo > 0.01);
    }
    c
}

fn boundary_analyzer() -> Criterion {
    let mut c = Criterion::new();
    let sin = Profile::sin();
    let poly = Profile::from_spec(&ProfileSpec::Polynomial {
        coefficients: vec![0.0, 1.0, 1.0],
    })
    .unwrap();
    let cases: [(&str, &Profile, f64, f64, End, BoundaryMode, bool); 6] = [
        ("sin at origin", &sin, FRAC_PI_2, 1.0, End::Origin, BoundaryMode::Join, true),
        ("sin, c=1 at far end", &sin, FRAC_PI_2, 1.0, End::Far, BoundaryMode::Join, true),
        ("gcvf sin^2 at origin", &sin, PI, 1.0, End::Origin, BoundaryMode::Gcvf, true),
        ("gcvf sin^2 at far end", &sin, PI, 1.0, End::Far, BoundaryMode::Gcvf, true),
        ("t + t^2 at origin", &poly, 1.0, 1.0, End::Origin, BoundaryMode::Join, false),
        ("sin, c=1.1 at far end", &sin, FRAC_PI_2, 1.1, End::Far, BoundaryMode::Join, false),
    ];
    for (label, gamma, l, cc, end, mode, accept) in cases {
        let coarse = analyze(gamma, l, cc, end, mode, FIT_POINTS).unwrap();
        let fine = analyze(gamma, l, cc, end, mode, 2 * FIT_POINTS).unwrap();
        let verdict = if coarse.passed { "accepted" } else { "rejected" };
        c.check(format!("{label} {verdict}"), coarse.passed == accept);
        c.check(format!("{label} stable under refinement"), coarse.passed == fine.passed);
    }
    c
}

/// Configs that build, are uncorrupted, and whose fields are genuinely Killing.
fn shipped_instances() -> Vec<(String, FamilyInstance)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let cfg = parse_config(&std::fs::read_to_string(&p).unwrap()).unwrap();
        if cfg.corruption.is_some() {
            continue;
        }
        if let Ok(inst) = build_instance(&cfg) {
            out.push((p.file_stem().unwrap().to_string_lossy().into_owned(), inst));
        }
    }
    for n in [2, 3, 4] {
        for r in [1.0, 2.0] {
            out.push((format!("round_sphere n={n} r={r}"), families::round_sphere(n, r).unwrap()));
        }
    }
    out.push(("perturbed_join n=5".into(), perturbed_join(5)));
    out.push((
        "sine join n=3".into(),
        families::riemannian_join(3, &Profile::sin(), FRAC_PI_2, Some(1.0)).unwrap(),
    ));
    out
}

fn kostant_formula() -> Criterion {
    let mut c = Criterion::new();
    let mut worst: f64 = 0.0;
    let mut fields = 0;
    let mut parallel = 0;
    for (name, inst) in shipped_instances() {
        for k in &inst.killing {
            let s = samples(k, 100);
            let pts: Vec<_> = s.evaluated.iter().map(|r| r.as_ref().unwrap()).collect();
            if pts.iter().all(|p| p.nabla_xi.frobenius() <= 1e-12 * (1.0 + p.xi_norm)) {
                parallel += 1;
                continue;
            }
            fields += 1;
            let r = pts.iter().map(|p| p.kostant_residual()).fold(0.0, f64::max);
            if !(r <= 1e-7) {
                c.check(format!("{name} / {}: {r:.2e}", k.name), false);
            }
            worst = worst.max(r);
        }
    }
    c.at_most(&format!("{fields} non-parallel fields ({parallel} parallel skipped), worst"), worst, 1e-7);
    c
}

fn verify_binary(config: &str, out: &Path) -> (i32, Option<Vec<u8>>) {
    let status = Command::new(env!("CARGO_BIN_EXE_verify"))
        .arg(configs_dir().join(config))
        .arg("--out")
        .arg(out)
        .output()
        .expect("verify binary runs");
    let json = std::fs::read(out.join("report.json")).ok();
    (status.status.code().unwrap_or(-1), json)
}

fn determinism_and_interface() -> Criterion {
    let mut c = Criterion::new();
    let text = std::fs::read_to_string(configs_dir().join("perturbed_join.conf")).unwrap();
    let cfg = parse_config(&text).unwrap();
    c.check("library JSON byte-identical", to_json(&run(&cfg)) == to_json(&run(&cfg)));

    let dir = tempfile::tempdir().unwrap();
    let (code_a, a) = verify_binary("sasakian_s3.conf", &dir.path().join("a"));
    let (_, b) = verify_binary("sasakian_s3.conf", &dir.path().join("b"));
    c.check("binary JSON byte-identical", a.is_some() && a == b);
    c.check(format!("pass case exit {code_a}"), code_a == 0);

    let (code, _) = verify_binary("corrupted_sphere.conf", &dir.path().join("c"));
    c.check(format!("corrupted metric exit {code}"), code == 1);
    let corrupted = parse_config(&std::fs::read_to_string(configs_dir().join("corrupted_sphere.conf")).unwrap()).unwrap();
    let report = run(&corrupted);
    let killing_failed = report
        .summary
        .identities
        .iter()
        .any(|s| s.identity == "killing_equation" && s.failed > 0);
    c.check("corruption breaks the Killing equation", killing_failed);

    let (code, _) = verify_binary("bad_join.conf", &dir.path().join("d"));
    c.check(format!("construction error exit {code}"), code == 2);
    c
}

fn main() {
    let criteria: [(&str, fn() -> Criterion); 9] = [
        ("curvature engine sanity", curvature_engine),
        ("Weitzenboeck pair", weitzenboeck_pair),
        ("Sasakian case", sasakian_case),
        ("commutator identities on the perturbed join", section3_identities),
        ("rank-2 case on the warped mapping torus", rank_two_case),
        ("round reconstruction from the sine join", round_reconstruction),
        ("boundary analyzer", boundary_analyzer),
        ("Kostant formula", kostant_formula),
        ("determinism and exit codes", determinism_and_interface),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = f();
        let secs = start.elapsed().as_secs_f64();
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("criterion {}: {verdict} {name} ({secs:.1}s)", i + 1);
        for (what, ok) in &c.checks {
            println!("    [{}] {what}", if *ok { "ok" } else { "FAILED" });
        }
        if !c.passed() {
            failures += 1;
        }
    }
    if failures > 0 {
        println!("{failures} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
