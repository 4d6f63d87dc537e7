//! Build the family, sample it and run the selected suites.

use serde::Serialize;
use twistorlab_core::families::{analyze, FamilyInstance, BOUNDARY_THRESHOLD, FIT_POINTS};
use twistorlab_core::twistor::{
    classify, curvature_sanity_suite, gcvf_suite, killing_suite, killing_twistor_suite, random_one_form,
    random_skew, sasakian_case_checks, sasakian_suite, section3_suite, twistor_suite, weitzenboeck_suite,
    Classification, FStatistics, KillingSamples, SuiteOutcome,
};
use twistorlab_core::{IdentityRecord, Status};

use crate::config::{RunConfig, Suite};

pub const VERSION: &str = concat!("twistorlab ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub records: Vec<IdentityRecord>,
}

/// Aggregates for one `(suite, identity)` pair.
#[derive(Clone, Debug, Serialize)]
pub struct IdentitySummary {
    pub suite: Suite,
    pub identity: String,
    pub count: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub not_applicable: usize,
    /// Over records carrying a residual; `None` when there are none.
    pub max_residual: Option<f64>,
    pub mean_residual: Option<f64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub not_applicable: usize,
    pub identities: Vec<IdentitySummary>,
    pub classification: Option<String>,
    pub f: Option<FStatistics>,
    /// Sasakian constant of the instance, when it has one.
    pub k: Option<f64>,
    /// `c` of a join or warped factor, or `−f` when `f` is constant.
    pub c: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub config: RunConfig,
    pub construction_error: Option<String>,
    pub suites: Vec<SuiteReport>,
    pub classification: Option<Classification>,
    pub boundary: Vec<twistorlab_core::families::BoundaryReport>,
    /// Profile sweep, present when the profile export is requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles: Option<Vec<crate::report::ProfileRow>>,
    pub summary: Summary,
}

impl VerificationReport {
    /// 0 when nothing failed, 1 on a failing record, 2 when construction failed.
    pub fn exit_code(&self) -> i32 {
        if self.construction_error.is_some() {
            2
        } else if self.summary.failed > 0 {
            1
        } else {
            0
        }
    }
}

/// Build the instance described by the config (with any corruption applied).
pub fn build_instance(config: &RunConfig) -> twistorlab_core::Result<FamilyInstance> {
    let inst = config.family.build()?;
    match config.corruption {
        Some(eps) => inst.corrupted(eps),
        None => Ok(inst),
    }
}

/// Run every selected suite. Deterministic for a given config.
pub fn run(config: &RunConfig) -> VerificationReport {
    let mut report = VerificationReport {
        version: VERSION.to_string(),
        config: config.clone(),
        construction_error: None,
        suites: Vec::new(),
        classification: None,
        boundary: Vec::new(),
        profiles: None,
        summary: Summary::default(),
    };
    let inst = match build_instance(config) {
        Ok(i) => i,
        Err(e) => {
            report.construction_error = Some(e.to_string());
            return report;
        }
    };
    report.boundary = inst.boundary.clone();
    let tol = config.tolerances;
    let points = inst.metric.domain().halton_points(config.samples, config.seed);
    let needs_samples = config.suites.iter().any(|s| {
        matches!(
            s,
            Suite::Killing | Suite::Twistor | Suite::Sasakian | Suite::Section3 | Suite::Section4 | Suite::Weitzenboeck
        )
    });
    let samples = needs_samples.then(|| KillingSamples::evaluate(inst.distinguished(), &points));
    let mut classification = None;

    for &suite in &config.suites {
        let records = match suite {
            Suite::CurvatureSanity => {
                curvature_sanity_suite(&inst.metric, &points, inst.expected_sectional, &tol).records
            }
            Suite::Killing => killing_suite(samples.as_ref().unwrap(), &tol).records,
            Suite::Twistor => twistor_suite(samples.as_ref().unwrap(), tol.order2).records,
            Suite::Section3 => {
                let omegas = random_skew(inst.dim(), config.random_forms, config.seed);
                section3_suite(samples.as_ref().unwrap(), &omegas, &tol).records
            }
            Suite::Section4 => {
                let SuiteOutcome {
                    records,
                    classification: c,
                } = killing_twistor_suite(samples.as_ref().unwrap(), &tol);
                classification = c;
                records
            }
            Suite::Sasakian => {
                let s = samples.as_ref().unwrap();
                let class = classification.clone().unwrap_or_else(|| classify(s, &tol));
                let mut records = Vec::new();
                if let Some(k) = inst.sasakian_k {
                    records.extend(sasakian_suite(s, k, &tol).records);
                }
                records.extend(sasakian_case_checks(s, &class, &tol).records);
                records
            }
            Suite::Weitzenboeck => {
                let form = random_one_form(inst.dim(), config.seed);
                let mut records = weitzenboeck_suite(samples.as_ref().unwrap(), &form, &tol).records;
                for field in inst.killing.iter().skip(1) {
                    let s = KillingSamples::evaluate(field, &points);
                    records.extend(weitzenboeck_suite(&s, &form, &tol).records.into_iter().map(|mut r| {
                        r.identity = format!("{}[{}]", r.identity, field.name);
                        r
                    }));
                }
                records
            }
            Suite::Boundary => boundary_records(&inst),
            Suite::Gcvf => match &inst.gcvf {
                Some(g) => {
                    let pts = g.metric.domain().halton_points(config.samples, config.seed);
                    gcvf_suite(&g.metric, &g.field, &*g.alpha, &pts, &tol).records
                }
                None => vec![IdentityRecord::not_applicable(
                    "gcvf",
                    None,
                    &[],
                    tol.order2,
                    "instance carries no gradient conformal field",
                )],
            },
        };
        report.suites.push(SuiteReport { suite, records });
    }

    if classification.is_none() && config.suites.contains(&Suite::Sasakian) {
        classification = samples.as_ref().map(|s| classify(s, &tol));
    }
    report.summary = summarize(&report.suites);
    report.summary.k = inst.sasakian_k;
    if let Some(c) = &classification {
        report.summary.classification = Some(c.tag.as_str().to_string());
        report.summary.f = Some(c.f);
        if c.tag == twistorlab_core::twistor::ClassTag::FConstant {
            report.summary.c = Some(-c.f.mean);
        }
    }
    if let Some(p) = &inst.profiles {
        report.summary.c = Some(p.c);
    }
    report.classification = classification;
    if config.formats.contains(&crate::config::Format::CsvProfiles) {
        report.profiles = Some(crate::report::profile_rows(&inst));
    }
    report
}

fn boundary_records(inst: &FamilyInstance) -> Vec<IdentityRecord> {
    let Some(p) = &inst.profiles else {
        return vec![IdentityRecord::not_applicable(
            "boundary_condition",
            None,
            &[],
            BOUNDARY_THRESHOLD,
            "instance has no warping profile",
        )];
    };
    let mut out = Vec::new();
    for b in &inst.boundary {
        let end = b.end.label().replace(' ', "_");
        let mut r = IdentityRecord::evaluated(
            &format!("boundary_condition_{end}"),
            None,
            &[],
            b.max_forbidden,
            BOUNDARY_THRESHOLD,
        )
        .with_aux("condition_number", b.condition_number)
        .with_aux("window", b.window);
        if b.approximate {
            r = r.with_note("approximate: profile is tabulated");
        }
        out.push(r);
        let refined = analyze(&p.gamma, p.l, p.c, b.end, b.mode, 2 * FIT_POINTS);
        out.push(match refined {
            Ok(f) => IdentityRecord::evaluated(
                &format!("boundary_refinement_stable_{end}"),
                None,
                &[],
                if f.passed == b.passed { 0.0 } else { 1.0 },
                0.0,
            )
            .with_aux("refined_max_forbidden", f.max_forbidden),
            Err(e) => IdentityRecord::failed(&format!("boundary_refinement_stable_{end}"), None, &[], 0.0, e.to_string()),
        });
    }
    out
}

/// Counts and per-identity aggregates, in order of first appearance.
pub fn summarize(suites: &[SuiteReport]) -> Summary {
    let mut s = Summary::default();
    for sr in suites {
        let mut idents: Vec<IdentitySummary> = Vec::new();
        for r in &sr.records {
            s.total += 1;
            let pos = match idents.iter().position(|x| x.identity == r.identity) {
                Some(p) => p,
                None => {
                    idents.push(IdentitySummary {
                        suite: sr.suite,
                        identity: r.identity.clone(),
                        count: 0,
                        passed: 0,
                        failed: 0,
                        skipped: 0,
                        not_applicable: 0,
                        max_residual: None,
                        mean_residual: None,
                        tolerance: r.tolerance,
                    });
                    idents.len() - 1
                }
            };
            let e = &mut idents[pos];
            e.count += 1;
            match r.status {
                Status::Pass => {
                    s.passed += 1;
                    e.passed += 1
                }
                Status::Fail => {
                    s.failed += 1;
                    e.failed += 1
                }
                Status::Skipped => {
                    s.skipped += 1;
                    e.skipped += 1
                }
                Status::NotApplicable => {
                    s.not_applicable += 1;
                    e.not_applicable += 1
                }
            }
        }
        for e in &mut idents {
            let vals: Vec<f64> = sr
                .records
                .iter()
                .filter(|r| r.identity == e.identity)
                .filter_map(|r| r.residual)
                .collect();
            if !vals.is_empty() {
                e.max_residual = Some(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max));
                e.mean_residual = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            }
        }
        s.identities.extend(idents);
    }
    s
}
