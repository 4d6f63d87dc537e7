//! Report serialization: JSON, per-identity CSV summary, and profile CSV.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use twistorlab_core::curvature::sectional_curvature;
use twistorlab_core::families::FamilyInstance;

use crate::config::Format;
use crate::runner::VerificationReport;

/// Rows of the profile export.
pub const PROFILE_ROWS: usize = 101;

/// Floats as 17 significant digits in scientific notation (exact round
/// trip); everything else as pretty-printed JSON.
struct RoundTripFormatter(PrettyFormatter<'static>);

impl Formatter for RoundTripFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// `{:.16e}` for finite values.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn csv_number(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => String::new(),
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, RoundTripFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report serializes");
    out.push(b'\n');
    String::from_utf8(out).expect("utf-8 json")
}

/// One row per `(suite, identity)` with the aggregated residuals.
pub fn csv_summary(report: &VerificationReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "suite",
        "identity",
        "count",
        "passed",
        "failed",
        "skipped",
        "not_applicable",
        "max_residual",
        "mean_residual",
        "tolerance",
    ])
    .unwrap();
    for s in &report.summary.identities {
        w.write_record([
            s.suite.name().to_string(),
            s.identity.clone(),
            s.count.to_string(),
            s.passed.to_string(),
            s.failed.to_string(),
            s.skipped.to_string(),
            s.not_applicable.to_string(),
            csv_number(s.max_residual),
            csv_number(s.mean_residual),
            csv_number(Some(s.tolerance)),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// One row of the profile export.
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    pub s: f64,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub xi_norm: Option<f64>,
    pub f: Option<f64>,
    pub k_sample: Option<f64>,
}

/// Sweep the profile axis through the chart centre: profile values, `|ξ|`,
/// `f`, and the sectional curvature of the plane spanned by the profile axis
/// and the last other axis.
pub fn profile_rows(inst: &FamilyInstance) -> Vec<ProfileRow> {
    let dom = inst.metric.domain();
    let axis = inst.profile_axis;
    let (lo, hi) = dom.sampling_interval(axis);
    let other = if axis == dom.dim() - 1 { 0 } else { dom.dim() - 1 };
    let centre = dom.center();
    let n = dom.dim();
    (0..PROFILE_ROWS)
        .map(|i| {
            let s = lo + (hi - lo) * i as f64 / (PROFILE_ROWS - 1) as f64;
            let mut p = centre.clone();
            p[axis] = s;
            let (gamma, lambda) = match &inst.profiles {
                Some(pr) => (
                    pr.gamma.value(s).ok(),
                    pr.lambda.as_ref().and_then(|l| l.value(s).ok()),
                ),
                None => (None, None),
            };
            let kp = inst.distinguished().at(&p).ok();
            let mut ex = vec![0.0; n];
            ex[axis] = 1.0;
            let mut ey = vec![0.0; n];
            ey[other] = 1.0;
            let k_sample = kp.as_ref().and_then(|k| sectional_curvature(&k.geo, &ex, &ey).ok());
            ProfileRow {
                s,
                gamma,
                lambda,
                xi_norm: kp.as_ref().map(|k| k.xi_norm),
                f: kp.as_ref().map(|k| k.f_delta),
                k_sample,
            }
        })
        .collect()
}

pub fn csv_profiles(rows: &[ProfileRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["s", "gamma", "lambda", "xi_norm", "f", "K_sample"]).unwrap();
    for r in rows {
        w.write_record([
            csv_number(Some(r.s)),
            csv_number(r.gamma),
            csv_number(r.lambda),
            csv_number(r.xi_norm),
            csv_number(r.f),
            csv_number(r.k_sample),
        ])
        .unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}

/// Write one format into `dir`, returning the file path.
pub fn emit_report(report: &VerificationReport, format: Format, dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format.file_name());
    let body = match format {
        Format::Json => to_json(report),
        Format::CsvSummary => csv_summary(report),
        Format::CsvProfiles => csv_profiles(report.profiles.as_deref().unwrap_or(&[])),
    };
    fs::write(&path, body)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_seventeen_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 1e10 + 0.5, f64::MIN_POSITIVE] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(f64::NAN), "null");
    }

    #[test]
    fn json_uses_round_trip_floats_and_null() {
        let s = to_json(&vec![0.1, f64::INFINITY]);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        let v: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(v, vec![Some(0.1), None]);
    }
}
