//! Declarative run configuration: `key = value` lines, optional `[section]`
//! headers that prefix the keys below them, `#` comments.
//!
//! ```text
//! [family]
//! kind = riemannian_join
//! n = 4
//! l = pi/2
//! gamma.kind = perturbed_sin
//! gamma.epsilon = 0.1
//!
//! [run]
//! samples = 100
//! suites = section3, section4
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;
use twistorlab_core::{FamilySpec, ProfileSpec, Tolerances};

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_RANDOM_FORMS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{field}: {message}")]
    Constraint { field: String, message: String },
}

fn constraint(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Identity suites a run can select.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    CurvatureSanity,
    Killing,
    Twistor,
    Sasakian,
    Section3,
    Section4,
    Boundary,
    Weitzenboeck,
    Gcvf,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::CurvatureSanity,
        Suite::Killing,
        Suite::Twistor,
        Suite::Sasakian,
        Suite::Section3,
        Suite::Section4,
        Suite::Boundary,
        Suite::Weitzenboeck,
        Suite::Gcvf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CurvatureSanity => "curvature_sanity",
            Suite::Killing => "killing",
            Suite::Twistor => "twistor",
            Suite::Sasakian => "sasakian",
            Suite::Section3 => "section3",
            Suite::Section4 => "section4",
            Suite::Boundary => "boundary",
            Suite::Weitzenboeck => "weitzenboeck",
            Suite::Gcvf => "gcvf",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|x| x.name() == s)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Output formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    CsvSummary,
    CsvProfiles,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "json" => Some(Format::Json),
            "csv-summary" => Some(Format::CsvSummary),
            "csv-profiles" => Some(Format::CsvProfiles),
            _ => None,
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Format::Json => "report.json",
            Format::CsvSummary => "summary.csv",
            Format::CsvProfiles => "profiles.csv",
        }
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub family: FamilySpec,
    /// Conformal factor `1 + ε sin θ` applied to the metric.
    pub corruption: Option<f64>,
    pub suites: Vec<Suite>,
    pub samples: usize,
    pub seed: u64,
    /// Random skew forms for the commutator identity.
    pub random_forms: usize,
    /// Resolved tolerances, after any scale factor.
    pub tolerances: Tolerances,
    pub tol_scale: f64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    #[serde(skip)]
    pub formats: Vec<Format>,
}

impl RunConfig {
    /// Multiply every tolerance by `scale`.
    pub fn apply_tol_scale(&mut self, scale: f64) -> Result<(), ConfigError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(constraint("tol_scale", format!("must be a positive number, got {scale}")));
        }
        self.tolerances = self.tolerances.scaled(scale / self.tol_scale);
        self.tol_scale = scale;
        Ok(())
    }

    pub fn set_samples(&mut self, samples: usize) -> Result<(), ConfigError> {
        if samples == 0 {
            return Err(constraint("run.samples", "must be at least 1"));
        }
        self.samples = samples;
        Ok(())
    }
}

struct Entry {
    line: usize,
    value: String,
}

/// Raw key table with consumption tracking, so leftovers can be rejected.
struct Table {
    entries: BTreeMap<String, Entry>,
}

impl Table {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn string(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|e| e.value)
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => parse_number(&e.value)
                .map(Some)
                .ok_or_else(|| constraint(key, format!("line {}: '{}' is not a number", e.line, e.value))),
        }
    }

    fn required_number(&mut self, key: &str) -> Result<f64, ConfigError> {
        self.number(key)?.ok_or_else(|| constraint(key, "required"))
    }

    fn integer(&mut self, key: &str) -> Result<Option<u64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<u64>()
                .map(Some)
                .map_err(|_| constraint(key, format!("line {}: '{}' is not a non-negative integer", e.line, e.value))),
        }
    }

    fn dimension(&mut self, key: &str) -> Result<usize, ConfigError> {
        let v = self.integer(key)?.ok_or_else(|| constraint(key, "required"))?;
        Ok(v as usize)
    }

    fn list(&mut self, key: &str) -> Option<(usize, Vec<String>)> {
        self.take(key).map(|e| {
            let items = e
                .value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            (e.line, items)
        })
    }

    fn numbers(&mut self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let (line, items) = self.list(key).ok_or_else(|| constraint(key, "required"))?;
        items
            .iter()
            .map(|s| parse_number(s).ok_or_else(|| constraint(key, format!("line {line}: '{s}' is not a number"))))
            .collect()
    }
}

/// Number literal; also accepts `pi`, `k*pi` and `pi/k` forms.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let pi = std::f64::consts::PI;
    if s == "pi" {
        return Some(pi);
    }
    if let Some(d) = s.strip_prefix("pi/") {
        return d.trim().parse::<f64>().ok().map(|d| pi / d);
    }
    if let Some(m) = s.strip_suffix("*pi") {
        return m.trim().parse::<f64>().ok().map(|m| m * pi);
    }
    None
}

fn lex(text: &str) -> Result<Table, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut section = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("unterminated section header '{content}'"),
            })?;
            let name = name.trim();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("invalid section name '{name}'"),
                });
            }
            section = format!("{name}.");
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return Err(ConfigError::Syntax {
                line,
                message: format!("invalid key '{key}'"),
            });
        }
        let value = value.trim().trim_matches('"').to_string();
        let full = format!("{section}{key}");
        if entries.contains_key(&full) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key '{full}'"),
            });
        }
        entries.insert(full, Entry { line, value });
    }
    Ok(Table { entries })
}

fn profile(t: &mut Table, prefix: &str) -> Result<ProfileSpec, ConfigError> {
    let kind_key = format!("{prefix}.kind");
    let kind = t.string(&kind_key).ok_or_else(|| constraint(&kind_key, "required"))?;
    Ok(match kind.as_str() {
        "sin" => ProfileSpec::Sin,
        "cos" => ProfileSpec::Cos,
        "polynomial" => ProfileSpec::Polynomial {
            coefficients: t.numbers(&format!("{prefix}.coefficients"))?,
        },
        "perturbed_sin" => ProfileSpec::PerturbedSin {
            epsilon: t.required_number(&format!("{prefix}.epsilon"))?,
        },
        "tabulated" => ProfileSpec::Tabulated {
            s: t.numbers(&format!("{prefix}.s"))?,
            values: t.numbers(&format!("{prefix}.values"))?,
        },
        other => {
            return Err(constraint(
                &kind_key,
                format!("unknown profile '{other}' (expected sin, cos, polynomial, perturbed_sin, tabulated)"),
            ))
        }
    })
}

fn family(t: &mut Table) -> Result<FamilySpec, ConfigError> {
    let kind = t.string("family.kind").ok_or_else(|| constraint("family.kind", "required"))?;
    Ok(match kind.as_str() {
        "round_sphere" => FamilySpec::RoundSphere {
            n: t.dimension("family.n")?,
            radius: t.number("family.radius")?.unwrap_or(1.0),
        },
        "sasakian_sphere" => FamilySpec::SasakianSphere {
            k: t.number("family.k")?.unwrap_or(1.0),
        },
        "warped_mapping_torus" => FamilySpec::WarpedMappingTorus {
            n: t.dimension("family.n")?,
            a: t.number("family.a")?.unwrap_or(2.0),
        },
        "riemannian_join" => FamilySpec::RiemannianJoin {
            n: t.dimension("family.n")?,
            gamma: profile(t, "family.gamma")?,
            l: t.required_number("family.l")?,
            c: t.number("family.c")?,
        },
        "gcvf_factor" => FamilySpec::GcvfFactor {
            m: t.dimension("family.m")?,
            gamma: profile(t, "family.gamma")?,
            l: t.required_number("family.l")?,
            c: t.number("family.c")?.unwrap_or(1.0),
        },
        "flat" => FamilySpec::Flat {
            n: t.dimension("family.n")?,
        },
        other => {
            return Err(constraint(
                "family.kind",
                format!(
                    "unknown family '{other}' (expected round_sphere, sasakian_sphere, warped_mapping_torus, \
                     riemannian_join, gcvf_factor, flat)"
                ),
            ))
        }
    })
}

/// Parse and resolve a config; every key must be recognized.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut t = lex(text)?;
    let family = family(&mut t)?;
    let corruption = t.number("family.corruption")?;

    let samples = t.integer("run.samples")?.unwrap_or(DEFAULT_SAMPLES as u64) as usize;
    if samples == 0 {
        return Err(constraint("run.samples", "must be at least 1"));
    }
    let seed = t.integer("run.seed")?.unwrap_or(DEFAULT_SEED);
    let random_forms = t.integer("run.random_forms")?.unwrap_or(DEFAULT_RANDOM_FORMS as u64) as usize;
    let mut suites: Vec<Suite> = match t.list("run.suites") {
        None => Suite::ALL.to_vec(),
        Some((line, items)) => {
            let mut out = Vec::new();
            for s in items {
                if s == "all" {
                    out.extend(Suite::ALL);
                    continue;
                }
                if s == "none" {
                    continue;
                }
                out.push(Suite::parse(&s).ok_or_else(|| {
                    constraint("run.suites", format!("line {line}: unknown suite '{s}'"))
                })?);
            }
            out
        }
    };
    if matches!(family, FamilySpec::RiemannianJoin { .. }) && !suites.is_empty() {
        suites.push(Suite::Boundary);
    }
    suites.sort();
    suites.dedup();

    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        order1: t.number("tol.order1")?.unwrap_or(defaults.order1),
        order2: t.number("tol.order2")?.unwrap_or(defaults.order2),
        order3: t.number("tol.order3")?.unwrap_or(defaults.order3),
    };
    for (name, v) in [("tol.order1", tolerances.order1), ("tol.order2", tolerances.order2), ("tol.order3", tolerances.order3)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(constraint(name, format!("must be positive, got {v}")));
        }
    }
    let out_dir = t.string("output.dir").map(PathBuf::from);
    let formats = match t.list("output.formats") {
        None => vec![Format::Json],
        Some((line, items)) => items
            .iter()
            .map(|s| Format::parse(s).ok_or_else(|| constraint("output.formats", format!("line {line}: unknown format '{s}'"))))
            .collect::<Result<_, _>>()?,
    };

    if let Some((key, e)) = t.entries.iter().next() {
        return Err(ConfigError::Syntax {
            line: e.line,
            message: format!("unknown key '{key}'"),
        });
    }
    Ok(RunConfig {
        family,
        corruption,
        suites,
        samples,
        seed,
        random_forms,
        tolerances,
        tol_scale: 1.0,
        out_dir,
        formats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("family.kind = round_sphere\nfamily.n = 3\n").unwrap();
        assert_eq!(c.samples, DEFAULT_SAMPLES);
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.suites, Suite::ALL.to_vec());
        assert_eq!(c.family, FamilySpec::RoundSphere { n: 3, radius: 1.0 });
    }

    #[test]
    fn join_enables_boundary_suite() {
        let c = parse_config(
            "[family]\nkind = riemannian_join\nn = 4\nl = pi/2\ngamma.kind = perturbed_sin\ngamma.epsilon = 0.1\n\
             [run]\nsuites = killing\n",
        )
        .unwrap();
        assert_eq!(c.suites, vec![Suite::Killing, Suite::Boundary]);
        match c.family {
            FamilySpec::RiemannianJoin { l, gamma, c, .. } => {
                assert_eq!(l, std::f64::consts::FRAC_PI_2);
                assert_eq!(gamma, ProfileSpec::PerturbedSin { epsilon: 0.1 });
                assert_eq!(c, None);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn zero_samples_names_the_field() {
        let e = parse_config("family.kind = flat\nfamily.n = 2\nrun.samples = 0\n").unwrap_err();
        assert!(e.to_string().contains("samples"), "{e}");
    }

    #[test]
    fn unknown_key_reports_its_line() {
        let e = parse_config("family.kind = flat\nfamily.n = 2\n\nfamily.color = red\n").unwrap_err();
        assert_eq!(
            e,
            ConfigError::Syntax {
                line: 4,
                message: "unknown key 'family.color'".into()
            }
        );
    }

    #[test]
    fn malformed_line_is_a_syntax_error() {
        let e = parse_config("family.kind = flat\nthis is not a pair\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 2, .. }));
        let e = parse_config("[run\n").unwrap_err();
        assert!(matches!(e, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn empty_suite_selection_is_allowed() {
        let c = parse_config("family.kind = flat\nfamily.n = 2\nrun.suites = none\n").unwrap();
        assert!(c.suites.is_empty());
    }

    #[test]
    fn numbers_with_pi() {
        assert_eq!(parse_number("pi/2"), Some(std::f64::consts::FRAC_PI_2));
        assert_eq!(parse_number("2*pi"), Some(2.0 * std::f64::consts::PI));
        assert_eq!(parse_number("1e-3"), Some(1e-3));
        assert_eq!(parse_number("pie"), None);
    }
}
