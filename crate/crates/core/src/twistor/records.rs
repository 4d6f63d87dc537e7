use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Tolerance ladder: first-order identities, second-order / curvature
/// identities, and third-order or quadrature-dependent ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub order1: f64,
    pub order2: f64,
    pub order3: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            order1: 1e-9,
            order2: 1e-7,
            order3: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            order1: self.order1 * factor,
            order2: self.order2 * factor,
            order3: self.order3 * factor,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    NotApplicable,
}

/// One identity evaluated at one sample point (or globally, when
/// `point_index` is `None`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub identity: String,
    pub point_index: Option<usize>,
    pub point: Vec<f64>,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aux: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityRecord {
    /// Pass iff `residual ≤ tolerance`; a NaN residual fails.
    pub fn evaluated(identity: &str, point_index: Option<usize>, point: &[f64], residual: f64, tolerance: f64) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self {
            identity: identity.to_string(),
            point_index,
            point: point.to_vec(),
            residual: Some(residual.abs()),
            tolerance,
            status,
            aux: BTreeMap::new(),
            note: None,
        }
    }

    pub fn skipped(identity: &str, point_index: Option<usize>, point: &[f64], tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            identity: identity.to_string(),
            point_index,
            point: point.to_vec(),
            residual: None,
            tolerance,
            status: Status::Skipped,
            aux: BTreeMap::new(),
            note: Some(reason.into()),
        }
    }

    pub fn not_applicable(identity: &str, point_index: Option<usize>, point: &[f64], tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            status: Status::NotApplicable,
            ..Self::skipped(identity, point_index, point, tolerance, reason)
        }
    }

    /// Hard failure without a residual (e.g. an evaluation error).
    pub fn failed(identity: &str, point_index: Option<usize>, point: &[f64], tolerance: f64, reason: impl Into<String>) -> Self {
        Self {
            status: Status::Fail,
            ..Self::skipped(identity, point_index, point, tolerance, reason)
        }
    }

    pub fn with_aux(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_iff_below_tolerance() {
        assert_eq!(IdentityRecord::evaluated("a", Some(0), &[], 1e-10, 1e-9).status, Status::Pass);
        assert_eq!(IdentityRecord::evaluated("a", Some(0), &[], 1e-9, 1e-9).status, Status::Pass);
        assert_eq!(IdentityRecord::evaluated("a", Some(0), &[], 2e-9, 1e-9).status, Status::Fail);
        assert_eq!(IdentityRecord::evaluated("a", Some(0), &[], f64::NAN, 1e-9).status, Status::Fail);
    }
}
