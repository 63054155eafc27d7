//! Machine-checkable records of inequality checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::weights::SpaceSpec;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    Hyp1,
    Hyp2,
    Hyp3,
    Alt311,
}

/// Ordered so that `Fail < Inconclusive < Pass`; the worst of several is their minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Fail,
    Inconclusive,
    Pass,
}

impl Verdict {
    pub fn worst<I: IntoIterator<Item = Verdict>>(it: I) -> Option<Verdict> {
        it.into_iter().min()
    }

    /// Process exit code: 0 pass, 2 inconclusive, 1 fail.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Inconclusive => 2,
            Verdict::Fail => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }
}

/// What a pass covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Verified at every index of `checked_range` only.
    CheckedRange,
    /// The finite check plus an asymptotic argument covers all larger indices.
    AllIndices,
}

/// One evaluated instance of the inequality `lhs <= rhs` (or as documented).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: u64,
    pub lhs: String,
    pub rhs: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Witness {
    pub fn new(n: u64, lhs: impl Into<String>, rhs: impl Into<String>, note: &str) -> Self {
        Witness {
            n,
            lhs: lhs.into(),
            rhs: rhs.into(),
            note: note.to_string(),
        }
    }
}

/// Result of a hypothesis check.
///
/// Indices are Jacobi indices; the natural index of the underlying space is
/// `n + index_offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: u32,
    pub artifact_version: String,
    pub hypothesis: Hypothesis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<SpaceSpec>,
    pub weights: String,
    pub index_offset: i64,
    pub checked_range: [u64; 2],
    pub verdict: Verdict,
    pub scope: Scope,
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_n0: Option<u64>,
    pub witnesses: Vec<Witness>,
    #[serde(default)]
    pub details: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub precision_bits: u32,
}

impl Certificate {
    pub fn new(hypothesis: Hypothesis, weights: String, range: [u64; 2], bits: u32) -> Self {
        Certificate {
            schema_version: SCHEMA_VERSION,
            artifact_version: ARTIFACT_VERSION.to_string(),
            hypothesis,
            spec: None,
            weights,
            index_offset: 0,
            checked_range: range,
            verdict: Verdict::Inconclusive,
            scope: Scope::CheckedRange,
            exact: false,
            margin: None,
            threshold_n0: None,
            witnesses: Vec::new(),
            details: BTreeMap::new(),
            notes: Vec::new(),
            precision_bits: bits,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        self.details.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable"),
        );
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}
