// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Mode, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The hypothesis of the checked statement does not hold for this instance.
    PreconditionViolated,
    /// A measurement with no asserted bound.
    Info,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::PreconditionViolated => "precondition_violated",
            Status::Info => "info",
        }
    }

    pub fn is_failure(&self) -> bool {
        *self == Status::Fail
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How `measured` is compared with `bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    None,
}

impl Relation {
    pub fn holds(&self, measured: f64, bound: f64) -> bool {
        match self {
            Relation::AtMost => measured <= bound + TOLERANCE,
            Relation::AtLeast => measured >= bound - TOLERANCE,
            Relation::None => true,
        }
    }
}

/// Outcome of one check on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub lemma_id: String,
    pub instance_id: String,
    pub bound: Option<f64>,
    pub measured: f64,
    pub relation: Relation,
    pub status: Status,
    pub mode: String,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub aux: BTreeMap<String, serde_json::Value>,
}

pub const CSV_HEADER: [&str; 7] = [
    "lemma_id",
    "instance_id",
    "bound",
    "measured",
    "status",
    "trials",
    "seed",
];

impl ExperimentReport {
    /// Exact-mode report whose status is `relation.holds(measured, bound)`.
    pub fn check(
        lemma_id: impl Into<String>,
        instance_id: impl Into<String>,
        measured: f64,
        relation: Relation,
        bound: f64,
    ) -> Self {
        let status = if relation.holds(measured, bound) {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            lemma_id: lemma_id.into(),
            instance_id: instance_id.into(),
            bound: Some(bound),
            measured,
            relation,
            status,
            mode: Mode::Exact.name().into(),
            trials: None,
            seed: None,
            aux: BTreeMap::new(),
        }
    }

    pub fn info(lemma_id: impl Into<String>, instance_id: impl Into<String>, measured: f64) -> Self {
        Self {
            bound: None,
            relation: Relation::None,
            status: Status::Info,
            ..Self::check(lemma_id, instance_id, measured, Relation::None, f64::NAN)
        }
    }

    pub fn precondition(
        lemma_id: impl Into<String>,
        instance_id: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Self {
            bound: None,
            measured: f64::NAN,
            relation: Relation::None,
            status: Status::PreconditionViolated,
            ..Self::check(lemma_id, instance_id, f64::NAN, Relation::None, f64::NAN)
        }
        .with_aux("reason", reason.into())
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode.name().into();
        self.trials = mode.trials();
        self.seed = mode.seed();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.trials = Some(trials);
        self
    }

    pub fn with_aux(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.aux.insert(key.to_string(), v);
        self
    }

    /// Downgrades the status to fail unless `ok`.
    pub fn require(mut self, ok: bool, what: &str) -> Self {
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
            self.aux.insert("failed".into(), what.into());
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Ledger row, matching [`CSV_HEADER`].
    pub fn csv_fields(&self) -> [String; 7] {
        [
            self.lemma_id.clone(),
            self.instance_id.clone(),
            self.bound.map(fmt_real).unwrap_or_default(),
            fmt_real(self.measured),
            self.status.to_string(),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let bound = match (self.relation, self.bound) {
            (Relation::AtMost, Some(b)) => format!(" <= {}", fmt_real(b)),
            (Relation::AtLeast, Some(b)) => format!(" >= {}", fmt_real(b)),
            _ => String::new(),
        };
        format!(
            "{} {} [{}] measured {}{}",
            self.lemma_id,
            self.instance_id,
            self.status,
            fmt_real(self.measured),
            bound
        )
    }
}

/// Shortest round-trip decimal; empty for NaN.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses() {
        let r = ExperimentReport::check("x", "i", 0.5, Relation::AtMost, 0.5);
        assert!(r.passed());
        let r = ExperimentReport::check("x", "i", 0.6, Relation::AtMost, 0.5);
        assert_eq!(r.status, Status::Fail);
        let r = ExperimentReport::check("x", "i", 0.4, Relation::AtLeast, 0.5);
        assert_eq!(r.status, Status::Fail);
        let r = ExperimentReport::precondition("x", "i", "q too large");
        assert_eq!(r.status, Status::PreconditionViolated);
        assert_eq!(r.csv_fields()[3], "");
    }

    #[test]
    fn csv_row() {
        let r = ExperimentReport::check("at-least-two", "q", 0.0016, Relation::AtLeast, -0.0048)
            .with_mode(Mode::MonteCarlo {
                trials: 10,
                seed: 4,
            });
        assert_eq!(
            r.csv_fields(),
            ["at-least-two", "q", "-0.0048", "0.0016", "pass", "10", "4"].map(String::from)
        );
    }
}
