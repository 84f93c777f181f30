// SPDX-License-Identifier: Apache-2.0
use serde::{Deserialize, Serialize};

use crate::rng;
use crate::Mode;

/// A measured quantity with its provenance: exact values have no confidence
/// interval; Monte-Carlo values carry a 99% Hoeffding half-width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub quantity: String,
    pub mode: String,
    pub value: f64,
    pub ci_halfwidth: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

impl Measurement {
    pub fn exact(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            quantity: quantity.into(),
            mode: Mode::Exact.name().into(),
            value,
            ci_halfwidth: None,
            seed: None,
            trials: None,
        }
    }

    /// Frequency estimate in `[0, 1]` from `trials` samples.
    pub fn frequency(quantity: impl Into<String>, value: f64, trials: u64, seed: u64) -> Self {
        Self {
            quantity: quantity.into(),
            mode: Mode::MonteCarlo { trials, seed }.name().into(),
            value,
            ci_halfwidth: Some(rng::halfwidth99(trials)),
            seed: Some(seed),
            trials: Some(trials),
        }
    }

    /// Builds the record appropriate for `mode`.
    pub fn in_mode(quantity: impl Into<String>, value: f64, mode: Mode) -> Self {
        match mode {
            Mode::Exact => Self::exact(quantity, value),
            Mode::MonteCarlo { trials, seed } => Self::frequency(quantity, value, trials, seed),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measurement serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_fields() {
        let m = Measurement::frequency("collision", 0.5, 100, 9);
        let v: serde_json::Value = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(v["quantity"], "collision");
        assert_eq!(v["mode"], "monte_carlo");
        assert_eq!(v["seed"], 9);
        assert_eq!(v["trials"], 100);
        assert!(v["ci_halfwidth"].as_f64().unwrap() > 0.0);
        let e = Measurement::exact("tv", 0.25);
        assert!(e.to_json().contains("\"ci_halfwidth\":null"));
    }
}
