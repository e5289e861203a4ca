use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::VocabularyError;

/// How the failure budget of [`super::generate_derivation`] is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureMode {
    /// Every failed step counts for the whole derivation.
    Cumulative,
    /// The counter resets after each successful step.
    Consecutive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub p_history: f64,
    pub p_arity_0: f64,
    pub p_renaming: f64,
    pub p_arity_1: f64,
    pub p_evaluate: f64,
    pub p_arity_2: f64,
    pub p_int_or_diff: f64,
    pub p_subs: f64,
    /// Odds of differentiation against integration inside the calculus
    /// branch.
    pub p_diff_vs_int: f64,
    /// Weight of the algebra branch against `p_int_or_diff`.
    pub p_algebra: f64,
    /// Weight of each arithmetic op inside the algebra branch.
    pub p_arith: f64,
    /// Weight of each extension op inside its branch.
    pub p_extension: f64,
    /// Weight of defining a new premise against `p_renaming`.
    pub p_define: f64,
    /// Probability that a step introduces a premise regardless of the
    /// arity weights.
    pub p_premise_injection: f64,
    /// Enables the six extension ops.
    pub extensions: bool,
    pub length_mean: f64,
    pub length_sigma: f64,
    pub length_min: usize,
    pub length_max: usize,
    pub max_latex_chars: usize,
    pub max_prompt_tokens: usize,
    pub retry_cap: usize,
    pub failure_mode: FailureMode,
    /// Generation attempts per dataset record before it is reported missing.
    pub max_attempts_per_record: usize,
    pub vocabulary: Option<PathBuf>,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            p_history: 10.0,
            p_arity_0: 5.0,
            p_renaming: 1.0,
            p_arity_1: 50.0,
            p_evaluate: 50.0,
            p_arity_2: 100.0,
            p_int_or_diff: 1.0,
            p_subs: 5.0,
            p_diff_vs_int: 2.0,
            p_algebra: 1.0,
            p_arith: 1.0,
            p_extension: 0.25,
            p_define: 1.0,
            p_premise_injection: 0.02,
            extensions: true,
            length_mean: 7.0,
            length_sigma: 3.0,
            length_min: 4,
            length_max: 10,
            max_latex_chars: 350,
            max_prompt_tokens: 512,
            retry_cap: 100,
            failure_mode: FailureMode::Cumulative,
            max_attempts_per_record: 200,
            vocabulary: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("record count must be at least 1")]
    EmptyRequest,
    #[error("vocabulary exhausted")]
    VocabularyExhausted,
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let weights = [
            ("p_history", self.p_history),
            ("p_arity_0", self.p_arity_0),
            ("p_renaming", self.p_renaming),
            ("p_arity_1", self.p_arity_1),
            ("p_evaluate", self.p_evaluate),
            ("p_arity_2", self.p_arity_2),
            ("p_int_or_diff", self.p_int_or_diff),
            ("p_subs", self.p_subs),
            ("p_diff_vs_int", self.p_diff_vs_int),
            ("p_algebra", self.p_algebra),
            ("p_arith", self.p_arith),
            ("p_extension", self.p_extension),
            ("p_define", self.p_define),
        ];
        for (name, w) in weights {
            if w.is_nan() || w < 0.0 || (w.is_infinite() && name != "p_history") {
                return Err(GenError::InvalidConfig(format!("{name} must be a non-negative number")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_premise_injection) {
            return Err(GenError::InvalidConfig("p_premise_injection must lie in [0, 1]".into()));
        }
        if self.p_history < 1.0 {
            return Err(GenError::InvalidConfig("p_history must be at least 1".into()));
        }
        if self.p_arity_0 + self.p_arity_1 + self.p_arity_2 <= 0.0 {
            return Err(GenError::InvalidConfig("arity weights are all zero".into()));
        }
        if self.length_min < 4 {
            return Err(GenError::InvalidConfig("length_min must be at least 4".into()));
        }
        if self.length_max < self.length_min {
            return Err(GenError::InvalidConfig("length_max is below length_min".into()));
        }
        if !self.length_mean.is_finite() || self.length_sigma.is_nan() || self.length_sigma <= 0.0 || !self.length_sigma.is_finite() {
            return Err(GenError::InvalidConfig("length_mean and length_sigma must be finite, sigma positive".into()));
        }
        if self.retry_cap < 1 {
            return Err(GenError::InvalidConfig("retry_cap must be at least 1".into()));
        }
        if self.max_attempts_per_record < 1 {
            return Err(GenError::InvalidConfig("max_attempts_per_record must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        GenConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_short_minimum() {
        let c = GenConfig {
            length_min: 3,
            ..GenConfig::default()
        };
        assert!(c.validate().is_err());
        let c = GenConfig {
            p_subs: -1.0,
            ..GenConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
