//! Reference-based text metrics, perturbation comparisons and the manual
//! scoring function.

mod manual;
mod ngram;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use manual::{manual_score, ErrorAnnotation, ScoreWeights};
pub use ngram::{
    bleu, bleu_tokens, gleu, gleu_tokens, rouge, rouge_l, rouge_l_tokens, rouge_n_tokens, Tokenizer,
};
pub use report::{
    feature_rows, features_csv, score, ExternalScore, FeatureRow, MetricTriple, PairRow, PairSummary,
    PredictionRecord, RowIssue, ScoreReport, ScoreRow, GroupSummary, FEATURE_HEADER,
};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("ratio denominator is zero")]
    ZeroDenominator,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("annotation must be six 0/1 flags, got {0}")]
    InvalidAnnotation(String),
}

/// Which ROUGE score the reports use.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RougeVariant {
    #[serde(rename = "rouge1")]
    Rouge1,
    #[default]
    #[serde(rename = "rouge2")]
    Rouge2,
    #[serde(rename = "rougeL")]
    RougeL,
}

impl RougeVariant {
    pub fn parse(s: &str) -> Option<RougeVariant> {
        match s.to_ascii_lowercase().as_str() {
            "rouge1" | "1" => Some(RougeVariant::Rouge1),
            "rouge2" | "2" => Some(RougeVariant::Rouge2),
            "rougel" | "l" => Some(RougeVariant::RougeL),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub rouge: RougeVariant,
    pub bleu_max_n: usize,
    pub gleu_max_n: usize,
    pub tokenizer: Tokenizer,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            rouge: RougeVariant::Rouge2,
            bleu_max_n: 4,
            gleu_max_n: 4,
            tokenizer: Tokenizer::Whitespace,
        }
    }
}

/// Description of the BLEU smoothing, stored in score reports.
pub const BLEU_SMOOTHING: &str = "add-one on orders with zero matches: p_n = 1 / (n-grams + 1)";

impl MetricConfig {
    /// ROUGE, BLEU and GLEU of `candidate` against `reference`.
    pub fn triple(&self, candidate: &str, reference: &str) -> MetricTriple {
        let c = self.tokenizer.split(candidate);
        let r = self.tokenizer.split(reference);
        let rouge = match self.rouge {
            RougeVariant::Rouge1 => rouge_n_tokens(&c, &r, 1),
            RougeVariant::Rouge2 => rouge_n_tokens(&c, &r, 2),
            RougeVariant::RougeL => rouge_l_tokens(&c, &r),
        };
        MetricTriple {
            rouge,
            bleu: bleu_tokens(&c, &r, self.bleu_max_n.max(1)),
            gleu: gleu_tokens(&c, &r, self.gleu_max_n.max(1)),
        }
    }
}

/// Performance drop on one pair: `M(s, ŝ) − M(p, p̂)`. Positive when the
/// perturbation hurt.
pub fn perf_difference(m_static: f64, m_perturbed: f64) -> f64 {
    m_static - m_perturbed
}

/// `M(ŝ, p̂) / M(s, p)`: how far predictions moved relative to how far the
/// ground truths moved.
pub fn perturbation_ratio(m_pred_pair: f64, m_truth_pair: f64) -> Result<f64, MetricsError> {
    if m_truth_pair == 0.0 {
        return Err(MetricsError::ZeroDenominator);
    }
    Ok(m_pred_pair / m_truth_pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_and_ratio() {
        assert!((perf_difference(0.9, 0.8) - 0.1).abs() < 1e-12);
        assert_eq!(perf_difference(0.4, 0.4), 0.0);
        assert!(perf_difference(0.4, 0.6) < 0.0);
        assert_eq!(perturbation_ratio(0.3, 0.3), Ok(1.0));
        assert_eq!(perturbation_ratio(0.5, 1.0), Ok(0.5));
        assert_eq!(perturbation_ratio(0.5, 0.0), Err(MetricsError::ZeroDenominator));
    }

    #[test]
    fn rouge_variant_names() {
        assert_eq!(RougeVariant::parse("rougeL"), Some(RougeVariant::RougeL));
        assert_eq!(serde_json::to_string(&RougeVariant::Rouge2).unwrap(), "\"rouge2\"");
    }
}
