use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::prompt::PromptRecord;
use crate::record::{PerturbationKind, SCHEMA_VERSION};

use super::{perf_difference, perturbation_ratio, MetricConfig, BLEU_SMOOTHING};

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// A model output for one prompt, matched to its reference by
/// `(perturbation, id)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationKind>,
    pub prediction: String,
}

/// A score computed elsewhere (e.g. BLEURT) for one prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalScore {
    pub id: u64,
    #[serde(default)]
    pub perturbation: Option<PerturbationKind>,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricTriple {
    pub rouge: f64,
    pub bleu: f64,
    pub gleu: f64,
}

impl MetricTriple {
    fn zip(self, o: MetricTriple, f: impl Fn(f64, f64) -> f64) -> MetricTriple {
        MetricTriple {
            rouge: f(self.rouge, o.rouge),
            bleu: f(self.bleu, o.bleu),
            gleu: f(self.gleu, o.gleu),
        }
    }
}

/// Per-metric values that may be missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OptionTriple {
    pub rouge: Option<f64>,
    pub bleu: Option<f64>,
    pub gleu: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTriple {
    pub rouge: usize,
    pub bleu: usize,
    pub gleu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub id: u64,
    pub static_id: u64,
    pub perturbation: Option<PerturbationKind>,
    #[serde(flatten)]
    pub scores: MetricTriple,
    pub external_bleurt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub perturbation: Option<PerturbationKind>,
    pub rows: usize,
    pub mean: MetricTriple,
    /// Present only when every row of the group has an external score.
    pub mean_external_bleurt: Option<f64>,
}

/// One static/perturbed pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRow {
    pub static_id: u64,
    pub perturbation: PerturbationKind,
    /// `M(s, ŝ) − M(p, p̂)`.
    pub difference: MetricTriple,
    /// `M(ŝ, p̂) / M(s, p)`; absent when the denominator is zero.
    pub ratio: OptionTriple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub perturbation: PerturbationKind,
    pub pairs: usize,
    pub mean_difference: MetricTriple,
    /// Mean over pairs with a non-zero denominator.
    pub mean_ratio: OptionTriple,
    /// Pairs left out of `mean_ratio` for a zero denominator.
    pub zero_denominator: CountTriple,
}

/// A reference or prediction that could not be scored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowIssue {
    pub id: u64,
    pub perturbation: Option<PerturbationKind>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub schema_version: u32,
    pub metrics: MetricConfig,
    pub bleu_smoothing: String,
    pub rows: Vec<ScoreRow>,
    pub aggregates: Vec<GroupSummary>,
    pub pairs: Vec<PairRow>,
    pub pair_summaries: Vec<PairSummary>,
    pub issues: Vec<RowIssue>,
}

type Key = (Option<PerturbationKind>, u64);

fn rank(k: Option<PerturbationKind>) -> u8 {
    match k {
        None => 0,
        Some(PerturbationKind::VR) => 1,
        Some(PerturbationKind::EE) => 2,
        Some(PerturbationKind::AG) => 3,
        Some(PerturbationKind::SR) => 4,
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (mut s, mut n) = (0.0, 0usize);
    for x in xs {
        s += x;
        n += 1;
    }
    (n > 0).then(|| s / n as f64)
}

/// Score predictions against reference prompt records. With `pairs`, every
/// perturbed row is also compared with the static row it derives from.
pub fn score(
    refs: &[PromptRecord],
    preds: &[PredictionRecord],
    external: &[ExternalScore],
    cfg: &MetricConfig,
    pairs: bool,
) -> ScoreReport {
    let mut issues = Vec::new();
    let mut by_key: HashMap<Key, &PredictionRecord> = HashMap::new();
    for p in preds {
        if by_key.insert((p.perturbation, p.id), p).is_some() {
            issues.push(RowIssue {
                id: p.id,
                perturbation: p.perturbation,
                reason: "duplicate prediction".into(),
            });
        }
    }
    let ext: HashMap<Key, f64> = external.iter().map(|e| ((e.perturbation, e.id), e.score)).collect();
    let mut rows = Vec::new();
    let mut texts: HashMap<Key, (&str, &str)> = HashMap::new();
    for r in refs {
        let key = (r.perturbation, r.id);
        let Some(p) = by_key.remove(&key) else {
            issues.push(RowIssue {
                id: r.id,
                perturbation: r.perturbation,
                reason: "no prediction".into(),
            });
            continue;
        };
        texts.insert(key, (r.target.as_str(), p.prediction.as_str()));
        rows.push(ScoreRow {
            id: r.id,
            static_id: r.static_id,
            perturbation: r.perturbation,
            scores: cfg.triple(&p.prediction, &r.target),
            external_bleurt: ext.get(&key).copied(),
        });
    }
    let mut leftover: Vec<&PredictionRecord> = by_key.into_values().collect();
    leftover.sort_by_key(|p| (rank(p.perturbation), p.id));
    for p in leftover {
        issues.push(RowIssue {
            id: p.id,
            perturbation: p.perturbation,
            reason: "no reference".into(),
        });
    }

    let mut groups: BTreeMap<u8, Vec<&ScoreRow>> = BTreeMap::new();
    for r in &rows {
        groups.entry(rank(r.perturbation)).or_default().push(r);
    }
    let aggregates = groups
        .values()
        .map(|g| {
            let ext: Option<Vec<f64>> = g.iter().map(|r| r.external_bleurt).collect();
            GroupSummary {
                perturbation: g[0].perturbation,
                rows: g.len(),
                mean: MetricTriple {
                    rouge: mean(g.iter().map(|r| r.scores.rouge)).unwrap_or(0.0),
                    bleu: mean(g.iter().map(|r| r.scores.bleu)).unwrap_or(0.0),
                    gleu: mean(g.iter().map(|r| r.scores.gleu)).unwrap_or(0.0),
                },
                mean_external_bleurt: ext.and_then(|v| mean(v.into_iter())),
            }
        })
        .collect();

    let mut pair_rows = Vec::new();
    if pairs {
        let statics: HashMap<u64, &ScoreRow> =
            rows.iter().filter(|r| r.perturbation.is_none()).map(|r| (r.id, r)).collect();
        for r in rows.iter() {
            let Some(kind) = r.perturbation else { continue };
            let Some(s) = statics.get(&r.static_id) else {
                issues.push(RowIssue {
                    id: r.id,
                    perturbation: r.perturbation,
                    reason: "no scored static record to pair with".into(),
                });
                continue;
            };
            let (s_ref, s_pred) = texts[&(None, s.id)];
            let (p_ref, p_pred) = texts[&(r.perturbation, r.id)];
            let pred_pair = cfg.triple(p_pred, s_pred);
            let truth_pair = cfg.triple(p_ref, s_ref);
            let ratio = |a: f64, b: f64| perturbation_ratio(a, b).ok();
            pair_rows.push(PairRow {
                static_id: s.id,
                perturbation: kind,
                difference: s.scores.zip(r.scores, perf_difference),
                ratio: OptionTriple {
                    rouge: ratio(pred_pair.rouge, truth_pair.rouge),
                    bleu: ratio(pred_pair.bleu, truth_pair.bleu),
                    gleu: ratio(pred_pair.gleu, truth_pair.gleu),
                },
            });
        }
    }
    let mut by_kind: BTreeMap<u8, Vec<&PairRow>> = BTreeMap::new();
    for p in &pair_rows {
        by_kind.entry(rank(Some(p.perturbation))).or_default().push(p);
    }
    let pair_summaries = by_kind
        .values()
        .map(|g| {
            let zero = |f: fn(&OptionTriple) -> Option<f64>| g.iter().filter(|p| f(&p.ratio).is_none()).count();
            let avg = |f: fn(&OptionTriple) -> Option<f64>| mean(g.iter().filter_map(|p| f(&p.ratio)));
            PairSummary {
                perturbation: g[0].perturbation,
                pairs: g.len(),
                mean_difference: MetricTriple {
                    rouge: mean(g.iter().map(|p| p.difference.rouge)).unwrap_or(0.0),
                    bleu: mean(g.iter().map(|p| p.difference.bleu)).unwrap_or(0.0),
                    gleu: mean(g.iter().map(|p| p.difference.gleu)).unwrap_or(0.0),
                },
                mean_ratio: OptionTriple {
                    rouge: avg(|t| t.rouge),
                    bleu: avg(|t| t.bleu),
                    gleu: avg(|t| t.gleu),
                },
                zero_denominator: CountTriple {
                    rouge: zero(|t| t.rouge),
                    bleu: zero(|t| t.bleu),
                    gleu: zero(|t| t.gleu),
                },
            }
        })
        .collect();

    ScoreReport {
        schema_version: SCHEMA_VERSION,
        metrics: *cfg,
        bleu_smoothing: BLEU_SMOOTHING.to_string(),
        rows,
        aggregates,
        pairs: pair_rows,
        pair_summaries,
        issues,
    }
}

pub const FEATURE_HEADER: &str =
    "schema_version,id,perturbation,rouge,bleu,bleurt,gleu,ratio_rouge,ratio_bleu,ratio_bleurt,ratio_gleu";

/// The eight regressor features of one scored row, in export order:
/// rouge, bleu, bleurt, gleu and their perturbation ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: u64,
    pub perturbation: Option<PerturbationKind>,
    pub values: [Option<f64>; 8],
}

pub fn feature_rows(report: &ScoreReport) -> Vec<FeatureRow> {
    let pairs: HashMap<(PerturbationKind, u64), &PairRow> =
        report.pairs.iter().map(|p| ((p.perturbation, p.static_id), p)).collect();
    report
        .rows
        .iter()
        .map(|r| {
            let ratios = match r.perturbation {
                None => [Some(1.0), Some(1.0), r.external_bleurt.map(|_| 1.0), Some(1.0)],
                Some(k) => match pairs.get(&(k, r.static_id)) {
                    // The external metric's pair ratio is not computable here.
                    Some(p) => [p.ratio.rouge, p.ratio.bleu, None, p.ratio.gleu],
                    None => [None; 4],
                },
            };
            let s = &r.scores;
            FeatureRow {
                id: r.id,
                perturbation: r.perturbation,
                values: [
                    Some(s.rouge),
                    Some(s.bleu),
                    r.external_bleurt,
                    Some(s.gleu),
                    ratios[0],
                    ratios[1],
                    ratios[2],
                    ratios[3],
                ],
            }
        })
        .collect()
}

/// Feature rows as CSV with [`FEATURE_HEADER`]; missing values are `NA`.
pub fn features_csv(report: &ScoreReport) -> String {
    let mut out = String::from(FEATURE_HEADER);
    out.push('\n');
    for f in feature_rows(report) {
        let kind = match f.perturbation {
            None => "static".to_string(),
            Some(k) => format!("{k:?}"),
        };
        write!(out, "{SCHEMA_VERSION},{},{kind}", f.id).unwrap();
        for v in f.values {
            match v {
                Some(x) => write!(out, ",{x}").unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prompt(id: u64, kind: Option<PerturbationKind>, target: &str) -> PromptRecord {
        PromptRecord {
            schema_version: SCHEMA_VERSION,
            id,
            static_id: id,
            perturbation: kind,
            prompt: String::new(),
            target: target.into(),
            premises: vec![0],
            intermediates: vec![],
            goal: 0,
        }
    }

    fn pred(id: u64, kind: Option<PerturbationKind>, text: &str) -> PredictionRecord {
        PredictionRecord {
            schema_version: SCHEMA_VERSION,
            id,
            perturbation: kind,
            prediction: text.into(),
        }
    }

    #[test]
    fn pairs_and_features() {
        let ee = Some(PerturbationKind::EE);
        let refs = [prompt(1, None, "a = b and c = d"), prompt(1, ee, "b = a and d = c")];
        let preds = [pred(1, None, "a = b and c = d"), pred(1, ee, "a = b and c = d")];
        let r = score(&refs, &preds, &[], &MetricConfig::default(), true);
        assert!(r.issues.is_empty());
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].scores.rouge, 1.0);
        let p = &r.pairs[0];
        assert!(p.difference.rouge > 0.0);
        // Predictions identical: numerator 1, truths differ: denominator < 1.
        assert!(p.ratio.gleu.unwrap() > 1.0);
        let csv = features_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], FEATURE_HEADER);
        assert_eq!(lines[1], "1,1,static,1,1,NA,1,1,1,NA,1");
        assert!(lines[2].starts_with("1,1,EE,"));
    }

    #[test]
    fn zero_denominator_is_counted() {
        let vr = Some(PerturbationKind::VR);
        let refs = [prompt(4, None, "a b"), prompt(4, vr, "c d")];
        let preds = [pred(4, None, "a b"), pred(4, vr, "a b")];
        let r = score(&refs, &preds, &[], &MetricConfig::default(), true);
        assert_eq!(r.pairs[0].ratio.rouge, None);
        assert_eq!(r.pair_summaries[0].zero_denominator.rouge, 1);
        assert_eq!(r.pair_summaries[0].mean_ratio.rouge, None);
    }

    #[test]
    fn missing_rows_are_reported() {
        let refs = [prompt(1, None, "a"), prompt(2, None, "b")];
        let preds = [pred(1, None, "a"), pred(9, None, "z")];
        let r = score(&refs, &preds, &[], &MetricConfig::default(), false);
        assert_eq!(r.rows.len(), 1);
        let reasons: Vec<&str> = r.issues.iter().map(|i| i.reason.as_str()).collect();
        assert_eq!(reasons, ["no prediction", "no reference"]);
    }
}
