//! Dataset statistics: length and operation histograms and chain tables.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ops::{OpId, Role};
use crate::record::DerivationRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainRow {
    /// Op symbols joined by `→`.
    pub chain: String,
    pub count: usize,
    pub p_chain: f64,
    /// `p_chain` times the number of distinct chains of this length.
    pub relative_frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LengthChains {
    pub length: usize,
    pub derivations: usize,
    /// Number of distinct op chains observed at this length.
    pub permutations: usize,
    /// Most frequent first; ties broken by chain text.
    pub rows: Vec<ChainRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsSummary {
    pub schema_version: u32,
    pub derivations: usize,
    /// P(L): share of derivations with `L` equations.
    pub length_histogram: BTreeMap<usize, f64>,
    /// P(O): share of derived equations produced by each op.
    pub op_histogram: BTreeMap<String, f64>,
    /// Share of derivations with more than one premise.
    pub multi_premise_share: f64,
    pub chains: Vec<LengthChains>,
}

/// Relative frequency of a chain: its probability times the number of
/// distinct chains, i.e. its probability relative to a uniform chain.
pub fn relative_frequency(p_chain: f64, permutations: usize) -> f64 {
    p_chain * permutations as f64
}

pub fn chain_text(chain: &[OpId]) -> String {
    chain.iter().map(|o| o.symbol()).collect::<Vec<_>>().join(" → ")
}

/// Summary over derivations given as `(length, op chain, premise count)`.
pub fn summarize<'a>(items: impl IntoIterator<Item = (usize, &'a [OpId], usize)>) -> StatsSummary {
    let mut n = 0usize;
    let mut lengths: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ops: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_len: BTreeMap<usize, BTreeMap<String, usize>> = BTreeMap::new();
    let mut multi = 0usize;
    let mut derived = 0usize;
    for (len, chain, premises) in items {
        n += 1;
        *lengths.entry(len).or_default() += 1;
        for op in chain {
            *ops.entry(op.symbol().to_string()).or_default() += 1;
            derived += 1;
        }
        if premises > 1 {
            multi += 1;
        }
        *per_len.entry(len).or_default().entry(chain_text(chain)).or_default() += 1;
    }
    let share = |c: usize, total: usize| if total == 0 { 0.0 } else { c as f64 / total as f64 };
    let chains = per_len
        .into_iter()
        .map(|(length, counts)| {
            let derivations: usize = counts.values().sum();
            let permutations = counts.len();
            let mut rows: Vec<ChainRow> = counts
                .into_iter()
                .map(|(chain, count)| {
                    let p_chain = share(count, derivations);
                    ChainRow {
                        chain,
                        count,
                        p_chain,
                        relative_frequency: relative_frequency(p_chain, permutations),
                    }
                })
                .collect();
            rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.chain.cmp(&b.chain)));
            LengthChains {
                length,
                derivations,
                permutations,
                rows,
            }
        })
        .collect();
    StatsSummary {
        schema_version: crate::record::SCHEMA_VERSION,
        derivations: n,
        length_histogram: lengths.into_iter().map(|(l, c)| (l, share(c, n))).collect(),
        op_histogram: ops.into_iter().map(|(o, c)| (o, share(c, derived))).collect(),
        multi_premise_share: share(multi, n),
        chains,
    }
}

/// [`summarize`] over stored records, read from their step annotations.
pub fn summarize_records(records: &[DerivationRecord]) -> StatsSummary {
    let chains: Vec<Vec<OpId>> = records
        .iter()
        .map(|r| r.steps.iter().filter(|s| s.op != OpId::Premise).map(|s| s.op).collect())
        .collect();
    summarize(records.iter().zip(&chains).map(|(r, c)| {
        let premises = r.steps.iter().filter(|s| s.role == Role::Premise).count();
        (r.steps.len(), c.as_slice(), premises)
    }))
}

impl StatsSummary {
    /// Length with the highest share; the smallest such length on ties.
    pub fn mode_length(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (&l, &p) in &self.length_histogram {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((l, p));
            }
        }
        best.map(|(l, _)| l)
    }

    pub fn chains_of_length(&self, length: usize) -> Option<&LengthChains> {
        self.chains.iter().find(|c| c.length == length)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_frequency_matches_published_arithmetic() {
        assert_eq!(relative_frequency(0.0369, 842).round(), 31.0);
        assert_eq!(relative_frequency(0.0186, 842).round(), 16.0);
    }

    #[test]
    fn histograms_sum_to_one() {
        let a = [OpId::Diff, OpId::EvalDiff, OpId::SubstLhs];
        let b = [OpId::Int, OpId::EvalInt, OpId::SubstLhs, OpId::SubstRhs];
        let s = summarize([(4, &a[..], 1), (4, &a[..], 1), (5, &b[..], 2)]);
        let total: f64 = s.length_histogram.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let total: f64 = s.op_histogram.values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(s.mode_length(), Some(4));
        let four = s.chains_of_length(4).unwrap();
        assert_eq!(four.permutations, 1);
        assert_eq!(four.rows[0].chain, "∂ → ∂_E → S_L");
        assert!((s.multi_premise_share - 1.0 / 3.0).abs() < 1e-12);
    }
}
