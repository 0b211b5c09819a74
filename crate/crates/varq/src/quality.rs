//! Per-condition MOS aggregation and quality normalization.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::condition::{RatingRecord, TestCondition, VariationAxis};
use crate::error::{Error, Result};

/// Aggregated opinion data for one condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityEntry {
    pub condition: TestCondition,
    /// Arithmetic mean of the surviving raw scores.
    pub mos: f64,
    /// MOS divided by the MOS of the reference condition of the same
    /// (sequence, axis) group: constant t_max for FR, constant q_min for QS.
    pub normalized_q: f64,
    pub n_ratings: usize,
    /// Sample standard deviation of the raw scores (0 for a single rating).
    pub std_dev: f64,
}

/// Quality entries sorted by condition, one per rated PVS.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QualityTable {
    entries: Vec<QualityEntry>,
}

impl QualityTable {
    pub fn new(mut entries: Vec<QualityEntry>) -> Self {
        entries.sort_by(|a, b| a.condition.cmp(&b.condition));
        QualityTable { entries }
    }

    pub fn entries(&self) -> &[QualityEntry] {
        &self.entries
    }

    pub fn get(&self, condition: &TestCondition) -> Option<&QualityEntry> {
        self.entries
            .binary_search_by(|e| e.condition.cmp(condition))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn sequences(&self) -> Vec<String> {
        let mut seqs: Vec<String> = Vec::new();
        for e in &self.entries {
            if !seqs.contains(&e.condition.sequence_id) {
                seqs.push(e.condition.sequence_id.clone());
            }
        }
        seqs.sort();
        seqs
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Reference level on each axis: the best tested operating point that the
/// group normalizes against.
fn reference_level(axis: VariationAxis, t_max: f64, q_min: f64) -> f64 {
    match axis {
        VariationAxis::FrameRate => t_max,
        VariationAxis::Quantization => q_min,
    }
}

/// Aggregates screened ratings into a [`QualityTable`].
///
/// MOS is the arithmetic mean of raw scores per condition. Each
/// (sequence, axis) group is normalized by the pooled MOS of its reference
/// condition (both level slots at t_max resp. q_min); a group without a
/// reference condition is an error naming the group.
pub fn compute_quality_table(
    screened: &[RatingRecord],
    t_max: f64,
    q_min: f64,
) -> Result<QualityTable> {
    let mut by_cond: BTreeMap<&TestCondition, Vec<f64>> = BTreeMap::new();
    for r in screened {
        by_cond.entry(&r.condition).or_default().push(r.raw_score);
    }

    // pooled reference MOS per (sequence, axis) group
    let mut ref_pool: BTreeMap<(&str, VariationAxis), (f64, usize)> = BTreeMap::new();
    for (cond, scores) in &by_cond {
        let level = reference_level(cond.axis, t_max, q_min);
        if cond.high_level == level && cond.low_level == level {
            let slot = ref_pool
                .entry((&cond.sequence_id, cond.axis))
                .or_insert((0.0, 0));
            slot.0 += scores.iter().sum::<f64>();
            slot.1 += scores.len();
        }
    }

    let mut entries = Vec::with_capacity(by_cond.len());
    for (cond, scores) in &by_cond {
        let group = (cond.sequence_id.as_str(), cond.axis);
        let reference_mos = match ref_pool.get(&group) {
            Some(&(sum, n)) if n > 0 => sum / n as f64,
            _ => {
                return Err(Error::MissingReference {
                    group: format!("{}/{}", cond.sequence_id, cond.axis),
                })
            }
        };
        let n = scores.len();
        let mos = scores.iter().sum::<f64>() / n as f64;
        let std_dev = if n > 1 {
            (scores
                .iter()
                .map(|s| (s - mos) * (s - mos))
                .sum::<f64>()
                / (n as f64 - 1.0))
                .sqrt()
        } else {
            0.0
        };
        entries.push(QualityEntry {
            condition: (*cond).clone(),
            mos,
            normalized_q: mos / reference_mos,
            n_ratings: n,
            std_dev,
        });
    }

    Ok(QualityTable::new(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fr_cond(seq: &str, hi: f64, lo: f64, fz: f64) -> TestCondition {
        TestCondition {
            axis: VariationAxis::FrameRate,
            high_level: hi,
            low_level: lo,
            switch_interval_s: fz,
            fixed_other: 16.0,
            sequence_id: seq.into(),
        }
    }

    fn rec(viewer: &str, cond: TestCondition, score: f64) -> RatingRecord {
        RatingRecord {
            viewer_id: viewer.into(),
            condition: cond,
            raw_score: score,
        }
    }

    #[test]
    fn reference_normalizes_to_one() {
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 60.0),
            rec("v2", fr_cond("a", 30.0, 30.0, 1.0), 80.0),
        ];
        let table = compute_quality_table(&recs, 30.0, 16.0).unwrap();
        let e = &table.entries()[0];
        assert_eq!(e.mos, 70.0);
        assert_eq!(e.normalized_q, 1.0);
        assert_eq!(e.n_ratings, 2);
        assert!((e.std_dev - 14.142135623730951).abs() < 1e-12);
    }

    #[test]
    fn ratio_definition() {
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 80.0),
            rec("v2", fr_cond("a", 30.0, 30.0, 1.0), 80.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 60.0),
            rec("v2", fr_cond("a", 15.0, 15.0, 1.0), 60.0),
        ];
        let table = compute_quality_table(&recs, 30.0, 16.0).unwrap();
        let c15 = fr_cond("a", 15.0, 15.0, 1.0);
        assert_eq!(table.get(&c15).unwrap().normalized_q, 0.75);
    }

    #[test]
    fn missing_reference_names_group() {
        let recs = vec![rec("v1", fr_cond("akiyo", 15.0, 15.0, 1.0), 60.0)];
        let err = compute_quality_table(&recs, 30.0, 16.0).unwrap_err();
        assert!(err.to_string().contains("akiyo/FR"), "{err}");
    }

    #[test]
    fn groups_normalize_independently() {
        let qs_cond = |ql: f64, qh: f64| TestCondition {
            axis: VariationAxis::Quantization,
            high_level: ql,
            low_level: qh,
            switch_interval_s: 1.0,
            fixed_other: 30.0,
            sequence_id: "a".into(),
        };
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 80.0),
            rec("v2", fr_cond("a", 30.0, 30.0, 1.0), 80.0),
            rec("v1", qs_cond(16.0, 16.0), 90.0),
            rec("v2", qs_cond(16.0, 16.0), 90.0),
            rec("v1", qs_cond(16.0, 102.0), 45.0),
            rec("v2", qs_cond(16.0, 102.0), 45.0),
        ];
        let table = compute_quality_table(&recs, 30.0, 16.0).unwrap();
        assert_eq!(table.get(&qs_cond(16.0, 16.0)).unwrap().normalized_q, 1.0);
        assert_eq!(table.get(&qs_cond(16.0, 102.0)).unwrap().normalized_q, 0.5);
        assert_eq!(table.get(&fr_cond("a", 30.0, 30.0, 1.0)).unwrap().normalized_q, 1.0);
    }
}
