//! Post-processing of raw subjective ratings: per-viewer z-scoring, the
//! BT.500-11 observer-rejection screen applied in the z-score domain, and a
//! monotonic-consistency screen applied to the surviving raw scores.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::condition::{RatingRecord, TestCondition, VariationAxis};
use crate::error::{Error, Result};

/// A viewer whose whole block was dropped before screening proper, with the
/// reason (zero score variance or a single rating make z-scores undefined).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ViewerDiagnostic {
    pub viewer_id: String,
    pub reason: String,
}

/// Result of [`zscore_normalize`]: transformed records plus the viewers whose
/// blocks had to be rejected.
#[derive(Debug, Clone)]
pub struct ZscoreOutcome {
    pub records: Vec<RatingRecord>,
    pub rejected: Vec<ViewerDiagnostic>,
}

/// Replaces every viewer's scores by z-scores computed over all of that
/// viewer's ratings (sample standard deviation). Viewers with fewer than two
/// ratings or constant scores are rejected with a diagnostic instead of
/// being transformed.
pub fn zscore_normalize(ratings: &[RatingRecord]) -> ZscoreOutcome {
    let mut by_viewer: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in ratings {
        by_viewer.entry(&r.viewer_id).or_default().push(r.raw_score);
    }

    let mut stats: BTreeMap<&str, (f64, f64)> = BTreeMap::new();
    let mut rejected = Vec::new();
    for (viewer, scores) in &by_viewer {
        if scores.len() < 2 {
            rejected.push(ViewerDiagnostic {
                viewer_id: viewer.to_string(),
                reason: format!("only {} rating(s); z-score undefined", scores.len()),
            });
            continue;
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
        if var == 0.0 {
            rejected.push(ViewerDiagnostic {
                viewer_id: viewer.to_string(),
                reason: "zero variance across scores; z-score undefined".into(),
            });
            continue;
        }
        stats.insert(viewer, (mean, var.sqrt()));
    }

    let records = ratings
        .iter()
        .filter_map(|r| {
            stats.get(r.viewer_id.as_str()).map(|&(mean, sd)| RatingRecord {
                viewer_id: r.viewer_id.clone(),
                condition: r.condition.clone(),
                raw_score: (r.raw_score - mean) / sd,
            })
        })
        .collect();

    ZscoreOutcome { records, rejected }
}

/// BT.500-11 Annex 2 §2.3 observer rejection, applied per PVS.
///
/// For every PVS the panel mean, sample standard deviation and kurtosis
/// coefficient (population moment ratio m4/m2^2) are computed. Scores are
/// flagged against mean ± 2σ when 2 <= β2 <= 4, otherwise mean ± √20·σ.
/// A viewer with per-viewer flag counts P (above) and Q (below) over their N
/// ratings is rejected when (P+Q)/N > 0.05 and |P−Q|/(P+Q) < 0.3.
///
/// Expects z-scored input; the caller drops all ratings of the returned
/// viewers from the raw-score data.
pub fn bt500_screen(z_ratings: &[RatingRecord]) -> Result<BTreeSet<String>> {
    let mut by_pvs: BTreeMap<&TestCondition, Vec<(&str, f64)>> = BTreeMap::new();
    for r in z_ratings {
        by_pvs
            .entry(&r.condition)
            .or_default()
            .push((&r.viewer_id, r.raw_score));
    }

    let mut p_count: BTreeMap<&str, usize> = BTreeMap::new();
    let mut q_count: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n_count: BTreeMap<&str, usize> = BTreeMap::new();

    for (cond, scores) in &by_pvs {
        let n = scores.len();
        if n < 2 {
            return Err(Error::TooFewViewers {
                condition: cond.to_string(),
                viewers: n,
            });
        }
        let nf = n as f64;
        let mean = scores.iter().map(|&(_, s)| s).sum::<f64>() / nf;
        let m2 = scores.iter().map(|&(_, s)| (s - mean).powi(2)).sum::<f64>() / nf;
        let m4 = scores.iter().map(|&(_, s)| (s - mean).powi(4)).sum::<f64>() / nf;
        let sd = (scores.iter().map(|&(_, s)| (s - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
        let kurtosis = if m2 > 0.0 { m4 / (m2 * m2) } else { 3.0 };
        let k = if (2.0..=4.0).contains(&kurtosis) {
            2.0
        } else {
            20f64.sqrt()
        };
        let upper = mean + k * sd;
        let lower = mean - k * sd;
        for &(viewer, s) in scores {
            *n_count.entry(viewer).or_default() += 1;
            if s > upper {
                *p_count.entry(viewer).or_default() += 1;
            }
            if s < lower {
                *q_count.entry(viewer).or_default() += 1;
            }
        }
    }

    let mut rejected = BTreeSet::new();
    for (&viewer, &n) in &n_count {
        let p = p_count.get(viewer).copied().unwrap_or(0);
        let q = q_count.get(viewer).copied().unwrap_or(0);
        let total = p + q;
        if total == 0 {
            continue;
        }
        let rate = total as f64 / n as f64;
        let balance = (p as f64 - q as f64).abs() / total as f64;
        if rate > 0.05 && balance < 0.3 {
            rejected.insert(viewer.to_string());
        }
    }
    Ok(rejected)
}

/// True when `a` is strictly better than `b` in a model-monotone direction.
///
/// Conditions are comparable only within one sequence, axis, held-constant
/// value and switching interval, and then in exactly two forms:
/// * both constant: the higher frame rate (lower stepsize) wins;
/// * same better-level anchor (t_h resp. q_l): the higher t_l (lower q_h) wins.
///
/// Pairs that differ in both levels while alternating (for example t_h=30,
/// t_l=15 against t_h=15, t_l=15) are left incomparable: alternation itself
/// costs quality, so neither direction is implied.
fn strictly_better(a: &TestCondition, b: &TestCondition) -> bool {
    if a.sequence_id != b.sequence_id
        || a.axis != b.axis
        || a.fixed_other != b.fixed_other
        || a.switch_interval_s != b.switch_interval_s
    {
        return false;
    }
    match a.axis {
        VariationAxis::FrameRate => {
            if a.is_constant() && b.is_constant() {
                a.high_level > b.high_level
            } else if a.high_level == b.high_level {
                a.low_level > b.low_level
            } else {
                false
            }
        }
        VariationAxis::Quantization => {
            if a.is_constant() && b.is_constant() {
                a.high_level < b.high_level
            } else if a.high_level == b.high_level {
                a.low_level < b.low_level
            } else {
                false
            }
        }
    }
}

/// Counts ordered-pair monotonicity violations per (viewer, sequence) block
/// in the raw-score domain and returns the blocks exceeding the threshold.
///
/// A violation is a comparable pair where the worse condition outscores the
/// better one by more than the dead-band `margin` (raw points). Incomparable
/// pairs contribute nothing.
pub fn consistency_screen(
    raw_ratings: &[RatingRecord],
    margin: f64,
    violation_threshold: usize,
) -> BTreeSet<(String, String)> {
    type BlockScores<'a> = BTreeMap<&'a TestCondition, (f64, usize)>;
    // average duplicate ratings of the same condition, should they occur
    let mut blocks: BTreeMap<(&str, &str), BlockScores> = BTreeMap::new();
    for r in raw_ratings {
        let slot = blocks
            .entry((&r.viewer_id, &r.condition.sequence_id))
            .or_default()
            .entry(&r.condition)
            .or_insert((0.0, 0));
        slot.0 += r.raw_score;
        slot.1 += 1;
    }

    let mut dropped = BTreeSet::new();
    for ((viewer, sequence), scores) in &blocks {
        let conds: Vec<(&TestCondition, f64)> = scores
            .iter()
            .map(|(c, &(sum, n))| (*c, sum / n as f64))
            .collect();
        let mut violations = 0usize;
        for (better, better_score) in &conds {
            for (worse, worse_score) in &conds {
                if std::ptr::eq(*better, *worse) {
                    continue;
                }
                if strictly_better(better, worse) && *worse_score > *better_score + margin {
                    violations += 1;
                }
            }
        }
        if violations > violation_threshold {
            dropped.insert((viewer.to_string(), sequence.to_string()));
        }
    }
    dropped
}

/// Knobs for the consistency screen.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScreenOptions {
    /// Dead-band in raw points before a reversed pair counts as a violation.
    pub margin: f64,
    /// A (viewer, sequence) block is dropped when violations exceed this.
    pub violation_threshold: usize,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions {
            margin: 0.0,
            violation_threshold: 2,
        }
    }
}

/// What the full screen removed and why.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreenReport {
    pub n_input: usize,
    pub n_survivors: usize,
    pub zero_variance_viewers: Vec<ViewerDiagnostic>,
    pub bt500_rejected_viewers: Vec<String>,
    pub consistency_dropped_blocks: Vec<DroppedBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DroppedBlock {
    pub viewer_id: String,
    pub sequence_id: String,
}

/// Runs the two screens in concatenation: z-scores feed the BT.500 observer
/// rejection, then the consistency screen runs on the surviving raw scores.
/// Survivors are returned in the raw-score domain, a subset of the input.
pub fn screen(
    ratings: &[RatingRecord],
    options: &ScreenOptions,
) -> Result<(Vec<RatingRecord>, ScreenReport)> {
    let z = zscore_normalize(ratings);
    let zero_variance: BTreeSet<&str> = z
        .rejected
        .iter()
        .map(|d| d.viewer_id.as_str())
        .collect();

    let bt500_rejected = bt500_screen(&z.records)?;

    let after_bt500: Vec<RatingRecord> = ratings
        .iter()
        .filter(|r| {
            !zero_variance.contains(r.viewer_id.as_str())
                && !bt500_rejected.contains(r.viewer_id.as_str())
        })
        .cloned()
        .collect();

    let dropped = consistency_screen(&after_bt500, options.margin, options.violation_threshold);
    let survivors: Vec<RatingRecord> = after_bt500
        .into_iter()
        .filter(|r| !dropped.contains(&(r.viewer_id.clone(), r.condition.sequence_id.clone())))
        .collect();

    let report = ScreenReport {
        n_input: ratings.len(),
        n_survivors: survivors.len(),
        zero_variance_viewers: z.rejected,
        bt500_rejected_viewers: bt500_rejected.into_iter().collect(),
        consistency_dropped_blocks: dropped
            .into_iter()
            .map(|(viewer_id, sequence_id)| DroppedBlock {
                viewer_id,
                sequence_id,
            })
            .collect(),
    };
    Ok((survivors, report))
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
    fn zscore_two_point_hand_values() {
        let r = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 40.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 60.0),
        ];
        let out = zscore_normalize(&r);
        assert!(out.rejected.is_empty());
        assert!((out.records[0].raw_score + 0.7071067811865475).abs() < 1e-12);
        assert!((out.records[1].raw_score - 0.7071067811865475).abs() < 1e-12);
    }

    #[test]
    fn zscore_constant_viewer_rejected() {
        let r = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 50.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 50.0),
            rec("v1", fr_cond("a", 7.5, 7.5, 1.0), 50.0),
        ];
        let out = zscore_normalize(&r);
        assert!(out.records.is_empty());
        assert_eq!(out.rejected.len(), 1);
        assert!(out.rejected[0].reason.contains("zero variance"));
    }

    #[test]
    fn zscore_shift_invariance() {
        let base = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 40.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 55.0),
            rec("v1", fr_cond("a", 7.5, 7.5, 1.0), 70.0),
        ];
        let shifted: Vec<_> = base
            .iter()
            .map(|r| rec("v1", r.condition.clone(), r.raw_score + 10.0))
            .collect();
        let a = zscore_normalize(&base);
        let b = zscore_normalize(&shifted);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((x.raw_score - y.raw_score).abs() < 1e-12);
        }
    }

    #[test]
    fn zscore_is_normalized_per_viewer() {
        let mut recs = Vec::new();
        for (i, v) in ["v1", "v2", "v3"].iter().enumerate() {
            for j in 0..10 {
                recs.push(rec(
                    v,
                    fr_cond("a", 30.0, 30.0, (j + 1) as f64),
                    20.0 + (i as f64) * 7.0 + (j as f64) * 3.5,
                ));
            }
        }
        let out = zscore_normalize(&recs);
        for v in ["v1", "v2", "v3"] {
            let scores: Vec<f64> = out
                .records
                .iter()
                .filter(|r| r.viewer_id == v)
                .map(|r| r.raw_score)
                .collect();
            let n = scores.len() as f64;
            let mean = scores.iter().sum::<f64>() / n;
            let sd =
                (scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0)).sqrt();
            assert!(mean.abs() < 1e-12);
            assert!((sd - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bt500_identical_vectors_reject_nobody() {
        let mut recs = Vec::new();
        for v in ["v1", "v2", "v3"] {
            for (j, s) in [30.0, 50.0, 70.0].iter().enumerate() {
                recs.push(rec(v, fr_cond("a", 30.0, 30.0, (j + 1) as f64), *s));
            }
        }
        let z = zscore_normalize(&recs);
        assert!(bt500_screen(&z.records).unwrap().is_empty());
    }

    #[test]
    fn bt500_single_viewer_pvs_is_error() {
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 40.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 70.0),
        ];
        let z = zscore_normalize(&recs);
        assert!(matches!(
            bt500_screen(&z.records),
            Err(Error::TooFewViewers { .. })
        ));
    }

    #[test]
    fn consistency_monotone_viewer_survives() {
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 90.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 75.0),
            rec("v1", fr_cond("a", 7.5, 7.5, 1.0), 60.0),
            rec("v1", fr_cond("a", 30.0, 15.0, 1.0), 80.0),
            rec("v1", fr_cond("a", 30.0, 7.5, 1.0), 70.0),
        ];
        assert!(consistency_screen(&recs, 0.0, 0).is_empty());
    }

    #[test]
    fn consistency_constant_pair_reversal_dropped() {
        // worse constant level outscores the better one: one violation > 0
        let recs = vec![
            rec("v1", fr_cond("a", 7.5, 7.5, 1.0), 80.0),
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 40.0),
        ];
        let dropped = consistency_screen(&recs, 0.0, 0);
        assert_eq!(dropped.len(), 1);
        assert!(dropped.contains(&("v1".to_string(), "a".to_string())));
    }

    #[test]
    fn consistency_cross_interval_pairs_ignored() {
        // same pair of levels, different Fz: never comparable
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 15.0, 1.0), 40.0),
            rec("v1", fr_cond("a", 30.0, 15.0, 2.0), 90.0),
        ];
        assert!(consistency_screen(&recs, 0.0, 0).is_empty());
    }

    #[test]
    fn consistency_qs_direction() {
        let q = |seq: &str, ql: f64, qh: f64, fz: f64| TestCondition {
            axis: VariationAxis::Quantization,
            high_level: ql,
            low_level: qh,
            switch_interval_s: fz,
            fixed_other: 30.0,
            sequence_id: seq.into(),
        };
        // coarser constant stepsize rated above the finer one -> violation
        let bad = vec![
            rec("v1", q("a", 16.0, 16.0, 1.0), 40.0),
            rec("v1", q("a", 102.0, 102.0, 1.0), 80.0),
        ];
        assert_eq!(consistency_screen(&bad, 0.0, 0).len(), 1);
        // same q_l anchor, larger swing rated above smaller swing -> violation
        let bad2 = vec![
            rec("v1", q("a", 16.0, 40.0, 1.0), 60.0),
            rec("v1", q("a", 16.0, 102.0, 1.0), 75.0),
        ];
        assert_eq!(consistency_screen(&bad2, 0.0, 0).len(), 1);
    }

    #[test]
    fn consistency_margin_tolerates_small_reversals() {
        let recs = vec![
            rec("v1", fr_cond("a", 30.0, 30.0, 1.0), 78.0),
            rec("v1", fr_cond("a", 15.0, 15.0, 1.0), 80.0),
        ];
        assert_eq!(consistency_screen(&recs, 0.0, 0).len(), 1);
        assert!(consistency_screen(&recs, 5.0, 0).is_empty());
    }

    #[test]
    fn survivors_are_subset_of_input() {
        let mut recs = Vec::new();
        for v in ["v1", "v2", "v3"] {
            for (j, s) in [(1.0, 80.0), (2.0, 60.0), (3.0, 40.0)] {
                recs.push(rec(v, fr_cond("a", 30.0, 30.0, j), s));
            }
        }
        let (survivors, report) = screen(&recs, &ScreenOptions::default()).unwrap();
        assert_eq!(report.n_input, recs.len());
        assert_eq!(report.n_survivors, survivors.len());
        for s in &survivors {
            assert!(recs.iter().any(|r| r == s));
        }
    }
}
