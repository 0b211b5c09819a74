//! Rate-adaptation planning for a two-level bandwidth pattern.
//!
//! Given per-configuration bitrates and a ladder of encodable (fr, qs)
//! points, [`plan`] enumerates three schedule families — stay constant at
//! the best point fitting the low budget, alternate frame rate at fixed QS,
//! alternate QS at fixed frame rate — scores each with the quality models,
//! and returns the best. Two guideline clamps bound the alternation
//! magnitude before scoring: the high frame rate is capped at twice the low
//! one, and the finer stepsize is floored at 0.4 of the coarse one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, FzClass, ModelParams};

pub const CLAMP_FR: &str = "FR≤2·t_l";
pub const CLAMP_QS: &str = "QS≥0.4·q_h";

/// One encodable operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub fr: f64,
    pub qs: f64,
}

impl Config {
    pub fn new(fr: f64, qs: f64) -> Self {
        Config { fr, qs }
    }
}

/// Measured bitrates per (sequence, fr, qs).
///
/// Loading validates monotonicity: at fixed qs the bitrate must strictly
/// increase with fr, and at fixed fr strictly decrease with qs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RateTable {
    entries: BTreeMap<String, Vec<(f64, f64, f64)>>, // sequence -> (fr, qs, kbps)
}

impl RateTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sequence_id: &str, fr: f64, qs: f64, bitrate_kbps: f64) {
        let rows = self.entries.entry(sequence_id.to_string()).or_default();
        rows.retain(|&(f, q, _)| !(f == fr && q == qs));
        rows.push((fr, qs, bitrate_kbps));
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }

    pub fn bitrate(&self, sequence_id: &str, fr: f64, qs: f64) -> Result<f64> {
        self.entries
            .get(sequence_id)
            .and_then(|rows| rows.iter().find(|&&(f, q, _)| f == fr && q == qs))
            .map(|&(_, _, r)| r)
            .ok_or_else(|| Error::MissingBitrate {
                sequence: sequence_id.to_string(),
                fr,
                qs,
            })
    }

    /// All (fr, qs) points recorded for a sequence.
    pub fn configs(&self, sequence_id: &str) -> Vec<Config> {
        self.entries
            .get(sequence_id)
            .map(|rows| rows.iter().map(|&(fr, qs, _)| Config { fr, qs }).collect())
            .unwrap_or_default()
    }

    pub fn sequences(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    /// Rejects tables where bitrate does not strictly increase with frame
    /// rate at fixed qs, or does not strictly decrease with qs at fixed fr.
    pub fn validate(&self) -> Result<()> {
        for (seq, rows) in &self.entries {
            for &(f1, q1, r1) in rows {
                for &(f2, q2, r2) in rows {
                    if q1 == q2 && f1 < f2 && r1 >= r2 {
                        return Err(Error::RateTableMonotonicity {
                            detail: format!(
                                "{seq}: rate({f1}, {q1}) = {r1} >= rate({f2}, {q2}) = {r2}"
                            ),
                        });
                    }
                    if f1 == f2 && q1 < q2 && r1 <= r2 {
                        return Err(Error::RateTableMonotonicity {
                            detail: format!(
                                "{seq}: rate({f1}, {q1}) = {r1} <= rate({f2}, {q2}) = {r2}"
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Which parameter a plan alternates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanAxis {
    VaryQs,
    VaryFr,
    StayConstant,
}

impl PlanAxis {
    /// Tie-break preference: QS variation over FR variation over constant.
    fn preference(self) -> u8 {
        match self {
            PlanAxis::VaryQs => 2,
            PlanAxis::VaryFr => 1,
            PlanAxis::StayConstant => 0,
        }
    }
}

/// The chosen schedule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptationPlan {
    pub axis: PlanAxis,
    /// Configuration used during high-bandwidth phases.
    pub high_config: Config,
    /// Configuration used during low-bandwidth phases.
    pub low_config: Config,
    pub predicted_quality: f64,
    pub clamps_applied: Vec<String>,
}

/// One scored candidate, kept in the report as an audit trail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Candidate {
    pub axis: PlanAxis,
    pub high_config: Config,
    pub low_config: Config,
    pub predicted_quality: f64,
    pub clamps_applied: Vec<String>,
    pub high_bitrate_kbps: f64,
    pub low_bitrate_kbps: f64,
}

/// Full planning output: the chosen plan plus every candidate considered,
/// the candidates skipped for missing parameters, and evidence flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanReport {
    pub sequence_id: String,
    pub r_high_kbps: f64,
    pub r_low_kbps: f64,
    pub fz_s: f64,
    pub chosen: AdaptationPlan,
    pub candidates: Vec<Candidate>,
    pub skipped: Vec<String>,
    /// True when fz_s is outside the calibrated {1, 2, 3} s set.
    pub fz_extrapolated: bool,
    /// True when the chosen high configuration is below (t_max, q_min): the
    /// QS-over-FR preference is only evidenced at the high-quality point.
    pub outside_evidence: bool,
}

/// Predicted quality of an alternating (or constant) schedule.
///
/// Constant schedules score with the separable constant model. A schedule
/// varying frame rate at fixed qs scores with the FR-alternation model times
/// the constant-qs factor; a schedule varying qs at fixed frame rate scores
/// with the QS-alternation model times the constant-fr factor. Schedules
/// varying both axes are unsupported.
pub fn score_schedule(
    high: Config,
    low: Config,
    fz_s: f64,
    params: &ModelParams,
) -> Result<f64> {
    let fr_varies = high.fr != low.fr;
    let qs_varies = high.qs != low.qs;
    match (fr_varies, qs_varies) {
        (true, true) => Err(Error::MixedAxisSchedule),
        (false, false) => model::constant_quality(high.fr, high.qs, params),
        (true, false) => {
            let (t_h, t_l) = (high.fr.max(low.fr), high.fr.min(low.fr));
            Ok(model::qtv(t_h, t_l, params)? * model::mnqq_c(high.qs, params)?)
        }
        (false, true) => {
            let (q_l, q_h) = (high.qs.min(low.qs), high.qs.max(low.qs));
            Ok(model::qqv(q_h, q_l, fz_s, params)? * model::mnqt_c(high.fr, params)?)
        }
    }
}

struct LadderView {
    points: Vec<(Config, f64)>, // config, bitrate
}

impl LadderView {
    fn build(
        rates: &RateTable,
        sequence_id: &str,
        ladder: &[Config],
        skipped: &mut Vec<String>,
    ) -> Self {
        let mut points = Vec::new();
        for &c in ladder {
            match rates.bitrate(sequence_id, c.fr, c.qs) {
                Ok(r) => points.push((c, r)),
                Err(_) => skipped.push(format!(
                    "ladder point ({}, {}) has no bitrate for '{sequence_id}'; ignored",
                    c.fr, c.qs
                )),
            }
        }
        points.sort_by(|a, b| a.0.fr.total_cmp(&b.0.fr).then(a.0.qs.total_cmp(&b.0.qs)));
        LadderView { points }
    }

    fn frs(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|(c, _)| c.fr).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn qss(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.points.iter().map(|(c, _)| c.qs).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    fn bitrate(&self, c: Config) -> Option<f64> {
        self.points
            .iter()
            .find(|(p, _)| p.fr == c.fr && p.qs == c.qs)
            .map(|&(_, r)| r)
    }

    /// Highest frame rate at this qs whose bitrate fits the budget.
    fn best_fr_within(&self, qs: f64, budget: f64) -> Option<(f64, f64)> {
        self.points
            .iter()
            .filter(|(c, r)| c.qs == qs && *r <= budget)
            .map(|&(c, r)| (c.fr, r))
            .max_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Finest (smallest) stepsize at this fr whose bitrate fits the budget.
    fn best_qs_within(&self, fr: f64, budget: f64) -> Option<(f64, f64)> {
        self.points
            .iter()
            .filter(|(c, r)| c.fr == fr && *r <= budget)
            .map(|&(c, r)| (c.qs, r))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

/// Plans the schedule for one sequence under a two-level bandwidth pattern.
///
/// Candidates are generated per fixed level of the non-varying axis, clamped
/// to the guideline bounds, and scored; the argmax wins, with ties broken in
/// favor of VaryQs, then VaryFr, then StayConstant. Candidates whose clamped
/// configuration needs a decay rate the parameter set lacks are skipped and
/// listed in the report.
pub fn plan(
    rates: &RateTable,
    sequence_id: &str,
    r_high_kbps: f64,
    r_low_kbps: f64,
    fz_s: f64,
    params: &ModelParams,
    ladder: &[Config],
) -> Result<PlanReport> {
    if r_high_kbps < r_low_kbps {
        return Err(Error::InvalidBudgets {
            r_high: r_high_kbps,
            r_low: r_low_kbps,
        });
    }
    rates.validate()?;

    let mut skipped = Vec::new();
    let view = LadderView::build(rates, sequence_id, ladder, &mut skipped);
    if !view.points.iter().any(|&(_, r)| r <= r_low_kbps) {
        return Err(Error::InfeasibleBudget { r_low: r_low_kbps });
    }

    let mut candidates: Vec<Candidate> = Vec::new();

    // (a) constant at the best single configuration fitting the low budget
    {
        let mut best: Option<Candidate> = None;
        for &(c, r) in view.points.iter().filter(|&&(_, r)| r <= r_low_kbps) {
            match score_schedule(c, c, fz_s, params) {
                Ok(q) => {
                    if best.as_ref().is_none_or(|b| q > b.predicted_quality) {
                        best = Some(Candidate {
                            axis: PlanAxis::StayConstant,
                            high_config: c,
                            low_config: c,
                            predicted_quality: q,
                            clamps_applied: vec![],
                            high_bitrate_kbps: r,
                            low_bitrate_kbps: r,
                        });
                    }
                }
                Err(e) => skipped.push(format!("constant ({}, {}): {e}", c.fr, c.qs)),
            }
        }
        candidates.extend(best);
    }

    // (b) vary frame rate at each fixed qs
    for qs in view.qss() {
        let Some((t_l, r_l)) = view.best_fr_within(qs, r_low_kbps) else {
            continue;
        };
        let Some((t_h_raw, _)) = view.best_fr_within(qs, r_high_kbps) else {
            continue;
        };
        let mut clamps = Vec::new();
        // cap the high rate at twice the low one, rounding down to the ladder
        let mut t_h = t_h_raw;
        if t_h > 2.0 * t_l {
            let capped = view
                .frs()
                .into_iter()
                .filter(|&f| f <= 2.0 * t_l && f >= t_l)
                .fold(t_l, f64::max);
            t_h = capped;
            clamps.push(CLAMP_FR.to_string());
        }
        let Some(r_h) = view.bitrate(Config::new(t_h, qs)) else {
            skipped.push(format!("vary-FR at qs {qs}: clamped t_h {t_h} not on ladder"));
            continue;
        };
        let high = Config::new(t_h, qs);
        let low = Config::new(t_l, qs);
        match score_schedule(high, low, fz_s, params) {
            Ok(q) => candidates.push(Candidate {
                axis: if t_h == t_l {
                    PlanAxis::StayConstant
                } else {
                    PlanAxis::VaryFr
                },
                high_config: high,
                low_config: low,
                predicted_quality: q,
                clamps_applied: clamps,
                high_bitrate_kbps: r_h,
                low_bitrate_kbps: r_l,
            }),
            Err(e) => skipped.push(format!(
                "vary-FR at qs {qs} ({} <-> {} Hz): {e}",
                high.fr, low.fr
            )),
        }
    }

    // (c) vary quantization at each fixed fr
    for fr in view.frs() {
        let Some((q_h, r_l)) = view.best_qs_within(fr, r_low_kbps) else {
            continue;
        };
        let Some((q_l_raw, _)) = view.best_qs_within(fr, r_high_kbps) else {
            continue;
        };
        let mut clamps = Vec::new();
        // floor the fine stepsize at 0.4 of the coarse one, rounding up
        let mut q_l = q_l_raw;
        if q_l < 0.4 * q_h {
            let floored = view
                .qss()
                .into_iter()
                .filter(|&q| q >= 0.4 * q_h && q <= q_h)
                .fold(f64::INFINITY, f64::min);
            if floored.is_finite() {
                q_l = floored;
                clamps.push(CLAMP_QS.to_string());
            }
        }
        let Some(r_h) = view.bitrate(Config::new(fr, q_l)) else {
            skipped.push(format!("vary-QS at fr {fr}: clamped q_l {q_l} not on ladder"));
            continue;
        };
        let high = Config::new(fr, q_l);
        let low = Config::new(fr, q_h);
        match score_schedule(high, low, fz_s, params) {
            Ok(q) => candidates.push(Candidate {
                axis: if q_l == q_h {
                    PlanAxis::StayConstant
                } else {
                    PlanAxis::VaryQs
                },
                high_config: high,
                low_config: low,
                predicted_quality: q,
                clamps_applied: clamps,
                high_bitrate_kbps: r_h,
                low_bitrate_kbps: r_l,
            }),
            Err(e) => skipped.push(format!(
                "vary-QS at fr {fr} (QS {} <-> {}): {e}",
                high.qs, low.qs
            )),
        }
    }

    let chosen = candidates
        .iter()
        .max_by(|a, b| {
            a.predicted_quality
                .total_cmp(&b.predicted_quality)
                .then(a.axis.preference().cmp(&b.axis.preference()))
        })
        .ok_or(Error::InfeasibleBudget { r_low: r_low_kbps })?
        .clone();

    let outside_evidence =
        chosen.high_config.fr < params.t_max || chosen.high_config.qs > params.q_min;

    Ok(PlanReport {
        sequence_id: sequence_id.to_string(),
        r_high_kbps,
        r_low_kbps,
        fz_s,
        chosen: AdaptationPlan {
            axis: chosen.axis,
            high_config: chosen.high_config,
            low_config: chosen.low_config,
            predicted_quality: chosen.predicted_quality,
            clamps_applied: chosen.clamps_applied.clone(),
        },
        candidates,
        skipped,
        fz_extrapolated: !FzClass::is_calibrated(fz_s),
        outside_evidence,
    })
}
