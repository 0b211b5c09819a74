//! Deterministic synthetic rating panels for tests, demos and pipeline
//! validation.
//!
//! Panels are generated from known ground-truth decay rates: every viewer
//! gets a fixed bias and gain, every rating Gaussian noise, and two kinds of
//! defective viewers can be planted — a two-sided outlier that the BT.500
//! screen should reject, and a one-sided over-rater on a single sequence
//! that only the consistency screen can catch.
//!
//! Randomness comes from an internal splitmix64 generator so that seeds
//! reproduce byte-identical panels across platforms and releases.

use crate::condition::{RatingRecord, TestCondition, VariationAxis};
use crate::model::ModelParams;

/// splitmix64: tiny, seedable, stable across versions.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// The frame-rate condition grid for one sequence: five constant rates
/// (recorded once, under Fz = 1 s) and three alternating pairs at each
/// switching interval.
pub fn fr_condition_grid(sequence_id: &str, fz_set: &[f64]) -> Vec<TestCondition> {
    let mut conds = Vec::new();
    let make = |hi: f64, lo: f64, fz: f64| TestCondition {
        axis: VariationAxis::FrameRate,
        high_level: hi,
        low_level: lo,
        switch_interval_s: fz,
        fixed_other: 16.0,
        sequence_id: sequence_id.to_string(),
    };
    for t in [30.0, 15.0, 7.5, 3.75, 1.875] {
        conds.push(make(t, t, fz_set[0]));
    }
    for (th, tl) in [(30.0, 15.0), (30.0, 7.5), (15.0, 7.5)] {
        for &fz in fz_set {
            conds.push(make(th, tl, fz));
        }
    }
    conds
}

/// The quantization condition grid for one sequence: five constant
/// stepsizes and six alternating pairs at each switching interval.
pub fn qs_condition_grid(sequence_id: &str, fz_set: &[f64]) -> Vec<TestCondition> {
    let mut conds = Vec::new();
    let make = |ql: f64, qh: f64, fz: f64| TestCondition {
        axis: VariationAxis::Quantization,
        high_level: ql,
        low_level: qh,
        switch_interval_s: fz,
        fixed_other: 30.0,
        sequence_id: sequence_id.to_string(),
    };
    for q in [16.0, 25.0, 40.0, 64.0, 102.0] {
        conds.push(make(q, q, fz_set[0]));
    }
    for (ql, qh) in [
        (16.0, 25.0),
        (16.0, 40.0),
        (16.0, 64.0),
        (16.0, 102.0),
        (40.0, 64.0),
        (40.0, 102.0),
    ] {
        for &fz in fz_set {
            conds.push(make(ql, qh, fz));
        }
    }
    conds
}

/// Model-true normalized quality of a condition under the given parameters.
/// Panics when a variation key for the grid is missing, since generated
/// grids are expected to be covered by the ground-truth parameter set.
pub fn true_quality(cond: &TestCondition, params: &ModelParams) -> f64 {
    crate::model::predict_condition(cond, params).expect("ground-truth params cover the grid")
}

/// Panel construction knobs.
#[derive(Debug, Clone)]
pub struct PanelSpec {
    pub viewers: usize,
    /// Raw-score standard deviation of per-rating noise.
    pub noise_sigma: f64,
    /// Per-viewer additive bias drawn uniformly from +/- this bound.
    pub bias_range: f64,
    /// Per-viewer gain drawn uniformly from 1 +/- this bound.
    pub gain_range: f64,
    /// MOS assigned to the reference condition.
    pub reference_mos: f64,
    /// Plant a two-sided outlier (last-but-one viewer) for BT.500 to catch:
    /// spikes of this size on the lowest- and highest-quality tenth of PVSs.
    pub outlier_spike: Option<f64>,
    /// Plant a one-sided over-rater (last viewer) on this sequence: +45 raw
    /// points on its largest-swing alternating conditions.
    pub inconsistent_on: Option<String>,
}

impl Default for PanelSpec {
    fn default() -> Self {
        PanelSpec {
            viewers: 20,
            noise_sigma: 5.0,
            bias_range: 6.0,
            gain_range: 0.08,
            reference_mos: 85.0,
            outlier_spike: None,
            inconsistent_on: None,
        }
    }
}

/// Identifier of the planted BT.500 outlier, when enabled.
pub fn outlier_viewer_id(spec: &PanelSpec) -> String {
    format!("v{:02}", spec.viewers - 1)
}

/// Identifier of the planted inconsistent viewer, when enabled.
pub fn inconsistent_viewer_id(spec: &PanelSpec) -> String {
    format!("v{:02}", spec.viewers)
}

/// Conditions the inconsistent viewer over-rates: alternating pairs with the
/// largest level swing on the targeted sequence.
fn boosted(cond: &TestCondition, sequence: &str) -> bool {
    if cond.sequence_id != sequence || cond.is_constant() {
        return false;
    }
    match cond.axis {
        VariationAxis::FrameRate => cond.high_level == 30.0 && cond.low_level == 7.5,
        VariationAxis::Quantization => cond.high_level == 16.0 && cond.low_level == 102.0,
    }
}

/// Generates a rating panel over the given conditions from ground truth.
pub fn generate_panel(
    conditions: &[TestCondition],
    params: &ModelParams,
    spec: &PanelSpec,
    seed: u64,
) -> Vec<RatingRecord> {
    let mut rng = SplitMix64::new(seed);
    let n = conditions.len();

    let viewer_ids: Vec<String> = (1..=spec.viewers).map(|i| format!("v{i:02}")).collect();
    let biases: Vec<f64> = viewer_ids
        .iter()
        .map(|_| rng.uniform(-spec.bias_range, spec.bias_range))
        .collect();
    let gains: Vec<f64> = viewer_ids
        .iter()
        .map(|_| rng.uniform(1.0 - spec.gain_range, 1.0 + spec.gain_range))
        .collect();

    let mos_true: Vec<f64> = conditions
        .iter()
        .map(|c| spec.reference_mos * true_quality(c, params))
        .collect();

    // outlier spikes: +spike on the lowest-quality tenth, -spike on the
    // highest, keeping the spiked scores inside the rating scale
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| mos_true[a].total_cmp(&mos_true[b]));
    let k = ((n as f64) * 0.1).round().max(1.0) as usize;
    let spike_up: Vec<usize> = order[..k].to_vec();
    let spike_down: Vec<usize> = order[n - k..].to_vec();

    let outlier = outlier_viewer_id(spec);
    let inconsistent = inconsistent_viewer_id(spec);

    let mut records = Vec::with_capacity(spec.viewers * n);
    for (vi, viewer) in viewer_ids.iter().enumerate() {
        for (ci, cond) in conditions.iter().enumerate() {
            let mut score = gains[vi] * mos_true[ci] + biases[vi] + spec.noise_sigma * rng.normal();
            if let Some(spike) = spec.outlier_spike {
                if *viewer == outlier {
                    if spike_up.contains(&ci) {
                        score += spike;
                    } else if spike_down.contains(&ci) {
                        score -= spike;
                    }
                }
            }
            if let Some(seq) = &spec.inconsistent_on {
                if *viewer == inconsistent && boosted(cond, seq) {
                    score += 45.0;
                }
            }
            records.push(RatingRecord {
                viewer_id: viewer.clone(),
                condition: cond.clone(),
                raw_score: score.clamp(0.0, 100.0),
            });
        }
    }
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FzClass;

    pub(crate) fn truth_params() -> ModelParams {
        let mut p = ModelParams {
            alpha_t: 7.0,
            alpha_q: 3.2,
            ..ModelParams::default()
        };
        p.set_alpha_tv(30.0, 7.0);
        p.set_alpha_tv(15.0, 5.0);
        p.set_alpha_qv(FzClass::Fast, 16.0, 5.0);
        p.set_alpha_qv(FzClass::Slow, 16.0, 6.5);
        p.set_alpha_qv(FzClass::Fast, 40.0, 4.0);
        p.set_alpha_qv(FzClass::Slow, 40.0, 5.5);
        p
    }

    #[test]
    fn rng_is_reproducible() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn normal_moments_are_sane() {
        let mut rng = SplitMix64::new(7);
        let xs: Vec<f64> = (0..20000).map(|_| rng.normal()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.03, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn panel_is_deterministic_and_in_range() {
        let conds = fr_condition_grid("seqA", &[1.0, 2.0, 3.0]);
        let p = truth_params();
        let spec = PanelSpec::default();
        let a = generate_panel(&conds, &p, &spec, 11);
        let b = generate_panel(&conds, &p, &spec, 11);
        assert_eq!(a.len(), spec.viewers * conds.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.raw_score, y.raw_score);
            assert!((0.0..=100.0).contains(&x.raw_score));
        }
    }

    #[test]
    fn grids_have_expected_shape() {
        let fr = fr_condition_grid("s", &[1.0, 2.0, 3.0]);
        assert_eq!(fr.len(), 5 + 3 * 3);
        let qs = qs_condition_grid("s", &[1.0, 2.0, 3.0]);
        assert_eq!(qs.len(), 5 + 6 * 3);
        for c in fr.iter().chain(&qs) {
            c.validate().unwrap();
        }
    }
}
