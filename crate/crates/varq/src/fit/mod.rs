//! Least-squares fitting of the inverted-exponential decay rates, with
//! Pearson correlation and RMSE as goodness-of-fit measures.

mod minimize;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::condition::VariationAxis;
use crate::error::{Error, Result};
use crate::model::{inverted_exponential, level_key, qv_key, FzClass, ModelParams};
use crate::quality::QualityTable;

pub use minimize::minimize_log_bracketed;

/// Search bounds for the decay rate. The lower bound covers the linear
/// limit, the upper bound near-step behavior; optima landing on either bound
/// are reported with `at_boundary`.
pub const ALPHA_LO: f64 = 1e-4;
pub const ALPHA_HI: f64 = 200.0;
/// Absolute tolerance on the fitted alpha.
pub const ALPHA_TOL: f64 = 1e-8;

/// Outcome of one scalar curve fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub alpha: f64,
    pub pcc: f64,
    pub rmse: f64,
    pub n_points: usize,
    /// measured minus predicted, in input order
    pub residuals: Vec<f64>,
    /// true when the optimum landed on the alpha search bound
    pub at_boundary: bool,
}

/// Fits `y = (1 - e^{-a x}) / (1 - e^{-a})` by least squares over
/// `a in [ALPHA_LO, ALPHA_HI]`.
pub fn fit_inverted_exponential(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: points.len(),
        });
    }
    for &(x, y) in points {
        if !x.is_finite() {
            return Err(Error::NonFinite { what: "abscissa" });
        }
        if !y.is_finite() {
            return Err(Error::NonFinite { what: "ordinate" });
        }
    }
    let x0 = points[0].0;
    if points.iter().all(|&(x, _)| x == x0) {
        return Err(Error::DegenerateAbscissa);
    }

    let sse = |a: f64| -> f64 {
        points
            .iter()
            .map(|&(x, y)| {
                let d = y - inverted_exponential(x, a);
                d * d
            })
            .sum()
    };
    let (alpha, _) = minimize_log_bracketed(sse, ALPHA_LO, ALPHA_HI, ALPHA_TOL);

    let pred: Vec<f64> = points
        .iter()
        .map(|&(x, _)| inverted_exponential(x, alpha))
        .collect();
    let meas: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let residuals: Vec<f64> = meas.iter().zip(&pred).map(|(m, p)| m - p).collect();
    let at_boundary = alpha <= ALPHA_LO + 10.0 * ALPHA_TOL || alpha >= ALPHA_HI - 10.0 * ALPHA_TOL;
    Ok(FitResult {
        alpha,
        pcc: pcc(&pred, &meas)?,
        rmse: rmse(&pred, &meas)?,
        n_points: points.len(),
        residuals,
        at_boundary,
    })
}

/// Pearson correlation between predictions and measurements.
pub fn pcc(pred: &[f64], meas: &[f64]) -> Result<f64> {
    if pred.len() != meas.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: meas.len(),
        });
    }
    if pred.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: pred.len(),
        });
    }
    let n = pred.len() as f64;
    let mp = pred.iter().sum::<f64>() / n;
    let mm = meas.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vp = 0.0;
    let mut vm = 0.0;
    for (p, m) in pred.iter().zip(meas) {
        cov += (p - mp) * (m - mm);
        vp += (p - mp) * (p - mp);
        vm += (m - mm) * (m - mm);
    }
    if vp == 0.0 {
        return Err(Error::ZeroVariance {
            what: "predictions".into(),
        });
    }
    if vm == 0.0 {
        return Err(Error::ZeroVariance {
            what: "measurements".into(),
        });
    }
    Ok(cov / (vp.sqrt() * vm.sqrt()))
}

/// Root-mean-square error between predictions and measurements.
pub fn rmse(pred: &[f64], meas: &[f64]) -> Result<f64> {
    if pred.len() != meas.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: meas.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let ss: f64 = pred.iter().zip(meas).map(|(p, m)| (p - m) * (p - m)).sum();
    Ok((ss / pred.len() as f64).sqrt())
}

/// Fitted fragment for one sequence on the frame-rate axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QtvFit {
    pub sequence_id: String,
    pub alpha_t: FitResult,
    /// keyed by t_h, e.g. "30"
    pub alpha_tv: BTreeMap<String, FitResult>,
}

impl QtvFit {
    /// Copies the fitted rates into a parameter set.
    pub fn apply_to(&self, params: &mut ModelParams) {
        params.alpha_t = self.alpha_t.alpha;
        for (k, fit) in &self.alpha_tv {
            params.alpha_tv.insert(k.clone(), fit.alpha);
        }
    }
}

/// Fitted fragment for one sequence on the quantization axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QqvFit {
    pub sequence_id: String,
    pub alpha_q: FitResult,
    /// keyed by interval class and q_l, e.g. "fast:16"
    pub alpha_qv: BTreeMap<String, FitResult>,
}

impl QqvFit {
    pub fn apply_to(&self, params: &mut ModelParams) {
        params.alpha_q = self.alpha_q.alpha;
        for (k, fit) in &self.alpha_qv {
            params.alpha_qv.insert(k.clone(), fit.alpha);
        }
    }
}

/// Fits the frame-rate models for one sequence.
///
/// Step 1 fits alpha_t on the constant-FR points (t/t_max, Q(t,t)). Step 2
/// fits alpha_tv(t_h) on (t_l/t_h, Q(t_h,t_l)/Q(t_h,t_h)) for every t_h with
/// at least two distinct t_l, pooling all switching intervals. The measured
/// Q(t_h,t_h) is the ratio normalizer; t_h values without a constant anchor
/// or with a single t_l are skipped.
pub fn fit_qtv(table: &QualityTable, sequence_id: &str, t_max: f64) -> Result<QtvFit> {
    let entries: Vec<_> = table
        .entries()
        .iter()
        .filter(|e| e.condition.sequence_id == sequence_id)
        .filter(|e| e.condition.axis == VariationAxis::FrameRate)
        .collect();

    // constant-FR anchor quality per level, pooled over recorded intervals
    let mut constant_q: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.condition.is_constant()) {
        let slot = constant_q
            .entry(level_key(e.condition.high_level))
            .or_insert((0.0, 0));
        slot.0 += e.normalized_q;
        slot.1 += 1;
    }
    let constant_q: BTreeMap<String, f64> = constant_q
        .into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect();

    let const_points: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.condition.is_constant())
        .map(|e| (e.condition.high_level / t_max, e.normalized_q))
        .collect();
    if const_points.is_empty() {
        return Err(Error::MissingConstantPoints {
            axis: VariationAxis::FrameRate,
            sequence: sequence_id.to_string(),
        });
    }
    let alpha_t = fit_inverted_exponential(&const_points)?;

    // group variation entries by t_h
    let mut by_th: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut distinct_tl: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for e in &entries {
        let th_key = level_key(e.condition.high_level);
        let Some(&anchor) = constant_q.get(&th_key) else {
            continue; // no Q(t_h, t_h) to normalize against
        };
        let ratio = e.condition.low_level / e.condition.high_level;
        by_th
            .entry(th_key.clone())
            .or_default()
            .push((ratio, e.normalized_q / anchor));
        let tls = distinct_tl.entry(th_key).or_default();
        if !tls.contains(&e.condition.low_level) {
            tls.push(e.condition.low_level);
        }
    }

    let mut alpha_tv = BTreeMap::new();
    for (th_key, points) in by_th {
        if distinct_tl.get(&th_key).map_or(0, Vec::len) < 2 {
            continue;
        }
        alpha_tv.insert(th_key, fit_inverted_exponential(&points)?);
    }

    Ok(QtvFit {
        sequence_id: sequence_id.to_string(),
        alpha_t,
        alpha_tv,
    })
}

/// Fits the quantization models for one sequence.
///
/// Step 1 fits alpha_q on the constant-QS points (q_min/q, Q(q,q)). Step 2
/// fits alpha_qv per (interval class, q_l) on (q_l/q_h, Q(q_h,q_l)/Q(q_l,q_l)),
/// with the 1 s and 2 s intervals pooled into the fast class.
pub fn fit_qqv(table: &QualityTable, sequence_id: &str, q_min: f64) -> Result<QqvFit> {
    let entries: Vec<_> = table
        .entries()
        .iter()
        .filter(|e| e.condition.sequence_id == sequence_id)
        .filter(|e| e.condition.axis == VariationAxis::Quantization)
        .collect();

    let mut constant_q: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for e in entries.iter().filter(|e| e.condition.is_constant()) {
        let slot = constant_q
            .entry(level_key(e.condition.high_level))
            .or_insert((0.0, 0));
        slot.0 += e.normalized_q;
        slot.1 += 1;
    }
    let constant_q: BTreeMap<String, f64> = constant_q
        .into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect();

    let const_points: Vec<(f64, f64)> = entries
        .iter()
        .filter(|e| e.condition.is_constant())
        .map(|e| (q_min / e.condition.high_level, e.normalized_q))
        .collect();
    if const_points.is_empty() {
        return Err(Error::MissingConstantPoints {
            axis: VariationAxis::Quantization,
            sequence: sequence_id.to_string(),
        });
    }
    let alpha_q = fit_inverted_exponential(&const_points)?;

    let mut by_key: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    let mut distinct_qh: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for e in &entries {
        let ql_key = level_key(e.condition.high_level);
        let Some(&anchor) = constant_q.get(&ql_key) else {
            continue; // no Q(q_l, q_l) to normalize against
        };
        let class = FzClass::from_interval(e.condition.switch_interval_s);
        let key = qv_key(class, e.condition.high_level);
        let ratio = e.condition.high_level / e.condition.low_level;
        by_key
            .entry(key.clone())
            .or_default()
            .push((ratio, e.normalized_q / anchor));
        let qhs = distinct_qh.entry(key).or_default();
        if !qhs.contains(&e.condition.low_level) {
            qhs.push(e.condition.low_level);
        }
    }

    let mut alpha_qv = BTreeMap::new();
    for (key, points) in by_key {
        if distinct_qh.get(&key).map_or(0, Vec::len) < 2 {
            continue;
        }
        alpha_qv.insert(key, fit_inverted_exponential(&points)?);
    }

    Ok(QqvFit {
        sequence_id: sequence_id.to_string(),
        alpha_q,
        alpha_qv,
    })
}

/// Plain goodness-of-fit summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub pcc: f64,
    pub rmse: f64,
    pub n_points: usize,
}

/// One fitted curve in a fit report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSummary {
    pub sequence_id: String,
    pub curve: String,
    pub alpha: f64,
    pub pcc: f64,
    pub rmse: f64,
    pub n_points: usize,
    pub at_boundary: bool,
}

/// Fit report for one axis: every fitted curve, goodness of fit per
/// sequence, and the pooled figures over all sequences together.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    pub axis: String,
    pub curves: Vec<CurveSummary>,
    pub per_sequence: Vec<(String, GoodnessOfFit)>,
    pub pooled: GoodnessOfFit,
}

/// Measured vs. model-predicted normalized quality for every entry of one
/// axis that the parameter set can predict. Entries needing a missing decay
/// rate are skipped (their t_h had too few levels to fit).
pub fn predictions_for_axis(
    table: &QualityTable,
    axis: VariationAxis,
    params: &ModelParams,
) -> Vec<(crate::condition::TestCondition, f64, f64)> {
    table
        .entries()
        .iter()
        .filter(|e| e.condition.axis == axis)
        .filter_map(|e| {
            crate::model::predict_condition(&e.condition, params)
                .ok()
                .map(|pred| (e.condition.clone(), e.normalized_q, pred))
        })
        .collect()
}

/// Pooled goodness of fit over (measured, predicted) rows.
pub fn gof(rows: &[(crate::condition::TestCondition, f64, f64)]) -> Result<GoodnessOfFit> {
    let meas: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let pred: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(GoodnessOfFit {
        pcc: pcc(&pred, &meas)?,
        rmse: rmse(&pred, &meas)?,
        n_points: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forward(xs: &[f64], alpha: f64) -> Vec<(f64, f64)> {
        xs.iter().map(|&x| (x, inverted_exponential(x, alpha))).collect()
    }

    #[test]
    fn recovers_alpha_from_exact_points() {
        let pts = forward(&[0.25, 0.5, 0.75, 1.0], 6.0);
        let fit = fit_inverted_exponential(&pts).unwrap();
        assert!((fit.alpha - 6.0).abs() < 1e-4, "alpha = {}", fit.alpha);
        assert!(fit.rmse <= 1e-8);
        assert!(!fit.at_boundary);
    }

    #[test]
    fn round_trip_across_alpha_range() {
        let xs: Vec<f64> = (1..=8).map(|i| i as f64 / 8.0).collect();
        for alpha in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let fit = fit_inverted_exponential(&forward(&xs, alpha)).unwrap();
            assert!(
                (fit.alpha - alpha).abs() / alpha < 1e-3,
                "alpha {alpha} -> {}",
                fit.alpha
            );
        }
    }

    #[test]
    fn linear_data_lands_near_lower_bound() {
        let pts: Vec<(f64, f64)> = (1..=8).map(|i| (i as f64 / 8.0, i as f64 / 8.0)).collect();
        let fit = fit_inverted_exponential(&pts).unwrap();
        assert!(fit.at_boundary, "alpha = {}", fit.alpha);
        assert!(fit.rmse <= 1e-3);
    }

    #[test]
    fn degenerate_abscissa_rejected() {
        let pts = vec![(0.5, 0.7), (0.5, 0.8)];
        assert!(matches!(
            fit_inverted_exponential(&pts),
            Err(Error::DegenerateAbscissa)
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let pts = vec![(0.5, f64::NAN), (1.0, 1.0)];
        assert!(fit_inverted_exponential(&pts).is_err());
    }

    #[test]
    fn local_minimum_certificate() {
        let pts = forward(&[0.2, 0.4, 0.6, 0.8, 1.0], 5.0);
        let fit = fit_inverted_exponential(&pts).unwrap();
        let sse = |a: f64| -> f64 {
            pts.iter()
                .map(|&(x, y)| (y - inverted_exponential(x, a)).powi(2))
                .sum()
        };
        assert!(sse(fit.alpha) <= sse(fit.alpha - 1e-3));
        assert!(sse(fit.alpha) <= sse(fit.alpha + 1e-3));
    }

    #[test]
    fn pcc_identity_and_anticorrelation() {
        let a = [1.0, 2.0, 3.0];
        assert!((pcc(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        let b = [-1.0, -2.0, -3.0];
        assert!((pcc(&a, &b).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn pcc_rmse_hand_values() {
        let pred = [1.0, 2.0, 3.0];
        let meas = [1.1, 1.9, 3.2];
        // frozen from direct computation of the Pearson formula
        assert!((pcc(&pred, &meas).unwrap() - 0.9906836053628413).abs() < 1e-12);
        assert!((rmse(&pred, &meas).unwrap() - 0.14142135623730964).abs() < 1e-12);
    }

    #[test]
    fn pcc_constant_vector_is_error() {
        let pred = [2.0, 2.0, 2.0];
        let meas = [1.0, 2.0, 3.0];
        assert!(matches!(pcc(&pred, &meas), Err(Error::ZeroVariance { .. })));
    }

    use crate::condition::TestCondition;
    use crate::quality::QualityEntry;

    fn fr_entry(seq: &str, th: f64, tl: f64, fz: f64, q: f64) -> QualityEntry {
        QualityEntry {
            condition: TestCondition {
                axis: VariationAxis::FrameRate,
                high_level: th,
                low_level: tl,
                switch_interval_s: fz,
                fixed_other: 16.0,
                sequence_id: seq.into(),
            },
            mos: q * 85.0,
            normalized_q: q,
            n_ratings: 20,
            std_dev: 0.0,
        }
    }

    fn qs_entry(seq: &str, ql: f64, qh: f64, fz: f64, q: f64) -> QualityEntry {
        QualityEntry {
            condition: TestCondition {
                axis: VariationAxis::Quantization,
                high_level: ql,
                low_level: qh,
                switch_interval_s: fz,
                fixed_other: 30.0,
                sequence_id: seq.into(),
            },
            mos: q * 85.0,
            normalized_q: q,
            n_ratings: 20,
            std_dev: 0.0,
        }
    }

    #[test]
    fn fit_qtv_recovers_noiseless_table() {
        let mut truth = ModelParams {
            alpha_t: 6.0,
            ..ModelParams::default()
        };
        truth.set_alpha_tv(30.0, 4.0);
        truth.set_alpha_tv(15.0, 3.0);

        let mut entries = Vec::new();
        for t in [30.0, 15.0, 7.5] {
            let q = inverted_exponential(t / 30.0, truth.alpha_t);
            entries.push(fr_entry("s", t, t, 1.0, q));
        }
        for (th, tl) in [(30.0, 15.0), (30.0, 7.5), (15.0, 7.5)] {
            for fz in [1.0, 2.0, 3.0] {
                let q = inverted_exponential(th / 30.0, truth.alpha_t)
                    * inverted_exponential(tl / th, truth.alpha_tv_for(th).unwrap());
                entries.push(fr_entry("s", th, tl, fz, q));
            }
        }
        let table = QualityTable::new(entries);
        let fit = fit_qtv(&table, "s", 30.0).unwrap();
        assert!((fit.alpha_t.alpha - 6.0).abs() / 6.0 < 0.01);
        assert!((fit.alpha_tv["30"].alpha - 4.0).abs() / 4.0 < 0.01);
        assert!((fit.alpha_tv["15"].alpha - 3.0).abs() / 3.0 < 0.01);
    }

    #[test]
    fn fit_qtv_constant_only_table_leaves_variation_empty() {
        let entries = vec![
            fr_entry("s", 30.0, 30.0, 1.0, 1.0),
            fr_entry("s", 15.0, 15.0, 1.0, 0.95),
        ];
        let table = QualityTable::new(entries);
        let fit = fit_qtv(&table, "s", 30.0).unwrap();
        assert!(fit.alpha_tv.is_empty());
        assert!(fit.alpha_t.alpha > 0.0);
    }

    #[test]
    fn fit_qtv_without_constant_points_is_error() {
        let table = QualityTable::new(vec![fr_entry("s", 30.0, 15.0, 1.0, 0.9)]);
        assert!(matches!(
            fit_qtv(&table, "s", 30.0),
            Err(Error::MissingConstantPoints { .. })
        ));
    }

    #[test]
    fn fit_qqv_recovers_noiseless_table() {
        let mut truth = ModelParams {
            alpha_q: 3.0,
            ..ModelParams::default()
        };
        truth.set_alpha_qv(FzClass::Fast, 16.0, 5.0);
        truth.set_alpha_qv(FzClass::Slow, 16.0, 7.0);

        let mut entries = Vec::new();
        for q in [16.0, 25.0, 40.0, 64.0, 102.0] {
            entries.push(qs_entry("s", q, q, 1.0, inverted_exponential(16.0 / q, 3.0)));
        }
        for qh in [25.0, 40.0, 64.0, 102.0] {
            for fz in [1.0, 2.0, 3.0] {
                let a = truth.alpha_qv_for(fz, 16.0).unwrap();
                let q = inverted_exponential(16.0 / 16.0, 3.0)
                    * inverted_exponential(16.0 / qh, a);
                entries.push(qs_entry("s", 16.0, qh, fz, q));
            }
        }
        let table = QualityTable::new(entries);
        let fit = fit_qqv(&table, "s", 16.0).unwrap();
        assert!((fit.alpha_q.alpha - 3.0).abs() / 3.0 < 0.01);
        assert!((fit.alpha_qv["fast:16"].alpha - 5.0).abs() / 5.0 < 0.01);
        assert!((fit.alpha_qv["slow:16"].alpha - 7.0).abs() / 7.0 < 0.01);
    }

    #[test]
    fn fit_qqv_constant_only_table_leaves_variation_empty() {
        let entries = vec![
            qs_entry("s", 16.0, 16.0, 1.0, 1.0),
            qs_entry("s", 40.0, 40.0, 1.0, 0.7),
            qs_entry("s", 102.0, 102.0, 1.0, 0.4),
        ];
        let table = QualityTable::new(entries);
        let fit = fit_qqv(&table, "s", 16.0).unwrap();
        assert!(fit.alpha_qv.is_empty());
    }
}
