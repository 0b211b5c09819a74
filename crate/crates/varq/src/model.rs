//! Closed-form quality models for constant and alternating frame rate / QS.
//!
//! All four curve families share one inverted-exponential shape
//! `f(x; a) = (1 - exp(-a*x)) / (1 - exp(-a))` evaluated on a normalized
//! abscissa in (0, 1]. `f` is strictly increasing in `x`, equals 1 at
//! `x = 1`, and a smaller `a` gives a faster quality drop as `x` shrinks.
//!
//! * [`mnqt_c`] — quality of constant-FR video vs. `t / t_max`;
//! * [`mnqt_v`] — degradation from alternating t_h/t_l vs. `t_l / t_h`;
//! * [`qtv`]    — their product: overall quality under FR alternation;
//! * [`mnqq_c`] — quality of constant-QS video vs. `q_min / q`;
//! * [`mnqq_v`] — degradation from alternating q_l/q_h vs. `q_l / q_h`;
//! * [`qqv`]    — their product: overall quality under QS alternation.
//!
//! The FR-variation decay rate depends on t_h only (the switching interval
//! has no consistent effect there), while the QS-variation decay rate is
//! keyed by the switching-interval class and q_l, with 1 s and 2 s intervals
//! sharing one parameter.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_T_MAX: f64 = 30.0;
pub const DEFAULT_Q_MIN: f64 = 16.0;

/// Switching-interval class for the QS-variation parameter.
///
/// Intervals of 1 s and 2 s behave alike and share a parameter; 3 s switches
/// are slow enough to decay differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FzClass {
    Fast,
    Slow,
}

impl FzClass {
    /// Buckets a switching interval: Fz < 3 s is fast, Fz >= 3 s is slow.
    pub fn from_interval(fz_s: f64) -> FzClass {
        if fz_s < 3.0 {
            FzClass::Fast
        } else {
            FzClass::Slow
        }
    }

    /// True when the interval is one of the calibrated values {1, 2, 3} s.
    /// Anything else is an extrapolation and is flagged in report metadata.
    pub fn is_calibrated(fz_s: f64) -> bool {
        fz_s == 1.0 || fz_s == 2.0 || fz_s == 3.0
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FzClass::Fast => "fast",
            FzClass::Slow => "slow",
        }
    }
}

impl fmt::Display for FzClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Canonical map key for a float level (shortest round-trip form, e.g. "7.5").
pub(crate) fn level_key(v: f64) -> String {
    format!("{v}")
}

/// Map key for a QS-variation parameter, e.g. "fast:16".
pub fn qv_key(class: FzClass, q_l: f64) -> String {
    format!("{}:{}", class.as_str(), level_key(q_l))
}

/// Fitted decay-rate parameters for one source sequence.
///
/// Serialized as JSON with `alpha_tv` keyed by t_h ("30", "15", ...) and
/// `alpha_qv` keyed by interval class and q_l ("fast:16", "slow:40", ...).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha_t: f64,
    #[serde(default)]
    pub alpha_tv: BTreeMap<String, f64>,
    pub alpha_q: f64,
    #[serde(default)]
    pub alpha_qv: BTreeMap<String, f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_q_min")]
    pub q_min: f64,
}

fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}

fn default_q_min() -> f64 {
    DEFAULT_Q_MIN
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            alpha_t: 1.0,
            alpha_tv: BTreeMap::new(),
            alpha_q: 1.0,
            alpha_qv: BTreeMap::new(),
            t_max: DEFAULT_T_MAX,
            q_min: DEFAULT_Q_MIN,
        }
    }
}

impl ModelParams {
    /// Checks that every decay rate is strictly positive. The model forms
    /// divide by `1 - exp(-a)`, which vanishes at a = 0; callers wanting the
    /// linear limit pass a small epsilon instead.
    pub fn validate(&self) -> Result<()> {
        let check = |name: String, v: f64| -> Result<()> {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::NonPositiveAlpha { name, value: v });
            }
            Ok(())
        };
        check("alpha_t".into(), self.alpha_t)?;
        check("alpha_q".into(), self.alpha_q)?;
        check("t_max".into(), self.t_max)?;
        check("q_min".into(), self.q_min)?;
        for (k, &v) in &self.alpha_tv {
            check(format!("alpha_tv[{k}]"), v)?;
        }
        for (k, &v) in &self.alpha_qv {
            check(format!("alpha_qv[{k}]"), v)?;
        }
        Ok(())
    }

    pub fn set_alpha_tv(&mut self, t_h: f64, alpha: f64) {
        self.alpha_tv.insert(level_key(t_h), alpha);
    }

    /// Stores one QS-variation parameter. `FzClass::Fast` covers both the
    /// 1 s and 2 s switching intervals by construction.
    pub fn set_alpha_qv(&mut self, class: FzClass, q_l: f64, alpha: f64) {
        self.alpha_qv.insert(qv_key(class, q_l), alpha);
    }

    pub fn alpha_tv_for(&self, t_h: f64) -> Result<f64> {
        let key = level_key(t_h);
        self.alpha_tv
            .get(&key)
            .copied()
            .ok_or_else(|| Error::MissingAlphaTv {
                t_h: key,
                known: self.alpha_tv.keys().cloned().collect(),
            })
    }

    pub fn alpha_qv_for(&self, fz_s: f64, q_l: f64) -> Result<f64> {
        let key = qv_key(FzClass::from_interval(fz_s), q_l);
        self.alpha_qv
            .get(&key)
            .copied()
            .ok_or_else(|| Error::MissingAlphaQv {
                key,
                known: self.alpha_qv.keys().cloned().collect(),
            })
    }
}

/// The shared inverted-exponential curve on x in (0, 1].
#[inline]
pub fn inverted_exponential(x: f64, alpha: f64) -> f64 {
    (1.0 - (-alpha * x).exp()) / (1.0 - (-alpha).exp())
}

/// Normalized quality of constant-frame-rate video: increasing in `t`,
/// exactly 1 at `t = t_max`.
pub fn mnqt_c(t: f64, params: &ModelParams) -> Result<f64> {
    if !t.is_finite() || t <= 0.0 || t > params.t_max {
        return Err(Error::FrameRateOutOfRange {
            t,
            t_max: params.t_max,
        });
    }
    Ok(inverted_exponential(t / params.t_max, params.alpha_t))
}

/// Quality ratio Q(t_h, t_l) / Q(t_h, t_h) for frame-rate alternation:
/// exactly 1 when t_l = t_h, decaying as t_l / t_h shrinks.
pub fn mnqt_v(t_h: f64, t_l: f64, params: &ModelParams) -> Result<f64> {
    if !t_l.is_finite() || t_l <= 0.0 || t_l > t_h {
        return Err(Error::LevelOrder {
            axis: crate::condition::VariationAxis::FrameRate,
            better: t_h,
            worse: t_l,
        });
    }
    let alpha = params.alpha_tv_for(t_h)?;
    Ok(inverted_exponential(t_l / t_h, alpha))
}

/// Overall quality of video alternating between frame rates t_h and t_l:
/// the constant-t_h quality times the alternation degradation. The switching
/// interval is deliberately absent.
pub fn qtv(t_h: f64, t_l: f64, params: &ModelParams) -> Result<f64> {
    Ok(mnqt_c(t_h, params)? * mnqt_v(t_h, t_l, params)?)
}

/// Normalized quality of constant-QS video: decreasing in `q`, exactly 1 at
/// `q = q_min`.
pub fn mnqq_c(q: f64, params: &ModelParams) -> Result<f64> {
    if !q.is_finite() || q < params.q_min {
        return Err(Error::QsOutOfRange {
            q,
            q_min: params.q_min,
        });
    }
    Ok(inverted_exponential(params.q_min / q, params.alpha_q))
}

/// Quality ratio Q(q_h, q_l) / Q(q_l, q_l) for QS alternation: exactly 1
/// when q_l = q_h, decaying as q_l / q_h shrinks.
pub fn mnqq_v(q_h: f64, q_l: f64, fz_s: f64, params: &ModelParams) -> Result<f64> {
    if !q_l.is_finite() || q_l < params.q_min || q_l > q_h {
        return Err(Error::LevelOrder {
            axis: crate::condition::VariationAxis::Quantization,
            better: q_l,
            worse: q_h,
        });
    }
    let alpha = params.alpha_qv_for(fz_s, q_l)?;
    Ok(inverted_exponential(q_l / q_h, alpha))
}

/// Overall quality of video alternating between stepsizes q_l and q_h: the
/// constant-q_l quality times the alternation degradation.
pub fn qqv(q_h: f64, q_l: f64, fz_s: f64, params: &ModelParams) -> Result<f64> {
    Ok(mnqq_c(q_l, params)? * mnqq_v(q_h, q_l, fz_s, params)?)
}

/// Quality of a constant (fr, qs) operating point as the separable product
/// of the two constant-axis models. Reduces to `mnqt_c` at qs = q_min and to
/// `mnqq_c` at fr = t_max.
pub fn constant_quality(fr: f64, qs: f64, params: &ModelParams) -> Result<f64> {
    Ok(mnqt_c(fr, params)? * mnqq_c(qs, params)?)
}

/// H.264 quantization parameter to quantization stepsize: QS = 2^((QP-4)/6),
/// rounded to the nearest integer stepsize.
pub fn qp_to_qs(qp: u32) -> f64 {
    (2f64).powf((qp as f64 - 4.0) / 6.0).round()
}

/// Model prediction for one test condition: the constant-axis curve for
/// constant conditions, the full alternation model otherwise.
pub fn predict_condition(
    cond: &crate::condition::TestCondition,
    params: &ModelParams,
) -> Result<f64> {
    use crate::condition::VariationAxis;
    match cond.axis {
        VariationAxis::FrameRate => {
            if cond.is_constant() {
                mnqt_c(cond.high_level, params)
            } else {
                qtv(cond.high_level, cond.low_level, params)
            }
        }
        VariationAxis::Quantization => {
            if cond.is_constant() {
                mnqq_c(cond.high_level, params)
            } else {
                qqv(cond.low_level, cond.high_level, cond.switch_interval_s, params)
            }
        }
    }
}
