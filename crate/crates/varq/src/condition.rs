//! Test-condition and rating types shared across the pipeline.
//!
//! A processed video sequence (PVS) is identified by its [`TestCondition`]:
//! which axis alternates (frame rate or quantization stepsize), the two
//! alternation levels, the switching interval and the held-constant value on
//! the other axis, plus the source sequence the clip was cut from.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which encoding parameter alternates over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VariationAxis {
    /// Frame rate alternates; QS is held constant.
    FrameRate,
    /// Quantization stepsize alternates; frame rate is held constant.
    Quantization,
}

impl VariationAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariationAxis::FrameRate => "FR",
            VariationAxis::Quantization => "QS",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "FR" | "fr" => Some(VariationAxis::FrameRate),
            "QS" | "qs" => Some(VariationAxis::Quantization),
            _ => None,
        }
    }
}

impl fmt::Display for VariationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One alternation pattern applied to one source sequence.
///
/// Level slots are ordered by quality, not by magnitude:
/// * frame-rate axis: `high_level` = t_h, `low_level` = t_l, with t_h >= t_l;
/// * quantization axis: `high_level` = q_l (the finer, better stepsize) and
///   `low_level` = q_h (the coarser one), with q_l <= q_h.
///
/// A condition with `high_level == low_level` is a constant-parameter clip;
/// the switching interval is then inert and conventionally recorded once.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestCondition {
    pub axis: VariationAxis,
    pub high_level: f64,
    pub low_level: f64,
    /// Switching interval Fz in seconds.
    pub switch_interval_s: f64,
    /// Held-constant value on the other axis (QS for FR tests, FR for QS tests).
    pub fixed_other: f64,
    pub sequence_id: String,
}

impl TestCondition {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("high_level", self.high_level),
            ("low_level", self.low_level),
            ("fz_s", self.switch_interval_s),
            ("fixed_other", self.fixed_other),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::NonPositiveAlpha {
                    name: format!("condition field {name}"),
                    value: v,
                });
            }
        }
        match self.axis {
            VariationAxis::FrameRate => {
                if self.high_level < self.low_level {
                    return Err(Error::LevelOrder {
                        axis: self.axis,
                        better: self.high_level,
                        worse: self.low_level,
                    });
                }
            }
            VariationAxis::Quantization => {
                // high_level holds q_l which must be the finer (smaller) stepsize
                if self.high_level > self.low_level {
                    return Err(Error::LevelOrder {
                        axis: self.axis,
                        better: self.high_level,
                        worse: self.low_level,
                    });
                }
            }
        }
        Ok(())
    }

    /// True when both level slots are equal (no alternation happens).
    pub fn is_constant(&self) -> bool {
        self.high_level == self.low_level
    }

    /// Quality-better level: t_h for FR, q_l for QS.
    pub fn better_level(&self) -> f64 {
        self.high_level
    }

    /// Quality-worse level: t_l for FR, q_h for QS.
    pub fn worse_level(&self) -> f64 {
        self.low_level
    }

    fn key(&self) -> (&str, VariationAxis, f64, f64, f64, f64) {
        (
            &self.sequence_id,
            self.axis,
            self.high_level,
            self.low_level,
            self.switch_interval_s,
            self.fixed_other,
        )
    }
}

impl PartialEq for TestCondition {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TestCondition {}

impl PartialOrd for TestCondition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TestCondition {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.key();
        let b = other.key();
        a.0.cmp(b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.total_cmp(&b.3))
            .then(a.4.total_cmp(&b.4))
            .then(a.5.total_cmp(&b.5))
    }
}

impl fmt::Display for TestCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{}({}, {}, Fz={}s)",
            self.sequence_id,
            self.axis,
            self.high_level,
            self.low_level,
            self.switch_interval_s
        )
    }
}

/// One viewer's raw score for one PVS, on the 0..100 rating scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub viewer_id: String,
    pub condition: TestCondition,
    pub raw_score: f64,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<()> {
        self.condition.validate()?;
        if !self.raw_score.is_finite() || !(0.0..=100.0).contains(&self.raw_score) {
            return Err(Error::ScoreOutOfRange {
                score: self.raw_score,
                viewer: self.viewer_id.clone(),
            });
        }
        Ok(())
    }
}
