//! # varq
//!
//! Perceptual quality of video whose frame rate (FR) or quantization
//! stepsize (QS) alternates between two levels over a fixed interval, plus
//! the machinery around it: subjective-data screening, model fitting,
//! significance testing and rate-adaptation planning.
//!
//! The crate is organized around five building blocks:
//!
//! * [`screening`] — per-viewer z-scoring, BT.500-11 observer rejection and
//!   a monotonic-consistency screen for raw rating panels;
//! * [`quality`] — MOS aggregation and normalized quality tables;
//! * [`model`] — the closed-form quality models for constant and
//!   alternating FR/QS, all sharing one inverted-exponential curve;
//! * [`fit`] — least-squares recovery of the decay-rate parameters with
//!   PCC/RMSE goodness of fit;
//! * [`anova`] — fixed-effects analysis of variance with exact
//!   F-distribution tail probabilities;
//! * [`planner`] — schedule recommendation under a two-level bandwidth
//!   pattern, applying the alternation-magnitude guidelines.
//!
//! ## Runnable examples
//!
//! Each major capability has a standalone example:
//!
//! ```bash
//! cargo run -p varq --example screen_pipeline   # screening a noisy panel
//! cargo run -p varq --example fit_models        # recovering decay rates
//! cargo run -p varq --example predict_quality   # evaluating the models
//! cargo run -p varq --example anova_tables      # significance testing
//! cargo run -p varq --example plan_adaptation   # bandwidth-driven planning
//! cargo run -p varq --example end_to_end        # the whole pipeline at once
//! ```
//!
//! The `varq` binary wires the same pieces into a file-based CLI
//! (`screen`, `mos`, `fit`, `predict`, `anova`, `plan`).

pub mod anova;
pub mod condition;
pub mod error;
pub mod fit;
pub mod io;
pub mod model;
pub mod planner;
pub mod quality;
pub mod screening;
pub mod synth;

pub use condition::{RatingRecord, TestCondition, VariationAxis};
pub use error::{Error, Result};
pub use model::{FzClass, ModelParams};
pub use quality::{QualityEntry, QualityTable};
