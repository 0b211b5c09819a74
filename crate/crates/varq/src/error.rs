//! Crate-wide error type.

use crate::condition::VariationAxis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    // ---- model domain -------------------------------------------------
    #[error("frame rate {t} Hz outside (0, {t_max}]")]
    FrameRateOutOfRange { t: f64, t_max: f64 },

    #[error("quantization stepsize {q} below minimum {q_min}")]
    QsOutOfRange { q: f64, q_min: f64 },

    #[error("{axis:?} levels out of order: better level {better}, worse level {worse}")]
    LevelOrder {
        axis: VariationAxis,
        better: f64,
        worse: f64,
    },

    #[error("model parameter {name} must be positive, got {value}")]
    NonPositiveAlpha { name: String, value: f64 },

    #[error("no alpha_tv entry for t_h = {t_h}; known t_h keys: [{}]", known.join(", "))]
    MissingAlphaTv { t_h: String, known: Vec<String> },

    #[error("no alpha_qv entry for {key}; known keys: [{}]", known.join(", "))]
    MissingAlphaQv { key: String, known: Vec<String> },

    // ---- fitting -------------------------------------------------------
    #[error("need at least {needed} data points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("abscissa values are all equal; alpha is not identifiable")]
    DegenerateAbscissa,

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what} has zero variance")]
    ZeroVariance { what: String },

    #[error("no constant-level points for {axis:?} in sequence '{sequence}'")]
    MissingConstantPoints {
        axis: VariationAxis,
        sequence: String,
    },

    // ---- ratings / screening -------------------------------------------
    #[error("condition {condition} has {viewers} viewer(s); at least 2 required")]
    TooFewViewers { condition: String, viewers: usize },

    #[error("missing reference condition for group {group}")]
    MissingReference { group: String },

    #[error("rating score {score} outside [0, 100] for viewer '{viewer}'")]
    ScoreOutOfRange { score: f64, viewer: String },

    // ---- variance analysis ---------------------------------------------
    #[error("factor '{factor}' has fewer than 2 levels")]
    SingleLevelFactor { factor: String },

    #[error("observation missing a level for factor '{factor}'")]
    MissingFactorLevel { factor: String },

    #[error("residual degrees of freedom is zero; more observations than model terms required")]
    NoResidualDf,

    #[error("empty cell for ({a}, {b}); designs with empty cells are not supported")]
    EmptyCell { a: String, b: String },

    #[error("F statistic must be nonnegative, got {f}")]
    NegativeF { f: f64 },

    #[error("degrees of freedom must be at least 1, got ({df1}, {df2})")]
    BadDegreesOfFreedom { df1: i64, df2: i64 },

    // ---- planner ---------------------------------------------------------
    #[error("no ladder point fits the low budget {r_low} kbps")]
    InfeasibleBudget { r_low: f64 },

    #[error("high budget {r_high} kbps below low budget {r_low} kbps")]
    InvalidBudgets { r_high: f64, r_low: f64 },

    #[error("schedule varies both frame rate and quantization; joint variation is unsupported")]
    MixedAxisSchedule,

    #[error("rate table not monotone: {detail}")]
    RateTableMonotonicity { detail: String },

    #[error("no bitrate entry for sequence '{sequence}' at ({fr} Hz, QS {qs})")]
    MissingBitrate { sequence: String, fr: f64, qs: f64 },

    // ---- I/O --------------------------------------------------------------
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    CsvField {
        path: String,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    /// True for filesystem / parse errors, as opposed to domain errors.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Csv { .. } | Error::CsvField { .. } | Error::Json { .. }
        )
    }
}
