//! File formats: ratings, quality-table, observation and rate-table CSVs,
//! JSON artifacts (model parameters, reports, plans) and the run manifest.
//!
//! Computed numeric columns in CSV reports are rendered with six significant
//! digits. JSON artifacts keep full precision since they are fed back into
//! later pipeline stages; survivor CSVs echo the parsed input values
//! verbatim for the same reason.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::anova::{AnovaTable, Observation};
use crate::condition::{RatingRecord, TestCondition, VariationAxis};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::planner::RateTable;
use crate::quality::{QualityEntry, QualityTable};

/// Rounds to `digits` significant digits and prints the shortest form.
pub fn fmt_sig(x: f64, digits: i32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits - 1 - exponent);
    let rounded = (x * scale).round() / scale;
    format!("{rounded}")
}

/// p-value display: four decimals, with tiny values shown as "<1e-4".
pub fn fmt_p(p: f64) -> String {
    if p < 1e-4 {
        "<1e-4".to_string()
    } else {
        format!("{p:.4}")
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn field_err(path: &Path, line: u64, message: String) -> Error {
    Error::CsvField {
        path: path.display().to_string(),
        line,
        message,
    }
}

struct HeaderMap {
    indices: BTreeMap<String, usize>,
}

impl HeaderMap {
    fn new(headers: &csv::StringRecord) -> Self {
        HeaderMap {
            indices: headers
                .iter()
                .enumerate()
                .map(|(i, h)| (h.trim().to_string(), i))
                .collect(),
        }
    }

    fn require(&self, path: &Path, name: &str) -> Result<usize> {
        self.indices
            .get(name)
            .copied()
            .ok_or_else(|| field_err(path, 1, format!("missing column '{name}'")))
    }

    fn names(&self) -> impl Iterator<Item = (&String, &usize)> {
        self.indices.iter()
    }
}

fn get_field<'r>(
    path: &Path,
    record: &'r csv::StringRecord,
    idx: usize,
    name: &str,
) -> Result<&'r str> {
    let line = record.position().map_or(0, |p| p.line());
    record
        .get(idx)
        .ok_or_else(|| field_err(path, line, format!("missing field '{name}'")))
}

fn parse_f64(path: &Path, record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let raw = get_field(path, record, idx, name)?;
    let line = record.position().map_or(0, |p| p.line());
    raw.trim()
        .parse::<f64>()
        .map_err(|_| field_err(path, line, format!("cannot parse '{raw}' as number for '{name}'")))
}

// ---------------------------------------------------------------------------
// ratings CSV
// ---------------------------------------------------------------------------

pub const RATINGS_HEADER: [&str; 8] = [
    "viewer_id",
    "sequence_id",
    "axis",
    "high_level",
    "low_level",
    "fz_s",
    "fixed_other",
    "raw_score",
];

pub fn read_ratings_csv(path: impl AsRef<Path>) -> Result<Vec<RatingRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = HeaderMap::new(reader.headers().map_err(|e| csv_err(path, e))?);
    let cols: Vec<usize> = RATINGS_HEADER
        .iter()
        .map(|name| headers.require(path, name))
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let axis_raw = get_field(path, &record, cols[2], "axis")?;
        let axis = VariationAxis::parse(axis_raw)
            .ok_or_else(|| field_err(path, line, format!("axis must be FR or QS, got '{axis_raw}'")))?;
        let rec = RatingRecord {
            viewer_id: get_field(path, &record, cols[0], "viewer_id")?.trim().to_string(),
            condition: TestCondition {
                axis,
                high_level: parse_f64(path, &record, cols[3], "high_level")?,
                low_level: parse_f64(path, &record, cols[4], "low_level")?,
                switch_interval_s: parse_f64(path, &record, cols[5], "fz_s")?,
                fixed_other: parse_f64(path, &record, cols[6], "fixed_other")?,
                sequence_id: get_field(path, &record, cols[1], "sequence_id")?.trim().to_string(),
            },
            raw_score: parse_f64(path, &record, cols[7], "raw_score")?,
        };
        rec.validate()
            .map_err(|e| field_err(path, line, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

/// Writes ratings with input values echoed verbatim (shortest round-trip
/// float form), so reading the file back reproduces the records exactly.
pub fn write_ratings_csv(path: impl AsRef<Path>, records: &[RatingRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer.write_record(RATINGS_HEADER).map_err(|e| csv_err(path, e))?;
    for r in records {
        let c = &r.condition;
        writer
            .write_record([
                r.viewer_id.as_str(),
                c.sequence_id.as_str(),
                c.axis.as_str(),
                &format!("{}", c.high_level),
                &format!("{}", c.low_level),
                &format!("{}", c.switch_interval_s),
                &format!("{}", c.fixed_other),
                &format!("{}", r.raw_score),
            ])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// quality table CSV / JSON
// ---------------------------------------------------------------------------

pub const QUALITY_HEADER: [&str; 10] = [
    "sequence_id",
    "axis",
    "high_level",
    "low_level",
    "fz_s",
    "fixed_other",
    "mos",
    "normalized_q",
    "n_ratings",
    "std_dev",
];

pub fn write_quality_csv(path: impl AsRef<Path>, table: &QualityTable) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer.write_record(QUALITY_HEADER).map_err(|e| csv_err(path, e))?;
    for e in table.entries() {
        let c = &e.condition;
        writer
            .write_record([
                c.sequence_id.as_str(),
                c.axis.as_str(),
                &format!("{}", c.high_level),
                &format!("{}", c.low_level),
                &format!("{}", c.switch_interval_s),
                &format!("{}", c.fixed_other),
                &fmt_sig(e.mos, 6),
                &fmt_sig(e.normalized_q, 6),
                &e.n_ratings.to_string(),
                &fmt_sig(e.std_dev, 6),
            ])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

pub fn read_quality_csv(path: impl AsRef<Path>) -> Result<QualityTable> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = HeaderMap::new(reader.headers().map_err(|e| csv_err(path, e))?);
    let cols: Vec<usize> = QUALITY_HEADER
        .iter()
        .map(|name| headers.require(path, name))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let axis_raw = get_field(path, &record, cols[1], "axis")?;
        let axis = VariationAxis::parse(axis_raw)
            .ok_or_else(|| field_err(path, line, format!("axis must be FR or QS, got '{axis_raw}'")))?;
        let n_raw = get_field(path, &record, cols[8], "n_ratings")?;
        let n_ratings = n_raw.trim().parse::<usize>().map_err(|_| {
            field_err(path, line, format!("cannot parse '{n_raw}' as count for 'n_ratings'"))
        })?;
        entries.push(QualityEntry {
            condition: TestCondition {
                axis,
                high_level: parse_f64(path, &record, cols[2], "high_level")?,
                low_level: parse_f64(path, &record, cols[3], "low_level")?,
                switch_interval_s: parse_f64(path, &record, cols[4], "fz_s")?,
                fixed_other: parse_f64(path, &record, cols[5], "fixed_other")?,
                sequence_id: get_field(path, &record, cols[0], "sequence_id")?.trim().to_string(),
            },
            mos: parse_f64(path, &record, cols[6], "mos")?,
            normalized_q: parse_f64(path, &record, cols[7], "normalized_q")?,
            n_ratings,
            std_dev: parse_f64(path, &record, cols[9], "std_dev")?,
        });
    }
    Ok(QualityTable::new(entries))
}

// ---------------------------------------------------------------------------
// observations CSV (one `value` column, every other column a factor)
// ---------------------------------------------------------------------------

pub fn read_observations_csv(path: impl AsRef<Path>) -> Result<Vec<Observation>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = HeaderMap::new(reader.headers().map_err(|e| csv_err(path, e))?);
    let value_col = headers.require(path, "value")?;
    let factor_cols: Vec<(String, usize)> = headers
        .names()
        .filter(|(name, _)| name.as_str() != "value")
        .map(|(name, &i)| (name.clone(), i))
        .collect();

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let value = parse_f64(path, &record, value_col, "value")?;
        let mut levels = BTreeMap::new();
        for (name, idx) in &factor_cols {
            levels.insert(
                name.clone(),
                get_field(path, &record, *idx, name)?.trim().to_string(),
            );
        }
        out.push(Observation {
            value,
            factor_levels: levels,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// rate table CSV
// ---------------------------------------------------------------------------

pub const RATE_HEADER: [&str; 4] = ["sequence_id", "fr", "qs", "bitrate_kbps"];

/// Reads and validates a rate table (monotonicity violations are rejected).
pub fn read_rate_table_csv(path: impl AsRef<Path>) -> Result<RateTable> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = HeaderMap::new(reader.headers().map_err(|e| csv_err(path, e))?);
    let cols: Vec<usize> = RATE_HEADER
        .iter()
        .map(|name| headers.require(path, name))
        .collect::<Result<_>>()?;

    let mut table = RateTable::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        table.insert(
            get_field(path, &record, cols[0], "sequence_id")?.trim(),
            parse_f64(path, &record, cols[1], "fr")?,
            parse_f64(path, &record, cols[2], "qs")?,
            parse_f64(path, &record, cols[3], "bitrate_kbps")?,
        );
    }
    table.validate()?;
    Ok(table)
}

pub fn write_rate_table_csv(path: impl AsRef<Path>, table: &RateTable) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer.write_record(RATE_HEADER).map_err(|e| csv_err(path, e))?;
    for seq in table.sequences() {
        for c in table.configs(seq) {
            let kbps = table.bitrate(seq, c.fr, c.qs)?;
            writer
                .write_record([seq, &format!("{}", c.fr), &format!("{}", c.qs), &fmt_sig(kbps, 6)])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    writer.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// ANOVA table CSV
// ---------------------------------------------------------------------------

pub fn write_anova_csv(path: impl AsRef<Path>, table: &AnovaTable) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer
        .write_record(["source", "ss", "df", "ms", "f_value", "p_value"])
        .map_err(|e| csv_err(path, e))?;
    for row in table.rows.iter().chain(std::iter::once(&table.residual)) {
        writer
            .write_record([
                row.source.as_str(),
                &fmt_sig(row.ss, 6),
                &row.df.to_string(),
                &fmt_sig(row.ms, 6),
                &row.f_value.map_or(String::new(), |f| fmt_sig(f, 6)),
                &row.p_value.map_or(String::new(), fmt_p),
            ])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// model-vs-measured plot CSV
// ---------------------------------------------------------------------------

/// One plot row per (condition, measured, predicted) for figure-style
/// output. The `x` column is the normalized abscissa of the overall-quality
/// curves: mean level over t_max for the FR axis, q_min over the mean level
/// for the QS axis (both reduce to the constant-curve abscissa when the two
/// levels are equal).
pub fn write_plot_csv(
    path: impl AsRef<Path>,
    rows: &[(TestCondition, f64, f64)],
    t_max: f64,
    q_min: f64,
) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer
        .write_record([
            "sequence_id",
            "axis",
            "high_level",
            "low_level",
            "fz_s",
            "x",
            "y_measured",
            "y_model",
        ])
        .map_err(|e| csv_err(path, e))?;
    for (cond, measured, predicted) in rows {
        let mid = 0.5 * (cond.high_level + cond.low_level);
        let x = match cond.axis {
            VariationAxis::FrameRate => mid / t_max,
            VariationAxis::Quantization => q_min / mid,
        };
        writer
            .write_record([
                cond.sequence_id.as_str(),
                cond.axis.as_str(),
                &format!("{}", cond.high_level),
                &format!("{}", cond.low_level),
                &format!("{}", cond.switch_interval_s),
                &fmt_sig(x, 6),
                &fmt_sig(*measured, 6),
                &fmt_sig(*predicted, 6),
            ])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// JSON artifacts
// ---------------------------------------------------------------------------

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| io_err(path, e))?;
    let body = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    file.write_all(body.as_bytes()).map_err(|e| io_err(path, e))?;
    file.write_all(b"\n").map_err(|e| io_err(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let body = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&body).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn read_params_json(path: impl AsRef<Path>) -> Result<ModelParams> {
    let params: ModelParams = read_json(path)?;
    params.validate()?;
    Ok(params)
}

// ---------------------------------------------------------------------------
// run manifest
// ---------------------------------------------------------------------------

/// Record of one CLI invocation: inputs, parameter overrides and every file
/// the command wrote. Outputs are deterministic, so re-running a manifest's
/// command reproduces them byte for byte; only the timestamp differs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub timestamp_unix_s: u64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            inputs: Vec::new(),
            parameters: BTreeMap::new(),
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Self {
        self.inputs.push(path.as_ref().display().to_string());
        self
    }

    pub fn parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn output(&mut self, path: impl AsRef<Path>) {
        self.outputs.push(path.as_ref().display().to_string());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::compute_quality_table;

    #[test]
    fn fmt_sig_rounds_to_six_digits() {
        assert_eq!(fmt_sig(0.6439142598879724, 6), "0.643914");
        assert_eq!(fmt_sig(13.5, 6), "13.5");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(123456.789, 6), "123457");
        assert_eq!(fmt_sig(-0.0001234567, 6), "-0.000123457");
    }

    #[test]
    fn fmt_p_renders_small_values() {
        assert_eq!(fmt_p(0.01613008), "0.0161");
        assert_eq!(fmt_p(5e-5), "<1e-4");
        assert_eq!(fmt_p(1.0), "1.0000");
    }

    fn sample_records() -> Vec<RatingRecord> {
        let cond = |hi: f64, lo: f64| TestCondition {
            axis: VariationAxis::FrameRate,
            high_level: hi,
            low_level: lo,
            switch_interval_s: 1.0,
            fixed_other: 16.0,
            sequence_id: "akiyo".into(),
        };
        vec![
            RatingRecord {
                viewer_id: "v01".into(),
                condition: cond(30.0, 30.0),
                raw_score: 83.25,
            },
            RatingRecord {
                viewer_id: "v01".into(),
                condition: cond(30.0, 7.5),
                raw_score: 58.7071067811,
            },
        ]
    }

    #[test]
    fn ratings_round_trip_exactly() {
        let dir = std::env::temp_dir().join(format!("varq-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ratings.csv");
        let records = sample_records();
        write_ratings_csv(&path, &records).unwrap();
        let back = read_ratings_csv(&path).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn malformed_row_reports_line_number() {
        let dir = std::env::temp_dir().join(format!("varq-io-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(
            &path,
            "viewer_id,sequence_id,axis,high_level,low_level,fz_s,fixed_other,raw_score\n\
             v01,akiyo,FR,30,30,1,16,80\n\
             v01,akiyo,FR,30,oops,1,16,70\n",
        )
        .unwrap();
        let err = read_ratings_csv(&path).unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains(":3:"), "{err}");
    }

    #[test]
    fn quality_table_round_trips_through_csv() {
        let dir = std::env::temp_dir().join(format!("varq-io-q-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("quality.csv");
        let mut records = sample_records();
        records.push(RatingRecord {
            viewer_id: "v02".into(),
            condition: records[0].condition.clone(),
            raw_score: 76.75,
        });
        records.push(RatingRecord {
            viewer_id: "v02".into(),
            condition: records[1].condition.clone(),
            raw_score: 61.0,
        });
        let table = compute_quality_table(&records, 30.0, 16.0).unwrap();
        write_quality_csv(&path, &table).unwrap();
        let back = read_quality_csv(&path).unwrap();
        assert_eq!(back.len(), table.len());
        for (a, b) in table.entries().iter().zip(back.entries()) {
            assert_eq!(a.condition, b.condition);
            assert!((a.mos - b.mos).abs() < 1e-4 * a.mos.abs().max(1.0));
            assert_eq!(a.n_ratings, b.n_ratings);
        }
    }

    #[test]
    fn params_json_round_trip() {
        use crate::model::FzClass;
        let dir = std::env::temp_dir().join(format!("varq-io-p-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("params.json");
        let mut p = ModelParams {
            alpha_t: 6.25,
            alpha_q: 3.125,
            ..ModelParams::default()
        };
        p.set_alpha_tv(30.0, 4.5);
        p.set_alpha_qv(FzClass::Fast, 16.0, 5.5);
        write_json(&path, &p).unwrap();
        let back = read_params_json(&path).unwrap();
        assert_eq!(back.alpha_t, p.alpha_t);
        assert_eq!(back.alpha_tv_for(30.0).unwrap(), 4.5);
        assert_eq!(back.alpha_qv_for(2.0, 16.0).unwrap(), 5.5);
    }
}
