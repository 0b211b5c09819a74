//! File-based CLI over the varq library: screen -> mos -> fit -> predict /
//! anova / plan. Every file-producing command also writes a run manifest
//! listing its inputs, parameters and outputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use varq::anova::{anova_main_effects, anova_two_way_interaction};
use varq::condition::VariationAxis;
use varq::error::Error;
use varq::fit::{fit_qtv, fit_qqv, gof, predictions_for_axis, CurveSummary, FitReport};
use varq::io::{self, RunManifest};
use varq::model::{self, ModelParams};
use varq::planner::{self, Config};
use varq::quality::{compute_quality_table, QualityTable};
use varq::screening::{screen, ScreenOptions};

#[derive(Parser)]
#[command(
    name = "varq",
    version,
    about = "Quality models and subjective-data tooling for video with alternating frame rate or quantization stepsize"
)]
struct Cli {
    /// Reference (maximum) frame rate in Hz
    #[arg(long, global = true, default_value_t = model::DEFAULT_T_MAX)]
    t_max: f64,

    /// Reference (minimum) quantization stepsize
    #[arg(long, global = true, default_value_t = model::DEFAULT_Q_MIN)]
    q_min: f64,

    /// Directory for output files
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen raw ratings: z-scores, BT.500 rejection, consistency check
    Screen {
        /// Ratings CSV (viewer_id, sequence_id, axis, high_level, low_level, fz_s, fixed_other, raw_score)
        ratings_csv: PathBuf,
        /// Dead-band in raw points for the consistency screen
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        /// Violations allowed before a (viewer, sequence) block is dropped
        #[arg(long, default_value_t = 2)]
        threshold: usize,
    },
    /// Aggregate screened ratings into a per-condition quality table
    Mos {
        /// Screened ratings CSV (same schema as `screen` output)
        survivors_csv: PathBuf,
    },
    /// Fit decay-rate parameters to a quality table
    Fit {
        /// Quality table (.csv or .json, as written by `mos`)
        quality_table: PathBuf,
        /// Which axis to fit
        #[arg(long, value_parser = ["fr", "qs", "both"], default_value = "both")]
        axis: String,
    },
    /// Evaluate a fitted model at a given condition
    Predict {
        #[command(subcommand)]
        model: PredictModel,
    },
    /// Fixed-effects ANOVA over an observation CSV
    Anova {
        /// CSV with a `value` column; every other column is a factor
        observations_csv: PathBuf,
        /// Comma-separated factor columns, fitted in this order
        #[arg(long, value_delimiter = ',')]
        factors: Vec<String>,
        /// Two-way design with interaction (requires exactly two factors)
        #[arg(long)]
        interaction: bool,
    },
    /// Recommend an alternation schedule for a two-level bandwidth pattern
    Plan {
        /// Rate table CSV (sequence_id, fr, qs, bitrate_kbps)
        rate_table_csv: PathBuf,
        #[arg(long)]
        sequence: String,
        /// High-phase budget in kbps
        #[arg(long)]
        r_high: f64,
        /// Low-phase budget in kbps
        #[arg(long)]
        r_low: f64,
        /// Switching interval in seconds
        #[arg(long, default_value_t = 1.0)]
        fz: f64,
        /// Fitted parameters JSON
        #[arg(long)]
        params: PathBuf,
        /// Ladder as FRxQS pairs, e.g. "30x16,15x16,30x40"; defaults to
        /// every configuration in the rate table for the sequence
        #[arg(long)]
        ladder: Option<String>,
    },
}

#[derive(Subcommand)]
enum PredictModel {
    /// Quality under frame-rate alternation: qtv <t_h> <t_l>
    Qtv {
        t_h: f64,
        t_l: f64,
        #[command(flatten)]
        opts: PredictOpts,
    },
    /// Quality under stepsize alternation: qqv <q_h> <q_l> <fz_s>
    Qqv {
        q_h: f64,
        q_l: f64,
        fz_s: f64,
        #[command(flatten)]
        opts: PredictOpts,
    },
}

#[derive(Args)]
struct PredictOpts {
    /// Fitted parameters JSON
    #[arg(long)]
    params: PathBuf,
    /// Emit a JSON object with metadata instead of the bare value
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> varq::Result<()> {
    let out_dir = &cli.output_dir;
    if !out_dir.exists() {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
            path: out_dir.display().to_string(),
            source: e,
        })?;
    }
    match cli.command {
        Command::Screen {
            ratings_csv,
            margin,
            threshold,
        } => cmd_screen(&ratings_csv, margin, threshold, out_dir),
        Command::Mos { survivors_csv } => cmd_mos(&survivors_csv, cli.t_max, cli.q_min, out_dir),
        Command::Fit {
            quality_table,
            axis,
        } => cmd_fit(&quality_table, &axis, cli.t_max, cli.q_min, out_dir),
        Command::Predict { model } => cmd_predict(model),
        Command::Anova {
            observations_csv,
            factors,
            interaction,
        } => cmd_anova(&observations_csv, &factors, interaction, out_dir),
        Command::Plan {
            rate_table_csv,
            sequence,
            r_high,
            r_low,
            fz,
            params,
            ladder,
        } => cmd_plan(
            &rate_table_csv,
            &sequence,
            r_high,
            r_low,
            fz,
            &params,
            ladder.as_deref(),
            out_dir,
        ),
    }
}

fn cmd_screen(
    ratings_csv: &Path,
    margin: f64,
    threshold: usize,
    out_dir: &Path,
) -> varq::Result<()> {
    let ratings = io::read_ratings_csv(ratings_csv)?;
    let options = ScreenOptions {
        margin,
        violation_threshold: threshold,
    };
    let (survivors, report) = screen(&ratings, &options)?;

    let survivors_path = out_dir.join("survivors.csv");
    let report_path = out_dir.join("rejection_report.json");
    io::write_ratings_csv(&survivors_path, &survivors)?;
    io::write_json(&report_path, &report)?;

    let mut manifest = RunManifest::new("screen")
        .input(ratings_csv)
        .parameter("margin", margin)
        .parameter("threshold", threshold);
    manifest.output(&survivors_path);
    manifest.output(&report_path);
    io::write_json(out_dir.join("screen_manifest.json"), &manifest)?;

    println!(
        "screen: {} ratings in, {} survive; {} viewer(s) rejected by BT.500, {} block(s) dropped",
        report.n_input,
        report.n_survivors,
        report.bt500_rejected_viewers.len(),
        report.consistency_dropped_blocks.len()
    );
    Ok(())
}

fn cmd_mos(survivors_csv: &Path, t_max: f64, q_min: f64, out_dir: &Path) -> varq::Result<()> {
    let ratings = io::read_ratings_csv(survivors_csv)?;
    let table = compute_quality_table(&ratings, t_max, q_min)?;

    let csv_path = out_dir.join("quality_table.csv");
    let json_path = out_dir.join("quality_table.json");
    io::write_quality_csv(&csv_path, &table)?;
    io::write_json(&json_path, &table)?;

    let mut manifest = RunManifest::new("mos")
        .input(survivors_csv)
        .parameter("t_max", t_max)
        .parameter("q_min", q_min);
    manifest.output(&csv_path);
    manifest.output(&json_path);
    io::write_json(out_dir.join("mos_manifest.json"), &manifest)?;

    println!("mos: {} conditions aggregated", table.len());
    Ok(())
}

fn load_quality_table(path: &Path) -> varq::Result<QualityTable> {
    if path.extension().is_some_and(|e| e == "json") {
        io::read_json(path)
    } else {
        io::read_quality_csv(path)
    }
}

fn cmd_fit(
    quality_table: &Path,
    axis: &str,
    t_max: f64,
    q_min: f64,
    out_dir: &Path,
) -> varq::Result<()> {
    let table = load_quality_table(quality_table)?;
    let mut manifest = RunManifest::new("fit")
        .input(quality_table)
        .parameter("axis", axis)
        .parameter("t_max", t_max)
        .parameter("q_min", q_min);
    let mut plot_rows = Vec::new();
    let mut reports = Vec::new();

    for sequence in table.sequences() {
        let has = |a: VariationAxis| {
            table
                .entries()
                .iter()
                .any(|e| e.condition.sequence_id == sequence && e.condition.axis == a)
        };
        let want_fr = match axis {
            "both" => has(VariationAxis::FrameRate),
            "fr" => true,
            _ => false,
        };
        let want_qs = match axis {
            "both" => has(VariationAxis::Quantization),
            "qs" => true,
            _ => false,
        };

        let mut params = ModelParams {
            t_max,
            q_min,
            ..ModelParams::default()
        };
        let mut curves: Vec<CurveSummary> = Vec::new();
        let summary = |seq: &str, curve: String, f: &varq::fit::FitResult| CurveSummary {
            sequence_id: seq.to_string(),
            curve,
            alpha: f.alpha,
            pcc: f.pcc,
            rmse: f.rmse,
            n_points: f.n_points,
            at_boundary: f.at_boundary,
        };

        if want_fr {
            let fr = fit_qtv(&table, &sequence, t_max)?;
            curves.push(summary(&sequence, "alpha_t".into(), &fr.alpha_t));
            for (th, f) in &fr.alpha_tv {
                curves.push(summary(&sequence, format!("alpha_tv[{th}]"), f));
            }
            fr.apply_to(&mut params);
        }
        if want_qs {
            let qs = fit_qqv(&table, &sequence, q_min)?;
            curves.push(summary(&sequence, "alpha_q".into(), &qs.alpha_q));
            for (key, f) in &qs.alpha_qv {
                curves.push(summary(&sequence, format!("alpha_qv[{key}]"), f));
            }
            qs.apply_to(&mut params);
        }

        let params_path = out_dir.join(format!("params_{sequence}.json"));
        io::write_json(&params_path, &params)?;
        manifest.output(&params_path);

        let mut seq_rows = Vec::new();
        if want_fr {
            seq_rows.extend(
                predictions_for_axis(&table, VariationAxis::FrameRate, &params)
                    .into_iter()
                    .filter(|(c, _, _)| c.sequence_id == sequence),
            );
        }
        if want_qs {
            seq_rows.extend(
                predictions_for_axis(&table, VariationAxis::Quantization, &params)
                    .into_iter()
                    .filter(|(c, _, _)| c.sequence_id == sequence),
            );
        }
        reports.push((sequence.clone(), curves, seq_rows.clone()));
        plot_rows.extend(seq_rows);
    }

    let pooled = gof(&plot_rows)?;
    let report = FitReport {
        axis: axis.to_string(),
        curves: reports.iter().flat_map(|(_, c, _)| c.clone()).collect(),
        per_sequence: reports
            .iter()
            .map(|(seq, _, rows)| Ok((seq.clone(), gof(rows)?)))
            .collect::<varq::Result<Vec<_>>>()?,
        pooled,
    };

    let report_path = out_dir.join("fit_report.json");
    let plot_path = out_dir.join("fit_plot.csv");
    io::write_json(&report_path, &report)?;
    io::write_plot_csv(&plot_path, &plot_rows, t_max, q_min)?;
    manifest.output(&report_path);
    manifest.output(&plot_path);
    io::write_json(out_dir.join("fit_manifest.json"), &manifest)?;

    println!(
        "fit: {} curve(s) over {} sequence(s); pooled PCC {} RMSE {}",
        report.curves.len(),
        report.per_sequence.len(),
        io::fmt_sig(report.pooled.pcc, 6),
        io::fmt_sig(report.pooled.rmse, 6)
    );
    Ok(())
}

fn cmd_predict(model: PredictModel) -> varq::Result<()> {
    let (value, opts, label, fz) = match model {
        PredictModel::Qtv { t_h, t_l, opts } => {
            let params = io::read_params_json(&opts.params)?;
            (
                model::qtv(t_h, t_l, &params)?,
                opts,
                format!("qtv({t_h}, {t_l})"),
                None,
            )
        }
        PredictModel::Qqv { q_h, q_l, fz_s, opts } => {
            let params = io::read_params_json(&opts.params)?;
            (
                model::qqv(q_h, q_l, fz_s, &params)?,
                opts,
                format!("qqv({q_h}, {q_l}, Fz={fz_s})"),
                Some(fz_s),
            )
        }
    };
    if opts.json {
        let fz_extrapolated = fz.map(|f| !model::FzClass::is_calibrated(f));
        let body = serde_json::json!({
            "model": label,
            "quality": value,
            "fz_extrapolated": fz_extrapolated,
        });
        println!("{body}");
    } else {
        println!("{}", io::fmt_sig(value, 6));
    }
    Ok(())
}

fn cmd_anova(
    observations_csv: &Path,
    factors: &[String],
    interaction: bool,
    out_dir: &Path,
) -> varq::Result<()> {
    let obs = io::read_observations_csv(observations_csv)?;
    let names: Vec<&str> = factors.iter().map(String::as_str).collect();
    let table = if interaction {
        if names.len() != 2 {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: 2,
            });
        }
        anova_two_way_interaction(&obs, names[0], names[1])?
    } else {
        anova_main_effects(&obs, &names)?
    };

    let csv_path = out_dir.join("anova_table.csv");
    let json_path = out_dir.join("anova_table.json");
    io::write_anova_csv(&csv_path, &table)?;
    io::write_json(&json_path, &table)?;

    let mut manifest = RunManifest::new("anova")
        .input(observations_csv)
        .parameter("factors", factors.join(","))
        .parameter("interaction", interaction);
    manifest.output(&csv_path);
    manifest.output(&json_path);
    io::write_json(out_dir.join("anova_manifest.json"), &manifest)?;

    for row in table.rows.iter() {
        println!(
            "{}: F = {}, p = {}",
            row.source,
            row.f_value.map_or(String::new(), |f| io::fmt_sig(f, 6)),
            row.p_value.map_or(String::new(), io::fmt_p),
        );
    }
    Ok(())
}

fn parse_ladder(spec: &str) -> varq::Result<Vec<Config>> {
    let mut out = Vec::new();
    for part in spec.split(',') {
        let part = part.trim();
        let (fr, qs) = part.split_once('x').ok_or_else(|| Error::CsvField {
            path: "--ladder".into(),
            line: 0,
            message: format!("expected FRxQS, got '{part}'"),
        })?;
        let parse = |s: &str| -> varq::Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::CsvField {
                path: "--ladder".into(),
                line: 0,
                message: format!("cannot parse '{s}' as number"),
            })
        };
        out.push(Config::new(parse(fr)?, parse(qs)?));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    rate_table_csv: &Path,
    sequence: &str,
    r_high: f64,
    r_low: f64,
    fz: f64,
    params_path: &Path,
    ladder: Option<&str>,
    out_dir: &Path,
) -> varq::Result<()> {
    let rates = io::read_rate_table_csv(rate_table_csv)?;
    let params = io::read_params_json(params_path)?;
    let ladder = match ladder {
        Some(spec) => parse_ladder(spec)?,
        None => rates.configs(sequence),
    };
    let report = planner::plan(&rates, sequence, r_high, r_low, fz, &params, &ladder)?;

    let plan_path = out_dir.join("plan.json");
    io::write_json(&plan_path, &report)?;
    let mut manifest = RunManifest::new("plan")
        .input(rate_table_csv)
        .input(params_path)
        .parameter("sequence", sequence)
        .parameter("r_high", r_high)
        .parameter("r_low", r_low)
        .parameter("fz", fz);
    manifest.output(&plan_path);
    io::write_json(out_dir.join("plan_manifest.json"), &manifest)?;

    let chosen = &report.chosen;
    println!(
        "plan: {:?} high=({}, {}) low=({}, {}) predicted quality {}{}",
        chosen.axis,
        chosen.high_config.fr,
        chosen.high_config.qs,
        chosen.low_config.fr,
        chosen.low_config.qs,
        io::fmt_sig(chosen.predicted_quality, 6),
        if chosen.clamps_applied.is_empty() {
            String::new()
        } else {
            format!(" (clamps: {})", chosen.clamps_applied.join(", "))
        }
    );
    Ok(())
}
