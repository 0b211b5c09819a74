//! Recovering decay-rate parameters from a rating panel by least squares,
//! then checking the recovered values against the generating ground truth.
//!
//! ```bash
//! cargo run -p varq --example fit_models
//! ```

use varq::fit::{fit_qtv, fit_qqv};
use varq::model::{FzClass, ModelParams};
use varq::quality::compute_quality_table;
use varq::screening::{screen, ScreenOptions};
use varq::synth::{self, PanelSpec};

fn main() {
    let mut truth = ModelParams {
        alpha_t: 7.0,
        alpha_q: 3.2,
        ..ModelParams::default()
    };
    truth.set_alpha_tv(30.0, 7.0);
    truth.set_alpha_tv(15.0, 5.0);
    truth.set_alpha_qv(FzClass::Fast, 16.0, 5.0);
    truth.set_alpha_qv(FzClass::Slow, 16.0, 6.5);
    truth.set_alpha_qv(FzClass::Fast, 40.0, 4.0);
    truth.set_alpha_qv(FzClass::Slow, 40.0, 5.5);

    let fz_set = [1.0, 2.0, 3.0];
    let mut conditions = synth::fr_condition_grid("akiyo", &fz_set);
    conditions.extend(synth::qs_condition_grid("akiyo", &fz_set));
    let panel = synth::generate_panel(&conditions, &truth, &PanelSpec::default(), 101);

    let (survivors, _) = screen(
        &panel,
        &ScreenOptions {
            margin: 6.0,
            violation_threshold: 2,
        },
    )
    .unwrap();
    let table = compute_quality_table(&survivors, 30.0, 16.0).unwrap();

    let fr = fit_qtv(&table, "akiyo", 30.0).unwrap();
    let qs = fit_qqv(&table, "akiyo", 16.0).unwrap();

    println!("curve            fitted   truth   PCC     RMSE");
    let row = |name: &str, alpha: f64, truth_alpha: f64, pcc: f64, rmse: f64| {
        println!("{name:<16} {alpha:>6.3}  {truth_alpha:>6.3}  {pcc:.4}  {rmse:.4}");
    };
    row("alpha_t", fr.alpha_t.alpha, truth.alpha_t, fr.alpha_t.pcc, fr.alpha_t.rmse);
    for (th, f) in &fr.alpha_tv {
        row(
            &format!("alpha_tv[{th}]"),
            f.alpha,
            truth.alpha_tv[th],
            f.pcc,
            f.rmse,
        );
    }
    row("alpha_q", qs.alpha_q.alpha, truth.alpha_q, qs.alpha_q.pcc, qs.alpha_q.rmse);
    for (key, f) in &qs.alpha_qv {
        row(
            &format!("alpha_qv[{key}]"),
            f.alpha,
            truth.alpha_qv[key],
            f.pcc,
            f.rmse,
        );
    }

    let mut fitted = ModelParams::default();
    fr.apply_to(&mut fitted);
    qs.apply_to(&mut fitted);
    let rows = varq::fit::predictions_for_axis(
        &table,
        varq::VariationAxis::FrameRate,
        &fitted,
    );
    let gof = varq::fit::gof(&rows).unwrap();
    println!(
        "\nframe-rate axis, model vs measured over {} conditions: PCC {:.4}, RMSE {:.4}",
        gof.n_points, gof.pcc, gof.rmse
    );
}
