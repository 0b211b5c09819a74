//! The whole pipeline in one run: synthesize a rating panel with planted
//! defects, screen it, aggregate quality, fit the models, evaluate them and
//! plan a schedule from the fitted parameters.
//!
//! ```bash
//! cargo run -p varq --example end_to_end
//! ```

use varq::fit::{fit_qtv, fit_qqv};
use varq::model::{self, FzClass, ModelParams};
use varq::planner::{plan, Config, RateTable};
use varq::quality::compute_quality_table;
use varq::screening::{screen, ScreenOptions};
use varq::synth::{self, PanelSpec};

fn main() {
    // ground truth the panel is generated from
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
    let mut conditions = Vec::new();
    for seq in ["akiyo", "football"] {
        conditions.extend(synth::fr_condition_grid(seq, &fz_set));
        conditions.extend(synth::qs_condition_grid(seq, &fz_set));
    }
    let spec = PanelSpec {
        outlier_spike: Some(16.0),
        inconsistent_on: Some("football".into()),
        ..PanelSpec::default()
    };
    let panel = synth::generate_panel(&conditions, &truth, &spec, 4);
    println!("1. panel: {} ratings from {} viewers", panel.len(), spec.viewers);

    let (survivors, report) = screen(
        &panel,
        &ScreenOptions {
            margin: 6.0,
            violation_threshold: 2,
        },
    )
    .unwrap();
    println!(
        "2. screen: BT.500 rejected {:?}, consistency dropped {} block(s), {} ratings remain",
        report.bt500_rejected_viewers,
        report.consistency_dropped_blocks.len(),
        survivors.len()
    );

    let table = compute_quality_table(&survivors, 30.0, 16.0).unwrap();
    println!("3. quality table: {} conditions", table.len());

    let mut fitted = ModelParams::default();
    let fr = fit_qtv(&table, "akiyo", 30.0).unwrap();
    let qs = fit_qqv(&table, "akiyo", 16.0).unwrap();
    fr.apply_to(&mut fitted);
    qs.apply_to(&mut fitted);
    println!(
        "4. fit (akiyo): alpha_t {:.2} (truth {:.2}), alpha_q {:.2} (truth {:.2})",
        fitted.alpha_t, truth.alpha_t, fitted.alpha_q, truth.alpha_q
    );

    println!(
        "5. predictions: qtv(30, 7.5) = {:.4}, qqv(102, 16, Fz=3) = {:.4}",
        model::qtv(30.0, 7.5, &fitted).unwrap(),
        model::qqv(102.0, 16.0, 3.0, &fitted).unwrap()
    );

    let mut rates = RateTable::new();
    let mut ladder = Vec::new();
    for fr_level in [7.5, 15.0, 30.0] {
        for qs_level in [16.0, 25.0, 40.0, 64.0, 102.0] {
            let kbps = 1000.0 * (fr_level / 30.0_f64).powf(0.65) * (16.0_f64 / qs_level).powf(0.9);
            rates.insert("akiyo", fr_level, qs_level, kbps);
            ladder.push(Config::new(fr_level, qs_level));
        }
    }
    let plan_report = plan(&rates, "akiyo", 1000.0, 450.0, 3.0, &fitted, &ladder).unwrap();
    let chosen = &plan_report.chosen;
    println!(
        "6. plan for 1000/450 kbps: {:?}, high ({} Hz, QS {}), low ({} Hz, QS {}), quality {:.4}",
        chosen.axis,
        chosen.high_config.fr,
        chosen.high_config.qs,
        chosen.low_config.fr,
        chosen.low_config.qs,
        chosen.predicted_quality
    );
}
