//! Screening a noisy rating panel: per-viewer z-scores, BT.500 observer
//! rejection, then the monotonic-consistency screen.
//!
//! The panel is synthetic, with two planted defects: viewer v19 gives
//! two-sided extreme scores on a tenth of the clips (a classic BT.500
//! outlier), and viewer v20 systematically over-rates the largest-swing
//! clips of one sequence (invisible to BT.500, caught by the consistency
//! screen).
//!
//! ```bash
//! cargo run -p varq --example screen_pipeline
//! ```

use varq::model::{FzClass, ModelParams};
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
    conditions.extend(synth::fr_condition_grid("football", &fz_set));

    let spec = PanelSpec {
        outlier_spike: Some(18.0),
        inconsistent_on: Some("football".into()),
        ..PanelSpec::default()
    };
    let panel = synth::generate_panel(&conditions, &truth, &spec, 39);
    println!(
        "panel: {} viewers x {} conditions = {} ratings",
        spec.viewers,
        conditions.len(),
        panel.len()
    );
    println!(
        "planted: outlier {} (two-sided spikes), inconsistent {} on 'football'\n",
        synth::outlier_viewer_id(&spec),
        synth::inconsistent_viewer_id(&spec)
    );

    let options = ScreenOptions {
        margin: 6.0,
        violation_threshold: 2,
    };
    let (survivors, report) = screen(&panel, &options).unwrap();

    println!("BT.500 rejected viewers: {:?}", report.bt500_rejected_viewers);
    for block in &report.consistency_dropped_blocks {
        println!(
            "consistency screen dropped ({}, {})",
            block.viewer_id, block.sequence_id
        );
    }
    for d in &report.zero_variance_viewers {
        println!("z-score stage rejected {}: {}", d.viewer_id, d.reason);
    }
    println!(
        "\n{} of {} ratings survive ({:.1} per condition on average)",
        survivors.len(),
        report.n_input,
        survivors.len() as f64 / conditions.len() as f64
    );
}
