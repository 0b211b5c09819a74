//! Planning an alternation schedule for a two-level bandwidth pattern over
//! the standard encodable ladder, with the alternation-magnitude clamps.
//!
//! ```bash
//! cargo run -p varq --example plan_adaptation
//! ```

use varq::model::{FzClass, ModelParams};
use varq::planner::{plan, Config, RateTable};

fn params() -> ModelParams {
    let mut p = ModelParams {
        alpha_t: 4.5,
        alpha_q: 3.0,
        ..ModelParams::default()
    };
    p.set_alpha_tv(30.0, 5.0);
    p.set_alpha_tv(15.0, 4.0);
    p.set_alpha_qv(FzClass::Fast, 16.0, 7.5);
    p.set_alpha_qv(FzClass::Slow, 16.0, 8.5);
    p.set_alpha_qv(FzClass::Fast, 40.0, 5.0);
    p.set_alpha_qv(FzClass::Slow, 40.0, 6.0);
    p.set_alpha_qv(FzClass::Fast, 64.0, 4.5);
    p.set_alpha_qv(FzClass::Slow, 64.0, 5.5);
    p
}

fn main() {
    // synthetic but monotone bitrates over the ladder
    let mut rates = RateTable::new();
    let mut ladder = Vec::new();
    for fr in [7.5, 15.0, 30.0] {
        for qs in [16.0, 25.0, 40.0, 64.0, 102.0] {
            let kbps = 1000.0 * (fr / 30.0_f64).powf(0.65) * (16.0_f64 / qs).powf(0.9);
            rates.insert("akiyo", fr, qs, kbps);
            ladder.push(Config::new(fr, qs));
        }
    }
    let params = params();

    for (r_high, r_low, note) in [
        (1000.0, 650.0, "high-quality point reachable on both axes"),
        (1100.0, 450.0, "low budget forces 7.5 Hz; high frame rate gets capped"),
        (700.0, 200.0, "low budget forces QS 102; fine stepsize gets floored"),
        (500.0, 500.0, "no headroom: stay constant"),
    ] {
        let report = plan(&rates, "akiyo", r_high, r_low, 3.0, &params, &ladder).unwrap();
        let c = &report.chosen;
        println!("budgets {r_high}/{r_low} kbps ({note}):");
        println!(
            "  chosen {:?}: high ({} Hz, QS {}), low ({} Hz, QS {}), predicted quality {:.4}",
            c.axis, c.high_config.fr, c.high_config.qs, c.low_config.fr, c.low_config.qs,
            c.predicted_quality
        );
        if !c.clamps_applied.is_empty() {
            println!("  clamps applied: {}", c.clamps_applied.join(", "));
        }
        println!("  candidates considered:");
        for cand in &report.candidates {
            println!(
                "    {:?} high ({}, {}) low ({}, {}) -> {:.4}{}",
                cand.axis,
                cand.high_config.fr,
                cand.high_config.qs,
                cand.low_config.fr,
                cand.low_config.qs,
                cand.predicted_quality,
                if cand.clamps_applied.is_empty() {
                    String::new()
                } else {
                    format!("  [{}]", cand.clamps_applied.join(", "))
                }
            );
        }
        println!();
    }
}
