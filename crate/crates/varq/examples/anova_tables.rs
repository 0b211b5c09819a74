//! Significance testing on rating data: does the alternation magnitude
//! matter, does the content, does the switching interval — and does the
//! interval interact with the magnitude once the data is normalized?
//!
//! ```bash
//! cargo run -p varq --example anova_tables
//! ```

use varq::anova::{anova_main_effects, anova_two_way_interaction, AnovaTable, Observation};
use varq::condition::VariationAxis;
use varq::model::ModelParams;
use varq::screening::{screen, ScreenOptions};
use varq::synth::{self, PanelSpec};

fn print_table(label: &str, table: &AnovaTable) {
    println!("{label}");
    println!("  {:<20} {:>10} {:>4} {:>10} {:>8} {:>8}", "source", "SS", "df", "MS", "F", "p");
    for row in table.rows.iter().chain(std::iter::once(&table.residual)) {
        println!(
            "  {:<20} {:>10.3} {:>4} {:>10.3} {:>8} {:>8}",
            row.source,
            row.ss,
            row.df,
            row.ms,
            row.f_value.map_or(String::new(), |f| format!("{f:.2}")),
            row.p_value.map_or(String::new(), varq::io::fmt_p),
        );
    }
    println!();
}

fn main() {
    // two contents with different decay rates, rated by the same panel
    let mut slow_decay = ModelParams {
        alpha_t: 7.0,
        ..ModelParams::default()
    };
    slow_decay.set_alpha_tv(30.0, 7.0);
    slow_decay.set_alpha_tv(15.0, 5.0);
    let mut fast_decay = ModelParams {
        alpha_t: 4.5,
        ..ModelParams::default()
    };
    fast_decay.set_alpha_tv(30.0, 5.0);
    fast_decay.set_alpha_tv(15.0, 3.5);

    let fz_set = [1.0, 2.0, 3.0];
    let mut panel = synth::generate_panel(
        &synth::fr_condition_grid("akiyo", &fz_set),
        &slow_decay,
        &PanelSpec::default(),
        7,
    );
    panel.extend(synth::generate_panel(
        &synth::fr_condition_grid("football", &fz_set),
        &fast_decay,
        &PanelSpec::default(),
        8,
    ));
    let (survivors, _) = screen(
        &panel,
        &ScreenOptions {
            margin: 6.0,
            violation_threshold: 2,
        },
    )
    .unwrap();

    // rating-level observations with the three design factors
    let observations: Vec<Observation> = survivors
        .iter()
        .filter(|r| r.condition.axis == VariationAxis::FrameRate)
        .map(|r| {
            let c = &r.condition;
            Observation::new(
                r.raw_score,
                [
                    ("magnitude", format!("{}", c.high_level - c.low_level)),
                    ("content", c.sequence_id.clone()),
                    ("interval", format!("{}", c.switch_interval_s)),
                ],
            )
        })
        .collect();

    let main = anova_main_effects(&observations, &["magnitude", "content", "interval"]).unwrap();
    print_table("three-way main effects on raw ratings:", &main);

    // ratio data: each alternating rating normalized by the panel MOS of
    // its constant-t_h anchor, so only the alternation penalty remains
    let table = varq::quality::compute_quality_table(&survivors, 30.0, 16.0).unwrap();
    let anchor_mos = |seq: &str, level: f64| -> Option<f64> {
        table
            .entries()
            .iter()
            .find(|e| {
                e.condition.sequence_id == seq
                    && e.condition.is_constant()
                    && e.condition.high_level == level
            })
            .map(|e| e.mos)
    };
    let ratio_obs: Vec<Observation> = survivors
        .iter()
        .filter(|r| !r.condition.is_constant())
        .filter_map(|r| {
            let c = &r.condition;
            anchor_mos(&c.sequence_id, c.high_level).map(|mos| {
                Observation::new(
                    r.raw_score / mos,
                    [
                        ("magnitude", format!("{}", c.high_level - c.low_level)),
                        ("interval", format!("{}", c.switch_interval_s)),
                    ],
                )
            })
        })
        .collect();

    let two_way = anova_two_way_interaction(&ratio_obs, "magnitude", "interval").unwrap();
    print_table("two-way with interaction on normalized ratio data:", &two_way);

    let interaction = &two_way.rows[2];
    println!(
        "magnitude*interval interaction: p = {} -> {}",
        varq::io::fmt_p(interaction.p_value.unwrap()),
        if interaction.p_value.unwrap() < 0.05 {
            "significant at the 0.05 level"
        } else {
            "not significant; one decay rate per t_h is enough"
        }
    );
}
