//! Evaluating the quality models over the test grids: constant-rate curves
//! and the alternation penalties they combine with.
//!
//! ```bash
//! cargo run -p varq --example predict_quality
//! ```

use varq::model::{self, FzClass, ModelParams};

fn main() {
    let mut params = ModelParams {
        alpha_t: 6.5,
        alpha_q: 3.0,
        ..ModelParams::default()
    };
    params.set_alpha_tv(30.0, 5.5);
    params.set_alpha_tv(15.0, 4.5);
    params.set_alpha_qv(FzClass::Fast, 16.0, 5.0);
    params.set_alpha_qv(FzClass::Slow, 16.0, 6.0);
    params.set_alpha_qv(FzClass::Fast, 40.0, 4.0);
    params.set_alpha_qv(FzClass::Slow, 40.0, 5.0);

    println!("constant frame rate (QS fixed at {}):", params.q_min);
    for t in [30.0, 15.0, 7.5, 3.75, 1.875] {
        println!("  mnqt_c({t:>6}) = {:.4}", model::mnqt_c(t, &params).unwrap());
    }

    println!("\nconstant stepsize (FR fixed at {} Hz):", params.t_max);
    for (qp, qs) in [(28u32, 16.0), (32, 25.0), (36, 40.0), (40, 64.0), (44, 102.0)] {
        assert_eq!(model::qp_to_qs(qp), qs);
        println!(
            "  QP {qp} -> QS {qs:>5}: mnqq_c = {:.4}",
            model::mnqq_c(qs, &params).unwrap()
        );
    }

    println!("\nalternating frame rate (t_h <-> t_l):");
    for (th, tl) in [(30.0, 30.0), (30.0, 15.0), (30.0, 7.5), (15.0, 7.5)] {
        println!(
            "  qtv({th:>4}, {tl:>4}) = {:.4}",
            model::qtv(th, tl, &params).unwrap()
        );
    }

    println!("\nalternating stepsize (q_l <-> q_h), 1 s vs 3 s switching:");
    for (ql, qh) in [(16.0, 16.0), (16.0, 40.0), (16.0, 102.0), (40.0, 102.0)] {
        println!(
            "  qqv({qh:>5}, {ql:>4}) = {:.4} fast / {:.4} slow",
            model::qqv(qh, ql, 1.0, &params).unwrap(),
            model::qqv(qh, ql, 3.0, &params).unwrap()
        );
    }

    // the alternation penalty never helps: quality is bounded by the
    // constant curve at the better level
    let bounded = model::qtv(30.0, 7.5, &params).unwrap() <= model::mnqt_c(30.0, &params).unwrap();
    println!("\nalternation penalty bounds quality by the constant curve: {bounded}");
}
