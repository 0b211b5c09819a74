//! Fixed-effects analysis of variance: main-effects-only designs with any
//! number of factors, and the two-way design with interaction.
//!
//! Sums of squares are sequential (Type I) in the declared factor order,
//! computed by comparing residual sums of squares of nested least-squares
//! models. On balanced designs this coincides with the classical level-mean
//! decomposition regardless of order.

mod dist;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dist::{f_sf, inc_beta, ln_gamma};

/// One measured value with a level label for every declared factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub value: f64,
    pub factor_levels: BTreeMap<String, String>,
}

impl Observation {
    pub fn new<I, K, V>(value: f64, levels: I) -> Self
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        Observation {
            value,
            factor_levels: levels
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        }
    }

    fn level(&self, factor: &str) -> Result<&str> {
        self.factor_levels
            .get(factor)
            .map(String::as_str)
            .ok_or_else(|| Error::MissingFactorLevel {
                factor: factor.to_string(),
            })
    }
}

/// One source row of an ANOVA table. The residual row carries no F or p.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaRow {
    pub source: String,
    pub ss: f64,
    pub df: u64,
    pub ms: f64,
    pub f_value: Option<f64>,
    pub p_value: Option<f64>,
}

/// Fixed-effects ANOVA table: effect rows in fitted order plus the residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnovaTable {
    pub rows: Vec<AnovaRow>,
    pub residual: AnovaRow,
    pub total_ss: f64,
    pub n_observations: usize,
    /// Sequential fitting order used for the Type I decomposition.
    pub factor_order: Vec<String>,
}

impl AnovaTable {
    /// Total degrees of freedom across all rows; equals N - 1 for supported
    /// designs.
    pub fn total_df(&self) -> u64 {
        self.rows.iter().map(|r| r.df).sum::<u64>() + self.residual.df
    }
}

// ---------------------------------------------------------------------------
// small dense least squares on the normal equations
// ---------------------------------------------------------------------------

/// Residual sum of squares of the least-squares fit of y on the columns.
/// Aliased (rank-deficient) columns are dropped by pivot thresholding.
fn rss(columns: &[Vec<f64>], y: &[f64]) -> f64 {
    let p = columns.len();
    let n = y.len();
    let mut xtx = vec![vec![0.0f64; p]; p];
    let mut xty = vec![0.0f64; p];
    for i in 0..p {
        for j in i..p {
            let s: f64 = columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
            xtx[i][j] = s;
            xtx[j][i] = s;
        }
        xty[i] = columns[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }

    let scale = xtx
        .iter()
        .enumerate()
        .map(|(i, row)| row[i].abs())
        .fold(0.0f64, f64::max)
        .max(1.0);
    let beta = solve_with_pivoting(xtx, xty, 1e-12 * scale);

    let mut ss = 0.0;
    for k in 0..n {
        let mut fit = 0.0;
        for (i, col) in columns.iter().enumerate() {
            fit += beta[i] * col[k];
        }
        let r = y[k] - fit;
        ss += r * r;
    }
    ss
}

/// Gauss-Jordan with diagonal pivoting on the (symmetric, PSD) normal
/// matrix. Columns whose remaining pivot falls below `tol` are aliased and
/// get a zero coefficient.
fn solve_with_pivoting(mut a: Vec<Vec<f64>>, mut b: Vec<f64>, tol: f64) -> Vec<f64> {
    let p = b.len();
    let mut used = vec![false; p];
    loop {
        let mut piv = None;
        let mut best = tol;
        for i in 0..p {
            if !used[i] && a[i][i].abs() > best {
                best = a[i][i].abs();
                piv = Some(i);
            }
        }
        let Some(piv) = piv else { break };
        used[piv] = true;
        let d = a[piv][piv];
        for v in a[piv].iter_mut() {
            *v /= d;
        }
        b[piv] /= d;
        let pivot_row = a[piv].clone();
        let pivot_b = b[piv];
        for (i, row) in a.iter_mut().enumerate() {
            if i == piv {
                continue;
            }
            let f = row[piv];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            b[i] -= f * pivot_b;
        }
    }
    let mut beta = vec![0.0f64; p];
    for i in 0..p {
        if used[i] {
            beta[i] = b[i];
        }
    }
    beta
}

/// Sorted distinct level labels of a factor.
fn levels_of(obs: &[Observation], factor: &str) -> Result<Vec<String>> {
    let mut levels = BTreeSet::new();
    for o in obs {
        levels.insert(o.level(factor)?.to_string());
    }
    if levels.len() < 2 {
        return Err(Error::SingleLevelFactor {
            factor: factor.to_string(),
        });
    }
    Ok(levels.into_iter().collect())
}

/// Reference-coded dummy columns for one factor (levels beyond the first).
fn dummy_columns(obs: &[Observation], factor: &str, levels: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut cols = vec![vec![0.0f64; obs.len()]; levels.len() - 1];
    for (k, o) in obs.iter().enumerate() {
        let lv = o.level(factor)?;
        if let Some(pos) = levels.iter().position(|l| l == lv) {
            if pos > 0 {
                cols[pos - 1][k] = 1.0;
            }
        }
    }
    Ok(cols)
}

fn effect_row(source: &str, ss: f64, df: u64, ms_res: f64, df_res: u64) -> Result<AnovaRow> {
    let ss = ss.max(0.0); // sequential differences can round below zero
    let ms = if df > 0 { ss / df as f64 } else { 0.0 };
    let (f_value, p_value) = if ms_res > 0.0 {
        let f = ms / ms_res;
        (Some(f), Some(f_sf(f, df, df_res)?))
    } else {
        (Some(f64::INFINITY), Some(0.0))
    };
    Ok(AnovaRow {
        source: source.to_string(),
        ss,
        df,
        ms,
        f_value,
        p_value,
    })
}

/// Main-effects-only fixed-effects ANOVA over the given factors.
///
/// Factors are fitted sequentially in the order given, which is recorded in
/// the output; for balanced designs the decomposition is order-independent.
pub fn anova_main_effects(obs: &[Observation], factors: &[&str]) -> Result<AnovaTable> {
    if obs.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: obs.len(),
        });
    }
    let y: Vec<f64> = obs.iter().map(|o| o.value).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "observation value",
        });
    }

    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; obs.len()]];
    let mut rss_prev = rss(&columns, &y);
    let total_ss = rss_prev;

    let mut ss_df: Vec<(String, f64, u64)> = Vec::new();
    for &factor in factors {
        let levels = levels_of(obs, factor)?;
        columns.extend(dummy_columns(obs, factor, &levels)?);
        let rss_now = rss(&columns, &y);
        ss_df.push((
            factor.to_string(),
            (rss_prev - rss_now).max(0.0),
            (levels.len() - 1) as u64,
        ));
        rss_prev = rss_now;
    }

    let model_df: u64 = ss_df.iter().map(|&(_, _, df)| df).sum();
    let n = obs.len() as u64;
    if n <= model_df + 1 {
        return Err(Error::NoResidualDf);
    }
    let df_res = n - 1 - model_df;
    let ss_res = rss_prev;
    let ms_res = ss_res / df_res as f64;

    let mut rows = Vec::new();
    for (source, ss, df) in &ss_df {
        rows.push(effect_row(source, *ss, *df, ms_res, df_res)?);
    }
    Ok(AnovaTable {
        rows,
        residual: AnovaRow {
            source: "Residual".into(),
            ss: ss_res,
            df: df_res,
            ms: ms_res,
            f_value: None,
            p_value: None,
        },
        total_ss,
        n_observations: obs.len(),
        factor_order: factors.iter().map(|s| s.to_string()).collect(),
    })
}

/// Two-way fixed-effects ANOVA with the A×B interaction row.
///
/// Every (A, B) cell must be nonempty; designs with holes are rejected.
pub fn anova_two_way_interaction(
    obs: &[Observation],
    factor_a: &str,
    factor_b: &str,
) -> Result<AnovaTable> {
    if obs.len() < 4 {
        return Err(Error::TooFewPoints {
            needed: 4,
            got: obs.len(),
        });
    }
    let y: Vec<f64> = obs.iter().map(|o| o.value).collect();
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "observation value",
        });
    }
    let levels_a = levels_of(obs, factor_a)?;
    let levels_b = levels_of(obs, factor_b)?;

    // cell occupancy check
    let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for o in obs {
        let la = o.level(factor_a)?;
        let lb = o.level(factor_b)?;
        let ia = levels_a.iter().position(|l| l == la).unwrap();
        let ib = levels_b.iter().position(|l| l == lb).unwrap();
        *cells.entry((ia, ib)).or_default() += 1;
    }
    for (ia, la) in levels_a.iter().enumerate() {
        for (ib, lb) in levels_b.iter().enumerate() {
            if !cells.contains_key(&(ia, ib)) {
                return Err(Error::EmptyCell {
                    a: la.clone(),
                    b: lb.clone(),
                });
            }
        }
    }

    let cols_a = dummy_columns(obs, factor_a, &levels_a)?;
    let cols_b = dummy_columns(obs, factor_b, &levels_b)?;

    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; obs.len()]];
    let rss_0 = rss(&columns, &y);
    let total_ss = rss_0;

    columns.extend(cols_a.iter().cloned());
    let rss_a = rss(&columns, &y);
    columns.extend(cols_b.iter().cloned());
    let rss_b = rss(&columns, &y);

    for ca in &cols_a {
        for cb in &cols_b {
            columns.push(ca.iter().zip(cb).map(|(x, z)| x * z).collect());
        }
    }
    let rss_full = rss(&columns, &y);

    let df_a = (levels_a.len() - 1) as u64;
    let df_b = (levels_b.len() - 1) as u64;
    let df_ab = df_a * df_b;
    let n = obs.len() as u64;
    if n <= df_a + df_b + df_ab + 1 {
        return Err(Error::NoResidualDf);
    }
    let df_res = n - 1 - df_a - df_b - df_ab;
    let ss_res = rss_full;
    let ms_res = ss_res / df_res as f64;

    let rows = vec![
        effect_row(factor_a, rss_0 - rss_a, df_a, ms_res, df_res)?,
        effect_row(factor_b, rss_a - rss_b, df_b, ms_res, df_res)?,
        effect_row(
            &format!("{factor_a}*{factor_b}"),
            rss_b - rss_full,
            df_ab,
            ms_res,
            df_res,
        )?,
    ];

    Ok(AnovaTable {
        rows,
        residual: AnovaRow {
            source: "Residual".into(),
            ss: ss_res,
            df: df_res,
            ms: ms_res,
            f_value: None,
            p_value: None,
        },
        total_ss,
        n_observations: obs.len(),
        factor_order: vec![factor_a.to_string(), factor_b.to_string()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs1(groups: &[(&str, &[f64])]) -> Vec<Observation> {
        let mut out = Vec::new();
        for (label, values) in groups {
            for &v in *values {
                out.push(Observation::new(v, [("g", *label)]));
            }
        }
        out
    }

    #[test]
    fn identical_groups_give_f_zero_p_one() {
        let obs = obs1(&[("a", &[1.0, 2.0, 3.0]), ("b", &[1.0, 2.0, 3.0])]);
        let t = anova_main_effects(&obs, &["g"]).unwrap();
        let row = &t.rows[0];
        assert!(row.ss.abs() < 1e-12);
        assert!(row.f_value.unwrap().abs() < 1e-12);
        assert!((row.p_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_way_hand_computation() {
        let obs = obs1(&[("a", &[1.0, 2.0, 3.0]), ("b", &[4.0, 5.0, 6.0])]);
        let t = anova_main_effects(&obs, &["g"]).unwrap();
        let row = &t.rows[0];
        assert!((row.ss - 13.5).abs() < 1e-9);
        assert_eq!(row.df, 1);
        assert!((t.residual.ss - 4.0).abs() < 1e-9);
        assert_eq!(t.residual.df, 4);
        assert!((row.f_value.unwrap() - 13.5).abs() < 1e-9);
        assert_eq!(t.total_df(), 5);
    }

    #[test]
    fn single_level_factor_rejected() {
        let obs = obs1(&[("a", &[1.0, 2.0, 3.0])]);
        assert!(matches!(
            anova_main_effects(&obs, &["g"]),
            Err(Error::SingleLevelFactor { .. })
        ));
    }

    #[test]
    fn residual_df_zero_rejected() {
        let obs = obs1(&[("a", &[1.0]), ("b", &[2.0]), ("c", &[3.0])]);
        assert!(matches!(
            anova_main_effects(&obs, &["g"]),
            Err(Error::NoResidualDf)
        ));
    }

    fn obs2(cells: &[((&str, &str), &[f64])]) -> Vec<Observation> {
        let mut out = Vec::new();
        for ((a, b), values) in cells {
            for &v in *values {
                out.push(Observation::new(v, [("A", *a), ("B", *b)]));
            }
        }
        out
    }

    #[test]
    fn two_way_interaction_hand_computation() {
        let obs = obs2(&[
            (("a1", "b1"), &[1.0, 2.0]),
            (("a1", "b2"), &[3.0, 4.0]),
            (("a2", "b1"), &[5.0, 6.0]),
            (("a2", "b2"), &[11.0, 12.0]),
        ]);
        let t = anova_two_way_interaction(&obs, "A", "B").unwrap();
        assert!((t.rows[0].ss - 72.0).abs() < 1e-9, "SS_A = {}", t.rows[0].ss);
        assert!((t.rows[1].ss - 32.0).abs() < 1e-9, "SS_B = {}", t.rows[1].ss);
        assert!((t.rows[2].ss - 8.0).abs() < 1e-9, "SS_AB = {}", t.rows[2].ss);
        assert_eq!(t.rows[2].source, "A*B");
        assert!((t.rows[2].f_value.unwrap() - 16.0).abs() < 1e-9);
        assert!((t.rows[2].p_value.unwrap() - 0.01613008990009257).abs() < 1e-4);
        assert_eq!(t.residual.df, 4);
    }

    #[test]
    fn two_way_no_interaction_by_construction() {
        // values depend on A only, balanced cells
        let obs = obs2(&[
            (("a1", "b1"), &[1.0, 2.0]),
            (("a1", "b2"), &[1.0, 2.0]),
            (("a2", "b1"), &[5.0, 6.0]),
            (("a2", "b2"), &[5.0, 6.0]),
        ]);
        let t = anova_two_way_interaction(&obs, "A", "B").unwrap();
        assert!(t.rows[2].ss.abs() < 1e-10);
        assert!(t.rows[2].f_value.unwrap().abs() < 1e-10);
    }

    #[test]
    fn empty_cell_rejected() {
        let obs = obs2(&[
            (("a1", "b1"), &[1.0, 2.0]),
            (("a1", "b2"), &[3.0, 4.0]),
            (("a2", "b1"), &[5.0, 6.0]),
        ]);
        assert!(matches!(
            anova_two_way_interaction(&obs, "A", "B"),
            Err(Error::EmptyCell { .. })
        ));
    }

    #[test]
    fn ss_additivity_balanced_three_way() {
        // balanced 2x2x2 with 2 replicates, deterministic values
        let mut obs = Vec::new();
        let mut k = 0.0;
        for a in ["a1", "a2"] {
            for b in ["b1", "b2"] {
                for c in ["c1", "c2"] {
                    for r in 0..2 {
                        k += 1.0;
                        let v = k * 0.37 + (r as f64) * 1.21 + k * k * 0.013;
                        obs.push(Observation::new(v, [("A", a), ("B", b), ("C", c)]));
                    }
                }
            }
        }
        let t = anova_main_effects(&obs, &["A", "B", "C"]).unwrap();
        let sum: f64 = t.rows.iter().map(|r| r.ss).sum::<f64>() + t.residual.ss;
        assert!(
            (sum - t.total_ss).abs() < 1e-9 * t.total_ss.abs().max(1.0),
            "sum {sum} vs total {}",
            t.total_ss
        );
        assert_eq!(t.total_df(), 15);
    }

    #[test]
    fn balanced_type_i_is_order_invariant() {
        let mut obs = Vec::new();
        let vals = [3.1, 4.5, 2.2, 6.6, 5.9, 1.4, 7.3, 8.8];
        let mut i = 0;
        for a in ["a1", "a2"] {
            for b in ["b1", "b2"] {
                for _ in 0..2 {
                    obs.push(Observation::new(vals[i], [("A", a), ("B", b)]));
                    i += 1;
                }
            }
        }
        let t1 = anova_main_effects(&obs, &["A", "B"]).unwrap();
        let t2 = anova_main_effects(&obs, &["B", "A"]).unwrap();
        let ss = |t: &AnovaTable, s: &str| t.rows.iter().find(|r| r.source == s).unwrap().ss;
        assert!((ss(&t1, "A") - ss(&t2, "A")).abs() < 1e-9);
        assert!((ss(&t1, "B") - ss(&t2, "B")).abs() < 1e-9);
    }

    #[test]
    fn f_and_p_scale_invariant() {
        let obs = obs1(&[("a", &[1.0, 2.0, 3.0]), ("b", &[4.0, 5.0, 6.0])]);
        let scaled: Vec<Observation> = obs
            .iter()
            .map(|o| Observation {
                value: o.value * -7.3,
                factor_levels: o.factor_levels.clone(),
            })
            .collect();
        let t1 = anova_main_effects(&obs, &["g"]).unwrap();
        let t2 = anova_main_effects(&scaled, &["g"]).unwrap();
        let f1 = t1.rows[0].f_value.unwrap();
        let f2 = t2.rows[0].f_value.unwrap();
        assert!((f1 - f2).abs() < 1e-9 * f1.max(1.0));
        assert!((t1.rows[0].p_value.unwrap() - t2.rows[0].p_value.unwrap()).abs() < 1e-9);
    }
}
