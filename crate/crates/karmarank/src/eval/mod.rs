//! Ranking metrics (P@1 with the tie rule, NDCG), surrogate classification
//! tasks and report generation.

mod report;
mod surrogate;

pub use report::{make_reports, AblationRow, EvalReport, ReportConfig, SubredditRow};
pub use surrogate::{surrogate_eval, SurrogateEvalTask, SurrogateThresholds};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// P@1 with the tie rule: 1 iff the predicted top comment's karma equals
/// the maximum gold karma (so any top-ranking comment counts under ties).
pub fn p_at_1(order: &[usize], karmas: &[i64]) -> Result<f64> {
    if order.is_empty() || karmas.is_empty() {
        return Err(Error::Data("p@1 of an empty list".into()));
    }
    let max = karmas.iter().max().expect("nonempty");
    Ok(if karmas[order[0]] == *max { 1.0 } else { 0.0 })
}

/// Gain functions for NDCG. Karma can be negative; both gains clip at
/// zero so the gain is always non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainKind {
    /// `max(karma, 0)`.
    Linear,
    /// `2^min(max(karma,0), 1000) - 1`.
    Exponential,
}

impl GainKind {
    pub fn apply(&self, karma: i64) -> f64 {
        match self {
            GainKind::Linear => karma.max(0) as f64,
            GainKind::Exponential => 2f64.powi(karma.clamp(0, 1000) as i32) - 1.0,
        }
    }

    pub fn parse(s: &str) -> Result<GainKind> {
        match s {
            "linear" => Ok(GainKind::Linear),
            "exponential" => Ok(GainKind::Exponential),
            other => Err(Error::Config(format!("unknown gain function: {other}"))),
        }
    }
}

/// Full-list NDCG of the predicted order: DCG with discount
/// `log2(position + 1)` normalized by the ideal ordering's DCG; defined as
/// 1 when every gain is zero. The gain must be non-negative and finite.
pub fn ndcg(order: &[usize], karmas: &[i64], gain: impl Fn(i64) -> f64) -> Result<f64> {
    if order.is_empty() || karmas.is_empty() {
        return Err(Error::Data("ndcg of an empty list".into()));
    }
    let gains: Vec<f64> = karmas
        .iter()
        .map(|&k| {
            let g = gain(k);
            if g < 0.0 || !g.is_finite() {
                return Err(Error::Numeric(format!(
                    "gain({k}) = {g}; gains must be non-negative and finite"
                )));
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;

    let dcg: f64 = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| gains[i] / ((pos + 2) as f64).log2())
        .sum();
    let mut ideal = gains.clone();
    ideal.sort_by(|a, b| b.partial_cmp(a).expect("finite gains"));
    let idcg: f64 = ideal
        .iter()
        .enumerate()
        .map(|(pos, g)| g / ((pos + 2) as f64).log2())
        .sum();
    if idcg == 0.0 {
        return Ok(1.0);
    }
    Ok(dcg / idcg)
}
