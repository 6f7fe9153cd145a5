//! Balanced surrogate classification tasks: positive vs. negative karma,
//! high vs. medium karma, and the within-list pairwise ranker. All three
//! run the same linear pairwise machinery; chance is 50%.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeaturizedList, FeaturizedMember};
use crate::ranker::{pair_transform, pairwise_accuracy, train_ranksvm, PairExample};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurrogateEvalTask {
    /// positive karma (>= pos_min) vs. non-positive (<= neg_max);
    /// cross-thread pairs.
    PosNeg,
    /// top karma percentile vs. the middle band; cross-thread pairs.
    HighMid,
    /// all comment pairs within each list.
    PairwiseRank,
}

impl SurrogateEvalTask {
    pub fn name(&self) -> &'static str {
        match self {
            SurrogateEvalTask::PosNeg => "pos-neg",
            SurrogateEvalTask::HighMid => "high-mid",
            SurrogateEvalTask::PairwiseRank => "pairwise-rank",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurrogateThresholds {
    /// Positive class: karma >= this (default 2; karma 1 is no vote
    /// beyond the author and is excluded).
    pub pos_min: i64,
    /// Negative class: karma <= this (default 0).
    pub neg_max: i64,
    /// High class: karma at or above this train-split quantile.
    pub high_pct: f64,
    /// Mid class: karma between these train-split quantiles.
    pub mid_lo_pct: f64,
    pub mid_hi_pct: f64,
    /// Cap on generated cross-thread pairs per side.
    pub max_pairs: usize,
    /// Penalty for the surrogate classifiers.
    pub c: f64,
}

impl Default for SurrogateThresholds {
    fn default() -> Self {
        SurrogateThresholds {
            pos_min: 2,
            neg_max: 0,
            high_pct: 0.95,
            mid_lo_pct: 0.40,
            mid_hi_pct: 0.60,
            max_pairs: 20_000,
            c: 1.0,
        }
    }
}

fn members(lists: &[FeaturizedList]) -> Vec<&FeaturizedMember> {
    lists.iter().flat_map(|l| l.members.iter()).collect()
}

/// Nearest-rank quantile of the sorted karmas.
fn quantile(sorted: &[i64], q: f64) -> i64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Builds balanced cross-thread difference pairs between two pools,
/// mirrored so the signed set is symmetric.
fn cross_pairs(
    pos: &[&FeaturizedMember],
    neg: &[&FeaturizedMember],
    cap: usize,
    seed: u64,
    stream: &str,
) -> Vec<PairExample> {
    let mut rng = substream(seed, stream);
    let n = pos.len().min(neg.len());
    let mut pos_idx: Vec<usize> = (0..pos.len()).collect();
    let mut neg_idx: Vec<usize> = (0..neg.len()).collect();
    let mut out = Vec::new();
    'rounds: for _ in 0..3 {
        pos_idx.shuffle(&mut rng);
        neg_idx.shuffle(&mut rng);
        for i in 0..n {
            if out.len() / 2 >= cap {
                break 'rounds;
            }
            let p = pos[pos_idx[i]];
            let m = neg[neg_idx[i]];
            let diff: Vec<f64> = p.values.iter().zip(&m.values).map(|(a, b)| a - b).collect();
            let negdiff: Vec<f64> = diff.iter().map(|x| -x).collect();
            out.push(PairExample { diff, label: 1.0 });
            out.push(PairExample {
                diff: negdiff,
                label: -1.0,
            });
        }
    }
    out
}

/// Trains on the train split's balanced pairs and reports held-out
/// pairwise accuracy on the test split. Classes with fewer than 100
/// training comments are fatal.
pub fn surrogate_eval(
    task: SurrogateEvalTask,
    train: &[FeaturizedList],
    test: &[FeaturizedList],
    thresholds: &SurrogateThresholds,
    epochs: usize,
    seed: u64,
) -> Result<f64> {
    let (train_pairs, test_pairs) = match task {
        SurrogateEvalTask::PairwiseRank => {
            let mask: Vec<usize> = match train.first() {
                Some(l) => (0..l.members[0].values.len()).collect(),
                None => return Err(Error::Data("no training lists for surrogate".into())),
            };
            (pair_transform(train, &mask), pair_transform(test, &mask))
        }
        SurrogateEvalTask::PosNeg | SurrogateEvalTask::HighMid => {
            let split_classes = |lists: &[FeaturizedList],
                                 bounds: &(i64, i64, i64, i64)|
             -> (Vec<&FeaturizedMember>, Vec<&FeaturizedMember>) {
                let all = members(lists);
                match task {
                    SurrogateEvalTask::PosNeg => (
                        all.iter().filter(|m| m.karma >= thresholds.pos_min).copied().collect(),
                        all.iter().filter(|m| m.karma <= thresholds.neg_max).copied().collect(),
                    ),
                    SurrogateEvalTask::HighMid => (
                        all.iter().filter(|m| m.karma >= bounds.0).copied().collect(),
                        all.iter()
                            .filter(|m| m.karma >= bounds.2 && m.karma <= bounds.3 && m.karma < bounds.0)
                            .copied()
                            .collect(),
                    ),
                    SurrogateEvalTask::PairwiseRank => unreachable!(),
                }
            };
            // Quantile bounds come from the train split only.
            let mut karmas: Vec<i64> = members(train).iter().map(|m| m.karma).collect();
            if karmas.is_empty() {
                return Err(Error::Data("no training comments for surrogate".into()));
            }
            karmas.sort_unstable();
            let bounds = (
                quantile(&karmas, thresholds.high_pct),
                0,
                quantile(&karmas, thresholds.mid_lo_pct),
                quantile(&karmas, thresholds.mid_hi_pct),
            );
            let (pos_train, neg_train) = split_classes(train, &bounds);
            if pos_train.len() < 100 || neg_train.len() < 100 {
                return Err(Error::Data(format!(
                    "surrogate {}: need >= 100 training comments per class, got {} / {}",
                    task.name(),
                    pos_train.len(),
                    neg_train.len()
                )));
            }
            let (pos_test, neg_test) = split_classes(test, &bounds);
            if pos_test.is_empty() || neg_test.is_empty() {
                return Err(Error::Data(format!(
                    "surrogate {}: empty test class ({} / {})",
                    task.name(),
                    pos_test.len(),
                    neg_test.len()
                )));
            }
            (
                cross_pairs(
                    &pos_train,
                    &neg_train,
                    thresholds.max_pairs,
                    seed,
                    &format!("surrogate/{}/train", task.name()),
                ),
                cross_pairs(
                    &pos_test,
                    &neg_test,
                    thresholds.max_pairs,
                    seed,
                    &format!("surrogate/{}/test", task.name()),
                ),
            )
        }
    };

    if train_pairs.is_empty() || test_pairs.is_empty() {
        return Err(Error::Data(format!(
            "surrogate {}: no usable pairs",
            task.name()
        )));
    }
    let model = train_ranksvm(&train_pairs, thresholds.c, epochs, seed)?;
    Ok(pairwise_accuracy(&model.weights, &test_pairs))
}
