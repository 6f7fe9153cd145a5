//! Pairwise linear ranking SVM: pair transform, training, penalty tuning,
//! deterministic list ranking and greedy feature-group selection.

mod select;
pub mod svm;

pub use select::{greedy_select, SelectionStep, SelectionTrace};
pub use svm::{HingeConfig, HingeModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::p_at_1;
use crate::features::{FeatureGroup, FeatureSchema, FeaturizedList, FeaturizedMember};

pub const RANK_MODEL_VERSION: u32 = 1;

/// One signed difference-vector example.
#[derive(Debug, Clone)]
pub struct PairExample {
    pub diff: Vec<f64>,
    /// +1 or -1.
    pub label: f64,
}

/// Training hyperparameters shared by tuning, selection and evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankTrainConfig {
    pub c_grid: Vec<f64>,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for RankTrainConfig {
    fn default() -> Self {
        RankTrainConfig {
            c_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0],
            epochs: 30,
            seed: 0,
        }
    }
}

/// For every within-list pair with distinct karma, emits both signed
/// difference vectors: `x_hi - x_lo` labeled +1 and `x_lo - x_hi` labeled
/// -1. Equal-karma pairs emit nothing; pairs never span lists.
pub fn pair_transform(lists: &[FeaturizedList], mask: &[usize]) -> Vec<PairExample> {
    let mut out = Vec::new();
    for list in lists {
        let n = list.members.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&list.members[i], &list.members[j]);
                if a.karma == b.karma {
                    continue;
                }
                let (hi, lo) = if a.karma > b.karma { (a, b) } else { (b, a) };
                let diff: Vec<f64> = mask
                    .iter()
                    .map(|&k| hi.values[k] - lo.values[k])
                    .collect();
                let neg: Vec<f64> = diff.iter().map(|x| -x).collect();
                out.push(PairExample { diff, label: 1.0 });
                out.push(PairExample { diff: neg, label: -1.0 });
            }
        }
    }
    out
}

/// Trains the pairwise SVM on difference vectors (no bias term).
pub fn train_ranksvm(pairs: &[PairExample], c: f64, epochs: usize, seed: u64) -> Result<HingeModel> {
    if pairs.is_empty() {
        return Err(Error::Data("pair set is empty (all karmas tied?)".into()));
    }
    let xs: Vec<Vec<f64>> = pairs.iter().map(|p| p.diff.clone()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.label).collect();
    svm::train_hinge(
        &xs,
        &ys,
        &HingeConfig {
            c,
            epochs,
            seed,
            with_bias: false,
        },
    )
}

/// Fraction of pairs ordered correctly by `weights`; zero-score ties earn
/// half credit, so balanced chance is exactly 0.5.
pub fn pairwise_accuracy(weights: &[f64], pairs: &[PairExample]) -> f64 {
    if pairs.is_empty() {
        return 0.5;
    }
    let mut score = 0.0;
    for p in pairs {
        let s = svm::dot(weights, &p.diff) * p.label;
        if s > 0.0 {
            score += 1.0;
        } else if s == 0.0 {
            score += 0.5;
        }
    }
    score / pairs.len() as f64
}

/// Indices of `members` in predicted rank order: descending score, ties
/// broken by earlier creation time, then id.
pub fn rank_order(weights: &[f64], members: &[FeaturizedMember], mask: &[usize]) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let s: f64 = mask.iter().zip(weights).map(|(&k, w)| m.values[k] * w).sum();
            (i, s)
        })
        .collect();
    scored.sort_by(|(i, si), (j, sj)| {
        sj.partial_cmp(si)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                let (a, b) = (&members[*i], &members[*j]);
                (a.created_utc, a.comment_id.as_str()).cmp(&(b.created_utc, b.comment_id.as_str()))
            })
    });
    scored.into_iter().map(|(i, _)| i).collect()
}

/// Mean P@1 of `weights` over the given lists.
pub fn mean_p_at_1(weights: &[f64], lists: &[FeaturizedList], mask: &[usize]) -> Result<f64> {
    if lists.is_empty() {
        return Err(Error::Data("no lists to evaluate".into()));
    }
    let mut total = 0.0;
    for l in lists {
        let order = rank_order(weights, &l.members, mask);
        let karmas: Vec<i64> = l.members.iter().map(|m| m.karma).collect();
        total += p_at_1(&order, &karmas)?;
    }
    Ok(total / lists.len() as f64)
}

/// Grid-searches the penalty to maximize validation P@1. The grid is
/// scanned in ascending order and only strict improvements move the
/// winner, so ties resolve to the smallest (most regularized) C.
pub fn tune_c(
    grid: &[f64],
    train_pairs: &[PairExample],
    validation: &[FeaturizedList],
    mask: &[usize],
    epochs: usize,
    seed: u64,
) -> Result<(f64, f64, HingeModel)> {
    if grid.is_empty() {
        return Err(Error::Config("penalty grid is empty".into()));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    let mut best: Option<(f64, f64, HingeModel)> = None;
    for &c in &grid {
        let model = train_ranksvm(train_pairs, c, epochs, seed)?;
        let p1 = mean_p_at_1(&model.weights, validation, mask)?;
        if best.as_ref().map_or(true, |(_, bp, _)| p1 > *bp) {
            best = Some((c, p1, model));
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Linear ranking model over a named feature subset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankModel {
    pub version: u32,
    /// Column names (`GROUP:feature`) the weights align with.
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub c: f64,
    pub selected_groups: Vec<FeatureGroup>,
    pub seed: u64,
    pub epochs: usize,
    pub loss_trace: Vec<f64>,
    pub schema_hash: String,
    pub corpus_hash: String,
}

impl RankModel {
    /// Trains on the given groups with the penalty tuned on validation.
    pub fn fit(
        schema: &FeatureSchema,
        train: &[FeaturizedList],
        validation: &[FeaturizedList],
        groups: &[FeatureGroup],
        cfg: &RankTrainConfig,
        corpus_hash: &str,
    ) -> Result<RankModel> {
        let mask = schema.group_columns(groups);
        if mask.is_empty() {
            return Err(Error::Config(format!(
                "no schema columns for groups {groups:?}"
            )));
        }
        let pairs = pair_transform(train, &mask);
        let (c, _, model) = tune_c(&cfg.c_grid, &pairs, validation, &mask, cfg.epochs, cfg.seed)?;
        Ok(RankModel {
            version: RANK_MODEL_VERSION,
            feature_names: mask
                .iter()
                .map(|&i| schema.columns[i].to_string())
                .collect(),
            weights: model.weights,
            c,
            selected_groups: groups.to_vec(),
            seed: cfg.seed,
            epochs: cfg.epochs,
            loss_trace: model.loss_trace,
            schema_hash: schema.hash(),
            corpus_hash: corpus_hash.to_string(),
        })
    }

    /// Predicted permutation of the list members. Fatal when the schema
    /// does not carry this model's features.
    pub fn rank_list(&self, list: &FeaturizedList, schema: &FeatureSchema) -> Result<Vec<usize>> {
        let mask = self.mask(schema)?;
        Ok(rank_order(&self.weights, &list.members, &mask))
    }

    /// Column indices of this model's features in `schema`.
    pub fn mask(&self, schema: &FeatureSchema) -> Result<Vec<usize>> {
        let index: std::collections::HashMap<String, usize> = schema
            .columns
            .iter()
            .enumerate()
            .map(|(i, c)| (c.to_string(), i))
            .collect();
        self.feature_names
            .iter()
            .map(|n| {
                index.get(n).copied().ok_or_else(|| {
                    Error::Data(format!("feature {n} missing from schema (mismatch)"))
                })
            })
            .collect()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let m: RankModel = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if m.version != RANK_MODEL_VERSION {
            return Err(Error::Data(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand::Rng;

    pub(crate) fn synthetic_lists(
        n_lists: usize,
        members: usize,
        dim: usize,
        weights: &[f64],
        noise: f64,
        seed: u64,
    ) -> Vec<FeaturizedList> {
        let mut rng = substream(seed, "ranker-fixture");
        (0..n_lists)
            .map(|l| {
                let members = (0..members)
                    .map(|m| {
                        let values: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                        let score: f64 = values.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>()
                            + noise * rng.gen_range(-1.0..1.0);
                        FeaturizedMember {
                            comment_id: format!("l{l}m{m}"),
                            created_utc: m as i64,
                            karma: (score * 1000.0).round() as i64,
                            values,
                        }
                    })
                    .collect();
                FeaturizedList {
                    list_id: format!("t{l}:0000"),
                    thread_id: format!("t{l}"),
                    subreddit: "s".into(),
                    members,
                }
            })
            .collect()
    }

    fn full_mask(dim: usize) -> Vec<usize> {
        (0..dim).collect()
    }

    #[test]
    fn pair_counts_for_distinct_and_tied_lists() {
        let w = vec![1.0, -0.5, 0.25];
        let lists = synthetic_lists(1, 10, 3, &w, 0.0, 1);
        let pairs = pair_transform(&lists, &full_mask(3));
        assert_eq!(pairs.len(), 90, "45 unordered pairs, both signs");

        let mut tied = synthetic_lists(1, 10, 3, &w, 0.0, 2);
        for m in tied[0].members.iter_mut() {
            m.karma = 7;
        }
        assert!(pair_transform(&tied, &full_mask(3)).is_empty());
    }

    #[test]
    fn pairs_never_span_lists() {
        let w = vec![1.0];
        let lists = synthetic_lists(2, 4, 1, &w, 0.0, 3);
        let pairs = pair_transform(&lists, &full_mask(1));
        // 2 lists x C(4,2) pairs x 2 signs at most.
        assert!(pairs.len() <= 2 * 6 * 2);
        // Recompute per-list and compare totals.
        let a = pair_transform(&lists[..1], &full_mask(1)).len();
        let b = pair_transform(&lists[1..], &full_mask(1)).len();
        assert_eq!(pairs.len(), a + b);
    }

    #[test]
    fn pair_set_is_antisymmetric() {
        let w = vec![0.7, 0.1];
        let lists = synthetic_lists(3, 5, 2, &w, 0.1, 4);
        let pairs = pair_transform(&lists, &full_mask(2));
        assert_eq!(pairs.len() % 2, 0);
        for chunk in pairs.chunks(2) {
            assert_eq!(chunk[0].label, -chunk[1].label);
            for (a, b) in chunk[0].diff.iter().zip(&chunk[1].diff) {
                assert_eq!(*a, -*b);
            }
        }
    }

    #[test]
    fn planted_weights_are_recovered() {
        let w = vec![1.0, -0.6, 0.3, 0.0, 0.8];
        let train = synthetic_lists(150, 8, 5, &w, 0.0, 5);
        let held = synthetic_lists(60, 8, 5, &w, 0.0, 6);
        let pairs = pair_transform(&train, &full_mask(5));
        let model = train_ranksvm(&pairs, 10.0, 30, 7).unwrap();
        let held_pairs = pair_transform(&held, &full_mask(5));
        let acc = pairwise_accuracy(&model.weights, &held_pairs);
        assert!(acc >= 0.98, "held-out pairwise accuracy {acc}");
    }

    #[test]
    fn training_is_bit_deterministic() {
        let w = vec![0.4, 0.9];
        let lists = synthetic_lists(40, 6, 2, &w, 0.2, 8);
        let pairs = pair_transform(&lists, &full_mask(2));
        let a = train_ranksvm(&pairs, 1.0, 20, 9).unwrap();
        let b = train_ranksvm(&pairs, 1.0, 20, 9).unwrap();
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn zero_weight_model_ranks_by_time_then_id() {
        let w = vec![1.0, 1.0];
        let lists = synthetic_lists(1, 6, 2, &w, 0.0, 10);
        let zero = vec![0.0, 0.0];
        let order = rank_order(&zero, &lists[0].members, &full_mask(2));
        assert_eq!(order, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn single_feature_model_sorts_by_that_feature() {
        let w = vec![1.0];
        let lists = synthetic_lists(1, 7, 1, &w, 0.0, 11);
        let order = rank_order(&[1.0], &lists[0].members, &full_mask(1));
        let values: Vec<f64> = order
            .iter()
            .map(|&i| lists[0].members[i].values[0])
            .collect();
        for pair in values.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
    }

    #[test]
    fn rank_order_is_a_permutation_and_scale_invariant() {
        let mut rng = substream(12, "perm-test");
        for _ in 0..1000 {
            let dim = rng.gen_range(1..5);
            let n = rng.gen_range(1..12);
            let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lists = synthetic_lists(1, n, dim, &w, 0.5, rng.gen());
            let order = rank_order(&w, &lists[0].members, &full_mask(dim));
            let mut sorted = order.clone();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..n).collect::<Vec<_>>());

            let w2: Vec<f64> = w.iter().map(|x| x * 3.7).collect();
            let order2 = rank_order(&w2, &lists[0].members, &full_mask(dim));
            assert_eq!(order, order2, "rank order not scale invariant");
        }
    }

    #[test]
    fn tune_c_single_value_and_tie_rules() {
        let w = vec![1.0, -0.4];
        let train = synthetic_lists(40, 6, 2, &w, 0.0, 13);
        let val = synthetic_lists(20, 6, 2, &w, 0.0, 14);
        let pairs = pair_transform(&train, &full_mask(2));

        let (c, _, _) = tune_c(&[0.37], &pairs, &val, &full_mask(2), 20, 1).unwrap();
        assert_eq!(c, 0.37);

        // A grid of equally perfect values ties to the smallest.
        let (c, p1, _) = tune_c(&[10.0, 1.0, 100.0], &pairs, &val, &full_mask(2), 20, 1).unwrap();
        assert_eq!(p1, 1.0);
        assert_eq!(c, 1.0);
    }

    #[test]
    fn tiny_c_underfits_so_tuning_picks_a_large_one() {
        // Features scaled down so small C (huge regularization) cannot
        // reach useful weights, while C >= 1 fits the planted signal.
        let w = vec![1.0, 0.2, -0.3];
        let mut train = synthetic_lists(60, 8, 3, &w, 0.0, 15);
        let mut val = synthetic_lists(30, 8, 3, &w, 0.0, 16);
        for l in train.iter_mut().chain(val.iter_mut()) {
            for m in l.members.iter_mut() {
                for v in m.values.iter_mut() {
                    *v *= 0.01;
                }
            }
        }
        let pairs = pair_transform(&train, &full_mask(3));
        let grid = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0];
        let (c, _, _) = tune_c(&grid, &pairs, &val, &full_mask(3), 20, 2).unwrap();
        assert!(c >= 1.0, "tuned C {c} should be >= 1");
    }

    #[test]
    fn vanishing_c_scores_half_on_noise_pairs() {
        let w = vec![0.0, 0.0, 0.0];
        let lists = synthetic_lists(50, 6, 3, &w, 1.0, 17);
        let pairs = pair_transform(&lists, &full_mask(3));
        let model = train_ranksvm(&pairs, 1e-9, 15, 18).unwrap();
        let norm: f64 = model.weights.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 1e-3, "weights should vanish, norm {norm}");
        let fresh = synthetic_lists(50, 6, 3, &w, 1.0, 19);
        let fresh_pairs = pair_transform(&fresh, &full_mask(3));
        let acc = pairwise_accuracy(&model.weights, &fresh_pairs);
        assert!((acc - 0.5).abs() <= 0.05, "noise accuracy {acc}");
    }

    #[test]
    fn rank_model_rejects_schema_mismatch() {
        use crate::features::{FeatureName, FeatureSchema, NormStat, SCHEMA_VERSION};
        let schema = FeatureSchema {
            version: SCHEMA_VERSION,
            columns: vec![FeatureName {
                group: FeatureGroup::Gt,
                name: "depth".into(),
            }],
            dropped: vec![],
            normalization: [("s".to_string(), vec![NormStat { mean: 0.0, std: 1.0 }])]
                .into_iter()
                .collect(),
        };
        let model = RankModel {
            version: RANK_MODEL_VERSION,
            feature_names: vec!["GT:unknown_feature".into()],
            weights: vec![1.0],
            c: 1.0,
            selected_groups: vec![FeatureGroup::Gt],
            seed: 0,
            epochs: 1,
            loss_trace: vec![],
            schema_hash: String::new(),
            corpus_hash: String::new(),
        };
        let lists = synthetic_lists(1, 3, 1, &[1.0], 0.0, 20);
        assert!(model.rank_list(&lists[0], &schema).is_err());
    }
}
