//! Greedy forward feature-group selection on validation P@1.
//!
//! Each round adds the group whose addition (with the penalty retuned)
//! gives the best validation P@1; after all groups are placed, the prefix
//! with the best P@1 wins. Ties fall back to the canonical group order,
//! and among equal prefixes the shortest wins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema, FeaturizedList};

use super::{pair_transform, tune_c, RankTrainConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionStep {
    pub group: FeatureGroup,
    pub c: f64,
    pub val_p1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionTrace {
    /// Groups in the order they were added, with the tuned C and
    /// validation P@1 of each growing prefix.
    pub steps: Vec<SelectionStep>,
    pub best_prefix: Vec<FeatureGroup>,
    pub best_val_p1: f64,
}

impl SelectionTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,group,c,val_p1,in_best_prefix\n");
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{:.4},{}\n",
                i + 1,
                s.group,
                s.c,
                s.val_p1,
                if i < self.best_prefix.len() { 1 } else { 0 }
            ));
        }
        out
    }
}

pub fn greedy_select(
    schema: &FeatureSchema,
    train: &[FeaturizedList],
    validation: &[FeaturizedList],
    groups: &[FeatureGroup],
    cfg: &RankTrainConfig,
) -> Result<SelectionTrace> {
    if groups.is_empty() {
        return Err(Error::Config("greedy selection needs at least one group".into()));
    }
    let mut remaining: Vec<FeatureGroup> = FeatureGroup::ALL
        .iter()
        .filter(|g| groups.contains(g))
        .copied()
        .collect();
    let mut selected: Vec<FeatureGroup> = Vec::new();
    let mut steps: Vec<SelectionStep> = Vec::new();

    while !remaining.is_empty() {
        let mut best: Option<(usize, f64, f64)> = None; // (remaining idx, c, p1)
        for (ri, g) in remaining.iter().enumerate() {
            let mut candidate = selected.clone();
            candidate.push(*g);
            let mask = schema.group_columns(&candidate);
            if mask.is_empty() {
                continue;
            }
            let pairs = pair_transform(train, &mask);
            let (c, p1, _) = tune_c(&cfg.c_grid, &pairs, validation, &mask, cfg.epochs, cfg.seed)?;
            // Strict improvement only: ties resolve to the earlier group
            // in canonical order.
            if best.map_or(true, |(_, _, bp)| p1 > bp) {
                best = Some((ri, c, p1));
            }
        }
        let (ri, c, p1) =
            best.ok_or_else(|| Error::Data("no usable group columns in schema".into()))?;
        let group = remaining.remove(ri);
        selected.push(group);
        steps.push(SelectionStep {
            group,
            c,
            val_p1: p1,
        });
    }

    // Earliest maximum: the shortest prefix wins ties.
    let mut best_idx = 0;
    for (i, s) in steps.iter().enumerate() {
        if s.val_p1 > steps[best_idx].val_p1 {
            best_idx = i;
        }
    }
    Ok(SelectionTrace {
        best_prefix: steps[..=best_idx].iter().map(|s| s.group).collect(),
        best_val_p1: steps[best_idx].val_p1,
        steps,
    })
}
