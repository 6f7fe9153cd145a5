//! Thread-level train/validation/test partition of comment lists.
//!
//! Threads, not lists, are shuffled and assigned, so no thread's lists ever
//! straddle a partition boundary. The validation side is also carved out at
//! thread level, which lets model training audit that it never touched a
//! validation or test thread.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::substream;

use super::{CommentList, Split};

pub fn split_corpus(
    lists: &[CommentList],
    train_frac: f64,
    val_frac_of_train: f64,
    seed: u64,
) -> Result<Split> {
    if !(0.0..1.0).contains(&(1.0 - train_frac)) || train_frac <= 0.0 {
        return Err(Error::Config(format!("train_frac out of range: {train_frac}")));
    }
    if !(0.0..1.0).contains(&val_frac_of_train) {
        return Err(Error::Config(format!(
            "val_frac_of_train out of range: {val_frac_of_train}"
        )));
    }

    let mut by_thread: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for l in lists {
        by_thread.entry(&l.thread_id).or_default().push(&l.id);
    }
    if by_thread.len() < 3 {
        return Err(Error::Data(format!(
            "need at least 3 threads with lists to split, got {}",
            by_thread.len()
        )));
    }

    let total: usize = by_thread.values().map(Vec::len).sum();
    let target_trainval = (train_frac * total as f64).round() as usize;

    let mut thread_ids: Vec<&str> = by_thread.keys().copied().collect();
    thread_ids.shuffle(&mut substream(seed, "split"));

    let mut trainval_threads = Vec::new();
    let mut test_threads = Vec::new();
    let mut trainval_count = 0usize;
    for tid in &thread_ids {
        let n = by_thread[tid].len();
        if trainval_count < target_trainval {
            trainval_threads.push(*tid);
            trainval_count += n;
        } else {
            test_threads.push(*tid);
        }
    }
    // Keep all three partitions inhabited.
    if test_threads.is_empty() {
        let moved = trainval_threads.pop().expect(">=3 threads");
        trainval_count -= by_thread[moved].len();
        test_threads.push(moved);
    }
    if trainval_threads.len() < 2 {
        let moved = test_threads.pop().expect("nonempty test");
        trainval_count += by_thread[moved].len();
        trainval_threads.push(moved);
        if test_threads.is_empty() {
            let moved = trainval_threads.remove(0);
            trainval_count -= by_thread[moved].len();
            test_threads.push(moved);
        }
    }

    let target_val = (val_frac_of_train * trainval_count as f64).round() as usize;
    let mut tv = trainval_threads.clone();
    tv.shuffle(&mut substream(seed, "split/val"));
    let mut val_threads = Vec::new();
    let mut train_threads = Vec::new();
    let mut val_count = 0usize;
    for tid in &tv {
        if val_count < target_val && train_threads.len() + (tv.len() - val_threads.len()) > 1 {
            val_threads.push(*tid);
            val_count += by_thread[tid].len();
        } else {
            train_threads.push(*tid);
        }
    }
    if train_threads.is_empty() {
        train_threads.push(val_threads.pop().expect("nonempty trainval"));
    }

    let collect = |threads: &[&str]| -> Vec<String> {
        let mut ids: Vec<String> = threads
            .iter()
            .flat_map(|t| by_thread[*t].iter().map(|s| s.to_string()))
            .collect();
        ids.sort();
        ids
    };

    Ok(Split {
        train: collect(&train_threads),
        validation: collect(&val_threads),
        test: collect(&test_threads),
        seed,
    })
}
