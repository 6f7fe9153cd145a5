//! Author reputation via the k-index and the top-comment analysis.
//!
//! The k-index of an author is the largest `k` such that at least `k` of
//! their comments have karma >= k (h-index semantics over comment karmas).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::CorpusStore;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuthorHistory {
    pub author: String,
    pub comment_karmas: Vec<i64>,
}

impl AuthorHistory {
    pub fn k_index(&self) -> usize {
        k_index(&self.comment_karmas)
    }
}

/// Largest `k` with at least `k` comments of karma >= k.
pub fn k_index(karmas: &[i64]) -> usize {
    let mut sorted: Vec<i64> = karmas.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mut k = 0;
    for (i, &karma) in sorted.iter().enumerate() {
        if karma >= (i + 1) as i64 {
            k = i + 1;
        } else {
            break;
        }
    }
    k
}

/// All histories observed in the store, keyed by author. Deleted comments
/// are skipped (their author placeholder carries no identity).
pub fn author_histories(store: &CorpusStore) -> BTreeMap<String, AuthorHistory> {
    let mut map: BTreeMap<String, AuthorHistory> = BTreeMap::new();
    for thread in store.threads.values() {
        for c in &thread.comments {
            if c.is_deleted {
                continue;
            }
            map.entry(c.author.clone())
                .or_insert_with(|| AuthorHistory {
                    author: c.author.clone(),
                    comment_karmas: Vec::new(),
                })
                .comment_karmas
                .push(c.karma);
        }
    }
    map
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopCommentRow {
    pub subreddit: String,
    pub top1_pct: f64,
    pub top3_pct: f64,
    /// Threads included in the percentages.
    pub n_threads: u64,
    /// Threads excluded for having a single participant.
    pub n_excluded: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopCommentReport {
    pub rows: Vec<TopCommentRow>,
}

impl TopCommentReport {
    /// CSV with columns subreddit, top1_pct, top3_pct, n_threads.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subreddit,top1_pct,top3_pct,n_threads\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.1},{:.1},{}",
                r.subreddit, r.top1_pct, r.top3_pct, r.n_threads
            );
        }
        out
    }
}

/// Per-subreddit percentage of threads whose maximum-karma comment was
/// written by one of the `n_top` highest-k-index participants. Ties at the
/// k-index boundary all count as top; a karma tie at the maximum counts as
/// a hit if any tied comment's author qualifies. Threads with a single
/// participant are excluded and counted.
pub fn top_comment_report(store: &CorpusStore, include_post_author: bool) -> TopCommentReport {
    let histories = author_histories(store);
    let k_of: HashMap<&str, usize> = histories
        .values()
        .map(|h| (h.author.as_str(), h.k_index()))
        .collect();

    // subreddit -> (hits_top1, hits_top3, included, excluded)
    let mut agg: BTreeMap<String, (u64, u64, u64, u64)> = BTreeMap::new();
    for thread in store.threads.values() {
        let entry = agg.entry(thread.subreddit.clone()).or_insert((0, 0, 0, 0));
        let eligible: Vec<_> = thread.comments.iter().filter(|c| !c.is_deleted).collect();
        let mut participants: HashSet<&str> = eligible.iter().map(|c| c.author.as_str()).collect();
        if include_post_author {
            participants.insert(thread.author.as_str());
        }
        if participants.len() < 2 || eligible.is_empty() {
            entry.3 += 1;
            continue;
        }
        entry.2 += 1;

        let max_karma = eligible.iter().map(|c| c.karma).max().expect("nonempty");
        let top_authors: HashSet<&str> = eligible
            .iter()
            .filter(|c| c.karma == max_karma)
            .map(|c| c.author.as_str())
            .collect();

        let mut ks: Vec<usize> = participants.iter().map(|a| k_of[a]).collect();
        ks.sort_unstable_by(|a, b| b.cmp(a));
        let hit = |n_top: usize| -> bool {
            let boundary = ks[n_top.min(ks.len()) - 1];
            top_authors.iter().any(|a| k_of[a] >= boundary)
        };
        if hit(1) {
            entry.0 += 1;
        }
        if hit(3) {
            entry.1 += 1;
        }
    }

    let rows = agg
        .into_iter()
        .map(|(subreddit, (t1, t3, n, excl))| TopCommentRow {
            subreddit,
            top1_pct: if n > 0 { 100.0 * t1 as f64 / n as f64 } else { 0.0 },
            top3_pct: if n > 0 { 100.0 * t3 as f64 / n as f64 } else { 0.0 },
            n_threads: n,
            n_excluded: excl,
        })
        .collect();
    TopCommentReport { rows }
}
