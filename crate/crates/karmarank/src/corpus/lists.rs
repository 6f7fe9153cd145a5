//! Construction of ranking instances: sliding windows of consecutive
//! comments within a thread.

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::rng::substream;

use super::{CommentList, Thread};

#[derive(Debug, Clone)]
pub struct ListParams {
    /// Window length L.
    pub length: usize,
    /// Maximum allowed span between first and last member, in seconds.
    /// `None` disables the limit.
    pub max_window_secs: Option<i64>,
    /// Window advance between candidate starts.
    pub stride: usize,
    /// Cap per thread; excess windows are subsampled with the run seed.
    pub max_lists_per_thread: usize,
}

impl Default for ListParams {
    fn default() -> Self {
        ListParams {
            length: 10,
            max_window_secs: Some(3600),
            stride: 10,
            max_lists_per_thread: 50,
        }
    }
}

/// Builds the thread's comment lists. Members are consecutive non-deleted
/// comments in global creation order; deleted comments stay in the thread
/// as graph placeholders only. A thread with fewer than `length` eligible
/// comments yields no lists.
pub fn build_comment_lists(
    thread: &Thread,
    params: &ListParams,
    seed: u64,
) -> Result<Vec<CommentList>> {
    if params.length < 2 {
        return Err(Error::Config(format!(
            "list length must be >= 2, got {}",
            params.length
        )));
    }
    if params.stride == 0 {
        return Err(Error::Config("stride must be >= 1".into()));
    }
    let eligible: Vec<&super::Comment> =
        thread.comments.iter().filter(|c| !c.is_deleted).collect();
    if eligible.len() < params.length {
        return Ok(Vec::new());
    }

    let mut windows = Vec::new();
    let mut start = 0;
    while start + params.length <= eligible.len() {
        let first = eligible[start];
        let last = eligible[start + params.length - 1];
        let span = last.created_utc - first.created_utc;
        if params.max_window_secs.map_or(true, |m| span <= m) {
            windows.push((start, span, last.created_utc));
        }
        start += params.stride;
    }

    if windows.len() > params.max_lists_per_thread {
        let mut rng = substream(seed, &format!("sampling/{}", thread.post_id));
        let mut keep = sample(&mut rng, windows.len(), params.max_lists_per_thread).into_vec();
        keep.sort_unstable();
        windows = keep.into_iter().map(|i| windows[i]).collect();
    }

    Ok(windows
        .into_iter()
        .map(|(start, span, cutoff)| CommentList {
            id: format!("{}:{:04}", thread.post_id, start),
            thread_id: thread.post_id.clone(),
            subreddit: thread.subreddit.clone(),
            members: eligible[start..start + params.length]
                .iter()
                .map(|c| c.id.clone())
                .collect(),
            window_span_seconds: span,
            history_cutoff_utc: cutoff,
        })
        .collect())
}
