//! Line-delimited JSON dump ingestion.
//!
//! The expected record shape follows the common export field names: posts
//! carry `id`, `title`, `selftext`/`url`, `author`, `created_utc`,
//! `subreddit`; comments carry `id`, `parent_id`, `link_id`, `author`,
//! `created_utc`, `body`, `score`, `subreddit`, `author_flair_text`.
//! `score` maps to karma. Deleted comments are retained as placeholders
//! with `is_deleted = true`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

use super::{Comment, CorpusStore, Thread};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpSchema {
    RedditJsonl,
}

impl DumpSchema {
    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "reddit-jsonl" => Ok(DumpSchema::RedditJsonl),
            other => Err(Error::Config(format!("unknown dump schema id: {other}"))),
        }
    }

    pub fn id(&self) -> &'static str {
        "reddit-jsonl"
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: Option<String>,
    parent_id: Option<String>,
    link_id: Option<String>,
    author: Option<String>,
    created_utc: Option<serde_json::Value>,
    body: Option<String>,
    title: Option<String>,
    selftext: Option<String>,
    url: Option<String>,
    score: Option<i64>,
    subreddit: Option<String>,
    author_flair_text: Option<String>,
}

/// Drops the `tN_` fullname prefix if present.
fn strip_prefix(id: &str) -> &str {
    if id.len() > 3 && id.as_bytes()[0] == b't' && id.as_bytes()[2] == b'_' {
        &id[3..]
    } else {
        id
    }
}

fn parse_utc(v: &serde_json::Value) -> Option<i64> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .or_else(|| n.as_f64().map(|f| f as i64)),
        serde_json::Value::String(s) => s.parse::<f64>().ok().map(|f| f as i64),
        _ => None,
    }
}

/// Ingests a JSONL dump into an in-memory store. Malformed lines are
/// counted and skipped; comments whose thread is absent from the dump are
/// counted and skipped; comments whose parent is absent are reattached to
/// the post and counted.
pub fn ingest_dump(path: &Path, schema: DumpSchema) -> Result<CorpusStore> {
    let file = File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let reader = BufReader::new(file);

    let mut threads: BTreeMap<String, Thread> = BTreeMap::new();
    let mut pending: Vec<Comment> = Vec::new();
    let mut malformed = 0u64;
    let mut total_lines = 0u64;

    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        total_lines += 1;
        let Ok(raw) = serde_json::from_str::<RawRecord>(&line) else {
            malformed += 1;
            continue;
        };
        match classify(raw) {
            Some(Record::Post(t)) => {
                threads.insert(t.post_id.clone(), t);
            }
            Some(Record::Comment(c)) => pending.push(c),
            None => malformed += 1,
        }
    }

    let mut store = CorpusStore {
        schema: schema.id().to_string(),
        malformed_lines: malformed,
        ..Default::default()
    };

    // Attach comments to threads; unresolved parents reattach to the post.
    let mut dangling = 0u64;
    for c in pending {
        match threads.get_mut(&c.thread_id) {
            Some(t) => t.comments.push(c),
            None => dangling += 1,
        }
    }
    let mut orphaned = 0u64;
    for t in threads.values_mut() {
        t.sort_comments();
        let ids: std::collections::HashSet<String> =
            t.comments.iter().map(|c| c.id.clone()).collect();
        for c in t.comments.iter_mut() {
            if let Some(pid) = &c.parent_id {
                if !ids.contains(pid) {
                    c.parent_id = None;
                    orphaned += 1;
                }
            }
            if c.created_utc < t.created_utc {
                c.created_utc = t.created_utc;
            }
            if c.subreddit.is_empty() {
                c.subreddit = t.subreddit.clone();
            }
        }
        t.validate_forest()?;
    }
    store.dangling_comments = dangling;
    store.orphaned_comments = orphaned;
    store.threads = threads;

    if total_lines > 0 && malformed * 10 > total_lines {
        log::warn!(
            "{malformed} of {total_lines} lines malformed (> 10%) in {}",
            path.display()
        );
    }
    Ok(store)
}

enum Record {
    Post(Thread),
    Comment(Comment),
}

fn classify(raw: RawRecord) -> Option<Record> {
    let id = raw.id?;
    let created_utc = parse_utc(raw.created_utc.as_ref()?)?;
    if let Some(title) = raw.title {
        // Post record.
        let selftext = match (raw.selftext, raw.url) {
            (Some(s), _) if !s.is_empty() => s,
            (_, Some(u)) => u,
            _ => String::new(),
        };
        return Some(Record::Post(Thread {
            post_id: id,
            subreddit: raw.subreddit?,
            author: raw.author.unwrap_or_else(|| "[deleted]".to_string()),
            title,
            selftext,
            created_utc,
            comments: Vec::new(),
        }));
    }
    // Comment record.
    let body = raw.body?;
    let link_id = strip_prefix(&raw.link_id?).to_string();
    let karma = raw.score?;
    let author = raw.author.unwrap_or_else(|| "[deleted]".to_string());
    let parent_id = raw.parent_id.map(|p| strip_prefix(&p).to_string());
    let parent_id = match parent_id {
        Some(p) if p == link_id => None, // direct reply to the post
        other => other,
    };
    let is_deleted = author == "[deleted]" || body == "[deleted]" || body == "[removed]";
    Some(Record::Comment(Comment {
        id,
        parent_id,
        thread_id: link_id,
        author,
        subreddit: raw.subreddit.unwrap_or_default(),
        created_utc,
        body,
        karma,
        flair: raw.author_flair_text.filter(|f| !f.is_empty()),
        is_deleted,
    }))
}
