//! Corpus ingestion, reply-tree reconstruction, ranking instances and
//! thread-level splits.

mod ingest;
mod lists;
mod split;

pub use ingest::{ingest_dump, DumpSchema};
pub use lists::{build_comment_lists, ListParams};
pub use split::split_corpus;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STORE_VERSION: u32 = 1;

/// One forum comment with its final karma snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    /// `None` means a direct reply to the post.
    pub parent_id: Option<String>,
    pub thread_id: String,
    pub author: String,
    pub subreddit: String,
    pub created_utc: i64,
    pub body: String,
    pub karma: i64,
    pub flair: Option<String>,
    pub is_deleted: bool,
}

/// A post plus its comments, sorted by `(created_utc, id)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Thread {
    pub post_id: String,
    pub subreddit: String,
    pub author: String,
    pub title: String,
    pub selftext: String,
    pub created_utc: i64,
    pub comments: Vec<Comment>,
}

impl Thread {
    pub fn sort_comments(&mut self) {
        self.comments
            .sort_by(|a, b| (a.created_utc, &a.id).cmp(&(b.created_utc, &b.id)));
    }

    /// Map from comment id to index in `comments`.
    pub fn index(&self) -> HashMap<&str, usize> {
        self.comments
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect()
    }

    pub fn comment(&self, id: &str) -> Option<&Comment> {
        self.comments.iter().find(|c| c.id == id)
    }

    /// Reply depth: 1 for a direct reply to the post.
    pub fn depth_of(&self, id: &str, index: &HashMap<&str, usize>) -> usize {
        let mut depth = 0;
        let mut cur = Some(id);
        while let Some(cid) = cur {
            depth += 1;
            if depth > self.comments.len() + 1 {
                break; // cycle guard; validate_forest catches this
            }
            cur = index
                .get(cid)
                .and_then(|&i| self.comments[i].parent_id.as_deref());
        }
        depth
    }

    /// Checks every parent link resolves inside the thread and the reply
    /// graph is a forest rooted at the post.
    pub fn validate_forest(&self) -> Result<()> {
        let index = self.index();
        for c in &self.comments {
            let mut steps = 0;
            let mut cur = c.parent_id.as_deref();
            while let Some(pid) = cur {
                if steps > self.comments.len() {
                    return Err(Error::Data(format!(
                        "cycle in reply graph of thread {} at comment {}",
                        self.post_id, c.id
                    )));
                }
                let Some(&i) = index.get(pid) else {
                    return Err(Error::Data(format!(
                        "comment {} in thread {} has unresolved parent {}",
                        c.id, self.post_id, pid
                    )));
                };
                cur = self.comments[i].parent_id.as_deref();
                steps += 1;
            }
        }
        Ok(())
    }
}

/// A ranking instance: consecutive eligible comments from one thread.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommentList {
    pub id: String,
    pub thread_id: String,
    pub subreddit: String,
    /// Comment ids, strictly ordered by `(created_utc, id)`.
    pub members: Vec<String>,
    pub window_span_seconds: i64,
    /// Creation time of the last member; no feature may read past this.
    pub history_cutoff_utc: i64,
}

/// Thread-exclusive partition of comment lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
}

impl Split {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubredditStats {
    pub subreddit: String,
    pub posts: u64,
    pub comments: u64,
    pub comments_per_post: f64,
}

impl SubredditStats {
    /// Human-readable row, e.g. `fitness 3K posts, 16.3 comments/post`.
    pub fn table1_row(&self) -> String {
        let posts = if self.posts >= 1000 {
            format!("{}K", (self.posts as f64 / 1000.0).round() as u64)
        } else {
            self.posts.to_string()
        };
        format!(
            "{} {} posts, {:.1} comments/post",
            self.subreddit, posts, self.comments_per_post
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StoreMeta {
    version: u32,
    schema: String,
    n_threads: u64,
    n_comments: u64,
    malformed_lines: u64,
    dangling_comments: u64,
    orphaned_comments: u64,
}

/// Immutable corpus keyed by subreddit and thread.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    pub schema: String,
    /// post_id -> thread, ordered for deterministic iteration.
    pub threads: std::collections::BTreeMap<String, Thread>,
    pub malformed_lines: u64,
    /// Comments whose thread was never seen in the dump (skipped).
    pub dangling_comments: u64,
    /// Comments whose parent was missing; reattached to the post.
    pub orphaned_comments: u64,
}

impl CorpusStore {
    pub fn n_comments(&self) -> u64 {
        self.threads.values().map(|t| t.comments.len() as u64).sum()
    }

    pub fn subreddits(&self) -> Vec<String> {
        let mut subs: Vec<String> = self
            .threads
            .values()
            .map(|t| t.subreddit.clone())
            .collect();
        subs.sort();
        subs.dedup();
        subs
    }

    pub fn threads_in<'a>(&'a self, subreddit: &'a str) -> impl Iterator<Item = &'a Thread> {
        self.threads
            .values()
            .filter(move |t| t.subreddit == subreddit)
    }

    /// Per-subreddit post/comment counts in subreddit order.
    pub fn stats(&self) -> Vec<SubredditStats> {
        let mut map: std::collections::BTreeMap<String, (u64, u64)> =
            std::collections::BTreeMap::new();
        for t in self.threads.values() {
            let e = map.entry(t.subreddit.clone()).or_insert((0, 0));
            e.0 += 1;
            e.1 += t.comments.len() as u64;
        }
        map.into_iter()
            .map(|(subreddit, (posts, comments))| SubredditStats {
                subreddit,
                posts,
                comments,
                comments_per_post: if posts > 0 {
                    comments as f64 / posts as f64
                } else {
                    0.0
                },
            })
            .collect()
    }

    /// Writes the store as `meta.json` + one JSONL shard per subreddit +
    /// `stats.csv` (columns: subreddit, posts, comments_per_post).
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("threads"))?;
        let meta = StoreMeta {
            version: STORE_VERSION,
            schema: self.schema.clone(),
            n_threads: self.threads.len() as u64,
            n_comments: self.n_comments(),
            malformed_lines: self.malformed_lines,
            dangling_comments: self.dangling_comments,
            orphaned_comments: self.orphaned_comments,
        };
        fs::write(
            dir.join("meta.json"),
            serde_json::to_string_pretty(&meta).map_err(|e| Error::Parse(e.to_string()))?,
        )?;

        let mut shards: std::collections::BTreeMap<String, Vec<&Thread>> =
            std::collections::BTreeMap::new();
        for t in self.threads.values() {
            shards.entry(sanitize(&t.subreddit)).or_default().push(t);
        }
        for (shard, threads) in &shards {
            let mut out = fs::File::create(dir.join("threads").join(format!("{shard}.jsonl")))?;
            for t in threads {
                let line = serde_json::to_string(t).map_err(|e| Error::Parse(e.to_string()))?;
                writeln!(out, "{line}")?;
            }
        }

        let mut csv = String::from("subreddit,posts,comments_per_post\n");
        for s in self.stats() {
            csv.push_str(&format!(
                "{},{},{:.1}\n",
                s.subreddit, s.posts, s.comments_per_post
            ));
        }
        fs::write(dir.join("stats.csv"), csv)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let meta: StoreMeta =
            serde_json::from_str(&fs::read_to_string(dir.join("meta.json"))?)
                .map_err(|e| Error::Parse(format!("meta.json: {e}")))?;
        if meta.version != STORE_VERSION {
            return Err(Error::Data(format!(
                "unsupported store version {} (expected {})",
                meta.version, STORE_VERSION
            )));
        }
        let mut store = CorpusStore {
            schema: meta.schema,
            malformed_lines: meta.malformed_lines,
            dangling_comments: meta.dangling_comments,
            orphaned_comments: meta.orphaned_comments,
            ..Default::default()
        };
        let mut entries: Vec<_> = fs::read_dir(dir.join("threads"))?
            .collect::<std::io::Result<Vec<_>>>()?;
        entries.sort_by_key(|e| e.path());
        for entry in entries {
            let text = fs::read_to_string(entry.path())?;
            for line in text.lines() {
                if line.trim().is_empty() {
                    continue;
                }
                let t: Thread = serde_json::from_str(line)
                    .map_err(|e| Error::Parse(format!("{}: {e}", entry.path().display())))?;
                store.threads.insert(t.post_id.clone(), t);
            }
        }
        Ok(store)
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comment(id: &str, parent: Option<&str>, t: i64) -> Comment {
        Comment {
            id: id.into(),
            parent_id: parent.map(String::from),
            thread_id: "p1".into(),
            author: "a".into(),
            subreddit: "s".into(),
            created_utc: t,
            body: "hi".into(),
            karma: 1,
            flair: None,
            is_deleted: false,
        }
    }

    #[test]
    fn depth_and_forest() {
        let mut t = Thread {
            post_id: "p1".into(),
            subreddit: "s".into(),
            author: "op".into(),
            title: "t".into(),
            selftext: "".into(),
            created_utc: 0,
            comments: vec![
                comment("c1", None, 10),
                comment("c2", Some("c1"), 20),
                comment("c3", Some("c2"), 30),
            ],
        };
        t.sort_comments();
        t.validate_forest().unwrap();
        let idx = t.index();
        assert_eq!(t.depth_of("c1", &idx), 1);
        assert_eq!(t.depth_of("c3", &idx), 3);
    }

    #[test]
    fn forest_rejects_unresolved_parent() {
        let t = Thread {
            post_id: "p1".into(),
            subreddit: "s".into(),
            author: "op".into(),
            title: "t".into(),
            selftext: "".into(),
            created_utc: 0,
            comments: vec![comment("c1", Some("nope"), 10)],
        };
        assert!(t.validate_forest().is_err());
    }

    #[test]
    fn table1_row_format() {
        let s = SubredditStats {
            subreddit: "fitness".into(),
            posts: 3012,
            comments: 49096,
            comments_per_post: 16.3,
        };
        assert_eq!(s.table1_row(), "fitness 3K posts, 16.3 comments/post");
        let small = SubredditStats {
            subreddit: "tiny".into(),
            posts: 12,
            comments: 60,
            comments_per_post: 5.0,
        };
        assert_eq!(small.table1_row(), "tiny 12 posts, 5.0 comments/post");
    }
}
