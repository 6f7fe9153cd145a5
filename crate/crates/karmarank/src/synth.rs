//! Synthetic corpus generator for end-to-end testing.
//!
//! Emits a JSONL dump in the ingestion schema where karma is
//! `round(exp(strength * z + noise * eps))` and `z` is a per-comment
//! latent tied to one configurable feature group. Comment text is built
//! from word banks that the bundled lexicons and seed lists know, so the
//! whole model-training pipeline runs on the output.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::features::FeatureGroup;
use crate::rng::substream;

const FUNCTION_WORDS: &[&str] = &[
    "the", "a", "to", "and", "of", "in", "it", "is", "that", "for", "on", "with", "as", "this",
    "was", "at", "be", "are", "you", "i",
];
const NEUTRAL_WORDS: &[&str] = &[
    "time", "day", "year", "people", "thing", "way", "world", "life", "place", "point",
];
const POSITIVE_WORDS: &[&str] = &["great", "good", "awesome", "helpful", "interesting"];
const NEGATIVE_WORDS: &[&str] = &["terrible", "awful", "boring", "wrong", "stupid"];
const POLITE_WORDS: &[&str] = &[
    "please", "thanks", "thank", "appreciate", "kindly", "welcome", "sorry", "grateful",
];
const ARGUE_WORDS: &[&str] = &[
    "disagree", "evidence", "argument", "proof", "debate", "claim", "nonsense", "refute",
];
const PROFANE_WORDS: &[&str] = &["damn", "hell", "crap", "sucks", "wtf", "jerk", "screw", "freaking"];
/// Comments carrying this token always draw replies (the RESP signal).
const REPLY_BAIT: &str = "askmeanything";

const FLAIRS: &[&str] = &["gold", "silver", "bronze"];

struct Author {
    name: String,
    quality: f64,
    flair: Option<String>,
}

/// Generates the dump and returns it as JSONL text.
pub fn generate_dump(cfg: &RunConfig) -> Result<String> {
    let s = &cfg.synth;
    if s.subreddits.len() < 2 {
        return Err(Error::Config("synth needs at least 2 subreddits".into()));
    }
    if s.comments_min < 2 || s.comments_max < s.comments_min {
        return Err(Error::Config("bad synth comment count range".into()));
    }
    let signal = if s.signal_group.is_empty() {
        None
    } else {
        Some(FeatureGroup::parse(&s.signal_group)?)
    };

    let mut rng = substream(cfg.seed, "synth");
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numeric(e.to_string()))?;

    let authors: Vec<Author> = (0..s.authors.max(10))
        .map(|i| Author {
            name: format!("user{i:04}"),
            quality: rng.gen::<f64>(),
            flair: if rng.gen_bool(0.25) {
                Some(FLAIRS[rng.gen_range(0..FLAIRS.len())].to_string())
            } else {
                None
            },
        })
        .collect();

    let sub_banks: Vec<Vec<String>> = s
        .subreddits
        .iter()
        .map(|sub| (0..30).map(|i| format!("{sub}term{i:02}")).collect())
        .collect();

    let mut out = String::new();
    let mut comment_serial = 0u64;
    for t in 0..s.threads {
        let sub_idx = t % s.subreddits.len();
        let subreddit = &s.subreddits[sub_idx];
        let post_id = format!("p{t:05}");
        let t0: i64 = 1_600_000_000 + (t as i64) * 10_000;
        let topic: Vec<String> = (0..12).map(|i| format!("topic{t:04}w{i:02}")).collect();

        let pick = |rng: &mut rand_chacha::ChaCha8Rng, bank: &[String]| -> String {
            bank[rng.gen_range(0..bank.len())].clone()
        };
        let pick_s = |rng: &mut rand_chacha::ChaCha8Rng, bank: &[&str]| -> String {
            bank[rng.gen_range(0..bank.len())].to_string()
        };

        let title: String = (0..6)
            .map(|_| pick(&mut rng, &topic))
            .collect::<Vec<_>>()
            .join(" ");
        let selftext: String = (0..16)
            .map(|_| {
                if rng.gen_bool(0.7) {
                    pick(&mut rng, &topic)
                } else {
                    pick_s(&mut rng, FUNCTION_WORDS)
                }
            })
            .collect::<Vec<_>>()
            .join(" ");
        let op = &authors[rng.gen_range(0..authors.len())];
        let post = json!({
            "id": post_id,
            "title": title,
            "selftext": selftext,
            "author": op.name,
            "created_utc": t0,
            "subreddit": subreddit,
            "score": 1,
        });
        let _ = writeln!(out, "{post}");

        let n = rng.gen_range(s.comments_min..=s.comments_max);
        let mut clock = t0;
        let mut ids: Vec<String> = Vec::with_capacity(n);
        for i in 0..n {
            comment_serial += 1;
            let cid = format!("c{comment_serial:07}");
            clock += rng.gen_range(20..120);
            let author = &authors[rng.gen_range(0..authors.len())];
            let parent: Option<&str> = if ids.is_empty() || rng.gen_bool(0.55) {
                None
            } else {
                Some(ids[rng.gen_range(0..ids.len())].as_str())
            };

            // Per-comment latents, one per feature group.
            let z_rel = rng.gen::<f64>();
            let z_mood = rng.gen::<f64>();
            let z_comm = rng.gen::<f64>();
            let len = rng.gen_range(8..=24usize);
            let n_questions = rng.gen_range(0..=3usize);
            let bait = rng.gen_bool(0.5);

            let mut words: Vec<String> = Vec::with_capacity(len + 4);
            for _ in 0..len {
                if rng.gen_bool(z_rel * 0.8) {
                    words.push(pick(&mut rng, &topic));
                    continue;
                }
                match rng.gen_range(0..100u32) {
                    0..=44 => words.push(pick_s(&mut rng, FUNCTION_WORDS)),
                    45..=56 => words.push(pick_s(&mut rng, NEUTRAL_WORDS)),
                    57..=76 => {
                        let own = rng.gen_bool(z_comm);
                        let bank = if own {
                            &sub_banks[sub_idx]
                        } else {
                            &sub_banks[(sub_idx + 1) % sub_banks.len()]
                        };
                        words.push(pick(&mut rng, bank));
                    }
                    77..=88 => {
                        let positive = rng.gen_bool(z_mood);
                        words.push(pick_s(
                            &mut rng,
                            if positive { POSITIVE_WORDS } else { NEGATIVE_WORDS },
                        ));
                    }
                    _ => {
                        let polite = rng.gen_bool(z_mood);
                        if polite {
                            words.push(pick_s(&mut rng, POLITE_WORDS));
                        } else if rng.gen_bool(0.5) {
                            words.push(pick_s(&mut rng, ARGUE_WORDS));
                        } else {
                            words.push(pick_s(&mut rng, PROFANE_WORDS));
                        }
                    }
                }
            }
            if bait {
                words.push(REPLY_BAIT.to_string());
            }
            let mut body = words.join(" ");
            body.push('.');
            for _ in 0..n_questions {
                body.push('?');
            }

            let z = match signal {
                None => 0.5,
                Some(FeatureGroup::Gt) => 1.0 - i as f64 / n as f64,
                Some(FeatureGroup::Ar) => author.quality,
                Some(FeatureGroup::Info) => len as f64 / 24.0,
                Some(FeatureGroup::Lex) => n_questions as f64 / 3.0,
                Some(FeatureGroup::Resp) => {
                    if bait {
                        1.0
                    } else {
                        0.0
                    }
                }
                Some(FeatureGroup::Rel) => z_rel,
                Some(FeatureGroup::Mood) => z_mood,
                Some(FeatureGroup::Comm) => z_comm,
            };
            let eps: f64 = normal.sample(&mut rng);
            let karma = (s.signal_strength * z + s.noise * eps).exp().round() as i64;

            let comment = json!({
                "id": cid,
                "parent_id": parent.map(|p| format!("t1_{p}")).unwrap_or(format!("t3_{post_id}")),
                "link_id": format!("t3_{post_id}"),
                "author": author.name,
                "created_utc": clock,
                "body": body,
                "score": karma,
                "subreddit": subreddit,
                "author_flair_text": author.flair,
            });
            let _ = writeln!(out, "{comment}");
            ids.push(cid.clone());

            // Reply bait reliably draws replies.
            if bait {
                for r in 0..rng.gen_range(1..=2usize) {
                    comment_serial += 1;
                    let rid = format!("c{comment_serial:07}");
                    clock += rng.gen_range(5..40);
                    let rauthor = &authors[rng.gen_range(0..authors.len())];
                    let positive = rng.gen_bool(0.5);
                    let reply_words: Vec<String> = (0..6)
                        .map(|k| {
                            if k < 2 {
                                pick_s(
                                    &mut rng,
                                    if positive { POSITIVE_WORDS } else { NEGATIVE_WORDS },
                                )
                            } else {
                                pick_s(&mut rng, FUNCTION_WORDS)
                            }
                        })
                        .collect();
                    let reply = json!({
                        "id": rid,
                        "parent_id": format!("t1_{cid}"),
                        "link_id": format!("t3_{post_id}"),
                        "author": rauthor.name,
                        "created_utc": clock,
                        "body": format!("{}.", reply_words.join(" ")),
                        "score": 1,
                        "subreddit": subreddit,
                        "author_flair_text": rauthor.flair,
                    });
                    let _ = writeln!(out, "{reply}");
                    let _ = r;
                }
            }
        }
    }
    Ok(out)
}

/// Writes the dump to the configured corpus path.
pub fn write_dump(cfg: &RunConfig) -> Result<()> {
    let text = generate_dump(cfg)?;
    if let Some(parent) = cfg.corpus.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&cfg.corpus, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ingest_dump, DumpSchema};
    use std::io::Write as _;

    fn small_cfg() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.synth.threads = 12;
        cfg.synth.comments_min = 8;
        cfg.synth.comments_max = 12;
        cfg.synth.authors = 30;
        cfg
    }

    #[test]
    fn dump_ingests_cleanly() {
        let cfg = small_cfg();
        let text = generate_dump(&cfg).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        let store = ingest_dump(f.path(), DumpSchema::RedditJsonl).unwrap();
        assert_eq!(store.threads.len(), 12);
        assert_eq!(store.malformed_lines, 0);
        assert_eq!(store.dangling_comments, 0);
        for t in store.threads.values() {
            t.validate_forest().unwrap();
            assert!(t.comments.len() >= 8);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = small_cfg();
        assert_eq!(generate_dump(&cfg).unwrap(), generate_dump(&cfg).unwrap());
        let mut other = small_cfg();
        other.seed = 7;
        assert_ne!(generate_dump(&cfg).unwrap(), generate_dump(&other).unwrap());
    }

    #[test]
    fn gt_signal_marks_early_comments() {
        let mut cfg = small_cfg();
        cfg.synth.signal_group = "GT".into();
        cfg.synth.noise = 0.05;
        let text = generate_dump(&cfg).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        let store = ingest_dump(f.path(), DumpSchema::RedditJsonl).unwrap();
        // Early comments should out-karma late ones on average.
        let mut early = Vec::new();
        let mut late = Vec::new();
        for t in store.threads.values() {
            let n = t.comments.len();
            for (i, c) in t.comments.iter().enumerate() {
                if i < n / 3 {
                    early.push(c.karma);
                } else if i >= 2 * n / 3 {
                    late.push(c.karma);
                }
            }
        }
        let mean = |v: &[i64]| v.iter().sum::<i64>() as f64 / v.len() as f64;
        assert!(mean(&early) > mean(&late), "{} vs {}", mean(&early), mean(&late));
    }
}
