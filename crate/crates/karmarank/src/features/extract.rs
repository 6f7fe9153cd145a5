//! Per-comment feature extraction within a comment-list context.
//!
//! Nothing here may read information later than the list's history cutoff
//! or the karma of any list member; the leakage property tests hold every
//! group to that.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::corpus::{Comment, CommentList, CorpusStore, Thread};
use crate::error::{Error, Result};
use crate::lexicons::{BowClassifier, SentimentLexicon, WordList};
use crate::reputation::k_index;
use crate::semantics::{cosine, embed_doc, jaccard, EmbeddingTable, NmfModel};
use crate::textprep::{pos_counts, unseen_fractions, NgramBackground, PosTag, PunctClass, Tokenizer};

use super::{FeatureGroup, GroupedFeatureVector};

/// Number of per-subreddit flair one-hot slots.
pub const FLAIR_SLOTS: usize = 20;

const LENGTH_BUCKETS: [(usize, usize); 4] = [(0, 10), (10, 30), (30, 100), (100, usize::MAX)];

/// Everything trained on the train split that featurization consults.
pub struct FeatureModels {
    pub tokenizer: Tokenizer,
    pub sentiment: SentimentLexicon,
    pub embeddings: EmbeddingTable,
    pub embed_normalize: bool,
    pub nmf: NmfModel,
    /// politeness, argumentativeness, profanity.
    pub wordlists: [WordList; 3],
    pub reply_clf: BowClassifier,
    pub response_clf: BowClassifier,
    pub community_clf: BowClassifier,
    pub background: NgramBackground,
    /// subreddit -> top flairs by train-split frequency (at most
    /// [`FLAIR_SLOTS`]).
    pub flair_vocab: BTreeMap<String, Vec<String>>,
}

impl FeatureModels {
    /// Top flairs per subreddit, ranked by frequency then name.
    pub fn flair_vocab_from(threads: &[&Thread]) -> BTreeMap<String, Vec<String>> {
        let mut counts: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
        for t in threads {
            for c in &t.comments {
                if let Some(f) = &c.flair {
                    *counts
                        .entry(t.subreddit.clone())
                        .or_default()
                        .entry(f.clone())
                        .or_insert(0) += 1;
                }
            }
        }
        counts
            .into_iter()
            .map(|(sub, flairs)| {
                let mut ranked: Vec<(String, u64)> = flairs.into_iter().collect();
                ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
                ranked.truncate(FLAIR_SLOTS);
                (sub, ranked.into_iter().map(|(f, _)| f).collect())
            })
            .collect()
    }
}

/// Author -> (created_utc, comment id, karma) over the whole store, used
/// for cutoff-aware k-index lookups.
pub struct AuthorIndex {
    map: BTreeMap<String, Vec<(i64, String, i64)>>,
}

impl AuthorIndex {
    pub fn build(store: &CorpusStore) -> Self {
        let mut map: BTreeMap<String, Vec<(i64, String, i64)>> = BTreeMap::new();
        for t in store.threads.values() {
            for c in &t.comments {
                if !c.is_deleted {
                    map.entry(c.author.clone()).or_default().push((
                        c.created_utc,
                        c.id.clone(),
                        c.karma,
                    ));
                }
            }
        }
        AuthorIndex { map }
    }

    /// k-index over the author's comments at or before `cutoff`, excluding
    /// the given comment ids (the list members whose karma is hidden).
    pub fn k_index_at(&self, author: &str, cutoff: i64, exclude: &HashSet<&str>) -> usize {
        let Some(history) = self.map.get(author) else {
            return 0;
        };
        let karmas: Vec<i64> = history
            .iter()
            .filter(|(t, id, _)| *t <= cutoff && !exclude.contains(id.as_str()))
            .map(|(_, _, k)| *k)
            .collect();
        k_index(&karmas)
    }
}

/// Borrowed context for extracting one list's features.
pub struct FeatureContext<'a> {
    pub thread: &'a Thread,
    pub list: &'a CommentList,
    pub models: &'a FeatureModels,
    pub authors: &'a AuthorIndex,
}

impl<'a> FeatureContext<'a> {
    fn member_set(&self) -> HashSet<&str> {
        self.list.members.iter().map(String::as_str).collect()
    }
}

/// Extracts all eight groups for one list member.
pub fn extract_features(ctx: &FeatureContext, comment: &Comment) -> Result<GroupedFeatureVector> {
    let index = ctx.thread.index();
    let groups = FeatureGroup::ALL
        .iter()
        .map(|g| Ok((*g, extract_group(ctx, comment, &index, *g)?)))
        .collect::<Result<Vec<_>>>()?;
    let v = GroupedFeatureVector {
        comment_id: comment.id.clone(),
        groups,
    };
    for x in v.flat_values() {
        if !x.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite feature for comment {}",
                comment.id
            )));
        }
    }
    Ok(v)
}

/// One named group for one list member.
pub fn extract_group(
    ctx: &FeatureContext,
    comment: &Comment,
    index: &HashMap<&str, usize>,
    group: FeatureGroup,
) -> Result<Vec<(String, f64)>> {
    match group {
        FeatureGroup::Gt => Ok(graph_timing(ctx, comment, index)),
        FeatureGroup::Ar => Ok(authority(ctx, comment)),
        FeatureGroup::Info => Ok(informativeness(ctx, comment)),
        FeatureGroup::Lex => Ok(lexical(ctx, comment)),
        FeatureGroup::Resp => Ok(response(ctx, comment)),
        FeatureGroup::Rel => relevance(ctx, comment, index),
        FeatureGroup::Mood => Ok(mood(ctx, comment)),
        FeatureGroup::Comm => Ok(community(ctx, comment)),
    }
}

fn parent_of<'a>(
    thread: &'a Thread,
    index: &HashMap<&str, usize>,
    comment: &Comment,
) -> Option<&'a Comment> {
    comment
        .parent_id
        .as_deref()
        .and_then(|pid| index.get(pid).map(|&i| &thread.comments[i]))
}

fn graph_timing(
    ctx: &FeatureContext,
    comment: &Comment,
    index: &HashMap<&str, usize>,
) -> Vec<(String, f64)> {
    let thread = ctx.thread;
    let cutoff = ctx.list.history_cutoff_utc;
    let parent = parent_of(thread, index, comment);
    let parent_time = parent.map_or(thread.created_utc, |p| p.created_utc);
    let key = (comment.created_utc, comment.id.as_str());

    let mut index_in_thread = 0u64;
    let mut prior_comments = 0u64;
    let mut siblings = 0u64;
    for c in &thread.comments {
        if c.id == comment.id {
            continue;
        }
        if (c.created_utc, c.id.as_str()) < key {
            index_in_thread += 1;
            if !c.is_deleted {
                prior_comments += 1;
            }
        }
        if c.created_utc <= cutoff && c.parent_id == comment.parent_id {
            siblings += 1;
        }
    }
    let depth = thread.depth_of(&comment.id, index);

    vec![
        (
            "seconds_since_post".into(),
            (comment.created_utc - thread.created_utc) as f64,
        ),
        (
            "seconds_since_parent".into(),
            (comment.created_utc - parent_time) as f64,
        ),
        ("depth".into(), depth as f64),
        ("index_in_thread".into(), index_in_thread as f64),
        ("prior_comment_count".into(), prior_comments as f64),
        ("sibling_count".into(), siblings as f64),
        (
            "is_reply_to_root".into(),
            if comment.parent_id.is_none() { 1.0 } else { 0.0 },
        ),
    ]
}

fn authority(ctx: &FeatureContext, comment: &Comment) -> Vec<(String, f64)> {
    let members = ctx.member_set();
    let k = ctx
        .authors
        .k_index_at(&comment.author, ctx.list.history_cutoff_utc, &members);
    let mut out = vec![
        ("k_index".into(), k as f64),
        (
            "is_op".into(),
            if comment.author == ctx.thread.author { 1.0 } else { 0.0 },
        ),
        (
            "has_flair".into(),
            if comment.flair.is_some() { 1.0 } else { 0.0 },
        ),
    ];
    let empty = Vec::new();
    let vocab = ctx
        .models
        .flair_vocab
        .get(&ctx.thread.subreddit)
        .unwrap_or(&empty);
    for slot in 0..FLAIR_SLOTS {
        let hit = match (&comment.flair, vocab.get(slot)) {
            (Some(f), Some(v)) => f == v,
            _ => false,
        };
        out.push((format!("flair_{slot:02}"), if hit { 1.0 } else { 0.0 }));
    }
    out
}

fn informativeness(ctx: &FeatureContext, comment: &Comment) -> Vec<(String, f64)> {
    let tc = ctx.models.tokenizer.tokenize(&comment.body);
    let words = tc.word_tokens();
    let mut types: Vec<&str> = words.clone();
    types.sort_unstable();
    types.dedup();
    let sentences = tc.sentences.len();
    let mean_sentence_len = if sentences > 0 {
        tc.tokens.len() as f64 / sentences as f64
    } else {
        0.0
    };
    let entities = ctx.models.tokenizer.entity_count(&tc, &comment.body);
    let unseen = unseen_fractions(&tc, &ctx.models.background);
    vec![
        ("token_count".into(), words.len() as f64),
        ("type_count".into(), types.len() as f64),
        ("sentence_count".into(), sentences as f64),
        ("mean_sentence_len".into(), mean_sentence_len),
        ("url_count".into(), tc.urls as f64),
        ("entity_count".into(), entities as f64),
        ("unseen_unigram".into(), unseen[0]),
        ("unseen_bigram".into(), unseen[1]),
        ("unseen_trigram".into(), unseen[2]),
    ]
}

fn lexical(ctx: &FeatureContext, comment: &Comment) -> Vec<(String, f64)> {
    let tc = ctx.models.tokenizer.tokenize(&comment.body);
    let mut out = Vec::with_capacity(6 + 12 + 4);
    for class in PunctClass::ALL {
        let n = tc.punct_counts.get(&class).copied().unwrap_or(0);
        out.push((format!("punct_{}", class.name()), n as f64));
    }
    let counts = pos_counts(&tc);
    for tag in PosTag::ALL {
        let n = counts.get(&tag).copied().unwrap_or(0);
        out.push((format!("pos_{}", tag.name()), n as f64));
    }
    let n_words = tc.word_tokens().len();
    for (i, (lo, hi)) in LENGTH_BUCKETS.iter().enumerate() {
        let hit = n_words >= *lo && n_words < *hi;
        out.push((format!("len_bucket_{i}"), if hit { 1.0 } else { 0.0 }));
    }
    out
}

fn response(ctx: &FeatureContext, comment: &Comment) -> Vec<(String, f64)> {
    let tc = ctx.models.tokenizer.tokenize(&comment.body);
    let words = tc.word_tokens();
    vec![
        ("p_reply".into(), ctx.models.reply_clf.posterior(&words)[1]),
        (
            "p_positive_response".into(),
            ctx.models.response_clf.posterior(&words)[1],
        ),
    ]
}

fn relevance(
    ctx: &FeatureContext,
    comment: &Comment,
    index: &HashMap<&str, usize>,
) -> Result<Vec<(String, f64)>> {
    let models = ctx.models;
    let tc = models.tokenizer.tokenize(&comment.body);
    let words = tc.word_tokens();

    let parent = parent_of(ctx.thread, index, comment);
    let post_text = ctx.thread.selftext.as_str();
    let title_text = ctx.thread.title.as_str();

    let sims_against = |target_text: &str| -> Result<(f64, f64, f64)> {
        let ttc = models.tokenizer.tokenize(target_text);
        let twords = ttc.word_tokens();

        let a: HashSet<&str> = words.iter().copied().collect();
        let b: HashSet<&str> = twords.iter().copied().collect();
        let jac = jaccard(&a, &b);

        let de = embed_doc(&words, &models.embeddings, models.embed_normalize);
        let te = embed_doc(&twords, &models.embeddings, models.embed_normalize);
        let emb = cosine(&de.vector, &te.vector)?;

        let dn = models.nmf.project_doc(&words);
        let tn = models.nmf.project_doc(&twords);
        let nmf = cosine(&dn, &tn)?;
        Ok((nmf, emb, jac))
    };

    let post = sims_against(post_text)?;
    let title = sims_against(title_text)?;
    // A root-level comment has no parent comment: the parent similarities
    // fall back to the post similarities and the root flag is set.
    let (parent_sims, is_root) = match parent {
        Some(p) => (sims_against(&p.body)?, 0.0),
        None => (post, 1.0),
    };

    Ok(vec![
        ("nmf_parent".into(), parent_sims.0),
        ("nmf_post".into(), post.0),
        ("nmf_title".into(), title.0),
        ("embed_parent".into(), parent_sims.1),
        ("embed_post".into(), post.1),
        ("embed_title".into(), title.1),
        ("jaccard_parent".into(), parent_sims.2),
        ("jaccard_post".into(), post.2),
        ("jaccard_title".into(), title.2),
        ("parent_is_post".into(), is_root),
    ])
}

fn mood(ctx: &FeatureContext, comment: &Comment) -> Vec<(String, f64)> {
    let tc = ctx.models.tokenizer.tokenize(&comment.body);
    let (mean, std) = ctx.models.sentiment.comment_mood(&tc);
    let words = tc.word_tokens();
    let mut out = vec![
        ("sentiment_mean".into(), mean),
        ("sentiment_std".into(), std),
    ];
    for wl in &ctx.models.wordlists {
        out.push((format!("{}_rate", wl.name), wl.hit_rate(&words)));
    }
    out
}

fn community(ctx: &FeatureContext, comment: &Comment) -> Vec<(String, f64)> {
    let tc = ctx.models.tokenizer.tokenize(&comment.body);
    let words = tc.word_tokens();
    let posterior = ctx.models.community_clf.posterior(&words);
    ctx.models
        .community_clf
        .classes()
        .iter()
        .zip(posterior)
        .map(|(class, p)| (format!("comm_{class}"), p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CommentList;
    use crate::rng::substream;
    use crate::testutil::{random_thread, tiny_models, tiny_store};
    use rand::Rng;

    fn list_over(thread: &Thread, members: &[&str]) -> CommentList {
        let cutoff = members
            .iter()
            .map(|m| thread.comment(m).unwrap().created_utc)
            .max()
            .unwrap();
        CommentList {
            id: format!("{}:0000", thread.post_id),
            thread_id: thread.post_id.clone(),
            subreddit: thread.subreddit.clone(),
            members: members.iter().map(|m| m.to_string()).collect(),
            window_span_seconds: 0,
            history_cutoff_utc: cutoff,
        }
    }

    fn fixed_thread() -> Thread {
        let mk = |i: usize, author: &str, parent: Option<&str>, t: i64, body: &str| Comment {
            id: format!("c{i}"),
            parent_id: parent.map(String::from),
            thread_id: "pf".into(),
            author: author.into(),
            subreddit: "motors".into(),
            created_utc: t,
            body: body.into(),
            karma: i as i64 * 3 + 1,
            flair: None,
            is_deleted: false,
        };
        Thread {
            post_id: "pf".into(),
            subreddit: "motors".into(),
            author: "op".into(),
            title: "engine torque and gears".into(),
            selftext: "the engine torque is great for the gear and clutch".into(),
            created_utc: 0,
            comments: vec![
                mk(1, "alice", None, 60, "the engine is great"),
                mk(2, "bob", None, 120, "torque torque torque"),
                mk(3, "op", Some("c1"), 180, "thanks for the gear advice"),
                mk(4, "dana", None, 240, "this is wrong and terrible"),
                mk(5, "erin", None, 300, "the engine torque is great for the gear and clutch"),
            ],
        }
    }

    #[test]
    fn graph_timing_matches_hand_fixture() {
        let store = tiny_store(1);
        let models = tiny_models(&store);
        let thread = fixed_thread();
        let list = list_over(&thread, &["c1", "c2", "c3", "c4", "c5"]);
        let authors = AuthorIndex::build(&store);
        let ctx = FeatureContext {
            thread: &thread,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let index = thread.index();
        let c5 = thread.comment("c5").unwrap();
        let gt = extract_group(&ctx, c5, &index, FeatureGroup::Gt).unwrap();
        let get = |name: &str| gt.iter().find(|(n, _)| n == name).unwrap().1;
        assert_eq!(get("seconds_since_post"), 300.0);
        assert_eq!(get("seconds_since_parent"), 300.0);
        assert_eq!(get("depth"), 1.0);
        assert_eq!(get("index_in_thread"), 4.0);
        assert_eq!(get("prior_comment_count"), 4.0);
        // Root-level siblings at the cutoff: c1, c2, c4 (not c3, a reply).
        assert_eq!(get("sibling_count"), 3.0);
        assert_eq!(get("is_reply_to_root"), 1.0);

        let c3 = thread.comment("c3").unwrap();
        let gt3 = extract_group(&ctx, c3, &index, FeatureGroup::Gt).unwrap();
        let get3 = |name: &str| gt3.iter().find(|(n, _)| n == name).unwrap().1;
        assert_eq!(get3("depth"), 2.0);
        assert_eq!(get3("seconds_since_parent"), 120.0);
        assert_eq!(get3("is_reply_to_root"), 0.0);
    }

    #[test]
    fn op_flag_is_set_for_the_post_author() {
        let store = tiny_store(2);
        let models = tiny_models(&store);
        let thread = fixed_thread();
        let list = list_over(&thread, &["c1", "c2", "c3", "c4", "c5"]);
        let authors = AuthorIndex::build(&store);
        let ctx = FeatureContext {
            thread: &thread,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let index = thread.index();
        let ar = extract_group(&ctx, thread.comment("c3").unwrap(), &index, FeatureGroup::Ar).unwrap();
        assert_eq!(ar.iter().find(|(n, _)| n == "is_op").unwrap().1, 1.0);
        let ar1 = extract_group(&ctx, thread.comment("c1").unwrap(), &index, FeatureGroup::Ar).unwrap();
        assert_eq!(ar1.iter().find(|(n, _)| n == "is_op").unwrap().1, 0.0);
    }

    #[test]
    fn comment_equal_to_post_body_has_unit_similarity() {
        let store = tiny_store(3);
        let models = tiny_models(&store);
        let thread = fixed_thread();
        let list = list_over(&thread, &["c1", "c2", "c3", "c4", "c5"]);
        let authors = AuthorIndex::build(&store);
        let ctx = FeatureContext {
            thread: &thread,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let index = thread.index();
        // c5's body is exactly the post body.
        let rel = extract_group(&ctx, thread.comment("c5").unwrap(), &index, FeatureGroup::Rel).unwrap();
        let get = |name: &str| rel.iter().find(|(n, _)| n == name).unwrap().1;
        assert!((get("jaccard_post") - 1.0).abs() < 1e-12);
        assert!((get("embed_post") - 1.0).abs() < 1e-9);
        assert!((get("nmf_post") - 1.0).abs() < 1e-9);
    }

    #[test]
    fn root_comment_parent_similarities_fall_back_to_post() {
        let store = tiny_store(4);
        let models = tiny_models(&store);
        let thread = fixed_thread();
        let list = list_over(&thread, &["c1", "c2", "c3", "c4", "c5"]);
        let authors = AuthorIndex::build(&store);
        let ctx = FeatureContext {
            thread: &thread,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let index = thread.index();
        let rel = extract_group(&ctx, thread.comment("c1").unwrap(), &index, FeatureGroup::Rel).unwrap();
        let get = |name: &str| rel.iter().find(|(n, _)| n == name).unwrap().1;
        assert_eq!(get("parent_is_post"), 1.0);
        assert_eq!(get("jaccard_parent"), get("jaccard_post"));
        assert_eq!(get("embed_parent"), get("embed_post"));
        assert_eq!(get("nmf_parent"), get("nmf_post"));

        let rel3 = extract_group(&ctx, thread.comment("c3").unwrap(), &index, FeatureGroup::Rel).unwrap();
        let get3 = |name: &str| rel3.iter().find(|(n, _)| n == name).unwrap().1;
        assert_eq!(get3("parent_is_post"), 0.0);
    }

    #[test]
    fn k_index_respects_cutoff_and_member_exclusion() {
        let mut store = tiny_store(5);
        // Author "star" with karma history straddling the cutoff.
        let mk = |i: usize, t: i64, karma: i64| Comment {
            id: format!("s{i}"),
            parent_id: None,
            thread_id: "ph".into(),
            author: "star".into(),
            subreddit: "motors".into(),
            created_utc: t,
            body: "engine stuff.".into(),
            karma,
            flair: None,
            is_deleted: false,
        };
        let history = Thread {
            post_id: "ph".into(),
            subreddit: "motors".into(),
            author: "op".into(),
            title: "t".into(),
            selftext: "s".into(),
            created_utc: 0,
            comments: vec![mk(1, 100, 10), mk(2, 200, 10), mk(3, 999_999, 10)],
        };
        store.threads.insert("ph".into(), history);
        let authors = AuthorIndex::build(&store);
        let none = HashSet::new();
        // Only the two comments at t <= 500 count.
        assert_eq!(authors.k_index_at("star", 500, &none), 2);
        assert_eq!(authors.k_index_at("star", 2_000_000, &none), 3);
        let exclude: HashSet<&str> = ["s2"].into_iter().collect();
        assert_eq!(authors.k_index_at("star", 500, &exclude), 1);
        assert_eq!(authors.k_index_at("nobody", 500, &none), 0);
    }

    /// Feature groups must not read past the cutoff or any member karma.
    #[test]
    fn leakage_audit_on_random_fixtures() {
        let store = tiny_store(6);
        let models = tiny_models(&store);
        let mut rng = substream(7, "leakage-unit");
        for round in 0..20 {
            let thread = random_thread(&mut rng, &format!("pl{round}"), "motors", 14);
            let members: Vec<&str> = thread.comments[2..8].iter().map(|c| c.id.as_str()).collect();
            let list = list_over(&thread, &members);

            let mut full_store = store.clone();
            full_store.threads.insert(thread.post_id.clone(), thread.clone());
            let authors = AuthorIndex::build(&full_store);
            let ctx = FeatureContext {
                thread: &thread,
                list: &list,
                models: &models,
                authors: &authors,
            };
            let original: Vec<_> = members
                .iter()
                .map(|m| extract_features(&ctx, thread.comment(m).unwrap()).unwrap())
                .collect();

            // Mutated world: the future deleted, member karma hidden.
            let member_set: std::collections::HashSet<&str> = members.iter().copied().collect();
            let mut mutated_store = full_store.clone();
            for t in mutated_store.threads.values_mut() {
                t.comments.retain(|c| c.created_utc <= list.history_cutoff_utc);
                for c in t.comments.iter_mut() {
                    if member_set.contains(c.id.as_str()) {
                        c.karma = 0;
                    }
                }
            }
            let mutated_thread = mutated_store.threads[&thread.post_id].clone();
            let authors2 = AuthorIndex::build(&mutated_store);
            let ctx2 = FeatureContext {
                thread: &mutated_thread,
                list: &list,
                models: &models,
                authors: &authors2,
            };
            let recomputed: Vec<_> = members
                .iter()
                .map(|m| extract_features(&ctx2, mutated_thread.comment(m).unwrap()).unwrap())
                .collect();

            for (a, b) in original.iter().zip(&recomputed) {
                assert_eq!(a.flat_names(), b.flat_names());
                let (va, vb) = (a.flat_values(), b.flat_values());
                for (i, (x, y)) in va.iter().zip(&vb).enumerate() {
                    assert_eq!(x, y, "round {round}, {}: feature {i} leaked", a.comment_id);
                }
            }
        }
    }

    #[test]
    fn gt_ignores_body_and_text_groups_ignore_time() {
        let store = tiny_store(8);
        let models = tiny_models(&store);
        let thread = fixed_thread();
        let list = list_over(&thread, &["c1", "c2", "c3", "c4", "c5"]);
        let authors = AuthorIndex::build(&store);
        let index = thread.index();
        let ctx = FeatureContext {
            thread: &thread,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let c4 = thread.comment("c4").unwrap();
        let gt_before = extract_group(&ctx, c4, &index, FeatureGroup::Gt).unwrap();

        let mut edited = thread.clone();
        edited.comments[3].body = "completely different words entirely".into();
        let index_e = edited.index();
        let ctx_e = FeatureContext {
            thread: &edited,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let c4e = edited.comment("c4").unwrap();
        let gt_after = extract_group(&ctx_e, c4e, &index_e, FeatureGroup::Gt).unwrap();
        assert_eq!(gt_before, gt_after, "GT must ignore body edits");

        // Shift c4's timestamp (keeping it inside the window); the text
        // groups must not move.
        let mut shifted = thread.clone();
        shifted.comments[3].created_utc = 250;
        shifted.sort_comments();
        let index_s = shifted.index();
        let ctx_s = FeatureContext {
            thread: &shifted,
            list: &list,
            models: &models,
            authors: &authors,
        };
        let c4s = shifted.comment("c4").unwrap();
        for group in [
            FeatureGroup::Info,
            FeatureGroup::Lex,
            FeatureGroup::Rel,
            FeatureGroup::Mood,
            FeatureGroup::Comm,
        ] {
            let before = extract_group(&ctx, c4, &index, group).unwrap();
            let after = extract_group(&ctx_s, c4s, &index_s, group).unwrap();
            assert_eq!(before, after, "{group} must ignore timestamp edits");
        }
    }

    #[test]
    fn group_layout_is_stable_across_comments() {
        let store = tiny_store(9);
        let models = tiny_models(&store);
        let authors = AuthorIndex::build(&store);
        let mut layouts = Vec::new();
        for thread in store.threads.values() {
            let members: Vec<&str> = thread.comments[..6].iter().map(|c| c.id.as_str()).collect();
            let list = list_over(thread, &members);
            let ctx = FeatureContext {
                thread,
                list: &list,
                models: &models,
                authors: &authors,
            };
            for m in &members {
                let gv = extract_features(&ctx, thread.comment(m).unwrap()).unwrap();
                layouts.push(gv.flat_names());
            }
        }
        for l in &layouts[1..] {
            assert_eq!(l, &layouts[0]);
        }
    }
}
