//! Shared fixtures for unit tests: a small two-subreddit corpus and a
//! model set trained on it.

use std::collections::BTreeSet;

use rand::Rng;

use crate::corpus::{Comment, CorpusStore, Thread};
use crate::features::FeatureModels;
use crate::lexicons::{BowClassifier, BowModel, LogisticBow, NaiveBayesBow, SentimentLexicon, SurrogateTask, WordList};
use crate::rng::substream;
use crate::semantics::{NmfConfig, NmfModel, SkipgramConfig, TfidfModel};
use crate::textprep::{NgramBackground, Tokenizer};

const TOPICS: &[&str] = &[
    "engine", "piston", "torque", "valve", "clutch", "gear", "brake", "wheel", "motor", "fuel",
    "garden", "flower", "seed", "soil", "water", "bloom", "plant", "root", "leaf", "stem",
];
const FILLER: &[&str] = &[
    "the", "a", "to", "and", "is", "that", "it", "for", "you", "i", "think", "really",
];
const SENTIMENT: &[&str] = &["great", "good", "terrible", "awful", "thanks", "wrong"];

pub(crate) fn word_bank() -> Vec<&'static str> {
    TOPICS.iter().chain(FILLER).chain(SENTIMENT).copied().collect()
}

pub(crate) fn random_body(rng: &mut rand_chacha::ChaCha8Rng, len: usize) -> String {
    let bank = word_bank();
    let words: Vec<&str> = (0..len.max(2)).map(|_| bank[rng.gen_range(0..bank.len())]).collect();
    format!("{}.", words.join(" "))
}

pub(crate) fn random_thread(
    rng: &mut rand_chacha::ChaCha8Rng,
    post_id: &str,
    subreddit: &str,
    n_comments: usize,
) -> Thread {
    let t0 = 1_000_000;
    let mut comments: Vec<Comment> = Vec::new();
    let mut clock = t0;
    for i in 0..n_comments {
        clock += rng.gen_range(30..90);
        let parent_id = if comments.is_empty() || rng.gen_bool(0.6) {
            None
        } else {
            Some(comments[rng.gen_range(0..comments.len())].id.clone())
        };
        comments.push(Comment {
            id: format!("{post_id}c{i:03}"),
            parent_id,
            thread_id: post_id.to_string(),
            author: format!("u{:02}", rng.gen_range(0..12)),
            subreddit: subreddit.to_string(),
            created_utc: clock,
            body: random_body(rng, rng.gen_range(4..14)),
            karma: rng.gen_range(-3..40),
            flair: if rng.gen_bool(0.3) {
                Some(if rng.gen_bool(0.5) { "gold" } else { "silver" }.to_string())
            } else {
                None
            },
            is_deleted: false,
        });
    }
    let mut t = Thread {
        post_id: post_id.to_string(),
        subreddit: subreddit.to_string(),
        author: "op".into(),
        title: "engine torque and gears".into(),
        selftext: "the engine torque is great for the gear and clutch".into(),
        created_utc: t0,
        comments,
    };
    t.sort_comments();
    t
}

pub(crate) fn tiny_store(seed: u64) -> CorpusStore {
    let mut rng = substream(seed, "testutil-store");
    let mut store = CorpusStore {
        schema: "reddit-jsonl".into(),
        ..Default::default()
    };
    for i in 0..8 {
        let sub = if i % 2 == 0 { "motors" } else { "gardens" };
        let t = random_thread(&mut rng, &format!("p{i:02}"), sub, 12);
        store.threads.insert(t.post_id.clone(), t);
    }
    store
}

/// A full model set trained quickly on the store's own text.
pub(crate) fn tiny_models(store: &CorpusStore) -> FeatureModels {
    let tokenizer = Tokenizer::bundled();
    let sentiment = SentimentLexicon::bundled();

    let mut docs: Vec<Vec<String>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for t in store.threads.values() {
        for c in &t.comments {
            if !c.is_deleted {
                let tc = tokenizer.tokenize(&c.body);
                docs.push(tc.word_tokens().iter().map(|s| s.to_string()).collect());
                labels.push(t.subreddit.clone());
            }
        }
    }

    let embeddings = crate::semantics::train_skipgram(
        &docs,
        &SkipgramConfig {
            dim: 12,
            window: 3,
            negatives: 3,
            epochs: 3,
            min_count: 1,
            learning_rate: 0.05,
            seed: 1,
        },
    )
    .expect("tiny embeddings train");

    let doc_refs: Vec<Vec<&str>> = docs
        .iter()
        .map(|d| d.iter().map(String::as_str).collect())
        .collect();
    let tfidf = TfidfModel::fit(&doc_refs, 1, 500);
    let (nmf, _) = NmfModel::train(
        &doc_refs,
        tfidf,
        NmfConfig {
            rank: 4,
            iters: 60,
            seed: 2,
        },
        String::new(),
    )
    .expect("tiny nmf train");

    let wl = |name: &str, words: &[&str]| -> WordList {
        let set: BTreeSet<String> = words.iter().map(|w| w.to_string()).collect();
        WordList {
            name: name.into(),
            seeds: set.clone(),
            expanded: set,
            margins: Default::default(),
            dropped_seeds: vec![],
        }
    };

    let bodies: Vec<Vec<&str>> = doc_refs.clone();
    let reply_labels: Vec<bool> = (0..bodies.len()).map(|i| i % 2 == 0).collect();
    let reply_clf = BowClassifier {
        version: 1,
        task: SurrogateTask::Reply,
        model: BowModel::Logistic(
            LogisticBow::train(
                ["no-reply".into(), "reply".into()],
                &bodies,
                &reply_labels,
                3,
            )
            .expect("tiny reply model"),
        ),
    };
    let resp_labels: Vec<bool> = (0..bodies.len()).map(|i| i % 3 == 0).collect();
    let response_clf = BowClassifier {
        version: 1,
        task: SurrogateTask::ResponseSentiment,
        model: BowModel::Logistic(
            LogisticBow::train(
                ["negative-response".into(), "positive-response".into()],
                &bodies,
                &resp_labels,
                4,
            )
            .expect("tiny response model"),
        ),
    };
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let community_clf = BowClassifier {
        version: 1,
        task: SurrogateTask::Community,
        model: BowModel::NaiveBayes(
            NaiveBayesBow::train(&doc_refs, &label_refs).expect("tiny community model"),
        ),
    };

    let background = NgramBackground::build(
        doc_refs
            .iter()
            .map(|d| d.iter().copied().collect::<Vec<&str>>()),
    );
    let threads: Vec<&Thread> = store.threads.values().collect();
    let flair_vocab = FeatureModels::flair_vocab_from(&threads);

    FeatureModels {
        tokenizer,
        sentiment,
        embeddings,
        embed_normalize: false,
        nmf,
        wordlists: [
            wl("politeness", &["thanks", "please"]),
            wl("argumentativeness", &["wrong", "disagree"]),
            wl("profanity", &["damn", "hell"]),
        ],
        reply_clf,
        response_clf,
        community_clf,
        background,
        flair_vocab,
    }
}
