//! Pipeline stages behind the CLI subcommands. Each stage validates its
//! upstream manifests, does its work, and writes its own manifest, so any
//! report file can be traced back to the exact config, seed and inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::corpus::{
    build_comment_lists, ingest_dump, split_corpus, CommentList, CorpusStore, DumpSchema, Split,
};
use crate::error::{Error, Result};
use crate::eval::{make_reports, EvalReport};
use crate::features::{
    featurize_splits, read_tsv, write_tsv, FeatureGroup, FeatureModels, FeatureSchema,
    FeaturizedList,
};
use crate::lexicons::{
    bundled_seed_lists, expand_wordlist, train_community_model, train_surrogate, BowClassifier,
    SentimentLexicon, SurrogateTask, WordList,
};
use crate::manifest::{require_upstream, stamp, stamp_dir, Manifest, MANIFEST_VERSION};
use crate::ranker::{greedy_select, RankModel, SelectionTrace};
use crate::reputation::{top_comment_report, TopCommentReport};
use crate::semantics::{train_skipgram, EmbeddingTable, NmfModel, TfidfModel};
use crate::textprep::{NgramBackground, Tokenizer};

pub struct Paths {
    out: PathBuf,
}

impl Paths {
    pub fn new(cfg: &RunConfig) -> Paths {
        Paths {
            out: cfg.out_dir.clone(),
        }
    }

    pub fn store_dir(&self) -> PathBuf {
        self.out.join("store")
    }
    pub fn lists_json(&self) -> PathBuf {
        self.out.join("lists.json")
    }
    pub fn split_json(&self) -> PathBuf {
        self.out.join("split.json")
    }
    pub fn models_dir(&self) -> PathBuf {
        self.out.join("models")
    }
    pub fn features_dir(&self) -> PathBuf {
        self.out.join("features")
    }
    pub fn reports_dir(&self) -> PathBuf {
        self.out.join("reports")
    }
    pub fn kindex_csv(&self) -> PathBuf {
        self.out.join("kindex.csv")
    }
    pub fn selection_json(&self) -> PathBuf {
        self.out.join("models").join("selection.json")
    }
}

fn write_manifest(
    cfg: &RunConfig,
    stage: &str,
    inputs: Vec<crate::manifest::FileStamp>,
    outputs: Vec<crate::manifest::FileStamp>,
    upstream: &[&str],
) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    Manifest {
        version: MANIFEST_VERSION,
        stage: stage.to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        inputs,
        outputs,
        upstream: upstream.iter().map(|s| s.to_string()).collect(),
    }
    .write(&cfg.out_dir)
}

/// Generates the synthetic dump at the configured corpus path.
pub fn run_synth(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    crate::synth::write_dump(cfg)?;
    write_manifest(cfg, "synth", vec![], vec![stamp(&cfg.corpus)?], &[])?;
    Ok(())
}

/// Ingests the dump into the corpus store directory.
pub fn run_ingest(cfg: &RunConfig) -> Result<CorpusStore> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let schema = DumpSchema::parse(&cfg.schema)?;
    let input = stamp(&cfg.corpus)?;
    let mut store = ingest_dump(&cfg.corpus, schema)?;
    if !cfg.subreddits.is_empty() {
        store
            .threads
            .retain(|_, t| cfg.subreddits.contains(&t.subreddit));
    }
    if store.threads.is_empty() {
        return Err(Error::Data("no threads survived ingestion".into()));
    }
    let dir = Paths::new(cfg).store_dir();
    store.save(&dir)?;
    for s in store.stats() {
        log::info!("{}", s.table1_row());
    }
    write_manifest(cfg, "ingest", vec![input], stamp_dir(&dir)?, &[])?;
    Ok(store)
}

/// Builds comment lists for every thread in the store.
pub fn run_lists(cfg: &RunConfig) -> Result<Vec<CommentList>> {
    require_upstream(&cfg.out_dir, "ingest", &cfg.hash())?;
    let paths = Paths::new(cfg);
    let store = CorpusStore::load(&paths.store_dir())?;
    let params = cfg.lists.params();
    let mut lists = Vec::new();
    for thread in store.threads.values() {
        lists.extend(build_comment_lists(thread, &params, cfg.seed)?);
    }
    let json = serde_json::to_string(&lists).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(paths.lists_json(), json)?;
    log::info!("built {} comment lists", lists.len());
    write_manifest(
        cfg,
        "lists",
        vec![],
        vec![stamp(&paths.lists_json())?],
        &["ingest"],
    )?;
    Ok(lists)
}

fn load_lists(paths: &Paths) -> Result<Vec<CommentList>> {
    serde_json::from_str(&std::fs::read_to_string(paths.lists_json())?)
        .map_err(|e| Error::Parse(format!("lists.json: {e}")))
}

fn load_split(paths: &Paths) -> Result<Split> {
    serde_json::from_str(&std::fs::read_to_string(paths.split_json())?)
        .map_err(|e| Error::Parse(format!("split.json: {e}")))
}

/// Thread-level train/validation/test split of the lists.
pub fn run_split(cfg: &RunConfig) -> Result<Split> {
    require_upstream(&cfg.out_dir, "lists", &cfg.hash())?;
    let paths = Paths::new(cfg);
    let lists = load_lists(&paths)?;
    let split = split_corpus(
        &lists,
        cfg.split.train_frac,
        cfg.split.val_frac_of_train,
        cfg.seed,
    )?;
    let json = serde_json::to_string_pretty(&split).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(paths.split_json(), json)?;
    write_manifest(
        cfg,
        "split",
        vec![],
        vec![stamp(&paths.split_json())?],
        &["lists"],
    )?;
    Ok(split)
}

/// Thread ids per split part; errors if any thread leaks across parts.
fn split_thread_sets(
    lists: &[CommentList],
    split: &Split,
) -> Result<(BTreeSet<String>, BTreeSet<String>, BTreeSet<String>)> {
    let thread_of: BTreeMap<&str, &str> = lists
        .iter()
        .map(|l| (l.id.as_str(), l.thread_id.as_str()))
        .collect();
    let gather = |ids: &[String]| -> Result<BTreeSet<String>> {
        ids.iter()
            .map(|id| {
                thread_of
                    .get(id.as_str())
                    .map(|t| t.to_string())
                    .ok_or_else(|| Error::Data(format!("split references unknown list {id}")))
            })
            .collect()
    };
    let train = gather(&split.train)?;
    let val = gather(&split.validation)?;
    let test = gather(&split.test)?;
    if !train.is_disjoint(&val) || !train.is_disjoint(&test) || !val.is_disjoint(&test) {
        return Err(Error::Data(
            "split audit failed: a thread contributes lists to multiple parts".into(),
        ));
    }
    Ok((train, val, test))
}

#[derive(Serialize, Deserialize)]
struct NgramFile {
    version: u32,
    background: NgramBackground,
}

#[derive(Serialize, Deserialize)]
struct FlairFile {
    version: u32,
    flairs: BTreeMap<String, Vec<String>>,
}

/// Trains every text model on the train-split threads only: embeddings,
/// NMF, word-list expansions, both response surrogates, the community
/// model, and the n-gram background.
pub fn run_train_models(cfg: &RunConfig) -> Result<()> {
    let hash = cfg.hash();
    require_upstream(&cfg.out_dir, "ingest", &hash)?;
    require_upstream(&cfg.out_dir, "lists", &hash)?;
    require_upstream(&cfg.out_dir, "split", &hash)?;
    let paths = Paths::new(cfg);
    let store = CorpusStore::load(&paths.store_dir())?;
    let lists = load_lists(&paths)?;
    let split = load_split(&paths)?;
    let (train_threads, _, _) = split_thread_sets(&lists, &split)?;

    let threads: Vec<&crate::corpus::Thread> = store
        .threads
        .values()
        .filter(|t| train_threads.contains(&t.post_id))
        .collect();
    if threads.is_empty() {
        return Err(Error::Data("no training threads".into()));
    }

    let tokenizer = Tokenizer::bundled();
    let sentiment = SentimentLexicon::bundled();

    // Token documents: one per non-deleted training comment.
    let mut docs: Vec<Vec<String>> = Vec::new();
    for t in &threads {
        for c in &t.comments {
            if !c.is_deleted {
                let tc = tokenizer.tokenize(&c.body);
                docs.push(tc.word_tokens().iter().map(|s| s.to_string()).collect());
            }
        }
    }

    let corpus_hash = {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for t in &threads {
            h.update(t.post_id.as_bytes());
            h.update([0]);
        }
        format!("{:x}", h.finalize())
    };

    let mut embeddings = train_skipgram(&docs, &cfg.embedding.skipgram_config(cfg.seed))?;
    embeddings.corpus_hash = corpus_hash.clone();

    let doc_refs: Vec<Vec<&str>> = docs
        .iter()
        .map(|d| d.iter().map(String::as_str).collect())
        .collect();
    let tfidf = TfidfModel::fit(&doc_refs, cfg.nmf.min_df, cfg.nmf.max_vocab);
    let (nmf, _) = NmfModel::train(
        &doc_refs,
        tfidf,
        cfg.nmf.nmf_config(cfg.seed),
        corpus_hash.clone(),
    )?;

    let (polite, argue, profane, neutral) = bundled_seed_lists();
    let budget = cfg.wordlists.budget;
    let wordlists = [
        expand_wordlist("politeness", &polite, &neutral, &embeddings, budget)?,
        expand_wordlist("argumentativeness", &argue, &neutral, &embeddings, budget)?,
        expand_wordlist("profanity", &profane, &neutral, &embeddings, budget)?,
    ];

    let reply_clf = train_surrogate(SurrogateTask::Reply, &threads, &tokenizer, &sentiment, cfg.seed)?;
    let response_clf = train_surrogate(
        SurrogateTask::ResponseSentiment,
        &threads,
        &tokenizer,
        &sentiment,
        cfg.seed,
    )?;
    let community_clf = train_community_model(&threads, &tokenizer)?;

    let background = NgramBackground::build(
        doc_refs
            .iter()
            .map(|d| d.iter().copied().collect::<Vec<&str>>()),
    );
    let flair_vocab = FeatureModels::flair_vocab_from(&threads);

    let dir = paths.models_dir();
    std::fs::create_dir_all(&dir)?;
    embeddings.save(&dir.join("embeddings.json"))?;
    nmf.save(&dir.join("nmf.json"))?;
    for wl in &wordlists {
        let json = serde_json::to_string(wl).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(dir.join(format!("wordlist_{}.json", wl.name)), json)?;
    }
    reply_clf.save(&dir.join("surrogate_reply.json"))?;
    response_clf.save(&dir.join("surrogate_response.json"))?;
    community_clf.save(&dir.join("community.json"))?;
    let ngram_file = NgramFile {
        version: 1,
        background,
    };
    std::fs::write(
        dir.join("ngrams.json"),
        serde_json::to_string(&ngram_file).map_err(|e| Error::Parse(e.to_string()))?,
    )?;
    let flair_file = FlairFile {
        version: 1,
        flairs: flair_vocab,
    };
    std::fs::write(
        dir.join("flair_vocab.json"),
        serde_json::to_string(&flair_file).map_err(|e| Error::Parse(e.to_string()))?,
    )?;

    // The ranker model files land in the same directory later; stamp only
    // this stage's outputs.
    let outputs = stamp_dir(&dir)?;
    write_manifest(cfg, "train-models", vec![], outputs, &["ingest", "lists", "split"])?;
    Ok(())
}

/// Loads the trained model set for featurization.
pub fn load_models(cfg: &RunConfig) -> Result<FeatureModels> {
    let dir = Paths::new(cfg).models_dir();
    let embeddings = EmbeddingTable::load(&dir.join("embeddings.json"))?;
    let nmf = NmfModel::load(&dir.join("nmf.json"))?;
    let load_wl = |name: &str| -> Result<WordList> {
        serde_json::from_str(&std::fs::read_to_string(dir.join(format!("wordlist_{name}.json")))?)
            .map_err(|e| Error::Parse(format!("wordlist_{name}.json: {e}")))
    };
    let wordlists = [
        load_wl("politeness")?,
        load_wl("argumentativeness")?,
        load_wl("profanity")?,
    ];
    let reply_clf = BowClassifier::load(&dir.join("surrogate_reply.json"))?;
    let response_clf = BowClassifier::load(&dir.join("surrogate_response.json"))?;
    let community_clf = BowClassifier::load(&dir.join("community.json"))?;
    let ngrams: NgramFile =
        serde_json::from_str(&std::fs::read_to_string(dir.join("ngrams.json"))?)
            .map_err(|e| Error::Parse(format!("ngrams.json: {e}")))?;
    let flairs: FlairFile =
        serde_json::from_str(&std::fs::read_to_string(dir.join("flair_vocab.json"))?)
            .map_err(|e| Error::Parse(format!("flair_vocab.json: {e}")))?;
    Ok(FeatureModels {
        tokenizer: Tokenizer::bundled(),
        sentiment: SentimentLexicon::bundled(),
        embeddings,
        embed_normalize: cfg.embedding.normalize_doc_vectors,
        nmf,
        wordlists,
        reply_clf,
        response_clf,
        community_clf,
        background: ngrams.background,
        flair_vocab: flairs.flairs,
    })
}

/// Extracts and normalizes features for all three split parts.
pub fn run_featurize(cfg: &RunConfig) -> Result<()> {
    let hash = cfg.hash();
    require_upstream(&cfg.out_dir, "ingest", &hash)?;
    require_upstream(&cfg.out_dir, "lists", &hash)?;
    require_upstream(&cfg.out_dir, "split", &hash)?;
    require_upstream(&cfg.out_dir, "train-models", &hash)?;
    let paths = Paths::new(cfg);
    let store = CorpusStore::load(&paths.store_dir())?;
    let lists = load_lists(&paths)?;
    let split = load_split(&paths)?;
    let models = load_models(cfg)?;

    let data = featurize_splits(&store, &lists, &split, &models)?;
    let dir = paths.features_dir();
    std::fs::create_dir_all(&dir)?;
    data.schema.save(&dir.join("schema.json"))?;
    write_tsv(&dir.join("train.tsv"), &data.schema, &data.train)?;
    write_tsv(&dir.join("validation.tsv"), &data.schema, &data.validation)?;
    write_tsv(&dir.join("test.tsv"), &data.schema, &data.test)?;
    write_manifest(
        cfg,
        "featurize",
        vec![],
        stamp_dir(&dir)?,
        &["ingest", "lists", "split", "train-models"],
    )?;
    Ok(())
}

pub struct LoadedFeatures {
    pub schema: FeatureSchema,
    pub train: Vec<FeaturizedList>,
    pub validation: Vec<FeaturizedList>,
    pub test: Vec<FeaturizedList>,
    pub corpus_hash: String,
}

pub fn load_features(cfg: &RunConfig) -> Result<LoadedFeatures> {
    let dir = Paths::new(cfg).features_dir();
    Ok(LoadedFeatures {
        schema: FeatureSchema::load(&dir.join("schema.json"))?,
        train: read_tsv(&dir.join("train.tsv"))?,
        validation: read_tsv(&dir.join("validation.tsv"))?,
        test: read_tsv(&dir.join("test.tsv"))?,
        corpus_hash: crate::manifest::sha256_file(&dir.join("train.tsv"))?,
    })
}

fn subreddits_of(lists: &[FeaturizedList]) -> Vec<String> {
    let mut subs: Vec<String> = lists.iter().map(|l| l.subreddit.clone()).collect();
    subs.sort();
    subs.dedup();
    subs
}

fn filter_sub(lists: &[FeaturizedList], sub: &str) -> Vec<FeaturizedList> {
    lists.iter().filter(|l| l.subreddit == sub).cloned().collect()
}

/// Trains one all-groups ranking model per subreddit.
pub fn run_train(cfg: &RunConfig) -> Result<()> {
    require_upstream(&cfg.out_dir, "featurize", &cfg.hash())?;
    let paths = Paths::new(cfg);
    let f = load_features(cfg)?;
    let rank_cfg = cfg.ranker.train_config(cfg.seed);
    let mut outputs = Vec::new();
    for sub in subreddits_of(&f.train) {
        let model = RankModel::fit(
            &f.schema,
            &filter_sub(&f.train, &sub),
            &filter_sub(&f.validation, &sub),
            &FeatureGroup::ALL,
            &rank_cfg,
            &f.corpus_hash,
        )?;
        let path = paths.models_dir().join(format!("ranker_{sub}_all.json"));
        model.save(&path)?;
        outputs.push(stamp(&path)?);
        log::info!("trained all-groups model for {sub} (C = {})", model.c);
    }
    write_manifest(cfg, "train", vec![], outputs, &["featurize"])?;
    Ok(())
}

/// Greedy feature-group selection per subreddit; writes the trace and the
/// best-prefix model.
pub fn run_select(cfg: &RunConfig) -> Result<BTreeMap<String, SelectionTrace>> {
    require_upstream(&cfg.out_dir, "featurize", &cfg.hash())?;
    let paths = Paths::new(cfg);
    let f = load_features(cfg)?;
    let rank_cfg = cfg.ranker.train_config(cfg.seed);
    let mut traces = BTreeMap::new();
    let mut outputs = Vec::new();
    for sub in subreddits_of(&f.train) {
        let train = filter_sub(&f.train, &sub);
        let val = filter_sub(&f.validation, &sub);
        let trace = greedy_select(&f.schema, &train, &val, &FeatureGroup::ALL, &rank_cfg)?;
        let model = RankModel::fit(&f.schema, &train, &val, &trace.best_prefix, &rank_cfg, &f.corpus_hash)?;
        let model_path = paths.models_dir().join(format!("ranker_{sub}_selected.json"));
        model.save(&model_path)?;
        let csv_path = paths.models_dir().join(format!("selection_{sub}.csv"));
        std::fs::write(&csv_path, trace.to_csv())?;
        outputs.push(stamp(&model_path)?);
        outputs.push(stamp(&csv_path)?);
        log::info!(
            "{sub}: selected {:?} at validation P@1 {:.3}",
            trace.best_prefix,
            trace.best_val_p1
        );
        traces.insert(sub, trace);
    }
    let json = serde_json::to_string_pretty(&traces).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(paths.selection_json(), json)?;
    outputs.push(stamp(&paths.selection_json())?);
    write_manifest(cfg, "select", vec![], outputs, &["featurize"])?;
    Ok(traces)
}

/// Builds the evaluation report CSVs.
pub fn run_evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    let hash = cfg.hash();
    require_upstream(&cfg.out_dir, "featurize", &hash)?;
    require_upstream(&cfg.out_dir, "select", &hash)?;
    let paths = Paths::new(cfg);
    let f = load_features(cfg)?;
    let traces: BTreeMap<String, SelectionTrace> =
        serde_json::from_str(&std::fs::read_to_string(paths.selection_json())?)
            .map_err(|e| Error::Parse(format!("selection.json: {e}")))?;
    let rank_cfg = cfg.ranker.train_config(cfg.seed);
    let report_cfg = cfg.eval.report_config(cfg.seed)?;
    let report = make_reports(
        &f.schema,
        &f.train,
        &f.validation,
        &f.test,
        &traces,
        &rank_cfg,
        &report_cfg,
    )?;
    let dir = paths.reports_dir();
    std::fs::create_dir_all(&dir)?;
    report.write_csvs(&dir)?;
    write_manifest(cfg, "evaluate", vec![], stamp_dir(&dir)?, &["featurize", "select"])?;
    Ok(report)
}

/// Writes the per-subreddit k-index report CSV.
pub fn run_kindex_report(cfg: &RunConfig) -> Result<TopCommentReport> {
    require_upstream(&cfg.out_dir, "ingest", &cfg.hash())?;
    let paths = Paths::new(cfg);
    let store = CorpusStore::load(&paths.store_dir())?;
    let report = top_comment_report(&store, cfg.kindex.include_post_author);
    std::fs::write(paths.kindex_csv(), report.to_csv())?;
    write_manifest(
        cfg,
        "kindex-report",
        vec![],
        vec![stamp(&paths.kindex_csv())?],
        &["ingest"],
    )?;
    Ok(report)
}

/// Runs ingest through evaluate plus the k-index report.
pub fn run_all(cfg: &RunConfig) -> Result<EvalReport> {
    run_ingest(cfg)?;
    run_lists(cfg)?;
    run_split(cfg)?;
    run_train_models(cfg)?;
    run_featurize(cfg)?;
    run_train(cfg)?;
    run_select(cfg)?;
    let report = run_evaluate(cfg)?;
    run_kindex_report(cfg)?;
    Ok(report)
}

/// Stage names in dependency order, as exposed by the CLI.
pub const STAGES: [&str; 10] = [
    "synth",
    "ingest",
    "lists",
    "split",
    "train-models",
    "featurize",
    "train",
    "select",
    "evaluate",
    "kindex-report",
];

pub fn run_stage(cfg: &RunConfig, stage: &str) -> Result<()> {
    match stage {
        "synth" => run_synth(cfg),
        "ingest" => run_ingest(cfg).map(|_| ()),
        "lists" => run_lists(cfg).map(|_| ()),
        "split" => run_split(cfg).map(|_| ()),
        "train-models" => run_train_models(cfg),
        "featurize" => run_featurize(cfg),
        "train" => run_train(cfg),
        "select" => run_select(cfg).map(|_| ()),
        "evaluate" => run_evaluate(cfg).map(|_| ()),
        "kindex-report" => run_kindex_report(cfg).map(|_| ()),
        other => Err(Error::Config(format!("unknown stage: {other}"))),
    }
}
