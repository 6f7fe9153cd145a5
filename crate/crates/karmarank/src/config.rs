//! Run configuration: one TOML file drives the whole pipeline.
//!
//! Every key has a default, so an empty file is valid; CLI flags override
//! individual keys after loading. A run is reproducible from the config
//! plus input hashes — all randomness flows from `seed` through named
//! substreams.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::ListParams;
use crate::error::{Error, Result};
use crate::eval::{GainKind, ReportConfig, SurrogateThresholds};
use crate::ranker::RankTrainConfig;
use crate::semantics::{NmfConfig, SkipgramConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Input JSONL dump (also the output path of the `synth` stage).
    pub corpus: PathBuf,
    /// Dump schema id.
    pub schema: String,
    pub out_dir: PathBuf,
    /// Restrict ingestion to these subreddits; empty means all.
    pub subreddits: Vec<String>,
    /// Root seed for every random substream.
    pub seed: u64,
    pub lists: ListsSection,
    pub split: SplitSection,
    pub embedding: EmbeddingSection,
    pub nmf: NmfSection,
    pub wordlists: WordlistSection,
    pub ranker: RankerSection,
    pub eval: EvalSection,
    pub kindex: KindexSection,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: PathBuf::from("dump.jsonl"),
            schema: "reddit-jsonl".into(),
            out_dir: PathBuf::from("out"),
            subreddits: Vec::new(),
            seed: 42,
            lists: ListsSection::default(),
            split: SplitSection::default(),
            embedding: EmbeddingSection::default(),
            nmf: NmfSection::default(),
            wordlists: WordlistSection::default(),
            ranker: RankerSection::default(),
            eval: EvalSection::default(),
            kindex: KindexSection::default(),
            synth: SynthSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ListsSection {
    pub length: usize,
    /// Maximum first-to-last span in seconds; 0 or negative disables the
    /// limit.
    pub max_window_secs: i64,
    pub stride: usize,
    pub max_lists_per_thread: usize,
}

impl Default for ListsSection {
    fn default() -> Self {
        ListsSection {
            length: 10,
            max_window_secs: 3600,
            stride: 10,
            max_lists_per_thread: 50,
        }
    }
}

impl ListsSection {
    pub fn params(&self) -> ListParams {
        ListParams {
            length: self.length,
            max_window_secs: (self.max_window_secs > 0).then_some(self.max_window_secs),
            stride: self.stride,
            max_lists_per_thread: self.max_lists_per_thread,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub train_frac: f64,
    pub val_frac_of_train: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train_frac: 0.75,
            val_frac_of_train: 0.20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSection {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub learning_rate: f64,
    /// L2-normalize token vectors before averaging into document vectors.
    pub normalize_doc_vectors: bool,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            learning_rate: 0.025,
            normalize_doc_vectors: false,
        }
    }
}

impl EmbeddingSection {
    pub fn skipgram_config(&self, seed: u64) -> SkipgramConfig {
        SkipgramConfig {
            dim: self.dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.epochs,
            min_count: self.min_count,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NmfSection {
    pub rank: usize,
    pub iters: usize,
    pub max_vocab: usize,
    pub min_df: usize,
}

impl Default for NmfSection {
    fn default() -> Self {
        NmfSection {
            rank: 300,
            iters: 200,
            max_vocab: 20_000,
            min_df: 2,
        }
    }
}

impl NmfSection {
    pub fn nmf_config(&self, seed: u64) -> NmfConfig {
        NmfConfig {
            rank: self.rank,
            iters: self.iters,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WordlistSection {
    pub budget: usize,
}

impl Default for WordlistSection {
    fn default() -> Self {
        WordlistSection { budget: 500 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankerSection {
    pub c_grid: Vec<f64>,
    pub epochs: usize,
}

impl Default for RankerSection {
    fn default() -> Self {
        RankerSection {
            c_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0],
            epochs: 30,
        }
    }
}

impl RankerSection {
    pub fn train_config(&self, seed: u64) -> RankTrainConfig {
        RankTrainConfig {
            c_grid: self.c_grid.clone(),
            epochs: self.epochs,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    /// `linear` or `exponential`.
    pub gain: String,
    pub random_reps: usize,
    pub pos_min: i64,
    pub neg_max: i64,
    pub high_pct: f64,
    pub mid_lo_pct: f64,
    pub mid_hi_pct: f64,
    pub max_pairs: usize,
    pub surrogate_c: f64,
}

impl Default for EvalSection {
    fn default() -> Self {
        let t = SurrogateThresholds::default();
        EvalSection {
            gain: "linear".into(),
            random_reps: 100,
            pos_min: t.pos_min,
            neg_max: t.neg_max,
            high_pct: t.high_pct,
            mid_lo_pct: t.mid_lo_pct,
            mid_hi_pct: t.mid_hi_pct,
            max_pairs: t.max_pairs,
            surrogate_c: t.c,
        }
    }
}

impl EvalSection {
    pub fn report_config(&self, seed: u64) -> Result<ReportConfig> {
        Ok(ReportConfig {
            gain: GainKind::parse(&self.gain)?,
            random_reps: self.random_reps,
            thresholds: SurrogateThresholds {
                pos_min: self.pos_min,
                neg_max: self.neg_max,
                high_pct: self.high_pct,
                mid_lo_pct: self.mid_lo_pct,
                mid_hi_pct: self.mid_hi_pct,
                max_pairs: self.max_pairs,
                c: self.surrogate_c,
            },
            seed,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KindexSection {
    /// Count the post author among thread participants.
    pub include_post_author: bool,
}

impl Default for KindexSection {
    fn default() -> Self {
        KindexSection {
            include_post_author: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub threads: usize,
    pub subreddits: Vec<String>,
    pub comments_min: usize,
    pub comments_max: usize,
    pub authors: usize,
    /// Feature group whose planted latent drives karma; empty means pure
    /// noise karma.
    pub signal_group: String,
    pub signal_strength: f64,
    pub noise: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            threads: 200,
            subreddits: vec!["synthone".into(), "synthtwo".into()],
            comments_min: 14,
            comments_max: 24,
            authors: 300,
            signal_group: String::new(),
            signal_strength: 2.5,
            noise: 1.2,
        }
    }
}

impl RunConfig {
    /// Loads a TOML config; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
            }
        }
    }

    /// Digest of the full effective configuration; manifests carry this
    /// to detect stale upstream stages.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json);
        format!("{:x}", hasher.finalize())
    }
}
