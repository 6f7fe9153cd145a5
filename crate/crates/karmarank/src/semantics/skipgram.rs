//! Skip-gram embeddings with negative sampling, trained by plain seeded
//! SGD. Single-threaded and deterministic: the same corpus, config and
//! seed reproduce the table bit for bit.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

pub const EMBEDDING_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub min_count: u64,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        SkipgramConfig {
            dim: 300,
            window: 5,
            negatives: 5,
            epochs: 5,
            min_count: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub version: u32,
    pub dim: usize,
    pub vectors: BTreeMap<String, Vec<f32>>,
    pub config: SkipgramConfig,
    /// Mean SGNS loss per epoch.
    pub epoch_losses: Vec<f64>,
    pub corpus_hash: String,
}

impl EmbeddingTable {
    pub fn empty(dim: usize) -> Self {
        EmbeddingTable {
            version: EMBEDDING_VERSION,
            dim,
            vectors: BTreeMap::new(),
            config: SkipgramConfig {
                dim,
                ..Default::default()
            },
            epoch_losses: Vec::new(),
            corpus_hash: String::new(),
        }
    }

    pub fn insert(&mut self, token: &str, v: Vec<f32>) {
        debug_assert_eq!(v.len(), self.dim);
        self.vectors.insert(token.to_string(), v);
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let table: EmbeddingTable = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if table.version != EMBEDDING_VERSION {
            return Err(Error::Data(format!(
                "unsupported embedding table version {}",
                table.version
            )));
        }
        Ok(table)
    }

    /// word2vec-style text export: one `word v1 v2 ...` line per token.
    pub fn export_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vectors.len(), self.dim);
        for (word, v) in &self.vectors {
            out.push_str(word);
            for x in v {
                out.push_str(&format!(" {x}"));
            }
            out.push('\n');
        }
        out
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Trains skip-gram with negative sampling on tokenized sentences.
pub fn train_skipgram(sentences: &[Vec<String>], config: &SkipgramConfig) -> Result<EmbeddingTable> {
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::Data("skip-gram training corpus is empty".into()));
    }
    if config.dim == 0 || config.window == 0 {
        return Err(Error::Config("skip-gram dim and window must be >= 1".into()));
    }

    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for s in sentences {
        for t in s {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= config.min_count)
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    if vocab.is_empty() {
        return Err(Error::Data(format!(
            "no token reaches min_count {}",
            config.min_count
        )));
    }
    let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    let v = vocab.len();
    let dim = config.dim;

    // Unigram^(3/4) cumulative table for negative sampling.
    let mut cdf = Vec::with_capacity(v);
    let mut acc = 0.0f64;
    for (_, c) in &vocab {
        acc += (*c as f64).powf(0.75);
        cdf.push(acc);
    }
    let cdf_total = acc;

    let id_sentences: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .filter(|s: &Vec<usize>| !s.is_empty())
        .collect();
    let positions: u64 = id_sentences.iter().map(|s| s.len() as u64).sum();
    let total_steps = (positions * config.epochs as u64).max(1);

    let mut rng = substream(config.seed, "skipgram");
    let mut syn0: Vec<f32> = (0..v * dim)
        .map(|_| (rng.gen::<f32>() - 0.5) / dim as f32)
        .collect();
    let mut syn1: Vec<f32> = vec![0.0; v * dim];

    let mut sample_negative = |rng: &mut rand_chacha::ChaCha8Rng, exclude: usize| -> usize {
        for _ in 0..16 {
            let x = rng.gen::<f64>() * cdf_total;
            let i = cdf.partition_point(|&c| c < x).min(v - 1);
            if i != exclude {
                return i;
            }
        }
        (exclude + 1) % v
    };

    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut processed = 0u64;
    let mut buf = vec![0.0f32; dim];
    for _ in 0..config.epochs {
        let mut loss_sum = 0.0f64;
        let mut loss_n = 0u64;
        for sent in &id_sentences {
            for t in 0..sent.len() {
                let lr = (config.learning_rate
                    * (1.0 - processed as f64 / total_steps as f64))
                    .max(config.learning_rate * 1e-4) as f32;
                processed += 1;
                let center = sent[t];
                let win = rng.gen_range(1..=config.window);
                let lo = t.saturating_sub(win);
                let hi = (t + win).min(sent.len() - 1);
                for c in lo..=hi {
                    if c == t {
                        continue;
                    }
                    let context = sent[c];
                    let vrow = center * dim;
                    buf.iter_mut().for_each(|x| *x = 0.0);

                    // Positive example.
                    let urow = context * dim;
                    let dot: f64 = (0..dim)
                        .map(|d| syn0[vrow + d] as f64 * syn1[urow + d] as f64)
                        .sum();
                    let s = sigmoid(dot);
                    loss_sum -= (s.max(1e-10)).ln();
                    let g = ((1.0 - s) as f32) * lr;
                    for d in 0..dim {
                        buf[d] += g * syn1[urow + d];
                        syn1[urow + d] += g * syn0[vrow + d];
                    }

                    // Negative samples.
                    for _ in 0..config.negatives {
                        let neg = sample_negative(&mut rng, context);
                        let nrow = neg * dim;
                        let dot: f64 = (0..dim)
                            .map(|d| syn0[vrow + d] as f64 * syn1[nrow + d] as f64)
                            .sum();
                        let s = sigmoid(dot);
                        loss_sum -= ((1.0 - s).max(1e-10)).ln();
                        let g = (-s as f32) * lr;
                        for d in 0..dim {
                            buf[d] += g * syn1[nrow + d];
                            syn1[nrow + d] += g * syn0[vrow + d];
                        }
                    }
                    for d in 0..dim {
                        syn0[vrow + d] += buf[d];
                    }
                    loss_n += 1;
                }
            }
        }
        epoch_losses.push(if loss_n > 0 {
            loss_sum / loss_n as f64
        } else {
            0.0
        });
    }

    let mut vectors = BTreeMap::new();
    for (token, _) in &vocab {
        let i = index[token];
        vectors.insert(token.to_string(), syn0[i * dim..(i + 1) * dim].to_vec());
    }
    Ok(EmbeddingTable {
        version: EMBEDDING_VERSION,
        dim,
        vectors,
        config: config.clone(),
        epoch_losses,
        corpus_hash: String::new(),
    })
}
