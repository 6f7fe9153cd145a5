//! Bag-of-words classifiers: a calibrated logistic model for the surrogate
//! response tasks and multinomial naive Bayes for community style.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Thread;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::textprep::Tokenizer;

use super::SentimentLexicon;

pub const BOW_MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurrogateTask {
    Reply,
    ResponseSentiment,
    Community,
}

impl SurrogateTask {
    pub fn id(&self) -> &'static str {
        match self {
            SurrogateTask::Reply => "reply",
            SurrogateTask::ResponseSentiment => "response-sentiment",
            SurrogateTask::Community => "community",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BowClassifier {
    pub version: u32,
    pub task: SurrogateTask,
    pub model: BowModel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BowModel {
    Logistic(LogisticBow),
    NaiveBayes(NaiveBayesBow),
}

impl BowClassifier {
    pub fn classes(&self) -> &[String] {
        match &self.model {
            BowModel::Logistic(m) => &m.classes,
            BowModel::NaiveBayes(m) => &m.classes,
        }
    }

    /// Class posterior over `classes()`, summing to 1.
    pub fn posterior(&self, tokens: &[&str]) -> Vec<f64> {
        match &self.model {
            BowModel::Logistic(m) => {
                let p = m.prob_positive(tokens);
                vec![1.0 - p, p]
            }
            BowModel::NaiveBayes(m) => m.posterior(tokens),
        }
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut c: BowClassifier = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if c.version != BOW_MODEL_VERSION {
            return Err(Error::Data(format!(
                "unsupported classifier version {}",
                c.version
            )));
        }
        match &mut c.model {
            BowModel::Logistic(m) => m.rebuild_index(),
            BowModel::NaiveBayes(m) => m.rebuild_index(),
        }
        Ok(c)
    }
}

/// L2-regularized logistic regression over binary token presence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogisticBow {
    /// `[negative class, positive class]`.
    pub classes: Vec<String>,
    pub vocab: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Training base rate of the positive class; returned for documents
    /// with no in-vocabulary tokens.
    pub prior_pos: f64,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LogisticBow {
    pub fn rebuild_index(&mut self) {
        self.index = self
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    fn doc_indices(&self, tokens: &[&str]) -> Vec<usize> {
        let mut ids: Vec<usize> = tokens
            .iter()
            .filter_map(|t| self.index.get(*t).copied())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn prob_positive(&self, tokens: &[&str]) -> f64 {
        let ids = self.doc_indices(tokens);
        if ids.is_empty() {
            return self.prior_pos;
        }
        let z: f64 = ids.iter().map(|&i| self.weights[i]).sum::<f64>() + self.bias;
        sigmoid(z)
    }

    /// Trains by seeded SGD. `docs[i]` is the token bag for example i.
    pub fn train(
        classes: [String; 2],
        docs: &[Vec<&str>],
        labels: &[bool],
        seed: u64,
    ) -> Result<LogisticBow> {
        assert_eq!(docs.len(), labels.len());
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in docs {
            for t in doc {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        let mut vocab: Vec<(&str, u64)> =
            counts.into_iter().filter(|(_, c)| *c >= 2).collect();
        vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        vocab.truncate(20_000);

        let n_pos = labels.iter().filter(|l| **l).count();
        let prior_pos = if labels.is_empty() {
            0.5
        } else {
            n_pos as f64 / labels.len() as f64
        };

        let mut model = LogisticBow {
            classes: classes.to_vec(),
            vocab: vocab.iter().map(|(t, _)| t.to_string()).collect(),
            index: HashMap::new(),
            weights: vec![0.0; vocab.len()],
            bias: 0.0,
            prior_pos,
        };
        model.rebuild_index();

        let doc_ids: Vec<Vec<usize>> = docs.iter().map(|d| model.doc_indices(d)).collect();
        let mut order: Vec<usize> = (0..docs.len()).collect();
        let mut rng = substream(seed, "logistic");
        let lr = 0.1;
        let l2 = 1e-4;
        for _ in 0..20 {
            order.shuffle(&mut rng);
            for &i in &order {
                let ids = &doc_ids[i];
                let z: f64 = ids.iter().map(|&j| model.weights[j]).sum::<f64>() + model.bias;
                let p = sigmoid(z);
                let y = if labels[i] { 1.0 } else { 0.0 };
                let g = y - p;
                for &j in ids {
                    model.weights[j] += lr * (g - l2 * model.weights[j]);
                }
                model.bias += lr * g;
            }
        }
        if !model.bias.is_finite() || model.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Numeric("logistic training diverged".into()));
        }
        Ok(model)
    }
}

/// Multinomial naive Bayes with add-one smoothing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveBayesBow {
    pub classes: Vec<String>,
    pub vocab: Vec<String>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    pub class_log_prior: Vec<f64>,
    /// `token_log_prob[class][token]`.
    pub token_log_prob: Vec<Vec<f64>>,
}

impl NaiveBayesBow {
    pub fn rebuild_index(&mut self) {
        self.index = self
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn train(docs: &[Vec<&str>], labels: &[&str]) -> Result<NaiveBayesBow> {
        assert_eq!(docs.len(), labels.len());
        let mut classes: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
        classes.sort();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Data(format!(
                "naive Bayes needs >= 2 classes, got {}",
                classes.len()
            )));
        }
        let class_index: HashMap<&str, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i))
            .collect();

        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for doc in docs {
            for t in doc {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
        let mut vocab: Vec<(&str, u64)> = counts.into_iter().collect();
        vocab.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        vocab.truncate(30_000);
        let v = vocab.len();

        let mut model = NaiveBayesBow {
            classes: classes.clone(),
            vocab: vocab.iter().map(|(t, _)| t.to_string()).collect(),
            index: HashMap::new(),
            class_log_prior: vec![0.0; classes.len()],
            token_log_prob: vec![vec![0.0; v]; classes.len()],
        };
        model.rebuild_index();

        let mut class_docs = vec![0u64; classes.len()];
        let mut token_counts = vec![vec![0u64; v]; classes.len()];
        let mut class_totals = vec![0u64; classes.len()];
        for (doc, label) in docs.iter().zip(labels) {
            let c = class_index[label];
            class_docs[c] += 1;
            for t in doc {
                if let Some(&j) = model.index.get(*t) {
                    token_counts[c][j] += 1;
                    class_totals[c] += 1;
                }
            }
        }
        for c in 0..classes.len() {
            model.class_log_prior[c] = (class_docs[c] as f64 / docs.len() as f64).ln();
            let denom = (class_totals[c] + v as u64) as f64;
            for j in 0..v {
                model.token_log_prob[c][j] = ((token_counts[c][j] + 1) as f64 / denom).ln();
            }
        }
        Ok(model)
    }

    /// Posterior over classes; the prior distribution when no token is in
    /// vocabulary. Sums to 1.
    pub fn posterior(&self, tokens: &[&str]) -> Vec<f64> {
        let mut log_p = self.class_log_prior.clone();
        for t in tokens {
            if let Some(&j) = self.index.get(*t) {
                for c in 0..self.classes.len() {
                    log_p[c] += self.token_log_prob[c][j];
                }
            }
        }
        let max = log_p.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut probs: Vec<f64> = log_p.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = probs.iter().sum();
        for p in probs.iter_mut() {
            *p /= total;
        }
        probs
    }
}

/// Labeled example builder shared by the two response surrogates.
struct SurrogateExamples<'a> {
    docs: Vec<Vec<&'a str>>,
    labels: Vec<bool>,
}

fn tokenized_bodies<'a>(
    threads: &[&'a Thread],
    tokenizer: &Tokenizer,
) -> HashMap<&'a str, Vec<String>> {
    let mut map = HashMap::new();
    for t in threads {
        for c in &t.comments {
            if !c.is_deleted {
                let tc = tokenizer.tokenize(&c.body);
                map.insert(
                    c.id.as_str(),
                    tc.word_tokens().iter().map(|s| s.to_string()).collect(),
                );
            }
        }
    }
    map
}

/// Trains the reply / response-sentiment surrogate on training threads.
/// Labels come from the thread graph: whether a comment drew any direct
/// reply, and the sign of mean sentence sentiment over its direct replies
/// (no-reply comments excluded; exactly-zero means excluded too).
pub fn train_surrogate(
    task: SurrogateTask,
    threads: &[&Thread],
    tokenizer: &Tokenizer,
    sentiment: &SentimentLexicon,
    seed: u64,
) -> Result<BowClassifier> {
    let bodies = tokenized_bodies(threads, tokenizer);
    let mut examples = SurrogateExamples {
        docs: Vec::new(),
        labels: Vec::new(),
    };
    for t in threads {
        let mut replies: HashMap<&str, Vec<&crate::corpus::Comment>> = HashMap::new();
        for c in &t.comments {
            if let Some(pid) = c.parent_id.as_deref() {
                replies.entry(pid).or_default().push(c);
            }
        }
        for c in &t.comments {
            if c.is_deleted {
                continue;
            }
            let direct = replies.get(c.id.as_str());
            let label = match task {
                SurrogateTask::Reply => Some(direct.map_or(false, |r| !r.is_empty())),
                SurrogateTask::ResponseSentiment => {
                    let Some(rs) = direct else { continue };
                    let live: Vec<_> = rs.iter().filter(|r| !r.is_deleted).collect();
                    if live.is_empty() {
                        continue;
                    }
                    let mut total = 0.0;
                    let mut n = 0usize;
                    for r in &live {
                        let tc = tokenizer.tokenize(&r.body);
                        for i in 0..tc.sentences.len() {
                            let toks: Vec<&str> =
                                tc.sentence(i).iter().map(String::as_str).collect();
                            total += sentiment.sentence_sentiment(&toks);
                            n += 1;
                        }
                    }
                    if n == 0 {
                        continue;
                    }
                    let mean = total / n as f64;
                    if mean == 0.0 {
                        continue;
                    }
                    Some(mean > 0.0)
                }
                SurrogateTask::Community => {
                    return Err(Error::Config(
                        "use train_community_model for the community task".into(),
                    ))
                }
            };
            if let Some(label) = label {
                examples
                    .docs
                    .push(bodies[c.id.as_str()].iter().map(String::as_str).collect());
                examples.labels.push(label);
            }
        }
    }

    let n_pos = examples.labels.iter().filter(|l| **l).count();
    let n_neg = examples.labels.len() - n_pos;
    if n_pos < 50 || n_neg < 50 {
        return Err(Error::Data(format!(
            "surrogate task {}: need >= 50 examples per class, got {n_pos} positive / {n_neg} negative",
            task.id()
        )));
    }

    let classes = match task {
        SurrogateTask::Reply => ["no-reply".to_string(), "reply".to_string()],
        SurrogateTask::ResponseSentiment => {
            ["negative-response".to_string(), "positive-response".to_string()]
        }
        SurrogateTask::Community => unreachable!(),
    };
    let model = LogisticBow::train(classes, &examples.docs, &examples.labels, seed)?;
    Ok(BowClassifier {
        version: BOW_MODEL_VERSION,
        task,
        model: BowModel::Logistic(model),
    })
}

/// Multinomial naive Bayes over subreddit labels.
pub fn train_community_model(threads: &[&Thread], tokenizer: &Tokenizer) -> Result<BowClassifier> {
    let mut docs: Vec<Vec<String>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for t in threads {
        for c in &t.comments {
            if c.is_deleted {
                continue;
            }
            let tc = tokenizer.tokenize(&c.body);
            docs.push(tc.word_tokens().iter().map(|s| s.to_string()).collect());
            labels.push(t.subreddit.clone());
        }
    }
    let doc_refs: Vec<Vec<&str>> = docs
        .iter()
        .map(|d| d.iter().map(String::as_str).collect())
        .collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let model = NaiveBayesBow::train(&doc_refs, &label_refs)?;
    Ok(BowClassifier {
        version: BOW_MODEL_VERSION,
        task: SurrogateTask::Community,
        model: BowModel::NaiveBayes(model),
    })
}
