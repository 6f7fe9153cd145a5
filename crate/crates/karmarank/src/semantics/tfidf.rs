//! TF-IDF vectorizer feeding the NMF topic model.

use std::collections::{BTreeMap, HashMap};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    pub vocab: Vec<String>,
    pub idf: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TfidfModel {
    /// Vocabulary from document frequencies: tokens with df >= `min_df`,
    /// capped at `max_vocab` by (df desc, token asc). Smooth idf.
    pub fn fit<'a>(docs: &[Vec<&'a str>], min_df: usize, max_vocab: usize) -> Self {
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = doc.clone();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(&str, usize)> =
            df.into_iter().filter(|(_, c)| *c >= min_df).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        entries.truncate(max_vocab);
        let n = docs.len() as f64;
        let vocab: Vec<String> = entries.iter().map(|(t, _)| t.to_string()).collect();
        let idf: Vec<f64> = entries
            .iter()
            .map(|(_, c)| ((1.0 + n) / (1.0 + *c as f64)).ln() + 1.0)
            .collect();
        let mut model = TfidfModel {
            vocab,
            idf,
            index: HashMap::new(),
        };
        model.rebuild_index();
        model
    }

    pub fn rebuild_index(&mut self) {
        self.index = self
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
    }

    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    /// Sparse tf-idf vector as (index, weight) pairs, index ascending.
    pub fn transform(&self, tokens: &[&str]) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(&i) = self.index.get(*t) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        counts
            .into_iter()
            .map(|(i, c)| (i, c * self.idf[i]))
            .collect()
    }

    /// Dense doc-term matrix for training.
    pub fn matrix(&self, docs: &[Vec<&str>]) -> Array2<f64> {
        let mut m = Array2::zeros((docs.len(), self.dim()));
        for (r, doc) in docs.iter().enumerate() {
            for (i, w) in self.transform(doc) {
                m[[r, i]] = w;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_orders_by_frequency_then_token() {
        let docs = vec![
            vec!["b", "a", "c"],
            vec!["a", "b"],
            vec!["a"],
        ];
        let m = TfidfModel::fit(&docs, 1, 10);
        assert_eq!(m.vocab, vec!["a", "b", "c"]);
        // "a" appears in every doc: smallest idf.
        assert!(m.idf[0] < m.idf[2]);
    }

    #[test]
    fn min_df_filters_rare_tokens() {
        let docs = vec![vec!["a", "b"], vec!["a"]];
        let m = TfidfModel::fit(&docs, 2, 10);
        assert_eq!(m.vocab, vec!["a"]);
    }

    #[test]
    fn transform_counts_and_weights() {
        let docs = vec![vec!["a", "b"], vec!["a"]];
        let m = TfidfModel::fit(&docs, 1, 10);
        let v = m.transform(&["a", "a", "zzz"]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].0, 0);
        assert!((v[0].1 - 2.0 * m.idf[0]).abs() < 1e-12);
    }
}
