//! Topic representations (NMF, skip-gram embeddings) and the relevance
//! similarity functions built on them.

mod nmf;
mod skipgram;
mod tfidf;

pub use nmf::{factorize, NmfConfig, NmfFactors, NmfModel};
pub use skipgram::{train_skipgram, EmbeddingTable, SkipgramConfig};
pub use tfidf::TfidfModel;

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Cosine similarity in [-1, 1]; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Data(format!(
            "cosine length mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (na.sqrt() * nb.sqrt()))
}

/// Word-set Jaccard similarity in [0, 1]; two empty sets are identical.
pub fn jaccard(a: &HashSet<&str>, b: &HashSet<&str>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Mean of in-vocabulary token vectors.
#[derive(Debug, Clone)]
pub struct DocEmbedding {
    pub vector: Vec<f64>,
    /// Number of tokens found in the table; 0 flags an all-OOV document.
    pub in_vocab: usize,
}

impl DocEmbedding {
    pub fn is_oov(&self) -> bool {
        self.in_vocab == 0
    }
}

/// Averages the embedding vectors of in-vocabulary tokens; the zero vector
/// when none are. With `normalize` each token vector is L2-normalized
/// before averaging.
pub fn embed_doc(tokens: &[&str], table: &EmbeddingTable, normalize: bool) -> DocEmbedding {
    let mut sum = vec![0.0f64; table.dim];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = table.get(t) {
            if normalize {
                let norm = v.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for (s, x) in sum.iter_mut().zip(v) {
                        *s += *x as f64 / norm;
                    }
                    n += 1;
                }
            } else {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += *x as f64;
                }
                n += 1;
            }
        }
    }
    if n > 0 {
        for s in sum.iter_mut() {
            *s /= n as f64;
        }
    }
    DocEmbedding {
        vector: sum,
        in_vocab: n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_of_self_is_one() {
        let v = vec![0.3, -1.2, 4.0];
        assert!((cosine(&v, &v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_zero_vector_flags_zero() {
        let z = vec![0.0, 0.0];
        let v = vec![1.0, 2.0];
        assert_eq!(cosine(&z, &v).unwrap(), 0.0);
    }

    #[test]
    fn cosine_length_mismatch_is_fatal() {
        assert!(cosine(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cosine_scale_invariance() {
        let u = vec![1.0, 2.0, -0.5];
        let v = vec![0.4, 0.1, 2.0];
        let u2: Vec<f64> = u.iter().map(|x| x * 7.5).collect();
        let a = cosine(&u, &v).unwrap();
        let b = cosine(&u2, &v).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn jaccard_known_values() {
        let a: HashSet<&str> = ["a", "b", "c"].into_iter().collect();
        let b: HashSet<&str> = ["b", "c", "d"].into_iter().collect();
        assert!((jaccard(&a, &b) - 0.5).abs() < 1e-12);
        let empty: HashSet<&str> = HashSet::new();
        let single: HashSet<&str> = ["a"].into_iter().collect();
        assert_eq!(jaccard(&empty, &single), 0.0);
        assert_eq!(jaccard(&empty, &empty), 1.0);
    }

    fn tiny_table() -> EmbeddingTable {
        let mut t = EmbeddingTable::empty(3);
        t.insert("cat", vec![1.0, 0.0, 0.0]);
        t.insert("dog", vec![0.0, 2.0, 0.0]);
        t
    }

    #[test]
    fn single_token_doc_is_that_vector() {
        let table = tiny_table();
        let d = embed_doc(&["cat"], &table, false);
        assert_eq!(d.vector, vec![1.0, 0.0, 0.0]);
        assert_eq!(d.in_vocab, 1);
    }

    #[test]
    fn all_oov_doc_is_zero_and_flagged() {
        let table = tiny_table();
        let d = embed_doc(&["bird", "fish"], &table, false);
        assert!(d.is_oov());
        assert!(d.vector.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn repeated_token_doc_equals_token_vector() {
        let table = tiny_table();
        let d = embed_doc(&["dog", "dog", "dog", "dog"], &table, false);
        assert_eq!(d.vector, vec![0.0, 2.0, 0.0]);
    }
}
