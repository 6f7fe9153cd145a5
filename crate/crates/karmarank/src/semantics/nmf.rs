//! Non-negative matrix factorization with multiplicative updates.
//!
//! V (docs x vocab) ~ W (docs x rank) . H (rank x vocab), minimizing the
//! squared Frobenius error. The multiplicative update rules keep all
//! factors non-negative and never increase the objective.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

use super::TfidfModel;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NmfConfig {
    pub rank: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for NmfConfig {
    fn default() -> Self {
        NmfConfig {
            rank: 300,
            iters: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmfFactors {
    pub w: Array2<f64>,
    pub h: Array2<f64>,
    /// Squared Frobenius error, recorded before iteration 1 and after each
    /// iteration; non-increasing.
    pub objective_trace: Vec<f64>,
}

/// Factorizes a non-negative matrix. Fatal if the rank exceeds either
/// dimension or the input has negative entries.
pub fn factorize(v: &Array2<f64>, rank: usize, iters: usize, seed: u64) -> Result<NmfFactors> {
    let (n, m) = v.dim();
    if rank == 0 || rank > n.min(m) {
        return Err(Error::Config(format!(
            "nmf rank {rank} out of range for a {n}x{m} matrix"
        )));
    }
    if v.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::Data("nmf input must be non-negative and finite".into()));
    }

    let mut rng = substream(seed, "nmf");
    let scale = (v.mean().unwrap_or(0.0).max(EPS) / rank as f64).sqrt();
    let mut w = Array2::from_shape_fn((n, rank), |_| rng.gen::<f64>().max(EPS) * scale);
    let mut h = Array2::from_shape_fn((rank, m), |_| rng.gen::<f64>().max(EPS) * scale);

    let objective = |w: &Array2<f64>, h: &Array2<f64>| -> f64 {
        let diff = v - &w.dot(h);
        diff.iter().map(|x| x * x).sum()
    };

    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(objective(&w, &h));
    for _ in 0..iters {
        // H <- H * (W^T V) / (W^T W H + eps)
        let wt = w.t();
        let numer = wt.dot(v);
        let denom = wt.dot(&w).dot(&h) + EPS;
        h = &h * &(&numer / &denom);
        // W <- W * (V H^T) / (W H H^T + eps)
        let ht = h.t();
        let numer = v.dot(&ht);
        let denom = w.dot(&h).dot(&ht) + EPS;
        w = &w * &(&numer / &denom);
        let obj = objective(&w, &h);
        if !obj.is_finite() {
            return Err(Error::Numeric("nmf objective became non-finite".into()));
        }
        trace.push(obj);
    }
    Ok(NmfFactors {
        w,
        h,
        objective_trace: trace,
    })
}

/// Serialized topic model: the fixed basis H plus the tf-idf vocabulary
/// needed to fold new documents in.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NmfModel {
    pub version: u32,
    pub config: NmfConfig,
    pub tfidf: TfidfModel,
    pub h: Array2<f64>,
    pub corpus_hash: String,
}

pub const NMF_MODEL_VERSION: u32 = 1;

impl NmfModel {
    pub fn rank(&self) -> usize {
        self.h.nrows()
    }

    /// Trains on tokenized documents and returns the model together with
    /// the training factors (W rows are the training documents' topic
    /// vectors).
    pub fn train(
        docs: &[Vec<&str>],
        tfidf: TfidfModel,
        config: NmfConfig,
        corpus_hash: String,
    ) -> Result<(NmfModel, NmfFactors)> {
        if docs.is_empty() || tfidf.dim() == 0 {
            return Err(Error::Data("nmf training corpus is empty".into()));
        }
        let v = tfidf.matrix(docs);
        let factors = factorize(&v, config.rank, config.iters, config.seed)?;
        Ok((
            NmfModel {
                version: NMF_MODEL_VERSION,
                config,
                tfidf,
                h: factors.h.clone(),
                corpus_hash,
            },
            factors,
        ))
    }

    /// Folds a document onto the fixed basis: non-negative least squares
    /// for `w` in `v ~ w . H` via multiplicative updates from a constant
    /// positive start (deterministic).
    pub fn project_doc(&self, tokens: &[&str]) -> Vec<f64> {
        let rank = self.rank();
        let sparse = self.tfidf.transform(tokens);
        if sparse.is_empty() {
            return vec![0.0; rank];
        }
        // v H^T, using sparsity of v.
        let mut vht = Array1::<f64>::zeros(rank);
        for (j, x) in &sparse {
            for k in 0..rank {
                vht[k] += x * self.h[[k, *j]];
            }
        }
        let hht = self.h.dot(&self.h.t());
        let vmean = sparse.iter().map(|(_, x)| x).sum::<f64>() / sparse.len() as f64;
        let mut w = Array1::<f64>::from_elem(rank, (vmean / rank as f64).max(EPS));
        for _ in 0..200 {
            let denom = hht.dot(&w) + EPS;
            let next = &w * &(&vht / &denom);
            let delta: f64 = (&next - &w).iter().map(|x| x.abs()).sum();
            let scale: f64 = w.iter().sum::<f64>().max(EPS);
            w = next;
            if delta / scale < 1e-10 {
                break;
            }
        }
        w.to_vec()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let mut model: NmfModel = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if model.version != NMF_MODEL_VERSION {
            return Err(Error::Data(format!(
                "unsupported nmf model version {}",
                model.version
            )));
        }
        model.tfidf.rebuild_index();
        Ok(model)
    }

    /// Topic-by-word weights as text, one row per topic.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for (k, row) in self.h.axis_iter(Axis(0)).enumerate() {
            out.push_str(&format!("topic{k}"));
            for x in row {
                out.push_str(&format!(" {x:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::cosine;
    use rand::Rng;

    #[test]
    fn rank_one_matrix_is_recovered() {
        let mut rng = substream(3, "nmf-test");
        let w: Vec<f64> = (0..8).map(|_| rng.gen_range(0.5..2.0)).collect();
        let h: Vec<f64> = (0..6).map(|_| rng.gen_range(0.5..2.0)).collect();
        let v = Array2::from_shape_fn((8, 6), |(i, j)| w[i] * h[j]);
        let f = factorize(&v, 1, 500, 1).unwrap();
        let approx = f.w.dot(&f.h);
        let err: f64 = (&v - &approx).iter().map(|x| x * x).sum::<f64>().sqrt();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err / norm <= 1e-6, "relative error {}", err / norm);
    }

    #[test]
    fn objective_is_monotone_non_increasing() {
        let mut rng = substream(4, "nmf-mono");
        let v = Array2::from_shape_fn((12, 9), |_| rng.gen::<f64>());
        let f = factorize(&v, 3, 50, 2).unwrap();
        assert_eq!(f.objective_trace.len(), 51);
        for pair in f.objective_trace.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-8,
                "objective increased: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn same_seed_same_factors() {
        let mut rng = substream(5, "nmf-det");
        let v = Array2::from_shape_fn((10, 7), |_| rng.gen::<f64>());
        let a = factorize(&v, 2, 30, 9).unwrap();
        let b = factorize(&v, 2, 30, 9).unwrap();
        assert_eq!(a.w, b.w);
        assert_eq!(a.h, b.h);
    }

    #[test]
    fn oversized_rank_is_fatal() {
        let v = Array2::zeros((4, 3));
        assert!(matches!(factorize(&v, 4, 10, 0), Err(Error::Config(_))));
    }

    #[test]
    fn negative_input_is_fatal() {
        let mut v = Array2::zeros((3, 3));
        v[[1, 1]] = -0.5;
        assert!(matches!(factorize(&v, 2, 10, 0), Err(Error::Data(_))));
    }

    #[test]
    fn fold_in_matches_training_row() {
        // Three clearly separated topics.
        let topics: [&[&str]; 3] = [
            &["ion", "atom", "charge", "field"],
            &["bread", "yeast", "oven", "flour"],
            &["goal", "match", "league", "coach"],
        ];
        let mut docs: Vec<Vec<&str>> = Vec::new();
        let mut rng = substream(6, "nmf-fold");
        for t in 0..3 {
            for _ in 0..12 {
                let mut doc = Vec::new();
                for _ in 0..12 {
                    doc.push(topics[t][rng.gen_range(0..topics[t].len())]);
                }
                docs.push(doc);
            }
        }
        let tfidf = TfidfModel::fit(&docs, 1, 100);
        let cfg = NmfConfig {
            rank: 3,
            iters: 400,
            seed: 7,
        };
        let (model, factors) = NmfModel::train(&docs, tfidf, cfg, String::new()).unwrap();
        for (i, doc) in docs.iter().enumerate() {
            let folded = model.project_doc(doc);
            let trained: Vec<f64> = factors.w.row(i).to_vec();
            let sim = cosine(&folded, &trained).unwrap();
            assert!(sim >= 0.99, "doc {i}: fold-in cosine {sim}");
        }
    }
}
