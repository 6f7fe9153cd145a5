//! Seeded averaged subgradient descent for L2-regularized hinge loss.
//!
//! Minimizes `lambda/2 ||w||^2 + (1/n) sum hinge(y (w.x + b))` with
//! `lambda = 1/(C n)`, which matches the usual SVM objective
//! `1/2 ||w||^2 + C sum xi` up to scale. Steps are `1/(lambda (t + 10))`;
//! the returned weights are the average of the iterates over the second
//! half of training (the averaging window).

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone)]
pub struct HingeConfig {
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Fit an unregularized bias term. Difference-vector training (ranking
    /// pairs) wants this off; point classification wants it on.
    pub with_bias: bool,
}

impl Default for HingeConfig {
    fn default() -> Self {
        HingeConfig {
            c: 1.0,
            epochs: 30,
            seed: 0,
            with_bias: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HingeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective evaluated after each epoch (at the averaged iterate once
    /// the averaging window starts).
    pub loss_trace: Vec<f64>,
}

pub fn train_hinge(xs: &[Vec<f64>], ys: &[f64], cfg: &HingeConfig) -> Result<HingeModel> {
    if xs.is_empty() {
        return Err(Error::Data("hinge training needs at least one example".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Data("hinge examples and labels differ in length".into()));
    }
    if !(cfg.c > 0.0) || !cfg.c.is_finite() {
        return Err(Error::Config(format!("penalty C must be positive, got {}", cfg.c)));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) {
        return Err(Error::Data("hinge examples have mixed dimensions".into()));
    }

    let n = xs.len();
    let lambda = 1.0 / (cfg.c * n as f64);
    let total_steps = (cfg.epochs * n) as u64;
    let avg_start = total_steps / 2;

    let objective = |w: &[f64], b: f64| -> f64 {
        let reg: f64 = 0.5 * lambda * w.iter().map(|x| x * x).sum::<f64>();
        let hinge: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let m = y * (dot(w, x) + b);
                (1.0 - m).max(0.0)
            })
            .sum::<f64>()
            / n as f64;
        reg + hinge
    };

    let mut rng = substream(cfg.seed, "optimizer");
    let mut order: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0f64; dim];
    let mut b = 0.0f64;
    let mut w_avg = vec![0.0f64; dim];
    let mut b_avg = 0.0f64;
    let mut n_avg = 0u64;
    let mut t = 0u64;
    let mut trace = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * (t as f64 + 10.0));
            let margin = ys[i] * (dot(&w, &xs[i]) + b);
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                let step = eta * ys[i];
                for (v, x) in w.iter_mut().zip(&xs[i]) {
                    *v += step * x;
                }
                if cfg.with_bias {
                    b += eta * ys[i];
                }
            }
            if t > avg_start {
                for (a, v) in w_avg.iter_mut().zip(&w) {
                    *a += v;
                }
                b_avg += b;
                n_avg += 1;
            }
        }
        let (cur_w, cur_b) = if n_avg > 0 {
            (
                w_avg.iter().map(|a| a / n_avg as f64).collect::<Vec<f64>>(),
                b_avg / n_avg as f64,
            )
        } else {
            (w.clone(), b)
        };
        let obj = objective(&cur_w, cur_b);
        if !obj.is_finite() {
            return Err(Error::Numeric(format!(
                "hinge objective became non-finite at epoch {epoch} (C={}, lambda={lambda:e})",
                cfg.c
            )));
        }
        trace.push(obj);
    }

    let weights: Vec<f64> = w_avg.iter().map(|a| a / n_avg.max(1) as f64).collect();
    let bias = b_avg / n_avg.max(1) as f64;
    Ok(HingeModel {
        weights,
        bias,
        loss_trace: trace,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn separable_points(n: usize, dim: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = substream(seed, "hinge-fixture");
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let y = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.3..0.3)).collect();
            x[0] += y * 1.5;
            xs.push(x);
            ys.push(y);
        }
        (xs, ys)
    }

    #[test]
    fn separable_points_are_classified() {
        let (xs, ys) = separable_points(200, 5, 1);
        let model = train_hinge(
            &xs,
            &ys,
            &HingeConfig {
                c: 1.0,
                epochs: 40,
                seed: 2,
                with_bias: true,
            },
        )
        .unwrap();
        let (txs, tys) = separable_points(200, 5, 3);
        let correct = txs
            .iter()
            .zip(&tys)
            .filter(|(x, y)| (dot(&model.weights, x) + model.bias) * **y > 0.0)
            .count();
        assert!(correct >= 196, "held-out accuracy {correct}/200");
    }

    #[test]
    fn training_is_deterministic() {
        let (xs, ys) = separable_points(100, 4, 4);
        let cfg = HingeConfig {
            c: 0.5,
            epochs: 20,
            seed: 9,
            with_bias: true,
        };
        let a = train_hinge(&xs, &ys, &cfg).unwrap();
        let b = train_hinge(&xs, &ys, &cfg).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
        assert_eq!(a.loss_trace, b.loss_trace);
    }

    #[test]
    fn loss_trace_is_non_increasing_in_averaging_window() {
        let (xs, ys) = separable_points(300, 6, 5);
        let cfg = HingeConfig {
            c: 1.0,
            epochs: 30,
            seed: 6,
            with_bias: false,
        };
        let model = train_hinge(&xs, &ys, &cfg).unwrap();
        // Averaging covers the second half of the epochs.
        let window = &model.loss_trace[cfg.epochs / 2..];
        for pair in window.windows(2) {
            assert!(
                pair[1] <= pair[0] + 1e-6,
                "loss increased in averaging window: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn vanishing_c_drives_weights_to_zero() {
        let (xs, ys) = separable_points(200, 4, 7);
        let model = train_hinge(
            &xs,
            &ys,
            &HingeConfig {
                c: 1e-9,
                epochs: 20,
                seed: 8,
                with_bias: false,
            },
        )
        .unwrap();
        let norm: f64 = model.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
        assert!(norm < 1e-3, "norm {norm} not near zero at C=1e-9");
    }

    #[test]
    fn empty_input_is_fatal() {
        assert!(train_hinge(&[], &[], &HingeConfig::default()).is_err());
    }

    #[test]
    fn bad_c_is_config_error() {
        let (xs, ys) = separable_points(10, 2, 1);
        let cfg = HingeConfig {
            c: 0.0,
            ..Default::default()
        };
        assert!(matches!(train_hinge(&xs, &ys, &cfg), Err(Error::Config(_))));
    }
}
