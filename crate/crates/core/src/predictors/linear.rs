//! Weighted multinomial logistic regression shared by the category,
//! location and snap models and by the evaluation classifier.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optim::{minimize, LbfgsConfig, OptimResult};

/// Row-major design matrix with per-row class labels and weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub features: Vec<f32>,
    pub labels: Vec<u32>,
    pub weights: Vec<f32>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn push(&mut self, x: &[f64], label: usize, weight: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.features.extend(x.iter().map(|&v| v as f32));
        self.labels.push(label as u32);
        self.weights.push(weight as f32);
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn append(&mut self, other: Dataset) {
        assert_eq!(self.dim, other.dim);
        self.features.extend(other.features);
        self.labels.extend(other.labels);
        self.weights.extend(other.weights);
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().map(|&w| w as f64).sum()
    }
}

/// Linear scorer: `scores[k] = W[k] · x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxRegression {
    pub classes: usize,
    pub dim: usize,
    /// `classes × dim`, row-major.
    pub weights: Vec<f64>,
}

const CHUNK: usize = 4096;

impl SoftmaxRegression {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            classes,
            dim,
            weights: vec![0.0; classes * dim],
        }
    }

    pub fn scores_into(&self, x: &[f64], out: &mut [f64]) {
        scores(&self.weights, self.dim, x, out);
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.classes];
        self.scores_into(x, &mut s);
        softmax_in_place(&mut s);
        s
    }

    /// Fits by L-BFGS from the current weights.
    pub fn fit(&mut self, data: &Dataset, l2: f64, cfg: &LbfgsConfig) -> OptimResult {
        let (classes, dim) = (self.classes, self.dim);
        let result = minimize(
            |w, g| loss_and_gradient(w, classes, dim, data, l2, g),
            self.weights.clone(),
            cfg,
        );
        self.weights.clone_from(&result.x);
        result
    }
}

fn scores(weights: &[f64], dim: usize, x: &[f64], out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        let row = &weights[k * dim..(k + 1) * dim];
        *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
    }
}

pub fn softmax_in_place(s: &mut [f64]) {
    let m = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for v in s.iter_mut() {
        *v = (*v - m).exp();
        z += *v;
    }
    s.iter_mut().for_each(|v| *v /= z);
}

/// Weighted mean cross-entropy plus `l2/2 · ‖W‖²`; writes the gradient.
///
/// Rows are processed in fixed-size chunks whose partial sums are combined
/// in order, so the result does not depend on thread scheduling.
pub fn loss_and_gradient(w: &[f64], classes: usize, dim: usize, data: &Dataset, l2: f64, grad: &mut [f64]) -> f64 {
    let total_weight = data.total_weight();
    let partials: Vec<(f64, Vec<f64>)> = (0..data.len().div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut g = vec![0.0; classes * dim];
            let mut loss = 0.0;
            let mut x = vec![0.0; dim];
            let mut p = vec![0.0; classes];
            for i in c * CHUNK..((c + 1) * CHUNK).min(data.len()) {
                let wt = data.weights[i] as f64;
                if wt == 0.0 {
                    continue;
                }
                x.iter_mut().zip(data.row(i)).for_each(|(a, &b)| *a = b as f64);
                scores(w, dim, &x, &mut p);
                let m = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = p.iter().map(|v| (v - m).exp()).sum();
                let label = data.labels[i] as usize;
                loss += wt * (m + z.ln() - p[label]);
                for (k, pk) in p.iter_mut().enumerate() {
                    let prob = (*pk - m).exp() / z;
                    let coef = wt * (prob - if k == label { 1.0 } else { 0.0 });
                    if coef != 0.0 {
                        g[k * dim..(k + 1) * dim].iter_mut().zip(&x).for_each(|(gi, xi)| *gi += coef * xi);
                    }
                }
            }
            (loss, g)
        })
        .collect();
    grad.iter_mut().zip(w).for_each(|(g, wi)| *g = l2 * wi);
    let mut loss = 0.0;
    let norm = if total_weight > 0.0 { 1.0 / total_weight } else { 0.0 };
    for (l, g) in partials {
        loss += l;
        grad.iter_mut().zip(&g).for_each(|(a, b)| *a += norm * b);
    }
    loss * norm + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        let mut d = Dataset::new(3);
        for i in 0..60 {
            let x = (i as f64 / 10.0) - 3.0;
            let label = if x < -1.0 { 0 } else if x < 1.0 { 1 } else { 2 };
            d.push(&[x, x * x / 9.0, 1.0], label, if label == 1 { 0.5 } else { 1.0 });
        }
        d
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let d = toy();
        let w: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut g = vec![0.0; 9];
        loss_and_gradient(&w, 3, 3, &d, 0.01, &mut g);
        let mut scratch = vec![0.0; 9];
        for j in 0..9 {
            let h = 1e-6;
            let mut wp = w.clone();
            wp[j] += h;
            let lp = loss_and_gradient(&wp, 3, 3, &d, 0.01, &mut scratch);
            wp[j] -= 2.0 * h;
            let lm = loss_and_gradient(&wp, 3, 3, &d, 0.01, &mut scratch);
            let fd = (lp - lm) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1e-3), "{j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn fit_separates_and_is_monotone() {
        let d = toy();
        let mut m = SoftmaxRegression::zeros(3, 3);
        let r = m.fit(&d, 1e-4, &LbfgsConfig::default());
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        let correct = (0..d.len())
            .filter(|&i| {
                let x: Vec<f64> = d.row(i).iter().map(|&v| v as f64).collect();
                let p = m.probabilities(&x);
                let best = (0..3).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
                best == d.labels[i] as usize
            })
            .count();
        assert!(correct >= 55, "{correct}");
    }
}
