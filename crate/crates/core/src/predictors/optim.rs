//! Limited-memory BFGS with Armijo backtracking. Every accepted step lowers
//! the objective, so the loss history is non-increasing.

use std::collections::VecDeque;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsConfig {
    pub max_iter: usize,
    pub memory: usize,
    /// Stop when the largest gradient component falls below this.
    pub grad_tol: f64,
    /// Stop when an iteration improves the loss by less than this,
    /// relative to its magnitude.
    pub rel_tol: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            memory: 8,
            grad_tol: 1e-6,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub loss: f64,
    pub iterations: usize,
    /// Loss at the start and after every accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the loss and writes the gradient.
pub fn minimize<F>(mut f: F, x0: Vec<f64>, cfg: &LbfgsConfig) -> OptimResult
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut loss = f(&x, &mut g);
    let mut history = vec![loss];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < cfg.grad_tol {
            break;
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = mem.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            mem.clear();
            d = g.iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut step = if mem.is_empty() {
            1.0 / dot(&g, &g).sqrt().max(1.0)
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..50 {
            x_new.iter_mut().zip(&x).zip(&d).for_each(|((xn, xi), di)| *xn = xi + step * di);
            let l = f(&x_new, &mut g_new);
            if l.is_finite() && l <= loss + 1e-4 * step * slope {
                accepted = Some(l);
                break;
            }
            step *= 0.5;
        }
        let Some(l) = accepted else { break };
        if l >= loss {
            // no progress at machine precision
            break;
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if mem.len() == cfg.memory {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        let improvement = loss - l;
        loss = l;
        history.push(loss);
        iterations += 1;
        if improvement <= cfg.rel_tol * loss.abs().max(1.0) {
            break;
        }
    }
    OptimResult {
        x,
        loss,
        iterations,
        history,
    }
}
