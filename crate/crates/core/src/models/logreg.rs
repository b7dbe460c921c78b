//! Multinomial logistic regression fitted by L-BFGS with backtracking.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegParams {
    pub l2_penalty: f64,
    pub max_iter: usize,
    /// Stop once the largest gradient component is at most this.
    pub tol: f64,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            l2_penalty: 0.01,
            max_iter: 1000,
            tol: 1e-6,
        }
    }
}

/// Weights are stored row-major, one row of `n_features + 1` per class with
/// the intercept last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRegModel {
    pub classes: Vec<i8>,
    pub n_features: usize,
    #[serde(skip)]
    pub weights: Vec<f64>,
    pub l2_penalty: f64,
    pub iterations: usize,
    pub converged: bool,
    pub loss: f64,
    pub grad_max_norm: f64,
}

impl LogRegModel {
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let w = self.n_features + 1;
        (0..self.classes.len())
            .map(|c| {
                let row = &self.weights[c * w..(c + 1) * w];
                row[..self.n_features].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + row[self.n_features]
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8, ModelError> {
        if x.len() != self.n_features {
            return Err(ModelError::Argument(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let s = self.scores(x);
        let mut best = 0;
        for (i, v) in s.iter().enumerate() {
            if *v > s[best] {
                best = i;
            }
        }
        Ok(self.classes[best])
    }
}

/// Mean cross-entropy plus `(λ/2)·‖W‖²` over non-intercept weights, and its
/// gradient. `y` holds class indices.
pub fn loss_and_gradient(w: &[f64], x: &[Vec<f64>], y: &[usize], n_classes: usize, l2: f64) -> (f64, Vec<f64>) {
    let d = x.first().map_or(0, Vec::len);
    let stride = d + 1;
    let n = x.len() as f64;
    let mut grad = vec![0.0; w.len()];
    let mut loss = 0.0;
    let mut z = vec![0.0; n_classes];
    for (xi, &yi) in x.iter().zip(y) {
        for (c, zc) in z.iter_mut().enumerate() {
            let row = &w[c * stride..(c + 1) * stride];
            *zc = row[..d].iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + row[d];
        }
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
        loss += lse - z[yi];
        for c in 0..n_classes {
            let p = (z[c] - lse).exp() - if c == yi { 1.0 } else { 0.0 };
            let g = &mut grad[c * stride..(c + 1) * stride];
            for (gj, xj) in g[..d].iter_mut().zip(xi) {
                *gj += p * xj;
            }
            g[d] += p;
        }
    }
    loss /= n;
    for g in &mut grad {
        *g /= n;
    }
    for c in 0..n_classes {
        for j in 0..d {
            let k = c * stride + j;
            loss += 0.5 * l2 * w[k] * w[k];
            grad[k] += l2 * w[k];
        }
    }
    (loss, grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

const HISTORY: usize = 10;
const ARMIJO: f64 = 1e-4;

/// Minimises [`loss_and_gradient`] from zero weights. When `trace` is given
/// the loss after every accepted step is pushed.
pub fn fit_weights(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    params: &LogRegParams,
    mut trace: Option<&mut Vec<f64>>,
) -> (Vec<f64>, f64, f64, usize, bool) {
    let d = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; n_classes * (d + 1)];
    let (mut f, mut g) = loss_and_gradient(&w, x, y, n_classes, params.l2_penalty);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;
    while max_abs(&g) > params.tol && iterations < params.max_iter {
        // two-loop recursion for the quasi-Newton direction
        let mut q = g.clone();
        let mut coeffs = Vec::with_capacity(s_hist.len());
        for (s, yv) in s_hist.iter().zip(&y_hist).rev() {
            let rho = 1.0 / dot(yv, s);
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(yv) {
                *qi -= a * yi;
            }
            coeffs.push((rho, a));
        }
        if let (Some(s), Some(yv)) = (s_hist.last(), y_hist.last()) {
            let scale = dot(s, yv) / dot(yv, yv);
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, yv), (rho, a)) in s_hist.iter().zip(&y_hist).zip(coeffs.into_iter().rev()) {
            let b = rho * dot(yv, &q);
            for (qi, si) in q.iter_mut().zip(s) {
                *qi += (a - b) * si;
            }
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let mut step = if s_hist.is_empty() {
            (1.0 / max_abs(&g)).min(1.0)
        } else {
            1.0
        };
        let accepted = loop {
            let trial: Vec<f64> = w.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let (ft, gt) = loss_and_gradient(&trial, x, y, n_classes, params.l2_penalty);
            if ft <= f + ARMIJO * step * slope {
                break Some((trial, ft, gt));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        let Some((trial, ft, gt)) = accepted else {
            break;
        };
        let s: Vec<f64> = trial.iter().zip(&w).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gt.iter().zip(&g).map(|(a, b)| a - b).collect();
        if dot(&s, &yv) > 1e-12 * dot(&yv, &yv).sqrt() * dot(&s, &s).sqrt() {
            if s_hist.len() == HISTORY {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(yv);
        }
        w = trial;
        f = ft;
        g = gt;
        iterations += 1;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(f);
        }
    }
    let gmax = max_abs(&g);
    (w, f, gmax, iterations, gmax <= params.tol)
}

pub fn logreg_train(data: &Dataset, params: &LogRegParams) -> Result<LogRegModel, ModelError> {
    if !(params.l2_penalty >= 0.0) {
        return Err(ModelError::Argument("l2 penalty must be non-negative".into()));
    }
    if data.features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ModelError::Argument("non-finite feature value".into()));
    }
    let classes = data.present_classes();
    if classes.len() < 2 {
        return Err(ModelError::SingleClass(classes.first().copied()));
    }
    let y: Vec<usize> = data
        .labels
        .iter()
        .map(|l| classes.iter().position(|c| c == l).expect("present class"))
        .collect();
    let (weights, loss, grad_max_norm, iterations, converged) =
        fit_weights(&data.features, &y, classes.len(), params, None);
    if !converged {
        log::warn!("logistic fit stopped after {iterations} iterations with gradient {grad_max_norm:.3e}");
    }
    Ok(LogRegModel {
        classes,
        n_features: data.n_features(),
        weights,
        l2_penalty: params.l2_penalty,
        iterations,
        converged,
        loss,
        grad_max_norm,
    })
}
