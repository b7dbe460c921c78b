//! Soft-margin kernel SVM trained by sequential minimal optimization, with
//! one-vs-one voting for more than two classes.

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::ModelError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
}

impl Kernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    /// `None` selects an RBF kernel with `gamma = 1 / n_features`.
    #[serde(default)]
    pub kernel: Option<Kernel>,
    /// Scale each sample's `C` by `n / (n_classes · n_class)`.
    #[serde(default)]
    pub class_weight: bool,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            kernel: None,
            class_weight: false,
            eps: 1e-3,
            max_iter: 100_000,
        }
    }
}

impl SvmParams {
    pub fn resolve_kernel(&self, n_features: usize) -> Kernel {
        self.kernel.unwrap_or(Kernel::Rbf {
            gamma: 1.0 / n_features.max(1) as f64,
        })
    }
}

/// Result of one dual solve.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoOutcome {
    pub alpha: Vec<f64>,
    /// Decision offset: `f(x) = Σ α_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest KKT violation `m(α) - M(α)` at exit.
    pub max_violation: f64,
}

const TAU: f64 = 1e-12;

/// Solves `min ½ αᵀQα - Σα` subject to `0 ≤ α_i ≤ c_i` and `Σ y_i α_i = 0`,
/// with `Q_ij = y_i y_j K_ij` and `k` the full row-major kernel matrix.
///
/// Each step updates the maximal violating pair. When `trace` is given the
/// dual objective `Σα - ½ αᵀQα` is pushed after every step.
pub fn smo_solve(
    k: &[f64],
    y: &[f64],
    c: &[f64],
    eps: f64,
    max_iter: usize,
    mut trace: Option<&mut Vec<f64>>,
) -> SmoOutcome {
    let n = y.len();
    assert_eq!(k.len(), n * n);
    assert_eq!(c.len(), n);
    let q = |i: usize, j: usize| y[i] * y[j] * k[i * n + j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut iterations = 0;
    let mut violation;

    loop {
        // i maximises -y G over I_up, j maximises y G over I_low
        let (mut gmax, mut gmax2) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let up = if y[t] > 0.0 { alpha[t] < c[t] } else { alpha[t] > 0.0 };
            let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c[t] };
            let v = -y[t] * grad[t];
            if up && v > gmax {
                gmax = v;
                i = t;
            }
            if low && -v > gmax2 {
                gmax2 = -v;
                j = t;
            }
        }
        violation = gmax + gmax2;
        if i == usize::MAX || j == usize::MAX || violation <= eps {
            violation = violation.max(0.0);
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (ci, cj) = (c[i], c[j]);
        if y[i] != y[j] {
            let quad = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = (k[i * n + i] + k[j * n + j] - 2.0 * k[i * n + j]).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(dual_objective(&alpha, &grad));
        }
    }

    let rho = compute_rho(&alpha, &grad, y, c);
    SmoOutcome {
        alpha,
        rho,
        iterations,
        converged: violation <= eps,
        max_violation: violation,
    }
}

/// `Σα - ½ αᵀQα`, using `G = Qα - 1`.
fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
}

fn compute_rho(alpha: &[f64], grad: &[f64], y: &[f64], c: &[f64]) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut n_free) = (0.0, 0usize);
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c[t] {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum += yg;
        }
    }
    if n_free > 0 {
        sum / n_free as f64
    } else {
        0.5 * (ub + lb)
    }
}

/// One pairwise classifier: a positive decision value votes for `positive`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub negative: i8,
    pub positive: i8,
    #[serde(skip)]
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i y_i` for each support vector.
    #[serde(skip)]
    pub coef: Vec<f64>,
    #[serde(skip)]
    pub rho: f64,
    pub n_support: usize,
    pub iterations: usize,
    pub converged: bool,
    pub kkt_residual: f64,
}

impl BinarySvm {
    pub fn decision(&self, kernel: &Kernel, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coef)
            .map(|(sv, a)| a * kernel.eval(sv, x))
            .sum::<f64>()
            - self.rho
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub kernel: Kernel,
    pub c: f64,
    pub classes: Vec<i8>,
    pub n_features: usize,
    pub binaries: Vec<BinarySvm>,
}

impl SvmModel {
    /// Every pairwise solve reached the violation tolerance.
    pub fn converged(&self) -> bool {
        self.binaries.iter().all(|b| b.converged)
    }

    pub fn predict(&self, x: &[f64]) -> Result<i8, ModelError> {
        if x.len() != self.n_features {
            return Err(ModelError::Argument(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        let decisions: Vec<f64> = self.binaries.iter().map(|b| b.decision(&self.kernel, x)).collect();
        Ok(vote(&self.classes, &self.binaries, &decisions))
    }
}

/// Majority vote over pairwise decisions. Ties go to the class whose won
/// decisions have the larger total magnitude, then to the lower class.
pub fn vote(classes: &[i8], binaries: &[BinarySvm], decisions: &[f64]) -> i8 {
    let mut votes = vec![0usize; classes.len()];
    let mut weight = vec![0.0; classes.len()];
    for (b, d) in binaries.iter().zip(decisions) {
        let winner = if *d > 0.0 { b.positive } else { b.negative };
        let idx = classes.iter().position(|c| *c == winner).expect("known class");
        votes[idx] += 1;
        weight[idx] += d.abs();
    }
    let mut best = 0;
    for i in 1..classes.len() {
        if votes[i] > votes[best] || (votes[i] == votes[best] && weight[i] > weight[best]) {
            best = i;
        }
    }
    classes[best]
}

fn kernel_matrix(kernel: &Kernel, rows: &[&[f64]]) -> Vec<f64> {
    let n = rows.len();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = kernel.eval(rows[i], rows[j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Trains one SMO problem per pair of classes present in `data`.
pub fn svm_train(data: &Dataset, params: &SvmParams) -> Result<SvmModel, ModelError> {
    if !(params.c > 0.0) {
        return Err(ModelError::Argument(format!("C must be positive, got {}", params.c)));
    }
    if data.features.iter().flatten().any(|v| !v.is_finite()) {
        return Err(ModelError::Argument("non-finite feature value".into()));
    }
    let classes = data.present_classes();
    if classes.len() < 2 {
        return Err(ModelError::SingleClass(classes.first().copied()));
    }
    let n_features = data.n_features();
    let kernel = params.resolve_kernel(n_features);
    let weight = |label: i8| {
        if params.class_weight {
            let n_c = data.labels.iter().filter(|l| **l == label).count();
            data.len() as f64 / (classes.len() * n_c) as f64
        } else {
            1.0
        }
    };

    let mut binaries = Vec::new();
    for (a, &neg) in classes.iter().enumerate() {
        for &pos in &classes[a + 1..] {
            let idx: Vec<usize> = (0..data.len())
                .filter(|r| data.labels[*r] == neg || data.labels[*r] == pos)
                .collect();
            let rows: Vec<&[f64]> = idx.iter().map(|r| data.features[*r].as_slice()).collect();
            let y: Vec<f64> = idx
                .iter()
                .map(|r| if data.labels[*r] == pos { 1.0 } else { -1.0 })
                .collect();
            let c: Vec<f64> = idx.iter().map(|r| params.c * weight(data.labels[*r])).collect();
            let k = kernel_matrix(&kernel, &rows);
            let out = smo_solve(&k, &y, &c, params.eps, params.max_iter, None);
            if !out.converged {
                log::warn!(
                    "SMO for classes {neg}/{pos} stopped at {} iterations with violation {:.3e}",
                    out.iterations,
                    out.max_violation
                );
            }
            let sv: Vec<usize> = (0..idx.len()).filter(|t| out.alpha[*t] > 0.0).collect();
            binaries.push(BinarySvm {
                negative: neg,
                positive: pos,
                support_vectors: sv.iter().map(|t| rows[*t].to_vec()).collect(),
                coef: sv.iter().map(|t| out.alpha[*t] * y[*t]).collect(),
                rho: out.rho,
                n_support: sv.len(),
                iterations: out.iterations,
                converged: out.converged,
                kkt_residual: out.max_violation,
            });
        }
    }
    Ok(SvmModel {
        kernel,
        c: params.c,
        classes,
        n_features,
        binaries,
    })
}
