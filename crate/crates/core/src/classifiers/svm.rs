//! Soft-margin SVM with an RBF kernel, trained by Sequential Minimal
//! Optimization (maximal-gain working-set selection), one-vs-one for
//! multiclass, with Platt-calibrated probabilities.

use std::collections::VecDeque;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::platt::{platt_fit, platt_probability, PlattParams};
use super::{check_dim, check_training, ProbabilityVector};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RbfKernel {
    pub gamma: f64,
}

impl RbfKernel {
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
        (-self.gamma * d).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / number of features`.
    pub gamma: Option<f64>,
    pub tol: f64,
    /// Iteration budget in passes; one pass is as many pair updates as there
    /// are training rows.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 10.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoParams {
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Record the dual objective every this many iterations (0 disables).
    pub record_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Intercept: the decision value is `sum_i alpha_i y_i k(x_i, x) + b`.
    pub b: f64,
    /// Gradient of the minimization form `1/2 a'Qa - e'a`.
    pub gradient: Vec<f64>,
    pub iterations: usize,
    /// Maximal KKT violation `m(a) - M(a)` at exit.
    pub kkt_gap: f64,
    /// Dual objective `sum a - 1/2 a'Qa`, sampled at iteration 0, every
    /// `record_every` iterations and at exit.
    pub objective_trace: Vec<f64>,
}

impl SmoSolution {
    pub fn dual_objective(&self) -> f64 {
        dual_objective(&self.alpha, &self.gradient)
    }
}

fn dual_objective(alpha: &[f64], grad: &[f64]) -> f64 {
    0.5 * alpha.iter().zip(grad).map(|(a, g)| a * (1.0 - g)).sum::<f64>()
}

struct KernelRows<'a> {
    x: &'a [Vec<f64>],
    kernel: RbfKernel,
    rows: Vec<Option<Rc<Vec<f64>>>>,
    fifo: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [Vec<f64>], kernel: RbfKernel) -> Self {
        let n = x.len();
        let capacity = (CACHE_BYTES / (8 * n.max(1))).clamp(2, n.max(2));
        KernelRows {
            x,
            kernel,
            rows: vec![None; n],
            fifo: VecDeque::new(),
            capacity,
        }
    }

    fn row(&mut self, i: usize) -> Rc<Vec<f64>> {
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.fifo.len() >= self.capacity {
            if let Some(old) = self.fifo.pop_front() {
                self.rows[old] = None;
            }
        }
        let xi = &self.x[i];
        let r = Rc::new(self.x.iter().map(|xj| self.kernel.eval(xi, xj)).collect::<Vec<_>>());
        self.rows[i] = Some(Rc::clone(&r));
        self.fifo.push_back(i);
        r
    }
}

/// Solves `max sum a - 1/2 sum a_i a_j y_i y_j k(x_i, x_j)` subject to
/// `0 <= a_i <= C` and `sum a_i y_i = 0`, for labels `y_i` in {-1, +1}.
pub fn smo_solve(x: &[Vec<f64>], y: &[f64], kernel: RbfKernel, params: &SmoParams) -> Result<SmoSolution> {
    let n = x.len();
    if n != y.len() || n == 0 {
        return Err(Error::input("SMO needs a non-empty problem with one label per row"));
    }
    if !y.contains(&1.0) || !y.contains(&-1.0) || y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::input("SMO labels must be +1/-1 with both present"));
    }
    if !(params.c > 0.0) {
        return Err(Error::input(format!("C must be positive, got {}", params.c)));
    }
    let c = params.c;
    let mut cache = KernelRows::new(x, kernel);
    // RBF diagonal is 1
    let diag = vec![1.0; n];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = vec![0.0];
    let is_upper = |a: f64| a >= c;
    let is_lower = |a: f64| a <= 0.0;

    let mut iter = 0;
    let gap = loop {
        // working set: i maximizes -y G over I_up; j gives the largest
        // second-order decrease among violating partners in I_low
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            let v = if y[t] > 0.0 {
                (!is_upper(alpha[t])).then(|| -grad[t])
            } else {
                (!is_lower(alpha[t])).then_some(grad[t])
            };
            if let Some(v) = v {
                if v >= gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            break 0.0;
        }
        let ki = cache.row(i);
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut j = usize::MAX;
        for t in 0..n {
            let grad_diff = if y[t] > 0.0 {
                if is_lower(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(grad[t]);
                gmax + grad[t]
            } else {
                if is_upper(alpha[t]) {
                    continue;
                }
                gmax2 = gmax2.max(-grad[t]);
                gmax - grad[t]
            };
            if grad_diff > 0.0 {
                let mut quad = diag[i] + diag[t] - 2.0 * ki[t];
                if quad <= 0.0 {
                    quad = TAU;
                }
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= best {
                    best = obj;
                    j = t;
                }
            }
        }
        let gap = gmax + gmax2;
        if gap < params.tol || j == usize::MAX {
            break gap.max(0.0);
        }
        if iter >= params.max_iter {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: gap,
            });
        }
        let kj = cache.row(j);

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = diag[i] + diag[j] - 2.0 * ki[j];
        if quad <= 0.0 {
            quad = TAU;
        }
        if y[i] != y[j] {
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
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
        iter += 1;
        if params.record_every > 0 && iter % params.record_every == 0 {
            trace.push(dual_objective(&alpha, &grad));
        }
    };
    trace.push(dual_objective(&alpha, &grad));

    // intercept from free vectors, or the midpoint of the feasible interval
    let (mut ub, mut lb, mut sum_free, mut n_free) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if is_upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if is_lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(SmoSolution {
        alpha,
        b: -rho,
        gradient: grad,
        iterations: iter,
        kkt_gap: gap,
        objective_trace: trace,
    })
}

/// One class pair: support vectors with coefficients `alpha_i y_i`, where
/// `y = +1` marks `positive`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: usize,
    pub negative: usize,
    pub support: Vec<Vec<f64>>,
    pub coef: Vec<f64>,
    pub b: f64,
    pub platt: PlattParams,
}

impl BinarySvm {
    pub fn decision(&self, kernel: RbfKernel, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * kernel.eval(sv, x))
            .sum::<f64>()
            + self.b
    }

    /// Calibrated probability of the positive class.
    pub fn prob_positive(&self, kernel: RbfKernel, x: &[f64]) -> f64 {
        platt_probability(self.platt, self.decision(kernel, x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub n_classes: usize,
    pub n_features: usize,
    pub kernel: RbfKernel,
    pub c: f64,
    pub tol: f64,
    pub pairs: Vec<BinarySvm>,
}

fn train_pair(
    x: &[Vec<f64>],
    y: &[usize],
    positive: usize,
    negative: usize,
    kernel: RbfKernel,
    params: &SvmParams,
) -> Result<BinarySvm> {
    let rows: Vec<usize> = (0..x.len()).filter(|&i| y[i] == positive || y[i] == negative).collect();
    let px: Vec<Vec<f64>> = rows.iter().map(|&i| x[i].clone()).collect();
    let py: Vec<f64> = rows.iter().map(|&i| if y[i] == positive { 1.0 } else { -1.0 }).collect();
    let sol = smo_solve(
        &px,
        &py,
        kernel,
        &SmoParams {
            c: params.c,
            tol: params.tol,
            max_iter: params.max_passes.saturating_mul(px.len()),
            record_every: 0,
        },
    )?;
    // training decision values from the final gradient: f_i = y_i (G_i + 1) + b
    let decisions: Vec<f64> = (0..px.len()).map(|t| py[t] * (sol.gradient[t] + 1.0) + sol.b).collect();
    let labels: Vec<bool> = py.iter().map(|&v| v > 0.0).collect();
    let platt = platt_fit(&decisions, &labels);
    let (support, coef) = sol
        .alpha
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.0)
        .map(|(t, &a)| (px[t].clone(), a * py[t]))
        .unzip();
    Ok(BinarySvm {
        positive,
        negative,
        support,
        coef,
        b: sol.b,
        platt,
    })
}

/// One-vs-one RBF SVM over the classes present in `y`.
pub fn svm_train(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &SvmParams) -> Result<SvmModel> {
    let dim = check_training(x, y, n_classes)?;
    let present: Vec<usize> = (0..n_classes).filter(|c| y.contains(c)).collect();
    if present.len() < 2 {
        return Err(Error::input("SVM training needs at least two classes"));
    }
    let gamma = params.gamma.unwrap_or(1.0 / dim as f64);
    if !(gamma > 0.0) {
        return Err(Error::input(format!("gamma must be positive, got {gamma}")));
    }
    let kernel = RbfKernel { gamma };
    let mut pairs = Vec::new();
    for (k, &a) in present.iter().enumerate() {
        for &b in &present[k + 1..] {
            pairs.push(train_pair(x, y, a, b, kernel, params)?);
        }
    }
    Ok(SvmModel {
        n_classes,
        n_features: dim,
        kernel,
        c: params.c,
        tol: params.tol,
        pairs,
    })
}

impl SvmModel {
    /// Pairwise probabilities summed into per-class scores, then normalized.
    pub fn predict(&self, x: &[f64]) -> Result<ProbabilityVector> {
        check_dim(self.n_features, x)?;
        let mut score = vec![0.0; self.n_classes];
        for p in &self.pairs {
            let r = p.prob_positive(self.kernel, x);
            score[p.positive] += r;
            score[p.negative] += 1.0 - r;
        }
        Ok(ProbabilityVector::from_scores(score))
    }
}
