//! SMO for the box-constrained SVM dual.
//!
//! Works on the minimization form `f(a) = 1/2 a'Qa - e'a` with
//! `Q_ij = y_i y_j K(x_i, x_j)`, subject to `y'a = 0` and `0 <= a_i <= B_i`.
//! Each iteration picks the maximally violating index `i` and the partner `j`
//! with the largest second-order gain, then solves the two-variable
//! subproblem in closed form and clips it to both boxes. The scan order is
//! fixed, so results are reproducible.

use super::kernel::KernelCache;
use super::TrainingProblem;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    /// Dual objective `sum(a) - 1/2 a'Qa` (to be maximized).
    pub dual_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final `m(a) - M(a)` gap.
    pub violation: f64,
}

pub(crate) struct Smo<'a> {
    y: &'a [f64],
    upper: &'a [f64],
    alpha: Vec<f64>,
    /// Gradient of `f`: `Qa - e`.
    grad: Vec<f64>,
    cache: KernelCache<'a>,
}

impl<'a> Smo<'a> {
    pub(crate) fn new(problem: &'a TrainingProblem) -> Self {
        let n = problem.len();
        Smo {
            y: &problem.y,
            upper: &problem.boxes,
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            cache: KernelCache::new(&problem.x, problem.gamma, problem.cache_bytes),
        }
    }

    fn in_up(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] < self.upper[t]
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.y[t] > 0.0 {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.upper[t]
        }
    }

    /// Returns the working pair, or `None` once `m - M < tol`. Also returns
    /// the current gap.
    fn select(&mut self, tol: f64) -> (Option<(usize, usize)>, f64) {
        let n = self.alpha.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.y[t] * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        for t in 0..n {
            if self.in_low(t) {
                gmin = gmin.min(-self.y[t] * self.grad[t]);
            }
        }
        let gap = gmax - gmin;
        let Some(i) = i_sel else {
            return (None, 0.0);
        };
        if gap < tol {
            return (None, gap);
        }

        let ki = self.cache.row(i);
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let b = gmax + self.y[t] * self.grad[t];
            if b > 0.0 {
                // K_ii = K_tt = 1 for the RBF kernel
                let mut a = 2.0 - 2.0 * ki[t];
                if a <= 0.0 {
                    a = TAU;
                }
                let gain = -(b * b) / a;
                if gain < best {
                    best = gain;
                    j_sel = Some(t);
                }
            }
        }
        match j_sel {
            Some(j) => (Some((i, j)), gap),
            None => (None, gap),
        }
    }

    /// One analytic two-variable update.
    fn update(&mut self, i: usize, j: usize) {
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ci, cj) = (self.upper[i], self.upper[j]);
        let ki = self.cache.row(i);
        let kj = self.cache.row(j);
        let (old_ai, old_aj) = (self.alpha[i], self.alpha[j]);
        let quad = (2.0 - 2.0 * ki[j]).max(TAU);
        let (mut ai, mut aj) = (old_ai, old_aj);

        if yi != yj {
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > ci - cj {
                if ai > ci {
                    ai = ci;
                    aj = ci - diff;
                }
            } else if aj > cj {
                aj = cj;
                ai = cj + diff;
            }
        } else {
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > ci {
                if ai > ci {
                    ai = ci;
                    aj = sum - ci;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > cj {
                if aj > cj {
                    aj = cj;
                    ai = sum - cj;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }

        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (dai, daj) = (ai - old_ai, aj - old_aj);
        for t in 0..self.grad.len() {
            // Q_ti = y_t y_i K_ti
            self.grad[t] += self.y[t] * (yi * ki[t] * dai + yj * kj[t] * daj);
        }
    }

    /// `sum(a) - 1/2 a'Qa`, using `Qa = grad + e`.
    pub(crate) fn dual_objective(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a - 0.5 * a * (g + 1.0))
            .sum()
    }

    fn bias(&self) -> f64 {
        let mut ub = f64::INFINITY;
        let mut lb = f64::NEG_INFINITY;
        let mut free_sum = 0.0;
        let mut n_free = 0usize;
        for t in 0..self.alpha.len() {
            let yg = self.y[t] * self.grad[t];
            let at_upper = self.alpha[t] >= self.upper[t];
            let at_lower = self.alpha[t] <= 0.0;
            if at_upper {
                if self.y[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if at_lower {
                if self.y[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                n_free += 1;
                free_sum += yg;
            }
        }
        // b = -rho where rho = y_t G_t on free vectors
        if n_free > 0 {
            -free_sum / n_free as f64
        } else {
            -(ub + lb) / 2.0
        }
    }

    /// Run to convergence or until `max_iter`. When `trace` is given, the
    /// dual objective is pushed after every update.
    pub(crate) fn solve(mut self, tol: f64, max_iter: usize, mut trace: Option<&mut Vec<f64>>) -> Solution {
        let mut iterations = 0;
        let mut converged = false;
        let mut violation;
        loop {
            let (pair, gap) = self.select(tol);
            violation = gap;
            let Some((i, j)) = pair else {
                converged = true;
                break;
            };
            if iterations >= max_iter {
                break;
            }
            self.update(i, j);
            iterations += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(self.dual_objective());
            }
        }
        Solution {
            bias: self.bias(),
            dual_objective: self.dual_objective(),
            alpha: self.alpha,
            iterations,
            converged,
            violation,
        }
    }
}
