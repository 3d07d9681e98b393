//! Sequential minimal optimization for the shared kernel-machine dual.
//!
//! Classification and regression both reduce to
//!
//! ```text
//! minimize   (1/2) a' Q a + p' a
//! subject to s' a = 0,   0 <= a_t <= C
//! ```
//!
//! with `Q[t][u] = s_t * s_u * K(x_{t mod n}, x_{u mod n})` for constraint
//! signs `s` in {-1, +1}. The classifier uses one variable per sample
//! (`s` = labels, `p` = -1); the regressor uses two, one per tube side
//! (`s` = side sign, `p` = epsilon -/+ target). The solver picks the
//! maximal violating pair (second-order tie scoring on the low side),
//! performs the analytic two-variable update with box clipping, and stops
//! when the duality-gap bound `m - M` drops to `tol`. The working
//! gradient is maintained incrementally; every candidate stop is verified
//! against a freshly recomputed gradient, so accumulated drift can delay
//! termination but never corrupt the exit state.

use super::kernel::rbf_kernel;
use super::LearnError;

/// Hard cap on pair updates per solve.
pub const SMO_MAX_STEPS: usize = 10_000_000;

const TAU: f64 = 1e-12;

/// Dense symmetric kernel matrix over the training rows, row-major.
pub(crate) fn kernel_matrix(rows: &[Vec<f64>], gamma: f64) -> Result<Vec<f64>, LearnError> {
    let n = rows.len();
    let mut k = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rbf_kernel(&rows[i], &rows[j], gamma)?;
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    Ok(k)
}

pub(crate) struct SmoProblem<'a> {
    /// Row-major `n_samples` x `n_samples` kernel matrix.
    pub kernel: &'a [f64],
    pub n_samples: usize,
    /// Constraint sign of each dual variable; variable `t` reads kernel
    /// row `t % n_samples`.
    pub signs: Vec<f64>,
    pub linear: Vec<f64>,
    pub c: f64,
    pub tol: f64,
    pub max_steps: usize,
}

pub(crate) struct SmoSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub diagnostics: SmoDiagnostics,
}

/// Exit record of one solver run, kept for audits: the raw dual iterate,
/// the dual objective, and the final violating-pair gap.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoDiagnostics {
    pub iterations: usize,
    /// `m - M` on the exactly recomputed gradient at exit; at most `tol`.
    pub final_violation: f64,
    pub dual_objective: f64,
    /// The unified dual iterate (length n for classification, 2n for
    /// regression), before aggregation into per-sample coefficients.
    pub alpha: Vec<f64>,
}

struct Bounds {
    m_up: f64,
    m_low: f64,
    /// Most violating variable on the up side.
    i: Option<usize>,
}

impl<'a> SmoProblem<'a> {
    fn q(&self, t: usize, u: usize) -> f64 {
        self.signs[t] * self.signs[u] * self.k(t, u)
    }

    fn k(&self, t: usize, u: usize) -> f64 {
        self.kernel[(t % self.n_samples) * self.n_samples + (u % self.n_samples)]
    }

    fn can_increase(&self, alpha: &[f64], t: usize) -> bool {
        if self.signs[t] > 0.0 {
            alpha[t] < self.c
        } else {
            alpha[t] > 0.0
        }
    }

    fn can_decrease(&self, alpha: &[f64], t: usize) -> bool {
        if self.signs[t] > 0.0 {
            alpha[t] > 0.0
        } else {
            alpha[t] < self.c
        }
    }

    fn bounds(&self, alpha: &[f64], grad: &[f64]) -> Bounds {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        let mut i = None;
        for t in 0..alpha.len() {
            let v = -self.signs[t] * grad[t];
            if self.can_increase(alpha, t) && v > m_up {
                m_up = v;
                i = Some(t);
            }
            if self.can_decrease(alpha, t) && v < m_low {
                m_low = v;
            }
        }
        Bounds { m_up, m_low, i }
    }

    /// Second-order choice of the low-side partner for `i`: among
    /// decreasable variables below the up bound, the one with the largest
    /// guaranteed objective decrease.
    fn select_partner(&self, alpha: &[f64], grad: &[f64], i: usize, m_up: f64) -> Option<usize> {
        let mut best = None;
        let mut best_gain = f64::INFINITY;
        for t in 0..alpha.len() {
            if !self.can_decrease(alpha, t) {
                continue;
            }
            let v = -self.signs[t] * grad[t];
            if v >= m_up {
                continue;
            }
            let gap = m_up - v;
            let mut curvature = self.k(i, i) + self.k(t, t) - 2.0 * self.k(i, t);
            if curvature <= 0.0 {
                curvature = TAU;
            }
            let gain = -(gap * gap) / curvature;
            if gain < best_gain {
                best_gain = gain;
                best = Some(t);
            }
        }
        best
    }

    fn exact_gradient(&self, alpha: &[f64]) -> Vec<f64> {
        let mut grad = self.linear.clone();
        for t in 0..alpha.len() {
            if alpha[t] != 0.0 {
                for (u, g) in grad.iter_mut().enumerate() {
                    *g += self.q(u, t) * alpha[t];
                }
            }
        }
        grad
    }
}

pub(crate) fn solve(problem: &SmoProblem) -> Result<SmoSolution, LearnError> {
    let vars = problem.signs.len();
    debug_assert_eq!(problem.linear.len(), vars);
    let c = problem.c;

    let mut alpha = vec![0.0f64; vars];
    let mut grad = problem.linear.clone();
    let mut iterations = 0usize;

    loop {
        let Bounds { m_up, m_low, i } = problem.bounds(&alpha, &grad);
        let partner = i.and_then(|i| {
            if m_up - m_low > problem.tol {
                problem.select_partner(&alpha, &grad, i, m_up)
            } else {
                None
            }
        });
        let (i, j) = match (i, partner) {
            (Some(i), Some(j)) => (i, j),
            _ => {
                // Candidate stop: confirm on a drift-free gradient.
                let exact = problem.exact_gradient(&alpha);
                let b = problem.bounds(&alpha, &exact);
                let still = b.i.and_then(|i| {
                    if b.m_up - b.m_low > problem.tol {
                        problem.select_partner(&alpha, &exact, i, b.m_up)
                    } else {
                        None
                    }
                });
                match (b.i, still) {
                    (Some(i), Some(j)) => {
                        grad = exact;
                        (i, j)
                    }
                    _ => {
                        let objective = 0.5
                            * alpha
                                .iter()
                                .zip(exact.iter().zip(&problem.linear))
                                .map(|(a, (g, p))| a * (g + p))
                                .sum::<f64>();
                        let diagnostics = SmoDiagnostics {
                            iterations,
                            final_violation: b.m_up - b.m_low,
                            dual_objective: objective,
                            alpha: alpha.clone(),
                        };
                        return Ok(SmoSolution {
                            alpha,
                            bias: (b.m_up + b.m_low) / 2.0,
                            diagnostics,
                        });
                    }
                }
            }
        };

        if iterations >= problem.max_steps {
            return Err(LearnError::DidNotConverge {
                iterations,
                violation: m_up - m_low,
            });
        }
        iterations += 1;

        let old_i = alpha[i];
        let old_j = alpha[j];
        if problem.signs[i] != problem.signs[j] {
            let mut quad = problem.q(i, i) + problem.q(j, j) + 2.0 * problem.q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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
            let mut quad = problem.q(i, i) + problem.q(j, j) - 2.0 * problem.q(i, j);
            if quad <= 0.0 {
                quad = TAU;
            }
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

        let delta_i = alpha[i] - old_i;
        let delta_j = alpha[j] - old_j;
        if delta_i != 0.0 || delta_j != 0.0 {
            for (t, g) in grad.iter_mut().enumerate() {
                *g += problem.q(t, i) * delta_i + problem.q(t, j) * delta_j;
            }
        }
    }
}

pub(crate) fn check_kernel_hyper(c: f64, gamma: f64, tol: f64) -> Result<(), LearnError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(LearnError::InvalidHyperparameter {
            name: "C",
            value: c,
        });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(LearnError::InvalidHyperparameter {
            name: "gamma",
            value: gamma,
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LearnError::InvalidHyperparameter {
            name: "tol",
            value: tol,
        });
    }
    Ok(())
}
