//! Shared fixtures and independently derived oracles for the integration
//! suites.
//!
//! Nothing in this module calls back into the code paths it is used to
//! check: feature vectors are rebuilt by literal enumeration, the L1
//! optimum by exhaustive sign-pattern solves, kernel-machine duals by a
//! dense projected-gradient solver with an exact active-set polish, and
//! metrics by compensated summation. Agreement between the library and
//! these re-derivations is therefore evidence rather than tautology.

// Each integration binary links the whole module but uses its own slice.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use semsim::corpus::{Dataset, EntailmentLabel, IdfModel, SentencePair};
use semsim::embeddings::EmbeddingTable;

// ---------------------------------------------------------------------------
// Compensated arithmetic
// ---------------------------------------------------------------------------

/// Kahan-compensated sum; the workhorse of every oracle below.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

pub fn oracle_cosine_f32(a: &[f32], b: &[f32]) -> f64 {
    let dot = kahan_sum(a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)));
    let na = kahan_sum(a.iter().map(|x| f64::from(*x) * f64::from(*x))).sqrt();
    let nb = kahan_sum(b.iter().map(|x| f64::from(*x) * f64::from(*x))).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

pub fn oracle_cosine_f64(a: &[f64], b: &[f64]) -> f64 {
    let dot = kahan_sum(a.iter().zip(b).map(|(x, y)| x * y));
    let na = kahan_sum(a.iter().map(|x| x * x)).sqrt();
    let nb = kahan_sum(b.iter().map(|x| x * x)).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

// ---------------------------------------------------------------------------
// Brute-force feature oracle
// ---------------------------------------------------------------------------

fn bin3(edges: [f64; 3], v: f64) -> usize {
    if v < edges[1] {
        0
    } else if v < edges[2] {
        1
    } else {
        2
    }
}

fn directed_histogram(
    source: &[String],
    target: &[String],
    emb: &EmbeddingTable,
    edges: [f64; 3],
    weight: &dyn Fn(&str) -> f64,
) -> Option<[f64; 3]> {
    let sources: Vec<&String> = source.iter().filter(|t| emb.contains(t)).collect();
    let targets: Vec<&String> = target.iter().filter(|t| emb.contains(t)).collect();
    if sources.is_empty() || targets.is_empty() {
        return None;
    }
    let mut hist = [0.0; 3];
    let mut mass = 0.0;
    for s in &sources {
        let sv = emb.lookup(s).unwrap();
        let best = targets
            .iter()
            .map(|t| oracle_cosine_f32(sv, emb.lookup(t).unwrap()))
            .fold(f64::NEG_INFINITY, f64::max);
        let w = weight(s);
        hist[bin3(edges, best)] += w;
        mass += w;
    }
    if mass <= 0.0 {
        return None;
    }
    for h in &mut hist {
        *h /= mass;
    }
    Some(hist)
}

fn average_directions(a: Option<[f64; 3]>, b: Option<[f64; 3]>) -> [f64; 3] {
    let a = a.unwrap_or_default();
    let b = b.unwrap_or_default();
    [
        (a[0] + b[0]) / 2.0,
        (a[1] + b[1]) / 2.0,
        (a[2] + b[2]) / 2.0,
    ]
}

/// The full 15-feature vector re-derived by literal enumeration: explicit
/// if-chain binning, compensated cosines, and a fresh reading of every
/// degenerate-case rule (missing direction contributes zeros, all-pairs
/// normalizes by the pair count, the per-dimension histogram always
/// carries unit mass).
pub fn oracle_features(
    tokens_1: &[String],
    tokens_2: &[String],
    emb: &EmbeddingTable,
    idf: &IdfModel,
) -> [f64; 15] {
    let mut out = [0.0; 15];
    let sal_edges = [0.0, 0.15, 0.4];
    let net_edges = [-1.0, 0.45, 0.8];
    let idf_w = |t: &str| idf.idf(t);
    let unit_w = |_: &str| 1.0;

    out[0..3].copy_from_slice(&average_directions(
        directed_histogram(tokens_1, tokens_2, emb, sal_edges, &idf_w),
        directed_histogram(tokens_2, tokens_1, emb, sal_edges, &idf_w),
    ));
    out[6..9].copy_from_slice(&average_directions(
        directed_histogram(tokens_1, tokens_2, emb, net_edges, &unit_w),
        directed_histogram(tokens_2, tokens_1, emb, net_edges, &unit_w),
    ));

    let in_1: Vec<&String> = tokens_1.iter().filter(|t| emb.contains(t)).collect();
    let in_2: Vec<&String> = tokens_2.iter().filter(|t| emb.contains(t)).collect();
    if !in_1.is_empty() && !in_2.is_empty() {
        let mut hist = [0.0; 3];
        for a in &in_1 {
            for b in &in_2 {
                let c = oracle_cosine_f32(emb.lookup(a).unwrap(), emb.lookup(b).unwrap());
                hist[bin3(net_edges, c)] += 1.0;
            }
        }
        let pairs = (in_1.len() * in_2.len()) as f64;
        out[3] = hist[0] / pairs;
        out[4] = hist[1] / pairs;
        out[5] = hist[2] / pairs;
    }

    let mean = |tokens: &[&String]| -> Vec<f64> {
        let mut m = vec![0.0; emb.dim()];
        for t in tokens {
            for (i, &v) in emb.lookup(t).unwrap().iter().enumerate() {
                m[i] += f64::from(v);
            }
        }
        if !tokens.is_empty() {
            for v in &mut m {
                *v /= tokens.len() as f64;
            }
        }
        m
    };
    let m1 = mean(&in_1);
    let m2 = mean(&in_2);
    out[9] = oracle_cosine_f64(&m1, &m2);
    out[10] = kahan_sum(m1.iter().zip(&m2).map(|(a, b)| (a - b) * (a - b))).sqrt();

    for (a, b) in m1.iter().zip(&m2) {
        let d = (a - b).abs();
        let bin = if d < 0.001 {
            0
        } else if d < 0.01 {
            1
        } else if d < 0.02 {
            2
        } else {
            3
        };
        out[11 + bin] += 1.0 / emb.dim() as f64;
    }
    out
}

// ---------------------------------------------------------------------------
// Dense linear algebra for the QP oracles
// ---------------------------------------------------------------------------

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot degenerates, which the callers treat as
/// "this candidate active set does not determine a solution".
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let acc = kahan_sum(((col + 1)..n).map(|k| a[col][k] * x[k]));
        x[col] = (b[col] - acc) / a[col][col];
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Exhaustive sign-pattern oracle for the L1 problem
// ---------------------------------------------------------------------------

/// Global minimum of `(1/2n)||y_c - X theta||^2 + lambda * ||theta||_1`
/// over the standardized design, found by enumerating all `3^p` sign
/// patterns, solving the free coordinates of each stationarity system
/// exactly, and keeping every candidate that satisfies the subgradient
/// conditions. For a convex objective any such candidate is a global
/// minimizer, so the smallest objective seen is the optimum.
pub fn lasso_pattern_minimum(rows: &[Vec<f64>], y: &[f64], lambda: f64) -> f64 {
    let n = rows.len();
    let p = rows[0].len();
    assert!(p <= 8, "pattern enumeration is exponential in width");

    // Standardize: per-column mean and population standard deviation.
    let mut means = vec![0.0; p];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut scales = vec![0.0; p];
    for row in rows {
        for ((s, m), v) in scales.iter_mut().zip(&means).zip(row) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut scales {
        let std = (*s / n as f64).sqrt();
        *s = if std > 0.0 { std } else { 1.0 };
    }
    let xs: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&scales)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
        .collect();
    let y_mean = kahan_sum(y.iter().copied()) / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // Normal-equation blocks: G = (1/n) X'X and b = (1/n) X'y_c.
    let mut gram = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for k in 0..p {
        for l in k..p {
            let v = kahan_sum(xs.iter().map(|r| r[k] * r[l])) / n as f64;
            gram[k][l] = v;
            gram[l][k] = v;
        }
        xty[k] = kahan_sum(xs.iter().zip(&yc).map(|(r, v)| r[k] * v)) / n as f64;
    }

    let objective = |theta: &[f64]| -> f64 {
        let sse = kahan_sum(xs.iter().zip(&yc).map(|(row, yv)| {
            let fit = kahan_sum(row.iter().zip(theta).map(|(x, t)| x * t));
            let r = yv - fit;
            r * r
        }));
        sse / (2.0 * n as f64) + lambda * kahan_sum(theta.iter().map(|t| t.abs()))
    };

    let stationarity_slack = 1e-9 * (1.0 + lambda);
    let mut best: Option<f64> = None;
    let patterns = 3usize.pow(p as u32);
    'patterns: for code in 0..patterns {
        let mut signs = vec![0i8; p];
        let mut rest = code;
        for s in &mut signs {
            *s = [0i8, 1, -1][rest % 3];
            rest /= 3;
        }
        let free: Vec<usize> = (0..p).filter(|&k| signs[k] != 0).collect();

        let mut theta = vec![0.0; p];
        if !free.is_empty() {
            // Stationarity on the free block: G_FF theta_F = b_F - lambda * s_F.
            let a: Vec<Vec<f64>> = free
                .iter()
                .map(|&k| free.iter().map(|&l| gram[k][l]).collect())
                .collect();
            let rhs: Vec<f64> = free
                .iter()
                .map(|&k| xty[k] - lambda * f64::from(signs[k]))
                .collect();
            let Some(solution) = gauss_solve(a, rhs) else {
                continue;
            };
            for (&k, &v) in free.iter().zip(&solution) {
                if v * f64::from(signs[k]) <= 0.0 {
                    continue 'patterns;
                }
                theta[k] = v;
            }
        }
        // Subgradient condition on the zero coordinates.
        for k in (0..p).filter(|&k| signs[k] == 0) {
            let grad = xty[k] - kahan_sum((0..p).map(|l| gram[k][l] * theta[l]));
            if grad.abs() > lambda + stationarity_slack {
                continue 'patterns;
            }
        }
        let value = objective(&theta);
        best = Some(best.map_or(value, |b: f64| b.min(value)));
    }
    best.expect("at least one sign pattern must satisfy the optimality conditions")
}

/// Objective value achieved by a fitted L1 model on its own training data,
/// evaluated from scratch: raw-space predictions against raw targets plus
/// the penalty on the stored (standardized-coordinate) weights.
pub fn lasso_objective_of_model(
    model: &semsim::learn::LassoModel,
    rows: &[Vec<f64>],
    y: &[f64],
) -> f64 {
    let n = rows.len() as f64;
    let sse = kahan_sum(rows.iter().zip(y).map(|(row, yv)| {
        let r = yv - model.predict_row(row);
        r * r
    }));
    sse / (2.0 * n) + model.lambda * kahan_sum(model.weights.iter().map(|w| w.abs()))
}

// ---------------------------------------------------------------------------
// Dense box-and-hyperplane QP oracle for the kernel-machine duals
// ---------------------------------------------------------------------------

/// The shared dual shape of both kernel machines:
///
/// ```text
/// minimize   (1/2) a' Q a + p' a
/// subject to s' a = 0,   0 <= a_t <= C
/// ```
///
/// solved here by accelerated projected gradient descent plus an exact
/// active-set polish, entirely independent of the pairwise solver under
/// test.
pub struct BoxQp {
    pub dim: usize,
    /// Row-major symmetric `dim x dim` matrix.
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub signs: Vec<f64>,
    pub c: f64,
}

impl BoxQp {
    pub fn objective(&self, a: &[f64]) -> f64 {
        let quad = kahan_sum(
            (0..self.dim)
                .map(|t| a[t] * kahan_sum((0..self.dim).map(|u| self.q[t * self.dim + u] * a[u]))),
        );
        0.5 * quad + kahan_sum(self.p.iter().zip(a).map(|(p, a)| p * a))
    }

    fn gradient(&self, a: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|t| kahan_sum((0..self.dim).map(|u| self.q[t * self.dim + u] * a[u])) + self.p[t])
            .collect()
    }

    /// Euclidean projection onto the feasible set. With signs in {-1, +1}
    /// the KKT form is `a_t = clamp(z_t - mu * s_t, 0, C)` where the
    /// multiplier `mu` zeroes `s' a`; that balance is monotone in `mu`,
    /// so bisection pins it to machine precision.
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let at = |mu: f64| -> Vec<f64> {
            z.iter()
                .zip(&self.signs)
                .map(|(z, s)| (z - mu * s).clamp(0.0, self.c))
                .collect()
        };
        let balance =
            |a: &[f64]| -> f64 { kahan_sum(a.iter().zip(&self.signs).map(|(a, s)| a * s)) };
        let reach = z.iter().fold(0.0f64, |m, v| m.max(v.abs())) + self.c + 1.0;
        let (mut lo, mut hi) = (-reach, reach);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if balance(&at(mid)) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(0.5 * (lo + hi))
    }

    /// Accelerated projected gradient descent from `start`, tracking the
    /// best feasible iterate seen.
    fn descend(&self, start: Vec<f64>, iterations: usize) -> (Vec<f64>, f64) {
        // Row-sum bound on the spectral norm of the symmetric Q.
        let lipschitz = (0..self.dim)
            .map(|t| kahan_sum((0..self.dim).map(|u| self.q[t * self.dim + u].abs())))
            .fold(1e-12, f64::max);
        let step = 1.0 / lipschitz;

        let mut x = self.project(&start);
        let mut momentum = x.clone();
        let mut t = 1.0f64;
        let mut best = x.clone();
        let mut best_value = self.objective(&x);
        for _ in 0..iterations {
            let grad = self.gradient(&momentum);
            let trial: Vec<f64> = momentum
                .iter()
                .zip(&grad)
                .map(|(v, g)| v - step * g)
                .collect();
            let x_next = self.project(&trial);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            momentum = x_next
                .iter()
                .zip(&x)
                .map(|(new, old)| new + (t - 1.0) / t_next * (new - old))
                .collect();
            x = x_next;
            t = t_next;
            let value = self.objective(&x);
            if value < best_value {
                best_value = value;
                best = x.clone();
            }
        }
        (best, best_value)
    }

    /// Reads an active set off `a` at the given bound `threshold`, solves
    /// the corresponding equality-constrained system exactly, and returns
    /// the refined point if it passes the full KKT check. A returned
    /// point is a certified global minimizer of this convex program (up
    /// to the stated verification slack).
    fn polish(&self, a: &[f64], threshold: f64) -> Option<Vec<f64>> {
        let hi: Vec<usize> = (0..self.dim)
            .filter(|&t| a[t] >= self.c - threshold && a[t] > threshold)
            .collect();
        let free: Vec<usize> = (0..self.dim)
            .filter(|&t| a[t] > threshold && a[t] < self.c - threshold)
            .collect();

        let mut refined = vec![0.0; self.dim];
        for &t in &hi {
            refined[t] = self.c;
        }
        let multiplier;
        if free.is_empty() {
            // All variables at bounds: any multiplier in the feasibility
            // interval certifies the point.
            let grad = self.gradient(&refined);
            let slack = self.kkt_slack();
            let mut lo_bound = f64::NEG_INFINITY;
            let mut hi_bound = f64::INFINITY;
            for t in 0..self.dim {
                // At the lower bound the signed gradient must be
                // nonnegative; at the upper bound nonpositive.
                let g = grad[t];
                let s = self.signs[t];
                let is_hi = refined[t] > 0.0;
                // Condition: g + mu * s >= -slack (lower) or <= slack (upper).
                if !is_hi {
                    if s > 0.0 {
                        lo_bound = lo_bound.max((-g - slack) / s);
                    } else {
                        hi_bound = hi_bound.min((-g - slack) / s);
                    }
                } else if s > 0.0 {
                    hi_bound = hi_bound.min((slack - g) / s);
                } else {
                    lo_bound = lo_bound.max((slack - g) / s);
                }
            }
            if lo_bound > hi_bound {
                return None;
            }
            return Some(refined);
        }

        // KKT system over the free block plus the equality multiplier:
        //   Q_FF a_F + mu s_F = -p_F - Q_FB a_B
        //   s_F' a_F          = -s_B' a_B
        let m = free.len();
        let mut system = vec![vec![0.0; m + 1]; m + 1];
        let mut rhs = vec![0.0; m + 1];
        for (i, &t) in free.iter().enumerate() {
            for (j, &u) in free.iter().enumerate() {
                system[i][j] = self.q[t * self.dim + u];
            }
            system[i][m] = self.signs[t];
            system[m][i] = self.signs[t];
            let bound_load = kahan_sum(hi.iter().map(|&u| self.q[t * self.dim + u] * self.c));
            rhs[i] = -self.p[t] - bound_load;
        }
        rhs[m] = -kahan_sum(hi.iter().map(|&u| self.signs[u] * self.c));

        let solution = gauss_solve(system, rhs)?;
        let feasibility = 1e-9 * (1.0 + self.c);
        for (i, &t) in free.iter().enumerate() {
            let v = solution[i];
            if !(-feasibility..=self.c + feasibility).contains(&v) {
                return None;
            }
            refined[t] = v.clamp(0.0, self.c);
        }
        multiplier = solution[m];

        let grad = self.gradient(&refined);
        let slack = self.kkt_slack();
        for t in 0..self.dim {
            let g = grad[t] + multiplier * self.signs[t];
            let ok = if free.contains(&t) {
                g.abs() <= slack
            } else if refined[t] == 0.0 {
                g >= -slack
            } else {
                g <= slack
            };
            if !ok {
                return None;
            }
        }
        Some(refined)
    }

    fn kkt_slack(&self) -> f64 {
        let p_norm = self.p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        1e-7 * (1.0 + p_norm + self.c)
    }

    /// Best objective value this oracle can certify or reach: projected
    /// gradient from a cold start and (when given) from the solution
    /// under audit, each refined by the exact active-set polish.
    pub fn minimum(&self, warm: Option<&[f64]>) -> f64 {
        let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
        let cold = self.descend(vec![0.0; self.dim], 4000);
        candidates.push(cold);
        if let Some(w) = warm {
            candidates.push(self.descend(w.to_vec(), 1000));
        }
        let mut best = f64::INFINITY;
        for (point, value) in &candidates {
            best = best.min(*value);
            for threshold in [1e-4, 1e-6, 1e-8] {
                let scaled = threshold * (1.0 + self.c);
                if let Some(refined) = self.polish(point, scaled) {
                    best = best.min(self.objective(&refined));
                }
            }
        }
        best
    }
}

/// RBF kernel recomputed from scratch for the QP oracles.
pub fn oracle_rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let sq = kahan_sum(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)));
    (-gamma * sq).exp()
}

/// Builds the classification dual for labels in {-1, +1}.
pub fn svm_dual(rows: &[Vec<f64>], labels: &[f64], c: f64, gamma: f64) -> BoxQp {
    let n = rows.len();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = labels[i] * labels[j] * oracle_rbf(&rows[i], &rows[j], gamma);
        }
    }
    BoxQp {
        dim: n,
        q,
        p: vec![-1.0; n],
        signs: labels.to_vec(),
        c,
    }
}

/// Builds the regression dual with one variable per tube side: the first
/// `n` variables carry sign +1 and linear term `epsilon - y`, the second
/// `n` sign -1 and `epsilon + y`.
pub fn svr_dual(rows: &[Vec<f64>], y: &[f64], c: f64, epsilon: f64, gamma: f64) -> BoxQp {
    let n = rows.len();
    let dim = 2 * n;
    let mut signs = vec![1.0; dim];
    signs[n..].fill(-1.0);
    let mut q = vec![0.0; dim * dim];
    for t in 0..dim {
        for u in 0..dim {
            q[t * dim + u] = signs[t] * signs[u] * oracle_rbf(&rows[t % n], &rows[u % n], gamma);
        }
    }
    let mut p = Vec::with_capacity(dim);
    p.extend(y.iter().map(|yi| epsilon - yi));
    p.extend(y.iter().map(|yi| epsilon + yi));
    BoxQp {
        dim,
        q,
        p,
        signs,
        c,
    }
}

// ---------------------------------------------------------------------------
// Metric oracles
// ---------------------------------------------------------------------------

pub fn oracle_pearson(pred: &[f64], gold: &[f64]) -> f64 {
    let n = pred.len() as f64;
    let mp = kahan_sum(pred.iter().copied()) / n;
    let mg = kahan_sum(gold.iter().copied()) / n;
    let spp = kahan_sum(pred.iter().map(|v| (v - mp) * (v - mp)));
    let sgg = kahan_sum(gold.iter().map(|v| (v - mg) * (v - mg)));
    let spg = kahan_sum(pred.iter().zip(gold).map(|(p, g)| (p - mp) * (g - mg)));
    (spg / (spp.sqrt() * sgg.sqrt())).clamp(-1.0, 1.0)
}

pub fn oracle_mse(pred: &[f64], gold: &[f64]) -> f64 {
    kahan_sum(pred.iter().zip(gold).map(|(p, g)| (p - g) * (p - g))) / pred.len() as f64
}

pub fn oracle_accuracy(pred: &[EntailmentLabel], gold: &[EntailmentLabel]) -> f64 {
    let hits = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    hits as f64 / pred.len() as f64
}

/// Per-class F1 via the closed form `2 tp / (2 tp + fp + fn)`, which
/// sidesteps precision/recall intermediates entirely, plus their mean.
pub fn oracle_f1(pred: &[EntailmentLabel], gold: &[EntailmentLabel]) -> ([f64; 3], f64) {
    let mut per_class = [0.0f64; 3];
    for (slot, class) in per_class.iter_mut().zip(EntailmentLabel::ALL) {
        let tp = pred
            .iter()
            .zip(gold)
            .filter(|(p, g)| **p == class && **g == class)
            .count() as f64;
        let fp = pred
            .iter()
            .zip(gold)
            .filter(|(p, g)| **p == class && **g != class)
            .count() as f64;
        let fn_ = pred
            .iter()
            .zip(gold)
            .filter(|(p, g)| **p != class && **g == class)
            .count() as f64;
        *slot = if 2.0 * tp + fp + fn_ == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fn_)
        };
    }
    let macro_f1 = kahan_sum(per_class) / 3.0;
    (per_class, macro_f1)
}

// ---------------------------------------------------------------------------
// Synthetic corpora
// ---------------------------------------------------------------------------

/// A seeded random embedding table over tokens `w000 ... w{vocab-1}` with
/// components uniform in [-1, 1].
pub fn synthetic_embeddings(seed: u64, vocab: usize, dim: usize) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<(String, Vec<f32>)> = (0..vocab)
        .map(|i| {
            let vector: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            (format!("w{i:03}"), vector)
        })
        .collect();
    EmbeddingTable::from_entries(dim, entries).unwrap()
}

/// One synthetic pair: two short sentences of in-vocabulary tokens, the
/// true cosine of their mean vectors, and labels derived from it. Gold
/// similarity is an affine map of the true cosine plus Gaussian noise,
/// clamped to the 1-5 scale; the entailment class thresholds the cosine.
pub struct SyntheticPair {
    pub pair: SentencePair,
    pub true_cosine: f64,
}

pub fn synthetic_corpus(
    seed: u64,
    emb: &EmbeddingTable,
    count: usize,
    noise_sigma: f64,
    tag: &str,
) -> (Dataset, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sigma).unwrap();
    let vocab: Vec<String> = emb.iter().map(|(t, _)| t.to_string()).collect();
    let mut pairs = Vec::with_capacity(count);
    let mut cosines = Vec::with_capacity(count);
    for i in 0..count {
        let sentence = |rng: &mut ChaCha8Rng| -> Vec<String> {
            let len = rng.gen_range(2..=6);
            vocab.choose_multiple(rng, len).cloned().collect()
        };
        let tokens_1 = sentence(&mut rng);
        let tokens_2 = sentence(&mut rng);
        let mean = |tokens: &[String]| -> Vec<f64> {
            let mut m = vec![0.0; emb.dim()];
            for t in tokens {
                for (k, &v) in emb.lookup(t).unwrap().iter().enumerate() {
                    m[k] += f64::from(v);
                }
            }
            for v in &mut m {
                *v /= tokens.len() as f64;
            }
            m
        };
        let cosine = oracle_cosine_f64(&mean(&tokens_1), &mean(&tokens_2));
        let gold = (2.0 * cosine + 3.0 + noise.sample(&mut rng)).clamp(1.0, 5.0);
        let entailment = if cosine > 0.6 {
            EntailmentLabel::Paraphrase
        } else if cosine > 0.2 {
            EntailmentLabel::Entailment
        } else {
            EntailmentLabel::None
        };
        pairs.push(SentencePair {
            id: format!("s{i:04}"),
            text_t: tokens_1.join(" "),
            text_h: tokens_2.join(" "),
            similarity: Some(gold),
            entailment: Some(entailment),
        });
        cosines.push(cosine);
    }
    (Dataset::new(pairs, tag).unwrap(), cosines)
}
