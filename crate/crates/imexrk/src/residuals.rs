//! Order-condition residuals and embedding-quality measures for tableau
//! pairs.
//!
//! For a pair with weights `b`, implicit coefficients `(A, c)` and explicit
//! coefficients `(At, ct)`, the residuals through order three are
//!
//! ```text
//! tau1(1) = 1 - b'e
//! tau1(2) = 1/2 - b'c          tau2(2) = 1/2 - b'ct
//! tau1(3) = 1/6 - b'Ac         tau2(3) = 1/6 - b'Act
//! tau3(3) = 1/6 - b'At c       tau4(3) = 1/6 - b'At ct
//! tau5(3) = 1/6 - b'c^2 / 2    tau6(3) = 1/3 - b'(c*ct)
//! tau7(3) = 1/6 - b'ct^2 / 2
//! ```
//!
//! with elementwise squares and products. The same formulas with `b_hat`
//! give the embedded residuals. Each residual multiplies one elementary
//! differential of the duplicated-argument system in the local error
//! expansion; `tau1(3)` pairs with the twice-implicit composition,
//! `tau7(3)` with the twice-explicit curvature term, and so on.

use crate::error::{Error, Result};
use crate::tableau::ImexPair;

/// Order-condition residuals for the primary (`tau*`) and embedded
/// (`tau*_hat`) weights of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSet {
    pub tau1: [f64; 1],
    pub tau2: [f64; 2],
    pub tau3: [f64; 7],
    pub tau1_hat: [f64; 1],
    pub tau2_hat: [f64; 2],
    pub tau3_hat: [f64; 7],
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn residual_trio(
    a_exp: &[Vec<f64>],
    a_imp: &[Vec<f64>],
    c_exp: &[f64],
    c_imp: &[f64],
    w: &[f64],
) -> ([f64; 1], [f64; 2], [f64; 7]) {
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
    let prod: Vec<f64> = c_imp.iter().zip(c_exp).map(|(a, b)| a * b).collect();
    let t1 = [1.0 - w.iter().sum::<f64>()];
    let t2 = [0.5 - dot(w, c_imp), 0.5 - dot(w, c_exp)];
    let t3 = [
        1.0 / 6.0 - dot(w, &mat_vec(a_imp, c_imp)),
        1.0 / 6.0 - dot(w, &mat_vec(a_imp, c_exp)),
        1.0 / 6.0 - dot(w, &mat_vec(a_exp, c_imp)),
        1.0 / 6.0 - dot(w, &mat_vec(a_exp, c_exp)),
        1.0 / 6.0 - 0.5 * dot(w, &sq(c_imp)),
        1.0 / 3.0 - dot(w, &prod),
        1.0 / 6.0 - 0.5 * dot(w, &sq(c_exp)),
    ];
    (t1, t2, t3)
}

/// Residuals of a single (non-partitioned) Runge-Kutta tableau, used for
/// the implicit-only and explicit-only quality measures.
fn single_residuals(a: &[Vec<f64>], w: &[f64]) -> ([f64; 1], [f64; 2]) {
    let c: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
    let t2 = [0.5 - dot(w, &c)];
    let t3 = [
        1.0 / 6.0 - dot(w, &mat_vec(a, &c)),
        1.0 / 6.0 - 0.5 * dot(w, &c.iter().map(|x| x * x).collect::<Vec<f64>>()),
    ];
    (t2, t3)
}

/// All order <= 3 residuals for both weight vectors of `pair`.
pub fn residuals(pair: &ImexPair) -> ResidualSet {
    residuals_for_weights(pair, pair.b_hat())
}

/// Same as [`residuals`] but with an arbitrary embedded weight vector,
/// used by the embedding optimizer.
pub fn residuals_for_weights(pair: &ImexPair, b_hat: &[f64]) -> ResidualSet {
    let (t1, t2, t3) = residual_trio(
        pair.a_explicit(),
        pair.a_implicit(),
        pair.c_explicit(),
        pair.c_implicit(),
        pair.b(),
    );
    let (h1, h2, h3) = residual_trio(
        pair.a_explicit(),
        pair.a_implicit(),
        pair.c_explicit(),
        pair.c_implicit(),
        b_hat,
    );
    ResidualSet {
        tau1: t1,
        tau2: t2,
        tau3: t3,
        tau1_hat: h1,
        tau2_hat: h2,
        tau3_hat: h3,
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Principal errors and embedding-quality ratios of a pair.
///
/// `a3` follows the convention that counts the residual of each error tree
/// once per component of the duplicated system (a factor sqrt(2) over the
/// plain 7-vector norm); the ratios `b3`, `c3`, `e3` are scale-free.
/// `a2_hat` is the plain norm of the two embedded order-2 residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    /// Principal error of the primary method.
    pub a3: f64,
    /// Principal error of the embedding.
    pub a2_hat: f64,
    pub b3: f64,
    pub c3: f64,
    pub e3: f64,
    pub b3_implicit: f64,
    pub c3_implicit: f64,
    pub e3_implicit: f64,
    pub b3_explicit: f64,
    pub c3_explicit: f64,
    pub e3_explicit: f64,
}

impl QualityReport {
    /// The nine ratios in optimizer order: pair, implicit-only,
    /// explicit-only.
    pub fn ratios(&self) -> [f64; 9] {
        [
            self.b3,
            self.c3,
            self.e3,
            self.b3_implicit,
            self.c3_implicit,
            self.e3_implicit,
            self.b3_explicit,
            self.c3_explicit,
            self.e3_explicit,
        ]
    }
}

/// Quality measures for the pair's own embedded weights.
pub fn quality(pair: &ImexPair) -> Result<QualityReport> {
    quality_for_weights(pair, pair.b_hat())
}

/// Quality measures for an arbitrary candidate embedding `b_hat`.
///
/// Fails with [`Error::DegenerateEmbedding`] when any of the order-2
/// embedded residual norms vanish (the denominators of the ratios).
pub fn quality_for_weights(pair: &ImexPair, b_hat: &[f64]) -> Result<QualityReport> {
    let res = residuals_for_weights(pair, b_hat);
    let a2_hat = norm(&res.tau2_hat);
    let a3_plain = norm(&res.tau3);

    let (_, t3i) = single_residuals(pair.a_implicit(), pair.b());
    let (h2i, h3i) = single_residuals(pair.a_implicit(), b_hat);
    let (_, t3e) = single_residuals(pair.a_explicit(), pair.b());
    let (h2e, h3e) = single_residuals(pair.a_explicit(), b_hat);

    let a2i = norm(&h2i);
    let a2e = norm(&h2e);
    if a2_hat == 0.0 || a2i == 0.0 || a2e == 0.0 {
        return Err(Error::DegenerateEmbedding);
    }

    Ok(QualityReport {
        a3: 2.0_f64.sqrt() * a3_plain,
        a2_hat,
        b3: norm(&res.tau3_hat) / a2_hat,
        c3: diff_norm(&res.tau3_hat, &res.tau3) / a2_hat,
        e3: a3_plain / a2_hat,
        b3_implicit: norm(&h3i) / a2i,
        c3_implicit: diff_norm(&h3i, &t3i) / a2i,
        e3_implicit: norm(&t3i) / a2i,
        b3_explicit: norm(&h3e) / a2e,
        c3_explicit: diff_norm(&h3e, &t3e) / a2e,
        e3_explicit: norm(&t3e) / a2e,
    })
}
