//! One step of the semi-implicit(-explicit) Runge-Kutta scheme.
//!
//! For stage i the explicit value and the implicit stage equation are
//!
//! ```text
//! Y*_i = y_n + dt * sum_{j<i} at_ij k_j
//! Y_i  = y_n + dt * sum_{j<i} a_ij  k_j + dt a_ii N(Y*_i, Y_i)
//! ```
//!
//! with stage derivatives k_j = N(Y*_j, Y_j) recovered algebraically from
//! the solved stage, k_i = (Y_i - known_i) / (dt a_ii). The solution and
//! the embedded solution reuse the same derivatives:
//!
//! ```text
//! y_{n+1}     = y_n + dt * sum_j b_j     k_j
//! y_hat_{n+1} = y_n + dt * sum_j b_hat_j k_j
//! ```
//!
//! Only the explicit projection of Y* is ever materialized.

use crate::error::{Error, Result};
use crate::system::{PartitionedSystem, StageStats};
use crate::tableau::ImexPair;

/// Output of one step: primary and embedded solutions plus work counters.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub y_next: Vec<f64>,
    pub y_hat: Vec<f64>,
    pub stats: StageStats,
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Advances `y_n` by one step of size `dt`. Exactly `s` stage solves are
/// performed (or an `eval` for a stage with a zero diagonal entry).
pub fn step<S: PartitionedSystem + ?Sized>(
    system: &S,
    pair: &ImexPair,
    y_n: &[f64],
    dt: f64,
    t: f64,
) -> Result<StepOutput> {
    let s = pair.stages();
    let dim = system.dim();
    debug_assert_eq!(y_n.len(), dim);
    let proj = system.explicit_projection();

    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut stats = StageStats::default();
    let mut known = vec![0.0; dim];
    let mut y_star = vec![0.0; proj.len()];

    for i in 0..s {
        known.copy_from_slice(y_n);
        for (j, k) in ks.iter().enumerate() {
            let a = pair.a_implicit()[i][j];
            if a != 0.0 {
                for (kn, kv) in known.iter_mut().zip(k) {
                    *kn += dt * a * kv;
                }
            }
        }
        y_star.copy_from_slice(&y_n[proj.clone()]);
        for (j, k) in ks.iter().enumerate() {
            let at = pair.a_explicit()[i][j];
            if at != 0.0 {
                for (ys, kv) in y_star.iter_mut().zip(&k[proj.clone()]) {
                    *ys += dt * at * kv;
                }
            }
        }

        let a_ii = pair.a_implicit()[i][i];
        let k_i = if a_ii == 0.0 {
            let mut out = vec![0.0; dim];
            system.eval(&y_star, &known, &mut out);
            out
        } else {
            let mu = dt * a_ii;
            let (stage, st) = system.solve_stage(&known, mu, &y_star)?;
            stats.accumulate(&st);
            stage
                .iter()
                .zip(&known)
                .map(|(y, kn)| (y - kn) / mu)
                .collect()
        };
        if !all_finite(&k_i) {
            return Err(Error::NonFiniteState { t });
        }
        ks.push(k_i);
    }

    let combine = |weights: &[f64]| -> Vec<f64> {
        let mut out = y_n.to_vec();
        for (j, k) in ks.iter().enumerate() {
            let w = weights[j];
            if w != 0.0 {
                for (o, kv) in out.iter_mut().zip(k) {
                    *o += dt * w * kv;
                }
            }
        }
        out
    };
    let mut y_next = combine(pair.b());
    let mut y_hat = combine(pair.b_hat());
    stats.clipped_mass += system.fixup_state(&mut y_next);
    stats.clipped_mass += system.fixup_state(&mut y_hat);
    if !all_finite(&y_next) || !all_finite(&y_hat) {
        return Err(Error::NonFiniteState { t });
    }
    Ok(StepOutput { y_next, y_hat, stats })
}
