//! Numerical design of embedded weight vectors.
//!
//! Given a second-order pair, an embedding b_hat is sought that minimizes
//! the distance of the nine quality ratios (pair, implicit-only,
//! explicit-only) from one, subject to sum(b_hat) = 1 and A-stability of
//! the implicit method run with b_hat. The weight-sum constraint is
//! enforced by parameterizing the affine slice; A-stability enters as a
//! penalty. The objective is smooth but the constraint is not, so a
//! multi-start derivative-free simplex search is used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::residuals::quality_for_weights;
use crate::stability::is_a_stable_implicit;
use crate::tableau::ImexPair;

/// Result of an embedding optimization.
#[derive(Debug, Clone)]
pub struct OptimizedEmbedding {
    pub b_hat: Vec<f64>,
    pub objective: f64,
    /// A-stability margin of the implicit method with `b_hat`.
    pub margin: f64,
}

/// The optimizer objective: || ratios(b_hat) - 1 ||_2, or infinity when
/// the candidate embedding is degenerate (second order).
pub fn embedding_objective(pair: &ImexPair, b_hat: &[f64]) -> f64 {
    match quality_for_weights(pair, b_hat) {
        Ok(q) => q
            .ratios()
            .iter()
            .map(|r| (r - 1.0) * (r - 1.0))
            .sum::<f64>()
            .sqrt(),
        Err(_) => f64::INFINITY,
    }
}

const MARGIN_TOL: f64 = 1e-10;

fn lift(x: &[f64]) -> Vec<f64> {
    let mut w = x.to_vec();
    w.push(1.0 - x.iter().sum::<f64>());
    w
}

fn penalized(pair: &ImexPair, x: &[f64]) -> f64 {
    let w = lift(x);
    let obj = embedding_objective(pair, &w);
    if !obj.is_finite() {
        return f64::INFINITY;
    }
    let margin = is_a_stable_implicit(pair.a_implicit(), &w).margin;
    obj + 1e4 * (margin - 1.0 - MARGIN_TOL).max(0.0)
}

/// Plain Nelder-Mead on f: R^n -> R, terminating when the simplex
/// diameter falls below `xtol`.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], xtol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { 0.1 * v[i].abs() } else { 0.1 };
        simplex.push(v);
    }
    let mut fv: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fv[a].total_cmp(&fv[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let refv: Vec<f64> = order.iter().map(|&i| fv[i]).collect();
        simplex = reordered;
        fv = refv;

        let diam = (1..=n)
            .map(|i| {
                simplex[i]
                    .iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0_f64, f64::max)
            })
            .fold(0.0_f64, f64::max);
        if diam < xtol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let combine = |alpha: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst)
                .map(|(c, w)| c + alpha * (c - w))
                .collect()
        };

        let xr = combine(1.0);
        let fr = f(&xr);
        if fr < fv[0] {
            let xe = combine(2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                fv[n] = fe;
            } else {
                simplex[n] = xr;
                fv[n] = fr;
            }
        } else if fr < fv[n - 1] {
            simplex[n] = xr;
            fv[n] = fr;
        } else {
            let xc = if fr < fv[n] { combine(0.5) } else { combine(-0.5) };
            let fc = f(&xc);
            if fc < fv[n].min(fr) {
                simplex[n] = xc;
                fv[n] = fc;
            } else {
                for i in 1..=n {
                    let v: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| b + 0.5 * (a - b))
                        .collect();
                    fv[i] = f(&v);
                    simplex[i] = v;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| fv[a].total_cmp(&fv[b])).unwrap();
    (simplex[best].clone(), fv[best])
}

/// Searches for the best embedding of `pair` using `seeds` random starts
/// (plus the uniform vector and the pair's own embedding as deterministic
/// starts). Deterministic for a fixed `rng_seed`.
pub fn optimize_embedding(pair: &ImexPair, seeds: usize, rng_seed: u64) -> Result<OptimizedEmbedding> {
    let s = pair.stages();
    let n = s - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let f = |x: &[f64]| penalized(pair, x);

    let mut starts: Vec<Vec<f64>> = vec![
        vec![1.0 / s as f64; n],
        pair.b_hat()[..n].to_vec(),
    ];
    for _ in 0..seeds {
        starts.push((0..n).map(|_| rng.gen_range(-1.5..1.5)).collect());
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in &starts {
        let (x, fx) = nelder_mead(&f, x0, 1e-10, 4000);
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (x, fx) = best.unwrap();
    let b_hat = lift(&x);
    let margin = is_a_stable_implicit(pair.a_implicit(), &b_hat).margin;
    if !(fx.is_finite() && margin <= 1.0 + MARGIN_TOL) {
        return Err(Error::InfeasibleEmbedding {
            starts: starts.len(),
        });
    }
    Ok(OptimizedEmbedding {
        objective: embedding_objective(pair, &b_hat),
        b_hat,
        margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::Scheme;

    #[test]
    fn optimum_at_least_as_good_as_published() {
        for s in [Scheme::HLdirk2, Scheme::SspLdirk2] {
            let pair = s.pair();
            let published = embedding_objective(&pair, pair.b_hat());
            let opt = optimize_embedding(&pair, 16, 7).unwrap();
            assert!(
                opt.objective <= published + 1e-6,
                "{}: {} vs published {}",
                s.name(),
                opt.objective,
                published
            );
            assert!(opt.margin <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn returned_weights_sum_to_one() {
        let pair = Scheme::ImexNprk2b.pair();
        let opt = optimize_embedding(&pair, 8, 3).unwrap();
        let sum: f64 = opt.b_hat.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pair = Scheme::SspLdirk3.pair();
        let a = optimize_embedding(&pair, 12, 42).unwrap();
        let b = optimize_embedding(&pair, 12, 42).unwrap();
        assert_eq!(a.b_hat, b.b_hat);
        assert_eq!(a.objective, b.objective);
    }
}
