//! Independent verification helpers: brute-force references, observed
//! convergence orders, finite-difference checks, and a numerical validator
//! for the one-step local error expansion.
//!
//! Nothing here shares code with the solver paths it checks beyond
//! primitive arithmetic; references are classical RK4 sub-stepping on the
//! unpartitioned right-hand side.

use crate::controller::{integrate, Integration, Mode, StepControllerConfig};
use crate::error::{Error, Result};
use crate::residuals::residuals_for_weights;
use crate::stepper::step;
use crate::system::{PartitionedSystem, StageStats};
use crate::tableau::ImexPair;

/// Classical RK4 with `n_steps` uniform steps on y' = f(y).
pub fn rk4_solve(f: &dyn Fn(&[f64], &mut [f64]), y0: &[f64], t_span: f64, n_steps: usize) -> Vec<f64> {
    let dim = y0.len();
    let dt = t_span / n_steps as f64;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    for _ in 0..n_steps {
        f(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        f(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        f(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3[i];
        }
        f(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// Fixed-step integration used as a reference solution. `dt_ref` must
/// divide the interval within rounding.
pub fn reference_solve<S: PartitionedSystem + ?Sized>(
    system: &S,
    pair: &ImexPair,
    y0: &[f64],
    t0: f64,
    tf: f64,
    dt_ref: f64,
) -> Result<Integration> {
    let n = (tf - t0) / dt_ref;
    if (n - n.round()).abs() > 1e-6 * n.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "dt_ref = {dt_ref:e} does not divide the interval ({n} steps)"
        )));
    }
    // Loose tolerances: fixed mode records err but never rejects.
    let cfg = StepControllerConfig::new(1.0, 1.0, system.dim());
    integrate(system, pair, y0, t0, tf, &cfg, Mode::Fixed { dt: dt_ref })
}

/// Pairwise observed orders: rate_i = log(e_{i-1}/e_i) / log(dt_{i-1}/dt_i).
pub fn observed_order(errors: &[f64], dts: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != dts.len() || errors.len() < 2 {
        return Err(Error::InvalidArgument(
            "need matched error/dt lists of length >= 2".into(),
        ));
    }
    if errors.iter().any(|e| *e <= 0.0) {
        return Err(Error::InvalidArgument(
            "errors must be positive for rate estimation".into(),
        ));
    }
    if dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("dts must be strictly decreasing".into()));
    }
    Ok(errors
        .windows(2)
        .zip(dts.windows(2))
        .map(|(e, d)| (e[0] / e[1]).ln() / (d[0] / d[1]).ln())
        .collect())
}

/// Central differences with Richardson extrapolation against an analytic
/// Jacobian. Returns the worst relative component error, with absolute
/// comparison below `floor`.
pub fn fd_check(
    f: &dyn Fn(&[f64], &mut [f64]),
    point: &[f64],
    jacobian: &[Vec<f64>],
    floor: f64,
) -> f64 {
    let n = point.len();
    let m = jacobian.len();
    let mut worst: f64 = 0.0;
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    let mut col = |h: f64, j: usize, out: &mut Vec<f64>| {
        let mut x = point.to_vec();
        x[j] += h;
        f(&x, &mut fp);
        x[j] = point[j] - h;
        f(&x, &mut fm);
        for i in 0..m {
            out[i] = (fp[i] - fm[i]) / (2.0 * h);
        }
    };
    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for j in 0..n {
        // Large enough that roundoff stays below 1e-12 on linear
        // functions; Richardson removes the h^2 truncation term.
        let scale = point[j].abs().max(1.0);
        let h = 2e-3 * scale;
        col(h, j, &mut d1);
        col(0.5 * h, j, &mut d2);
        for i in 0..m {
            // Richardson: error O(h^2), so (4 d2 - d1) / 3 is O(h^4).
            let fd = (4.0 * d2[i] - d1[i]) / 3.0;
            let denom = jacobian[i][j].abs().max(floor);
            worst = worst.max((fd - jacobian[i][j]).abs() / denom);
        }
    }
    worst
}

/// A two-component analytic system with every elementary differential of
/// order <= 3 available in closed form, exercising both arguments of
/// N(y*, y) and all mixed second derivatives.
pub struct AnalyticTestSystem;

const P1: f64 = 0.7;
const P2: f64 = -0.4;
const P3: f64 = 0.3;
const P4: f64 = -0.6;
const P5: f64 = 0.5;
const P6: f64 = 0.25;

impl AnalyticTestSystem {
    pub fn initial_state() -> Vec<f64> {
        vec![0.9, 1.1]
    }

    fn rhs(u: &[f64], v: &[f64], out: &mut [f64]) {
        out[0] = P1 * u[0] * v[1] + P2 * v[0].sin() + P3 * u[1] * u[1];
        out[1] = P4 * u[1] * v[0] + P5 * u[0].cos() + P6 * v[1] * v[1];
    }

    /// Jacobian with respect to the explicit argument u.
    fn d_explicit(u: &[f64], v: &[f64]) -> [[f64; 2]; 2] {
        [
            [P1 * v[1], 2.0 * P3 * u[1]],
            [-P5 * u[0].sin(), P4 * v[0]],
        ]
    }

    /// Jacobian with respect to the implicit argument v.
    fn d_implicit(u: &[f64], v: &[f64]) -> [[f64; 2]; 2] {
        [
            [P2 * v[0].cos(), P1 * u[0]],
            [P4 * u[1], 2.0 * P6 * v[1]],
        ]
    }

    fn d2_explicit(u: &[f64], w1: &[f64], w2: &[f64]) -> [f64; 2] {
        [
            2.0 * P3 * w1[1] * w2[1],
            -P5 * u[0].cos() * w1[0] * w2[0],
        ]
    }

    fn d2_implicit(v: &[f64], w1: &[f64], w2: &[f64]) -> [f64; 2] {
        [
            -P2 * v[0].sin() * w1[0] * w2[0],
            2.0 * P6 * w1[1] * w2[1],
        ]
    }

    /// Mixed second derivative; first slot differentiates the implicit
    /// argument, the second the explicit argument.
    fn d2_mixed(w_impl: &[f64], w_expl: &[f64]) -> [f64; 2] {
        [P1 * w_impl[1] * w_expl[0], P4 * w_impl[0] * w_expl[1]]
    }

    /// The elementary differentials at `y0` paired with the order-2 and
    /// order-3 residuals, in residual order.
    pub fn differentials(y0: &[f64]) -> ([[f64; 2]; 2], [[f64; 2]; 7]) {
        let mut n0v = [0.0; 2];
        Self::rhs(y0, y0, &mut n0v);
        let n0 = n0v;
        let de = Self::d_explicit(y0, y0);
        let di = Self::d_implicit(y0, y0);
        let apply = |m: &[[f64; 2]; 2], v: &[f64]| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
        let di_n = apply(&di, &n0);
        let de_n = apply(&de, &n0);
        let order2 = [di_n, de_n];
        let order3 = [
            apply(&di, &di_n),
            apply(&di, &de_n),
            apply(&de, &di_n),
            apply(&de, &de_n),
            Self::d2_implicit(y0, &n0, &n0),
            Self::d2_mixed(&n0, &n0),
            Self::d2_explicit(y0, &n0, &n0),
        ];
        (order2, order3)
    }
}

impl PartitionedSystem for AnalyticTestSystem {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, y_star: &[f64], y: &[f64], out: &mut [f64]) {
        Self::rhs(y_star, y, out);
    }

    fn solve_stage(&self, known: &[f64], mu: f64, y_star: &[f64]) -> Result<(Vec<f64>, StageStats)> {
        let mut y = known.to_vec();
        let mut rhs = [0.0; 2];
        let mut iters = 0;
        for _ in 0..100 {
            iters += 1;
            Self::rhs(y_star, &y, &mut rhs);
            let r = [y[0] - known[0] - mu * rhs[0], y[1] - known[1] - mu * rhs[1]];
            let j = Self::d_implicit(y_star, &y);
            // 2x2 solve of (I - mu J) dy = r
            let a = 1.0 - mu * j[0][0];
            let b = -mu * j[0][1];
            let c = -mu * j[1][0];
            let d = 1.0 - mu * j[1][1];
            let det = a * d - b * c;
            if det.abs() < 1e-300 {
                return Err(Error::StageSolve("singular stage Jacobian".into()));
            }
            let dy = [(d * r[0] - b * r[1]) / det, (a * r[1] - c * r[0]) / det];
            y[0] -= dy[0];
            y[1] -= dy[1];
            if dy[0].abs().max(dy[1].abs()) < 1e-15 {
                break;
            }
        }
        Ok((
            y,
            StageStats {
                lo_iters: iters,
                ..StageStats::default()
            },
        ))
    }
}

/// Agreement between Richardson-extracted one-step error coefficients and
/// the residual-weighted elementary differentials.
#[derive(Debug, Clone)]
pub struct LocalErrorReport {
    /// Relative error of the dt^2 coefficient vector (absolute, scaled by
    /// the differential magnitudes, when the prediction vanishes).
    pub order2_rel_err: f64,
    pub order3_rel_err: f64,
    /// Norm of the predicted dt^3 coefficient, as a scale reference.
    pub predicted_order3_norm: f64,
}

fn one_step_error(pair: &ImexPair, weights_embedded: bool, h: f64) -> Result<[f64; 2]> {
    let sys = AnalyticTestSystem;
    let y0 = AnalyticTestSystem::initial_state();
    let out = step(&sys, pair, &y0, h, 0.0)?;
    let numeric = if weights_embedded { out.y_hat } else { out.y_next };
    let f = |y: &[f64], out: &mut [f64]| AnalyticTestSystem::rhs(y, y, out);
    let exact = rk4_solve(&f, &y0, h, 2000);
    Ok([exact[0] - numeric[0], exact[1] - numeric[1]])
}

/// Extracts the dt^2 and dt^3 coefficients of the one-step error by a
/// three-point fit at h, h/2, h/4 and compares them against the residual
/// combination from the local error expansion. `use_embedded` selects
/// which weight vector produces the step.
pub fn local_error_validator(pair: &ImexPair, use_embedded: bool) -> Result<LocalErrorReport> {
    let y0 = AnalyticTestSystem::initial_state();
    let (f2, f3) = AnalyticTestSystem::differentials(&y0);
    let res = residuals_for_weights(pair, pair.b_hat());
    let (tau2, tau3) = if use_embedded {
        (res.tau2_hat, res.tau3_hat)
    } else {
        (res.tau2, res.tau3)
    };

    let mut pred2 = [0.0; 2];
    let mut pred3 = [0.0; 2];
    for k in 0..2 {
        for i in 0..2 {
            pred2[i] += tau2[k] * f2[k][i];
        }
    }
    for k in 0..7 {
        for i in 0..2 {
            pred3[i] += tau3[k] * f3[k][i];
        }
    }

    let h = 0.02;
    let e1 = one_step_error(pair, use_embedded, h)?;
    let e2 = one_step_error(pair, use_embedded, h / 2.0)?;
    let e3 = one_step_error(pair, use_embedded, h / 4.0)?;

    // Solve the 3x3 Vandermonde for [C2, C3, C4] per component.
    let hs = [h, h / 2.0, h / 4.0];
    let mut c2 = [0.0; 2];
    let mut c3 = [0.0; 2];
    for i in 0..2 {
        let rhs = [e1[i], e2[i], e3[i]];
        let m: Vec<Vec<f64>> = hs.iter().map(|x| vec![x.powi(2), x.powi(3), x.powi(4)]).collect();
        let sol = solve3(&m, &rhs);
        c2[i] = sol[0];
        c3[i] = sol[1];
    }

    let norm2 = |v: &[f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
    let scale = norm2(&[f2[0][0] + f2[1][0], f2[0][1] + f2[1][1]]).max(1.0);
    let p2n = norm2(&pred2);
    let p3n = norm2(&pred3);
    if p3n < 1e-14 {
        return Err(Error::InvalidArgument(
            "degenerate test system: order-3 prediction below extraction precision".into(),
        ));
    }
    let order2_rel_err = if p2n > 1e-12 {
        norm2(&[c2[0] - pred2[0], c2[1] - pred2[1]]) / p2n
    } else {
        norm2(&c2) / scale
    };
    let order3_rel_err = norm2(&[c3[0] - pred3[0], c3[1] - pred3[1]]) / p3n;
    Ok(LocalErrorReport {
        order2_rel_err,
        order3_rel_err,
        predicted_order3_norm: p3n,
    })
}

fn solve3(m: &[Vec<f64>], rhs: &[f64; 3]) -> [f64; 3] {
    let mut a = [[0.0; 4]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = m[i][j];
        }
        a[i][3] = rhs[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
        a.swap(col, piv);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                a[r][k] -= f * a[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut acc = a[r][3];
        for k in r + 1..3 {
            acc -= a[r][k] * x[k];
        }
        x[r] = acc / a[r][r];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::Scheme;

    #[test]
    fn observed_order_arithmetic() {
        let rates = observed_order(&[4e-2, 1e-2], &[2.0, 1.0]).unwrap();
        assert!((rates[0] - 2.0).abs() < 1e-12);
        // A halving pair from a published convergence table rounds to 1.5.
        let rates = observed_order(&[7.03e-2, 2.53e-2], &[3.2e-11, 1.6e-11]).unwrap();
        assert!((rates[0] - 1.474).abs() < 5e-3, "rate = {}", rates[0]);
        assert_eq!(format!("{:.1}", rates[0]), "1.5");
    }

    #[test]
    fn observed_order_rejects_bad_input() {
        assert!(observed_order(&[1.0], &[1.0]).is_err());
        assert!(observed_order(&[1.0, 0.0], &[2.0, 1.0]).is_err());
        assert!(observed_order(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        // constant errors give rate 0
        let rates = observed_order(&[5.0, 5.0, 5.0], &[4.0, 2.0, 1.0]).unwrap();
        assert!(rates.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn fd_check_linear_function_is_exact() {
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = 2.0 * x[0] - 3.0 * x[1];
            out[1] = 0.5 * x[1];
        };
        let jac = vec![vec![2.0, -3.0], vec![0.0, 0.5]];
        let worst = fd_check(&f, &[0.3, -0.7], &jac, 1.0);
        assert!(worst <= 1e-12, "worst = {worst:e}");
    }

    #[test]
    fn rk4_reference_matches_exponential() {
        let f = |y: &[f64], out: &mut [f64]| out[0] = -y[0];
        let y = rk4_solve(&f, &[1.0], 1.0, 1000);
        assert!((y[0] - (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn local_error_expansion_all_schemes_within_one_percent() {
        for s in Scheme::ALL {
            let pair = s.pair();
            let primary = local_error_validator(&pair, false).unwrap();
            assert!(
                primary.order2_rel_err < 0.01,
                "{} primary dt^2: {}",
                s.name(),
                primary.order2_rel_err
            );
            assert!(
                primary.order3_rel_err < 0.01,
                "{} primary dt^3: {}",
                s.name(),
                primary.order3_rel_err
            );
            let embedded = local_error_validator(&pair, true).unwrap();
            assert!(
                embedded.order2_rel_err < 0.01,
                "{} embedded dt^2: {}",
                s.name(),
                embedded.order2_rel_err
            );
            assert!(
                embedded.order3_rel_err < 0.01,
                "{} embedded dt^3: {}",
                s.name(),
                embedded.order3_rel_err
            );
        }
    }
}
