//! Generic integrator behavior: linear equivalence with the stability
//! function, convergence orders on a manufactured nonlinear partitioned
//! ODE, and the adaptive controller on linear decay.

use imexrk::oracle::{observed_order, rk4_solve};
use imexrk::{
    error_norm, integrate, stability_function, step, Mode, PartitionedSystem, Scheme, StabilityQuery,
    StageStats, StepControllerConfig,
};
use num_complex::Complex64;

/// N(y*, y) = lt y* + l y; the stage equation is linear.
struct LinearSystem {
    lt: f64,
    l: f64,
}

impl PartitionedSystem for LinearSystem {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, y_star: &[f64], y: &[f64], out: &mut [f64]) {
        out[0] = self.lt * y_star[0] + self.l * y[0];
    }
    fn solve_stage(&self, known: &[f64], mu: f64, y_star: &[f64]) -> imexrk::Result<(Vec<f64>, StageStats)> {
        let y = (known[0] + mu * self.lt * y_star[0]) / (1.0 - mu * self.l);
        Ok((vec![y], StageStats::default()))
    }
}

/// N(y*, y) = -(y*)^2 y; the unpartitioned form is y' = -y^3.
struct CubicDecay;

impl PartitionedSystem for CubicDecay {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, y_star: &[f64], y: &[f64], out: &mut [f64]) {
        out[0] = -y_star[0] * y_star[0] * y[0];
    }
    fn solve_stage(&self, known: &[f64], mu: f64, y_star: &[f64]) -> imexrk::Result<(Vec<f64>, StageStats)> {
        Ok((vec![known[0] / (1.0 + mu * y_star[0] * y_star[0])], StageStats::default()))
    }
}

/// N(y*, y) = -(y*)^2 y + 0.4 sin(y*) - 0.1 y. Asymmetric in the two
/// arguments so that no built-in scheme superconverges (the cubic decay
/// problem is third-order accurate for SSP-LDIRK3, whose explicit-only
/// order-3 residuals vanish).
struct MixedDecay;

impl MixedDecay {
    fn unpartitioned(y: &[f64], out: &mut [f64]) {
        out[0] = -y[0].powi(3) + 0.4 * y[0].sin() - 0.1 * y[0];
    }
}

impl PartitionedSystem for MixedDecay {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, y_star: &[f64], y: &[f64], out: &mut [f64]) {
        out[0] = -y_star[0] * y_star[0] * y[0] + 0.4 * y_star[0].sin() - 0.1 * y[0];
    }
    fn solve_stage(&self, known: &[f64], mu: f64, y_star: &[f64]) -> imexrk::Result<(Vec<f64>, StageStats)> {
        let u = y_star[0];
        let y = (known[0] + mu * 0.4 * u.sin()) / (1.0 + mu * (u * u + 0.1));
        Ok((vec![y], StageStats::default()))
    }
}

#[test]
fn linear_step_matches_stability_function() {
    // One step on the linear test problem must equal R(dt lt, dt l) y0.
    for s in Scheme::ALL {
        let pair = s.pair();
        for (lt, l, dt) in [(0.0, -1.0, 1.0), (-0.4, -3.0, 0.7), (0.8, -2.5, 0.3)] {
            let sys = LinearSystem { lt, l };
            let out = step(&sys, &pair, &[1.0], dt, 0.0).unwrap();
            let q = StabilityQuery::new(
                Complex64::new(dt * lt, 0.0),
                Complex64::new(dt * l, 0.0),
            );
            let r = stability_function(&pair, q).unwrap();
            assert!(
                (out.y_next[0] - r.re).abs() <= 1e-12,
                "{} (lt={lt}, l={l}, dt={dt}): step {} vs R {}",
                s.name(),
                out.y_next[0],
                r.re
            );
        }
    }
}

#[test]
fn duplication_consistency() {
    // eval(y, y) equals the unpartitioned right-hand side.
    let sys = CubicDecay;
    for y in [0.3, 1.0, 2.7] {
        let mut out = [0.0];
        sys.eval(&[y], &[y], &mut out);
        assert_eq!(out[0], -y * y * y);
    }
}

#[test]
fn single_nonlinear_step_has_third_order_local_error() {
    // One step against heavy sub-stepping of the unpartitioned ODE; the
    // defect must shrink like O(dt^3).
    let sys = CubicDecay;
    let f = |y: &[f64], out: &mut [f64]| out[0] = -y[0].powi(3);
    let pair = Scheme::HLdirk2.pair();
    let mut defects = Vec::new();
    let dts = [0.04, 0.02, 0.01];
    for &dt in &dts {
        let reference = rk4_solve(&f, &[1.0], dt, 1000);
        let out = step(&sys, &pair, &[1.0], dt, 0.0).unwrap();
        defects.push((out.y_next[0] - reference[0]).abs());
    }
    let rates = observed_order(&defects, &dts).unwrap();
    let last = *rates.last().unwrap();
    assert!((last - 3.0).abs() < 0.2, "local order {last} (rates {rates:?})");
}

fn global_errors(pair: &imexrk::ImexPair, dts: &[f64]) -> Vec<f64> {
    let sys = MixedDecay;
    let t_final = 1.0;
    let reference = rk4_solve(&MixedDecay::unpartitioned, &[1.0], t_final, 64_000);
    dts.iter()
        .map(|&dt| {
            let cfg = StepControllerConfig::new(1.0, 1.0, 1);
            let run = integrate(&sys, pair, &[1.0], 0.0, t_final, &cfg, Mode::Fixed { dt }).unwrap();
            (run.y_final[0] - reference[0]).abs()
        })
        .collect()
}

#[test]
fn fixed_dt_orders_primary_two_embedded_one() {
    let dts: Vec<f64> = (0..5).map(|k| 0.05 / f64::powi(2.0, k)).collect();
    for s in Scheme::ALL {
        let pair = s.pair();
        let errs = global_errors(&pair, &dts);
        let rates = observed_order(&errs, &dts).unwrap();
        let rate = *rates.last().unwrap();
        assert!(
            (rate - 2.0).abs() <= 0.1,
            "{} primary order {rate} (errors {errs:?})",
            s.name()
        );

        let embedded = pair.with_swapped_weights();
        let errs_hat = global_errors(&embedded, &dts);
        let rates_hat = observed_order(&errs_hat, &dts).unwrap();
        let rate_hat = *rates_hat.last().unwrap();
        assert!(
            (rate_hat - 1.0).abs() <= 0.15,
            "{} embedded order {rate_hat} (errors {errs_hat:?})",
            s.name()
        );
    }
}

#[test]
fn adaptive_linear_decay_hits_analytic_solution() {
    let sys = LinearSystem { lt: 0.0, l: -1.0 };
    for s in Scheme::ALL {
        let mut cfg = StepControllerConfig::new(1e-6, 1e-6, 1);
        cfg.dt_max = 1.0;
        let run = integrate(&sys, &s.pair(), &[1.0], 0.0, 1.0, &cfg, Mode::Adaptive { dt0: 1e-3 }).unwrap();
        let exact = (-1.0_f64).exp();
        assert!(
            (run.y_final[0] - exact).abs() <= 1e-4,
            "{}: |err| = {:e}",
            s.name(),
            (run.y_final[0] - exact).abs()
        );
        for rec in run.history.iter().filter(|r| r.accepted) {
            assert!(rec.err <= 1.0);
        }
    }
}

#[test]
fn tighter_tolerance_means_more_steps_and_less_error() {
    let sys = LinearSystem { lt: -0.5, l: -1.5 };
    let pair = Scheme::ImexNprk2b.pair();
    let exact = (-2.0_f64).exp();
    let mut prev: Option<(usize, f64)> = None;
    for tol in [1e-3, 1e-4, 1e-5] {
        let mut cfg = StepControllerConfig::new(tol, tol, 1);
        cfg.dt_max = 1.0;
        let run = integrate(&sys, &pair, &[1.0], 0.0, 1.0, &cfg, Mode::Adaptive { dt0: 1e-3 }).unwrap();
        let steps = run.accepted_steps();
        let err = (run.y_final[0] - exact).abs();
        if let Some((psteps, perr)) = prev {
            assert!(steps > psteps, "steps {steps} vs {psteps} at tol {tol}");
            assert!(err < perr, "err {err:e} vs {perr:e} at tol {tol}");
        }
        prev = Some((steps, err));
    }
}

#[test]
fn rejected_attempts_do_not_change_committed_state() {
    // Force rejections by starting with a huge dt on a stiff problem.
    let sys = LinearSystem { lt: -2.0, l: -80.0 };
    let pair = Scheme::HLdirk2.pair();
    let cfg = StepControllerConfig::new(1e-8, 1e-8, 1);
    let run = integrate(&sys, &pair, &[1.0], 0.0, 0.5, &cfg, Mode::Adaptive { dt0: 0.5 }).unwrap();
    assert!(run.rejected_steps() > 0, "expected at least one rejection");
    // Replay the accepted attempts only; the final state must match.
    let mut y = vec![1.0];
    for rec in run.history.iter().filter(|r| r.accepted) {
        y = step(&sys, &pair, &y, rec.dt_attempted, rec.t).unwrap().y_next;
    }
    assert!((y[0] - run.y_final[0]).abs() < 1e-15);
    // Accepted step times chain together: rejects left no trace.
    let mut t = 0.0;
    for rec in run.history.iter().filter(|r| r.accepted) {
        assert!((rec.t - t).abs() <= 1e-12 * 0.5);
        t = rec.t + rec.dt_attempted;
    }
    assert!((t - 0.5).abs() <= 1e-12);
}

#[test]
fn final_step_lands_exactly_on_tf() {
    let sys = LinearSystem { lt: 0.0, l: -1.0 };
    let pair = Scheme::SspLdirk3.pair();
    let cfg = StepControllerConfig::new(1e-4, 1e-4, 1);
    // Fixed dt that does not divide the interval.
    let run = integrate(&sys, &pair, &[1.0], 0.0, 1.0, &cfg, Mode::Fixed { dt: 0.3 }).unwrap();
    let total: f64 = run.history.iter().map(|r| r.dt_attempted).sum();
    assert!((total - 1.0).abs() < 1e-14);
    assert_eq!(run.history.len(), 4);
    assert!((run.history[3].dt_attempted - 0.1).abs() < 1e-14);
}

#[test]
fn error_norm_matches_hand_rolled_masked_sum() {
    let cfg = StepControllerConfig::new(0.5, 0.25, 4).with_mask(vec![1..3]);
    let y0: [f64; 4] = [1.0, -2.0, 4.0, 0.0];
    let y1: [f64; 4] = [1.1, -2.2, 4.4, 0.1];
    let yh: [f64; 4] = [1.05, -2.15, 4.38, 0.2];
    let mut sum = 0.0_f64;
    for i in 1..3 {
        let scale = 0.5 + 0.25 * y0[i].abs().max(y1[i].abs());
        sum += ((y1[i] - yh[i]) / scale).powi(2);
    }
    let want = (sum / 2.0).sqrt();
    assert!((error_norm(&y0, &y1, &yh, &cfg).unwrap() - want).abs() < 1e-15);
}
