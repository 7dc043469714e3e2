//! Embedded error estimation and the adaptive step controller.
//!
//! A step is accepted when the weighted error measure
//!
//! ```text
//! err = sqrt( 1/N * sum_{i in mask} ((y1_i - yhat_i) /
//!             (atol_i + rtol_i * max(|y0_i|, |y1_i|)))^2 ),  N = |mask|
//! ```
//!
//! satisfies err <= 1, and the next step is proposed as
//! dt_new = safety * dt * err^(-1/(min(p, p_hat) + 1)), with the ratio
//! clamped to [shrink_min, growth_max] and the result to [dt_min, dt_max].

use std::io::Write;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::stepper::step;
use crate::system::{PartitionedSystem, StageStats};
use crate::tableau::ImexPair;

/// Scalar or per-component tolerance.
#[derive(Debug, Clone)]
pub enum Tolerance {
    Scalar(f64),
    PerComponent(Vec<f64>),
}

impl Tolerance {
    pub fn at(&self, i: usize) -> f64 {
        match self {
            Tolerance::Scalar(v) => *v,
            Tolerance::PerComponent(v) => v[i],
        }
    }

    fn positive(&self) -> bool {
        match self {
            Tolerance::Scalar(v) => *v > 0.0,
            Tolerance::PerComponent(v) => v.iter().all(|x| *x > 0.0),
        }
    }
}

/// Controller settings; see module docs for the formulas.
#[derive(Debug, Clone)]
pub struct StepControllerConfig {
    pub atol: Tolerance,
    pub rtol: Tolerance,
    pub safety: f64,
    pub growth_max: f64,
    pub shrink_min: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Component index ranges entering the error norm.
    pub error_mask: Vec<Range<usize>>,
    pub max_rejects_per_step: u32,
}

impl StepControllerConfig {
    /// Scalar tolerances over the full state.
    pub fn new(atol: f64, rtol: f64, dim: usize) -> Self {
        Self {
            atol: Tolerance::Scalar(atol),
            rtol: Tolerance::Scalar(rtol),
            safety: 0.9,
            growth_max: 5.0,
            shrink_min: 0.1,
            dt_min: 1e-16,
            dt_max: f64::INFINITY,
            error_mask: vec![0..dim],
            max_rejects_per_step: 30,
        }
    }

    pub fn with_mask(mut self, mask: Vec<Range<usize>>) -> Self {
        self.error_mask = mask;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.atol.positive() || !self.rtol.positive() {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(0.0 < self.shrink_min && self.shrink_min < 1.0 && self.growth_max > 1.0) {
            return Err(Error::InvalidArgument(
                "require 0 < shrink_min < 1 < growth_max".into(),
            ));
        }
        Ok(())
    }
}

/// Weighted RMS error of the embedded estimate over the masked components.
pub fn error_norm(
    y_n: &[f64],
    y_next: &[f64],
    y_hat: &[f64],
    cfg: &StepControllerConfig,
) -> Result<f64> {
    let count: usize = cfg.error_mask.iter().map(|r| r.len()).sum();
    if count == 0 {
        return Err(Error::EmptyErrorMask);
    }
    let mut sum = 0.0;
    for range in &cfg.error_mask {
        for i in range.clone() {
            let scale = cfg.atol.at(i) + cfg.rtol.at(i) * y_n[i].abs().max(y_next[i].abs());
            let r = (y_next[i] - y_hat[i]) / scale;
            sum += r * r;
        }
    }
    Ok((sum / count as f64).sqrt())
}

/// New step size from the error measure of the last attempt.
pub fn propose_dt(err: f64, dt: f64, p: u32, p_hat: u32, cfg: &StepControllerConfig) -> f64 {
    let ratio = if err == 0.0 {
        cfg.growth_max
    } else {
        let exponent = -1.0 / (p.min(p_hat) as f64 + 1.0);
        (cfg.safety * err.powf(exponent)).clamp(cfg.shrink_min, cfg.growth_max)
    };
    (ratio * dt).clamp(cfg.dt_min, cfg.dt_max)
}

/// One attempted step, accepted or rejected.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord {
    /// Time at the start of the attempt.
    pub t: f64,
    pub dt_attempted: f64,
    pub err: f64,
    pub accepted: bool,
    /// Rejections that preceded this attempt within the same step.
    pub rejects: u32,
    pub ho_solves: u64,
    pub lo_iters: u64,
}

/// Fixed or adaptive time stepping.
#[derive(Debug, Clone, Copy)]
pub enum Mode {
    Adaptive { dt0: f64 },
    Fixed { dt: f64 },
}

/// Integration output: final state and the full attempt history.
#[derive(Debug, Clone)]
pub struct Integration {
    pub y_final: Vec<f64>,
    pub history: Vec<StepRecord>,
    pub stats: StageStats,
    /// Step size the controller would attempt next; lets callers chain
    /// segments (e.g. across output times) without losing continuity.
    pub dt_next: f64,
}

impl Integration {
    pub fn accepted_steps(&self) -> usize {
        self.history.iter().filter(|r| r.accepted).count()
    }

    pub fn rejected_steps(&self) -> usize {
        self.history.iter().filter(|r| !r.accepted).count()
    }
}

/// Integrates from `t0` to `tf`. In adaptive mode, attempts are retried
/// with the proposed smaller step until err <= 1; rejected attempts never
/// touch the committed state. The final step is truncated to land on `tf`
/// exactly. Fixed mode takes uniform steps (plus a truncated last one) and
/// accepts unconditionally.
pub fn integrate<S: PartitionedSystem + ?Sized>(
    system: &S,
    pair: &ImexPair,
    y0: &[f64],
    t0: f64,
    tf: f64,
    cfg: &StepControllerConfig,
    mode: Mode,
) -> Result<Integration> {
    cfg.validate()?;
    if !(tf > t0) {
        return Err(Error::InvalidArgument(format!("tf = {tf} must exceed t0 = {t0}")));
    }
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut history = Vec::new();
    let mut totals = StageStats::default();
    let span = tf - t0;
    let time_eps = 1e-14 * span;

    let mut dt = match mode {
        Mode::Adaptive { dt0 } => dt0.clamp(cfg.dt_min, cfg.dt_max),
        Mode::Fixed { dt } => dt,
    };
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }

    while t < tf - time_eps {
        let mut rejects = 0u32;
        loop {
            let truncated = dt >= tf - t;
            let dt_try = if truncated { tf - t } else { dt };
            let out = step(system, pair, &y, dt_try, t)?;
            totals.accumulate(&out.stats);
            let err = error_norm(&y, &out.y_next, &out.y_hat, cfg)?;
            let accept = match mode {
                Mode::Fixed { .. } => true,
                Mode::Adaptive { .. } => err <= 1.0,
            };
            history.push(StepRecord {
                t,
                dt_attempted: dt_try,
                err,
                accepted: accept,
                rejects,
                ho_solves: out.stats.ho_solves,
                lo_iters: out.stats.lo_iters,
            });
            if accept {
                y = out.y_next;
                t = if truncated { tf } else { t + dt_try };
                if let Mode::Adaptive { .. } = mode {
                    dt = propose_dt(err, dt_try, pair.order(), pair.embedded_order(), cfg);
                }
                break;
            }
            rejects += 1;
            if rejects > cfg.max_rejects_per_step {
                return Err(Error::TooManyRejects { t, rejects, err });
            }
            dt = propose_dt(err, dt_try, pair.order(), pair.embedded_order(), cfg);
            if dt < cfg.dt_min || (t + dt == t) {
                return Err(Error::DtUnderflow { t, dt, dt_min: cfg.dt_min, err });
            }
        }
    }

    Ok(Integration {
        y_final: y,
        history,
        stats: totals,
        dt_next: dt,
    })
}

/// Writes the attempt history as CSV with columns
/// `t,dt,err,accepted,rejects,ho_solves,lo_iters`. `header_comment`
/// lines, when given, are emitted first prefixed with `#`.
pub fn write_history_csv<W: Write>(
    mut w: W,
    history: &[StepRecord],
    header_comment: Option<&str>,
) -> std::io::Result<()> {
    if let Some(comment) = header_comment {
        writeln!(w, "# {comment}")?;
    }
    writeln!(w, "t,dt,err,accepted,rejects,ho_solves,lo_iters")?;
    for r in history {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{},{},{},{}",
            r.t,
            r.dt_attempted,
            r.err,
            u8::from(r.accepted),
            r.rejects,
            r.ho_solves,
            r.lo_iters
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(dim: usize) -> StepControllerConfig {
        StepControllerConfig::new(0.01, 0.1, dim)
    }

    #[test]
    fn error_norm_scalar_example() {
        // Denominator 0.01 + 0.1 * 1.1 = 0.12, difference 0.02.
        let c = cfg(1);
        let err = error_norm(&[1.0], &[1.1], &[1.08], &c).unwrap();
        assert!((err - 0.02 / 0.12).abs() < 1e-12, "err = {err}");
    }

    #[test]
    fn error_norm_zero_when_estimates_agree() {
        let c = cfg(3);
        let y = [1.0, 2.0, 3.0];
        assert_eq!(error_norm(&y, &y, &y, &c).unwrap(), 0.0);
    }

    #[test]
    fn masked_norm_ignores_other_components() {
        let c = cfg(4).with_mask(vec![2..3]);
        let y0 = [1.0, 1.0, 1.0, 1.0];
        let a = error_norm(&y0, &[9.0, 9.0, 1.1, 9.0], &[0.0, 0.0, 1.08, 0.0], &c).unwrap();
        let b = error_norm(&y0, &[1.0, 1.0, 1.1, 1.0], &[1.0, 1.0, 1.08, 1.0], &c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let c = cfg(2).with_mask(vec![]);
        assert!(matches!(
            error_norm(&[0.0; 2], &[0.0; 2], &[0.0; 2], &c),
            Err(Error::EmptyErrorMask)
        ));
    }

    #[test]
    fn propose_dt_formula_and_clamps() {
        let c = StepControllerConfig::new(1e-6, 1e-6, 1);
        let dt = 2.0e-3;
        assert!((propose_dt(1.0, dt, 2, 1, &c) - 0.9 * dt).abs() < 1e-18);
        assert!((propose_dt(0.81, dt, 2, 1, &c) - dt).abs() < 1e-18);
        assert!((propose_dt(1e6, dt, 2, 1, &c) - 0.1 * dt).abs() < 1e-18);
        assert!((propose_dt(0.0, dt, 2, 1, &c) - 5.0 * dt).abs() < 1e-18);
        // dt_min / dt_max clamps
        let mut c2 = c.clone();
        c2.dt_min = 1.9e-3;
        assert_eq!(propose_dt(1e9, dt, 2, 1, &c2), 1.9e-3);
        c2.dt_max = 2.5e-3;
        assert_eq!(propose_dt(0.0, dt, 2, 1, &c2), 2.5e-3);
    }

    #[test]
    fn reject_storm_reports_too_many_rejects() {
        use crate::stepper::step;
        use crate::system::{PartitionedSystem, StageStats};
        use crate::tableau::Scheme;
        // A right-hand side whose primary/embedded gap cannot shrink
        // fast enough within the allowed rejects.
        struct StiffGap;
        impl PartitionedSystem for StiffGap {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, _ys: &[f64], y: &[f64], out: &mut [f64]) {
                out[0] = -5e3 * y[0];
            }
            fn solve_stage(&self, known: &[f64], mu: f64, _ys: &[f64]) -> crate::error::Result<(Vec<f64>, StageStats)> {
                Ok((vec![known[0] / (1.0 + 5e3 * mu)], StageStats::default()))
            }
        }
        let pair = Scheme::HLdirk2.pair();
        // Sanity: a single large step really does have err >> 1.
        let out = step(&StiffGap, &pair, &[1.0], 1.0, 0.0).unwrap();
        let mut cfg = StepControllerConfig::new(1e-14, 1e-14, 1);
        cfg.max_rejects_per_step = 3;
        assert!(error_norm(&[1.0], &out.y_next, &out.y_hat, &cfg).unwrap() > 1.0);
        let err = integrate(&StiffGap, &pair, &[1.0], 0.0, 1.0, &cfg, Mode::Adaptive { dt0: 1.0 });
        match err {
            Err(Error::TooManyRejects { rejects, .. }) => assert_eq!(rejects, 4),
            other => panic!("expected TooManyRejects, got {other:?}"),
        }
    }

    proptest::proptest! {
        #[test]
        fn proposed_dt_always_within_clamps(err in 0.0f64..1e12, dt in 1e-12f64..1e3) {
            let c = StepControllerConfig::new(1e-6, 1e-6, 1);
            let out = propose_dt(err, dt, 2, 1, &c);
            proptest::prop_assert!(out >= c.dt_min);
            proptest::prop_assert!(out <= c.growth_max * dt * (1.0 + 1e-15));
            proptest::prop_assert!(out >= (c.shrink_min * dt).max(c.dt_min) * (1.0 - 1e-15));
        }
    }
}
