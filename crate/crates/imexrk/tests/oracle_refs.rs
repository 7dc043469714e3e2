//! Oracle self-checks: the reference solver against analytic solutions
//! and its own refinement, and the scale consistency of the local-error
//! prediction.

use imexrk::oracle::{local_error_validator, reference_solve, AnalyticTestSystem};
use imexrk::{PartitionedSystem, Scheme, StageStats};

struct LinearDecay;

impl PartitionedSystem for LinearDecay {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, _y_star: &[f64], y: &[f64], out: &mut [f64]) {
        out[0] = -y[0];
    }
    fn solve_stage(&self, known: &[f64], mu: f64, _y_star: &[f64]) -> imexrk::Result<(Vec<f64>, StageStats)> {
        Ok((vec![known[0] / (1.0 + mu)], StageStats::default()))
    }
}

#[test]
fn reference_solver_matches_analytic_decay() {
    let pair = Scheme::SspLdirk3.pair();
    let run = reference_solve(&LinearDecay, &pair, &[1.0], 0.0, 1.0, 1e-6).unwrap();
    let exact = (-1.0_f64).exp();
    assert!(
        (run.y_final[0] - exact).abs() <= 1e-10,
        "defect {:e}",
        (run.y_final[0] - exact).abs()
    );
}

#[test]
fn reference_self_consistency_under_refinement() {
    // Halving dt_ref must change the reference by far less than the
    // tolerance any test claims from it.
    let pair = Scheme::SspLdirk3.pair();
    let coarse = reference_solve(&AnalyticTestSystem, &pair, &AnalyticTestSystem::initial_state(), 0.0, 0.5, 1e-4).unwrap();
    let fine = reference_solve(&AnalyticTestSystem, &pair, &AnalyticTestSystem::initial_state(), 0.0, 0.5, 5e-5).unwrap();
    let change = coarse
        .y_final
        .iter()
        .zip(&fine.y_final)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0_f64, f64::max);
    // Far below the ~1e-2 relative tolerances any test claims from it.
    assert!(change < 1e-9, "reference moved by {change:e} under halving");
}

#[test]
fn reference_rejects_non_dividing_step() {
    let pair = Scheme::SspLdirk3.pair();
    assert!(reference_solve(&LinearDecay, &pair, &[1.0], 0.0, 1.0, 3e-4).is_err());
}

#[test]
fn third_order_coefficient_scale_bounded_by_principal_error() {
    // |sum_i tau_i F_i| <= ||tau|| * sum_i ||F_i|| (Cauchy-Schwarz with
    // the published principal error as the tau norm).
    let pair = Scheme::HLdirk2.pair();
    let q = imexrk::quality(&pair).unwrap();
    let tau_norm = q.a3 / 2.0_f64.sqrt();
    let y0 = AnalyticTestSystem::initial_state();
    let (_, f3) = AnalyticTestSystem::differentials(&y0);
    let f_sum: f64 = f3.iter().map(|f| (f[0] * f[0] + f[1] * f[1]).sqrt()).sum();
    let rep = local_error_validator(&pair, false).unwrap();
    assert!(rep.predicted_order3_norm > 0.0);
    assert!(
        rep.predicted_order3_norm <= tau_norm * f_sum,
        "{} vs bound {}",
        rep.predicted_order3_norm,
        tau_norm * f_sum
    );
}
