use imexrk::{integrate, Mode, Scheme, StepControllerConfig};
use slabtrt::problems::{make_equilibrium, InitialTemperature};
use slabtrt::system::{Formulation, SolverOptions};
use slabtrt::Boundary;

fn main() {
    // Smooth gray transient: no front, no boundary layers.
    let mut spec = make_equilibrium(100.0);
    spec.cells = 16;
    spec.bc_left = Boundary::Reflecting;
    spec.bc_right = Boundary::Reflecting;
    spec.initial = InitialTemperature::PerCell(
        (0..16).map(|c| {
            let x = (c as f64 + 0.5) / 16.0;
            100.0 + 15.0 * (std::f64::consts::PI * x).cos()
        }).collect(),
    );
    let mut opts = SolverOptions { max_outer: 80, ..SolverOptions::default() };
    opts.lo.tol = 1e-12;
    opts.holo_tol = 1e-10;
    let t_final = 2e-10;
    for formulation in [Formulation::Semi, Formulation::Imex] {
        let (system, y0) = spec.system(formulation, opts).unwrap();
        let pair_ref = Scheme::SspLdirk3.pair();
        let cfg = StepControllerConfig::new(1.0, 1.0, imexrk::PartitionedSystem::dim(&system));
        let reference = integrate(&system, &pair_ref, &y0, 0.0, t_final, &cfg, Mode::Fixed { dt: 2e-14 }).unwrap();
        let pair = Scheme::ImexNprk2b.pair();
        let mut prev: Option<f64> = None;
        for k in 0..5 {
            let dt = 8e-12 / 2f64.powi(k);
            let run = integrate(&system, &pair, &y0, 0.0, t_final, &cfg, Mode::Fixed { dt }).unwrap();
            let layout = *system.layout();
            let (_, _, _, t) = layout.split(&run.y_final);
            let (_, _, _, tr) = layout.split(&reference.y_final);
            let err = t.iter().zip(tr).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                / tr.iter().map(|b| b * b).sum::<f64>().sqrt();
            let rate = prev.map(|p: f64| (p / err).log2());
            println!("{} dt={dt:.2e} errT={err:.3e} rate={}", formulation.name(), rate.map(|r| format!("{r:.2}")).unwrap_or_default());
            prev = Some(err);
        }
    }
}
