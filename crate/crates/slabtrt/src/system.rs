//! The transport equations as a partitioned system N(y*, y).
//!
//! State layout: (I, E, F, T). Only the temperature block is read through
//! the explicit argument, so the stepper materializes one temperature
//! copy per stage. Two formulations share all machinery:
//!
//! - `Semi`: emission B(T) and collapse weights at the implicit
//!   temperature; each stage is solved by outer HOLO iterations (sweep,
//!   moments, collapse, closure, low-order Newton) until the low-order
//!   radiation energy matches the swept moments.
//! - `Imex`: emission and collapse weights at the explicit copy T*; one
//!   sweep and one low-order solve per stage, no outer iteration.

use std::ops::Range;

use imexrk::{PartitionedSystem, StageStats};

use crate::closure::{build_closure, collapse, stage_sources};
use crate::constants::C_LIGHT;
use crate::error::{Error, Result};
use crate::lo::{lo_rhs, lo_solve, LoInputs, LoSolveConfig};
use crate::material::group_sigmas;
use crate::moments::{cell_moments, upwind_face_moments};
use crate::planck::{equilibrium_energy_and_deriv, group_planck_with_deriv};
use crate::problem::{Boundary, TrtProblem};
use crate::state::StateLayout;
use crate::sweep::{streaming_apply, sweep_threaded, SweepInputs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Semi,
    Imex,
}

impl Formulation {
    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Semi => "semi",
            Formulation::Imex => "imex",
        }
    }
}

/// Stage-solver tolerances.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub lo: LoSolveConfig,
    /// Relative HO/LO radiation-energy consistency target of the outer
    /// iteration (semi formulation).
    pub holo_tol: f64,
    pub max_outer: u32,
    /// Worker threads for the transport sweep.
    pub threads: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { lo: LoSolveConfig::default(), holo_tol: 1e-8, max_outer: 25, threads: 1 }
    }
}

/// Temperatures used for opacity and emission evaluation are floored
/// here (eV); states this cold are far outside the modeled physics and
/// the floor keeps rejected trial steps well-defined.
pub const T_FLOOR: f64 = 1e-4;

pub struct TrtSystem {
    problem: TrtProblem,
    formulation: Formulation,
    opts: SolverOptions,
    layout: StateLayout,
}

impl TrtSystem {
    pub fn new(problem: TrtProblem, formulation: Formulation, opts: SolverOptions) -> Self {
        let layout = problem.layout();
        Self { problem, formulation, opts, layout }
    }

    pub fn problem(&self) -> &TrtProblem {
        &self.problem
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn layout(&self) -> &StateLayout {
        &self.layout
    }

    pub fn temperature_range(&self) -> Range<usize> {
        self.layout.temperature_range()
    }

    pub fn rad_energy_range(&self) -> Range<usize> {
        self.layout.rad_energy_range()
    }

    /// Spatially resolved equilibrium state: I = B_g(T), E the group-set
    /// equilibrium energy, F = 0.
    pub fn equilibrium_state(&self, t0: &[f64]) -> Result<Vec<f64>> {
        let l = &self.layout;
        assert_eq!(t0.len(), l.n_cells);
        let mut y = vec![0.0; l.dim()];
        for cell in 0..l.n_cells {
            let (b, _) = group_planck_with_deriv(&self.problem.groups, t0[cell])?;
            for m in 0..l.n_mu {
                for g in 0..l.n_groups {
                    y[l.idx(m, g, cell, 0)] = b[g];
                    y[l.idx(m, g, cell, 1)] = b[g];
                }
            }
            let (w, _) = equilibrium_energy_and_deriv(&self.problem.groups, t0[cell])?;
            y[l.rad_energy_range().start + cell] = w;
            y[l.temperature_range().start + cell] = t0[cell];
        }
        Ok(y)
    }

    /// Group opacities at the explicit temperatures, (cell, group).
    fn sigma_star(&self, t_star: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let mut sigma = vec![0.0; l.n_cells * l.n_groups];
        for cell in 0..l.n_cells {
            let t = t_star[cell].max(T_FLOOR);
            let s = group_sigmas(&self.problem.material(cell).law, &self.problem.groups, t);
            sigma[cell * l.n_groups..(cell + 1) * l.n_groups].copy_from_slice(&s);
        }
        sigma
    }

    /// Planck weights B_g and dB_g/dT at per-cell temperatures,
    /// (cell, group).
    fn planck_weights(&self, temps: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let l = &self.layout;
        let mut b_w = vec![0.0; l.n_cells * l.n_groups];
        let mut db_w = vec![0.0; l.n_cells * l.n_groups];
        for cell in 0..l.n_cells {
            let (b, db) = group_planck_with_deriv(&self.problem.groups, temps[cell].max(T_FLOOR))?;
            b_w[cell * l.n_groups..(cell + 1) * l.n_groups].copy_from_slice(&b);
            db_w[cell * l.n_groups..(cell + 1) * l.n_groups].copy_from_slice(&db);
        }
        Ok((b_w, db_w))
    }

    fn rho_cv_cells(&self) -> Vec<f64> {
        (0..self.layout.n_cells).map(|c| self.problem.rho_cv(c)).collect()
    }

    /// Runs one stage solve and returns the HO/LO consistency residual
    /// after each outer iteration (one entry for IMEX).
    pub fn stage_consistency_history(
        &self,
        known: &[f64],
        mu: f64,
        t_star: &[f64],
    ) -> Result<Vec<f64>> {
        let mut trace = Vec::new();
        self.solve_stage_traced(known, mu, t_star, Some(&mut trace))?;
        Ok(trace)
    }

    fn solve_stage_inner(
        &self,
        known: &[f64],
        mu: f64,
        t_star: &[f64],
    ) -> Result<(Vec<f64>, StageStats)> {
        self.solve_stage_traced(known, mu, t_star, None)
    }

    fn solve_stage_traced(
        &self,
        known: &[f64],
        mu: f64,
        t_star: &[f64],
        mut trace: Option<&mut Vec<f64>>,
    ) -> Result<(Vec<f64>, StageStats)> {
        let l = &self.layout;
        let nc = l.n_cells;
        let ng = l.n_groups;
        let (known_i, known_e, known_f, known_t) = l.split(known);
        let sigma = self.sigma_star(t_star);
        let rho_cv = self.rho_cv_cells();
        let mut stats = StageStats::default();

        let mut e = known_e.to_vec();
        let mut f = known_f.to_vec();
        let mut t: Vec<f64> = known_t.iter().map(|v| v.max(T_FLOOR)).collect();
        let mut i_new = vec![0.0; l.intensity_len()];
        // Lagged intensity for reflecting right boundaries.
        let mut lag: Vec<f64> = known_i.to_vec();

        let (outer_limit, weight_temps_explicit) = match self.formulation {
            Formulation::Semi => (self.opts.max_outer, false),
            Formulation::Imex => (1, true),
        };

        let mut last_rel = f64::INFINITY;
        for _outer in 0..outer_limit {
            let weight_t: Vec<f64> = if weight_temps_explicit {
                t_star.iter().map(|v| v.max(T_FLOOR)).collect()
            } else {
                t.clone()
            };
            let (b_w, db_w) = self.planck_weights(&weight_t)?;

            // Emission spectrum: B(T) for semi (current iterate), B(T*)
            // for IMEX; identical to the sigma_P weights in both cases.
            let swept = sweep_threaded(
                &self.problem,
                l,
                &SweepInputs {
                    sigma: &sigma,
                    emission: &b_w,
                    mu_dt: Some(mu),
                    known: Some(known_i),
                },
                &lag,
                &mut i_new,
                self.opts.threads.max(1),
            )?;
            lag.copy_from_slice(&i_new);
            stats.ho_solves += 1;
            stats.clipped_mass += swept.clipped;

            let moms = cell_moments(l, &self.problem.quadrature, &i_new, &sigma);
            let faces = upwind_face_moments(
                l,
                &self.problem.quadrature,
                &i_new,
                &swept.inflow_left,
                &swept.inflow_right,
            );
            let col = collapse(nc, ng, &sigma, &moms, &b_w, &db_w);
            let mut closure = build_closure(
                &self.problem.mesh,
                &moms,
                &faces,
                &col.sigma_r,
                self.problem.bc_left,
                self.problem.bc_right,
            );
            if matches!(self.formulation, Formulation::Semi) {
                // The outer iteration drives the low-order moments onto
                // the swept ones; the stage-residual sources make that
                // fixed point exact even when clipping perturbs the
                // sweep. IMEX takes the low-order system as written (one
                // pass, spatial closure only), which keeps its energy
                // bookkeeping exact.
                let emission: Vec<f64> = (0..nc)
                    .map(|cell| {
                        4.0 * std::f64::consts::PI
                            * (0..ng)
                                .map(|g| sigma[cell * ng + g] * b_w[cell * ng + g])
                                .sum::<f64>()
                    })
                    .collect();
                stage_sources(
                    &self.problem.mesh,
                    &moms,
                    &faces,
                    &col,
                    mu,
                    known_e,
                    known_f,
                    &emission,
                    &mut closure,
                );
            }
            let inputs = LoInputs {
                mesh: &self.problem.mesh,
                groups: &self.problem.groups,
                rho_cv: &rho_cv,
                opac: &col,
                closure: &closure,
            };
            let iters = lo_solve(
                &inputs,
                mu,
                (known_e, known_f, known_t),
                &mut e,
                &mut f,
                &mut t,
                &self.opts.lo,
            )?;
            stats.lo_iters += iters as u64;
            stats.outer_iters += 1;

            // Consistency of both moments with the swept intensity. The
            // flux defect is scaled by c * ||E_HO||: flux errors amplify
            // against energy errors by roughly c mu_dt / h in streaming
            // regimes, and an inconsistent stage flux poisons the known
            // accumulations of later stages.
            let num_e: f64 = e.iter().zip(&moms.e).map(|(a, b)| (a - b) * (a - b)).sum();
            let num_f: f64 = f.iter().zip(&moms.f).map(|(a, b)| (a - b) * (a - b)).sum();
            let den: f64 = moms.e.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
            last_rel = (num_e / den).sqrt().max((num_f / den).sqrt() / C_LIGHT);
            if let Some(t) = trace.as_deref_mut() {
                t.push(last_rel);
            }
            if matches!(self.formulation, Formulation::Imex) || last_rel <= self.opts.holo_tol {
                let mut y = vec![0.0; l.dim()];
                {
                    let (yi, ye, yf, yt) = l.split_mut(&mut y);
                    yi.copy_from_slice(&i_new);
                    ye.copy_from_slice(&e);
                    yf.copy_from_slice(&f);
                    yt.copy_from_slice(&t);
                }
                return Ok((y, stats));
            }
        }
        Err(Error::HoloNonConvergence {
            iters: outer_limit,
            tol: self.opts.holo_tol,
            residual: last_rel,
        })
    }

    /// Inflow intensities seen by an intensity field through the
    /// boundary conditions, mirroring the field itself at reflecting
    /// boundaries. Used by the right-hand-side evaluation.
    fn eval_inflows(&self, i: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let l = &self.layout;
        let quad = &self.problem.quadrature;
        let (n_mu, ng, nc) = (l.n_mu, l.n_groups, l.n_cells);
        let planck_left = match self.problem.bc_left {
            Boundary::Planckian { t_b } => Some(self.problem.planck_inflow(t_b)?),
            _ => None,
        };
        let planck_right = match self.problem.bc_right {
            Boundary::Planckian { t_b } => Some(self.problem.planck_inflow(t_b)?),
            _ => None,
        };
        let mut left = vec![0.0; n_mu * ng];
        let mut right = vec![0.0; n_mu * ng];
        for m in 0..n_mu {
            for g in 0..ng {
                if quad.mu()[m] > 0.0 {
                    left[m * ng + g] = match self.problem.bc_left {
                        Boundary::Vacuum => 0.0,
                        Boundary::Planckian { .. } => planck_left.as_ref().unwrap()[g],
                        Boundary::Reflecting => i[l.idx(quad.mirror(m), g, 0, 0)],
                    };
                } else {
                    right[m * ng + g] = match self.problem.bc_right {
                        Boundary::Vacuum => 0.0,
                        Boundary::Planckian { .. } => planck_right.as_ref().unwrap()[g],
                        Boundary::Reflecting => i[l.idx(quad.mirror(m), g, nc - 1, 1)],
                    };
                }
            }
        }
        Ok((left, right))
    }

    fn eval_inner(&self, t_star: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let l = &self.layout;
        let nc = l.n_cells;
        let ng = l.n_groups;
        let (i, e, f, t) = l.split(y);
        let sigma = self.sigma_star(t_star);
        let emission_t: Vec<f64> = match self.formulation {
            Formulation::Semi => t.iter().map(|v| v.max(T_FLOOR)).collect(),
            Formulation::Imex => t_star.iter().map(|v| v.max(T_FLOOR)).collect(),
        };
        let (b_w, db_w) = self.planck_weights(&emission_t)?;

        let mut stream = vec![0.0; l.intensity_len()];
        streaming_apply(&self.problem, l, i, &mut stream)?;
        {
            let (out_i, _, _, _) = l.split_mut(out);
            for m in 0..l.n_mu {
                for g in 0..ng {
                    let strip = l.strip(m, g);
                    for cell in 0..nc {
                        let sig = sigma[cell * ng + g];
                        let bem = b_w[cell * ng + g];
                        for node in 0..2 {
                            let k = strip + 2 * cell + node;
                            out_i[k] = -C_LIGHT * (stream[k] + sig * i[k] - sig * bem);
                        }
                    }
                }
            }
        }

        let moms = cell_moments(l, &self.problem.quadrature, i, &sigma);
        let (in_l, in_r) = self.eval_inflows(i)?;
        let faces = upwind_face_moments(l, &self.problem.quadrature, i, &in_l, &in_r);
        let col = collapse(nc, ng, &sigma, &moms, &b_w, &db_w);
        let closure = build_closure(
            &self.problem.mesh,
            &moms,
            &faces,
            &col.sigma_r,
            self.problem.bc_left,
            self.problem.bc_right,
        );
        let rho_cv = self.rho_cv_cells();
        let inputs = LoInputs {
            mesh: &self.problem.mesh,
            groups: &self.problem.groups,
            rho_cv: &rho_cv,
            opac: &col,
            closure: &closure,
        };
        let mut n_e = vec![0.0; nc];
        let mut n_f = vec![0.0; nc];
        let mut n_t = vec![0.0; nc];
        lo_rhs(&inputs, e, f, t, &mut n_e, &mut n_f, &mut n_t)?;
        let (_, out_e, out_f, out_t) = l.split_mut(out);
        out_e.copy_from_slice(&n_e);
        out_f.copy_from_slice(&n_f);
        out_t.copy_from_slice(&n_t);
        Ok(())
    }
}

impl PartitionedSystem for TrtSystem {
    fn dim(&self) -> usize {
        self.layout.dim()
    }

    fn component_blocks(&self) -> Vec<(&'static str, Range<usize>)> {
        vec![
            ("intensity", self.layout.intensity_range()),
            ("rad_energy", self.layout.rad_energy_range()),
            ("flux", self.layout.flux_range()),
            ("temperature", self.layout.temperature_range()),
        ]
    }

    fn explicit_projection(&self) -> Range<usize> {
        self.layout.temperature_range()
    }

    fn eval(&self, y_star: &[f64], y: &[f64], out: &mut [f64]) {
        self.eval_inner(y_star, y, out)
            .expect("right-hand-side evaluation failed");
    }

    fn solve_stage(
        &self,
        known: &[f64],
        mu: f64,
        y_star: &[f64],
    ) -> imexrk::Result<(Vec<f64>, StageStats)> {
        Ok(self.solve_stage_inner(known, mu, y_star)?)
    }

    fn stage_tolerance(&self) -> f64 {
        match self.formulation {
            Formulation::Semi => self.opts.holo_tol,
            Formulation::Imex => self.opts.lo.tol,
        }
    }

    /// Clips negative intensity nodes of a solution to zero (the same
    /// fixup the sweep applies), returning the removed radiation energy
    /// column density. Negative nodes arise at exponentially decaying
    /// wave feet, where a linear combination of stage derivatives can
    /// undershoot; left in place they seed much larger clipping noise in
    /// the next step's stage accumulations.
    fn fixup_state(&self, y: &mut [f64]) -> f64 {
        let l = &self.layout;
        let quad = &self.problem.quadrature;
        let two_pi_over_c = 2.0 * std::f64::consts::PI / C_LIGHT;
        let mut removed = 0.0;
        let (i, _, _, _) = l.split_mut(y);
        for m in 0..l.n_mu {
            let w = quad.weights()[m];
            for g in 0..l.n_groups {
                let strip = l.strip(m, g);
                for cell in 0..l.n_cells {
                    let h = self.problem.mesh.width(cell);
                    for node in 0..2 {
                        let v = &mut i[strip + 2 * cell + node];
                        if *v < 0.0 {
                            removed += two_pi_over_c * w * 0.5 * h * -*v;
                            *v = 0.0;
                        }
                    }
                }
            }
        }
        removed
    }
}
