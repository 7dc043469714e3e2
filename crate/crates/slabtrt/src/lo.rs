//! The gray low-order moment system and its Newton solve.
//!
//! Cell-centered finite volume over (E, F, T) with two-point face
//! averages plus the closure corrections:
//!
//! ```text
//! dE/dt = -(Fhat_{i+1} - Fhat_i)/h - c sigma_E E + c sigma_P W(T)
//! dF/dt = -(c^2/3)(Ebar_{i+1} - Ebar_i)/h - c sigma_R F + gamma_i
//! dT/dt = -(c sigma_P W(T) - c sigma_E E) / (rho C_v)
//! ```
//!
//! where W(T) is the group-set equilibrium energy density (a T^4 in the
//! wide-group limit). The stage equation X = known + mu N(X) is solved by
//! Newton iteration: W(T) is the only nonlinearity, its derivative is
//! analytic, T is eliminated cell-locally, and each step solves a 2x2
//! block-tridiagonal system over (E, F).

use crate::closure::{ClosureTerms, CollapsedOpacities};
use crate::constants::C_LIGHT;
use crate::error::{Error, Result};
use crate::groups::EnergyGroups;
use crate::mesh::SlabMesh;
use crate::planck::equilibrium_energy_and_deriv;

pub struct LoInputs<'a> {
    pub mesh: &'a SlabMesh,
    pub groups: &'a EnergyGroups,
    pub rho_cv: &'a [f64],
    pub opac: &'a CollapsedOpacities,
    pub closure: &'a ClosureTerms,
}

#[derive(Debug, Clone, Copy)]
pub struct LoSolveConfig {
    pub tol: f64,
    pub max_iters: u32,
    pub max_damping: u32,
}

impl Default for LoSolveConfig {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 50, max_damping: 10 }
    }
}

/// Energy-equation face flux at face `k` for the current flux field.
fn face_flux(inp: &LoInputs, f: &[f64], k: usize) -> f64 {
    let mut v = inp.closure.face_const[k];
    if inp.closure.face_avg[k] {
        v += 0.5 * (f[k - 1] + f[k]);
    }
    v
}

/// d(face_flux at k) / d(F_j).
fn dface_flux(inp: &LoInputs, k: usize, j: usize) -> f64 {
    if inp.closure.face_avg[k] && (j + 1 == k || j == k) {
        0.5
    } else {
        0.0
    }
}

/// One-sided/averaged E at face `k`.
fn face_e(e: &[f64], nc: usize, k: usize) -> f64 {
    if k == 0 {
        e[0]
    } else if k == nc {
        e[nc - 1]
    } else {
        0.5 * (e[k - 1] + e[k])
    }
}

/// d(face_e at k) / d(E_j).
fn dface_e(nc: usize, k: usize, j: usize) -> f64 {
    if k == 0 {
        if j == 0 { 1.0 } else { 0.0 }
    } else if k == nc {
        if j + 1 == nc { 1.0 } else { 0.0 }
    } else if j + 1 == k || j == k {
        0.5
    } else {
        0.0
    }
}

/// Evaluates the low-order right-hand side at (e, f, t).
pub fn lo_rhs(
    inp: &LoInputs,
    e: &[f64],
    f: &[f64],
    t: &[f64],
    out_e: &mut [f64],
    out_f: &mut [f64],
    out_t: &mut [f64],
) -> Result<()> {
    let nc = inp.mesh.cells();
    let c = C_LIGHT;
    for i in 0..nc {
        let h = inp.mesh.width(i);
        let (w, _) = equilibrium_energy_and_deriv(inp.groups, t[i])?;
        let exch = c * (inp.opac.sigma_p[i] * w - inp.opac.sigma_e[i] * e[i]);
        out_e[i] = -(face_flux(inp, f, i + 1) - face_flux(inp, f, i)) / h
            + exch
            + inp.closure.e_source[i];
        out_f[i] = -c * c / 3.0 * (face_e(e, nc, i + 1) - face_e(e, nc, i)) / h
            - c * inp.opac.sigma_r[i] * f[i]
            + inp.closure.gamma[i];
        out_t[i] = -exch / inp.rho_cv[i];
    }
    Ok(())
}

/// Analytic Jacobian entries of the stage residual r(X) = X - known -
/// mu N(X) for one cell, excluding the neighbor couplings (which come
/// from [`dface_flux`] / [`dface_e`]).
struct CellJac {
    /// d rE / dE_i
    aee: f64,
    /// d rE / dT_i
    aet: f64,
    /// d rF / dF_i
    aff: f64,
    /// d rT / dT_i
    gt: f64,
    /// d rT / dE_i
    ge: f64,
}

fn cell_jacobian(inp: &LoInputs, mu: f64, i: usize, wp: f64) -> CellJac {
    let c = C_LIGHT;
    CellJac {
        aee: 1.0 + mu * c * inp.opac.sigma_e[i],
        aet: -mu * c * inp.opac.sigma_p[i] * wp,
        aff: 1.0 + mu * c * inp.opac.sigma_r[i],
        gt: 1.0 + mu / inp.rho_cv[i] * c * inp.opac.sigma_p[i] * wp,
        ge: -mu / inp.rho_cv[i] * c * inp.opac.sigma_e[i],
    }
}

/// Dense Jacobian of the full residual over the flat unknown vector
/// [E_0..E_{n-1}, F_0.., T_0..], assembled from the same derivative
/// expressions the Newton solve uses. Intended for finite-difference
/// verification.
pub fn dense_jacobian(inp: &LoInputs, mu: f64, t: &[f64]) -> Result<Vec<Vec<f64>>> {
    let nc = inp.mesh.cells();
    let c = C_LIGHT;
    let n = 3 * nc;
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..nc {
        let h = inp.mesh.width(i);
        let (_, wp) = equilibrium_energy_and_deriv(inp.groups, t[i])?;
        let cj = cell_jacobian(inp, mu, i, wp);
        // rE row
        jac[i][i] = cj.aee;
        jac[i][2 * nc + i] = cj.aet;
        for j in 0..nc {
            let d = mu / h * (dface_flux(inp, i + 1, j) - dface_flux(inp, i, j));
            if d != 0.0 {
                jac[i][nc + j] += d;
            }
        }
        // rF row
        jac[nc + i][nc + i] = cj.aff;
        for j in 0..nc {
            let d = mu * c * c / (3.0 * h) * (dface_e(nc, i + 1, j) - dface_e(nc, i, j));
            if d != 0.0 {
                jac[nc + i][j] += d;
            }
        }
        // rT row
        jac[2 * nc + i][2 * nc + i] = cj.gt;
        jac[2 * nc + i][i] = cj.ge;
    }
    Ok(jac)
}

struct Residual {
    r_e: Vec<f64>,
    r_f: Vec<f64>,
    r_t: Vec<f64>,
    norm: f64,
}

fn residual(
    inp: &LoInputs,
    mu: f64,
    known: (&[f64], &[f64], &[f64]),
    e: &[f64],
    f: &[f64],
    t: &[f64],
) -> Result<Residual> {
    let nc = inp.mesh.cells();
    let c = C_LIGHT;
    let mut r_e = vec![0.0; nc];
    let mut r_f = vec![0.0; nc];
    let mut r_t = vec![0.0; nc];
    let mut norm = 0.0_f64;
    // Each row's residual is measured against the magnitudes of its own
    // terms, so convergence is meaningful from deep-equilibrium states
    // (where the flux is roundoff of the streaming terms) to streaming
    // fronts.
    for i in 0..nc {
        let h = inp.mesh.width(i);
        let (w, _) = equilibrium_energy_and_deriv(inp.groups, t[i])?;
        let emit = c * inp.opac.sigma_p[i] * w;
        let absorb = c * inp.opac.sigma_e[i] * e[i];
        let exch = emit - absorb;
        let ff_r = face_flux(inp, f, i + 1);
        let ff_l = face_flux(inp, f, i);
        let fe_r = face_e(e, nc, i + 1);
        let fe_l = face_e(e, nc, i);
        let n_e = -(ff_r - ff_l) / h + exch + inp.closure.e_source[i];
        let n_f = -c * c / 3.0 * (fe_r - fe_l) / h - c * inp.opac.sigma_r[i] * f[i]
            + inp.closure.gamma[i];
        let n_t = -exch / inp.rho_cv[i];
        r_e[i] = e[i] - known.0[i] - mu * n_e;
        r_f[i] = f[i] - known.1[i] - mu * n_f;
        r_t[i] = t[i] - known.2[i] - mu * n_t;
        let scale_e = e[i].abs()
            + known.0[i].abs()
            + mu * ((ff_r.abs() + ff_l.abs()) / h + emit.abs() + absorb.abs()
                + inp.closure.e_source[i].abs());
        let scale_f = f[i].abs()
            + known.1[i].abs()
            + mu * (c * c / 3.0 * (fe_r.abs() + fe_l.abs()) / h
                + c * inp.opac.sigma_r[i] * f[i].abs()
                + inp.closure.gamma[i].abs());
        let scale_t = t[i].abs() + known.2[i].abs() + mu * (emit.abs() + absorb.abs()) / inp.rho_cv[i];
        norm = norm
            .max(r_e[i].abs() / scale_e.max(f64::MIN_POSITIVE))
            .max(r_f[i].abs() / scale_f.max(f64::MIN_POSITIVE))
            .max(r_t[i].abs() / scale_t.max(f64::MIN_POSITIVE));
    }
    Ok(Residual { r_e, r_f, r_t, norm })
}

/// Solves X = known + mu N(X) for (E, F, T) in place. Returns the Newton
/// iteration count.
pub fn lo_solve(
    inp: &LoInputs,
    mu: f64,
    known: (&[f64], &[f64], &[f64]),
    e: &mut [f64],
    f: &mut [f64],
    t: &mut [f64],
    cfg: &LoSolveConfig,
) -> Result<u32> {
    let nc = inp.mesh.cells();
    let c = C_LIGHT;
    let mut res = residual(inp, mu, known, e, f, t)?;
    for iter in 0..cfg.max_iters {
        if res.norm <= cfg.tol {
            return Ok(iter);
        }
        // Assemble the 2x2 block-tridiagonal system with T eliminated
        // cell-locally (the Schur complement folds the T row into the E
        // diagonal).
        let mut diag = vec![[0.0; 4]; nc];
        let mut upper = vec![[0.0; 4]; nc];
        let mut lower = vec![[0.0; 4]; nc];
        let mut rhs = vec![[0.0; 2]; nc];
        let mut g_e = vec![0.0; nc];
        let mut g_t = vec![0.0; nc];
        for i in 0..nc {
            let h = inp.mesh.width(i);
            let (_, wp) = equilibrium_energy_and_deriv(inp.groups, t[i])?;
            let cj = cell_jacobian(inp, mu, i, wp);
            g_t[i] = cj.gt;
            g_e[i] = cj.ge;
            let aee = cj.aee - cj.aet * cj.ge / cj.gt;
            let aef = mu / h * (dface_flux(inp, i + 1, i) - dface_flux(inp, i, i));
            let afe = mu * c * c / (3.0 * h) * (dface_e(nc, i + 1, i) - dface_e(nc, i, i));
            diag[i] = [aee, aef, afe, cj.aff];
            if i + 1 < nc {
                upper[i] = [
                    0.0,
                    mu / h * (dface_flux(inp, i + 1, i + 1) - dface_flux(inp, i, i + 1)),
                    mu * c * c / (3.0 * h) * (dface_e(nc, i + 1, i + 1) - dface_e(nc, i, i + 1)),
                    0.0,
                ];
            }
            if i > 0 {
                lower[i] = [
                    0.0,
                    mu / h * (dface_flux(inp, i + 1, i - 1) - dface_flux(inp, i, i - 1)),
                    mu * c * c / (3.0 * h) * (dface_e(nc, i + 1, i - 1) - dface_e(nc, i, i - 1)),
                    0.0,
                ];
            }
            rhs[i] = [-(res.r_e[i] - cj.aet * res.r_t[i] / cj.gt), -res.r_f[i]];
        }

        // Block Thomas elimination.
        let inv2 = |m: &[f64; 4]| -> Result<[f64; 4]> {
            let det = m[0] * m[3] - m[1] * m[2];
            if det.abs() < 1e-300 {
                return Err(Error::NewtonDiverged { iters: iter, residual: res.norm });
            }
            Ok([m[3] / det, -m[1] / det, -m[2] / det, m[0] / det])
        };
        let mul = |a: &[f64; 4], b: &[f64; 4]| -> [f64; 4] {
            [
                a[0] * b[0] + a[1] * b[2],
                a[0] * b[1] + a[1] * b[3],
                a[2] * b[0] + a[3] * b[2],
                a[2] * b[1] + a[3] * b[3],
            ]
        };
        let mulv = |a: &[f64; 4], v: &[f64; 2]| -> [f64; 2] {
            [a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]]
        };
        for i in 1..nc {
            let w = mul(&lower[i], &inv2(&diag[i - 1])?);
            let wu = mul(&w, &upper[i - 1]);
            for k in 0..4 {
                diag[i][k] -= wu[k];
            }
            let wr = mulv(&w, &rhs[i - 1]);
            rhs[i][0] -= wr[0];
            rhs[i][1] -= wr[1];
        }
        let mut delta = vec![[0.0; 2]; nc];
        delta[nc - 1] = mulv(&inv2(&diag[nc - 1])?, &rhs[nc - 1]);
        for i in (0..nc.saturating_sub(1)).rev() {
            let uz = mulv(&upper[i], &delta[i + 1]);
            let r = [rhs[i][0] - uz[0], rhs[i][1] - uz[1]];
            delta[i] = mulv(&inv2(&diag[i])?, &r);
        }

        // Back-substitute the eliminated temperature direction.
        let delta_t: Vec<f64> = (0..nc)
            .map(|i| (-res.r_t[i] - g_e[i] * delta[i][0]) / g_t[i])
            .collect();

        // Damped update: halve until the residual decreases and T stays
        // positive.
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_damping {
            let mut e_try = e.to_vec();
            let mut f_try = f.to_vec();
            let mut t_try = t.to_vec();
            let mut positive = true;
            for i in 0..nc {
                e_try[i] += alpha * delta[i][0];
                f_try[i] += alpha * delta[i][1];
                t_try[i] += alpha * delta_t[i];
                if t_try[i] <= 0.0 {
                    positive = false;
                    break;
                }
            }
            if positive {
                let cand = residual(inp, mu, known, &e_try, &f_try, &t_try)?;
                if cand.norm < res.norm || cand.norm <= cfg.tol {
                    e.copy_from_slice(&e_try);
                    f.copy_from_slice(&f_try);
                    t.copy_from_slice(&t_try);
                    accepted = Some(cand);
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(cand) => res = cand,
            None => return Err(Error::NewtonDiverged { iters: iter + 1, residual: res.norm }),
        }
    }
    if res.norm <= cfg.tol {
        Ok(cfg.max_iters)
    } else {
        Err(Error::NewtonDiverged { iters: cfg.max_iters, residual: res.norm })
    }
}
