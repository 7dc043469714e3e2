//! Collapsed opacities and the moment-consistency closure.
//!
//! The cell-wise collapsed opacities are
//!
//! ```text
//! sigma_E = (sum_g sum_m w sigma_g I) / (sum_g sum_m w I)
//! sigma_P = (sum_g sigma_g B_g(T_w)) / (sum_g B_g(T_w))
//! sigma_R = (sum_g dB_g/dT(T_w)) / (sum_g dB_g/dT(T_w) / sigma_g)
//! ```
//!
//! with sigma_g evaluated at the explicit temperature and the weights at
//! the weight temperature T_w (the implicit iterate for the semi-implicit
//! formulation, the explicit copy for IMEX).
//!
//! The closure makes the low-order equations exact at the high-order
//! moments: the flux equation through the additive source gamma, and the
//! energy equation through per-face corrections that replace the two-point
//! average flux with the upwind-integrated transport face flux.

use crate::constants::C_LIGHT;
use crate::error::{Error, Result};
use crate::mesh::SlabMesh;
use crate::moments::{CellMoments, FaceMoments};
use crate::problem::Boundary;

/// Per-cell collapsed opacities, cm^-1.
#[derive(Debug, Clone)]
pub struct CollapsedOpacities {
    pub sigma_e: Vec<f64>,
    pub sigma_p: Vec<f64>,
    pub sigma_r: Vec<f64>,
}

const DENOM_FLOOR: f64 = 1e-30;

/// Collapses group opacities against the moment reductions and Planck
/// weights. `sigma` is (cell, group); `b_w`, `db_w` are B_g and dB_g/dT
/// at the weight temperature, same indexing. Vanishing denominators fall
/// back to the Planck mean (and the Planck mean itself to the opacity at
/// the weight spectrum peak) rather than erroring; see
/// [`collapse_strict`] for the checked variant.
pub fn collapse(
    n_cells: usize,
    n_groups: usize,
    sigma: &[f64],
    moments: &CellMoments,
    b_w: &[f64],
    db_w: &[f64],
) -> CollapsedOpacities {
    let mut out = CollapsedOpacities {
        sigma_e: vec![0.0; n_cells],
        sigma_p: vec![0.0; n_cells],
        sigma_r: vec![0.0; n_cells],
    };
    for cell in 0..n_cells {
        let gs = &sigma[cell * n_groups..(cell + 1) * n_groups];
        let bw = &b_w[cell * n_groups..(cell + 1) * n_groups];
        let dbw = &db_w[cell * n_groups..(cell + 1) * n_groups];

        let b_sum: f64 = bw.iter().sum();
        let sb_sum: f64 = gs.iter().zip(bw).map(|(s, b)| s * b).sum();
        let sigma_p = if b_sum > DENOM_FLOOR {
            sb_sum / b_sum
        } else {
            // Deeply cold cell: every group weight underflowed. Use the
            // largest group opacity as a stand-in absorption scale.
            gs.iter().cloned().fold(f64::MIN, f64::max)
        };

        let db_sum: f64 = dbw.iter().sum();
        let db_over: f64 = dbw.iter().zip(gs).map(|(d, s)| d / s).sum();
        let sigma_r = if db_over > DENOM_FLOOR { db_sum / db_over } else { sigma_p };

        // absorb = 2 pi sum w sigma I, e-moment = c E / (2 pi ...)
        // consistent scalings cancel in the ratio.
        let sigma_e = if moments.e[cell] * C_LIGHT > DENOM_FLOOR {
            moments.absorb[cell] / (moments.e[cell] * C_LIGHT)
        } else {
            sigma_p
        };

        out.sigma_p[cell] = sigma_p;
        out.sigma_r[cell] = sigma_r;
        out.sigma_e[cell] = sigma_e;
    }
    out
}

/// Checked collapse: errors on a vanishing denominator instead of
/// applying the fallbacks.
pub fn collapse_strict(
    n_cells: usize,
    n_groups: usize,
    sigma: &[f64],
    moments: &CellMoments,
    b_w: &[f64],
    db_w: &[f64],
) -> Result<CollapsedOpacities> {
    for cell in 0..n_cells {
        let bw = &b_w[cell * n_groups..(cell + 1) * n_groups];
        if bw.iter().sum::<f64>() <= DENOM_FLOOR {
            return Err(Error::VanishingDenominator { cell, which: "planck weight" });
        }
        let dbw = &db_w[cell * n_groups..(cell + 1) * n_groups];
        let gs = &sigma[cell * n_groups..(cell + 1) * n_groups];
        if dbw.iter().zip(gs).map(|(d, s)| d / s).sum::<f64>() <= DENOM_FLOOR {
            return Err(Error::VanishingDenominator { cell, which: "rosseland weight" });
        }
        if moments.e[cell] * C_LIGHT <= DENOM_FLOOR {
            return Err(Error::VanishingDenominator { cell, which: "radiation energy" });
        }
    }
    Ok(collapse(n_cells, n_groups, sigma, moments, b_w, db_w))
}

/// Whether collapsed opacities evaluate the opacity at the weight
/// temperature (joint) or at the explicit-copy temperature with weights
/// at the implicit one (partitioned).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseMode {
    Joint,
    Partitioned,
}

/// Collapsed opacities of an intensity field against per-cell explicit
/// and weight temperatures. Errors on vanishing denominators (cold
/// vacuum cells); callers wanting the documented floor/fallback behavior
/// use [`collapse`] directly with precomputed inputs.
pub fn collapsed_opacities(
    problem: &crate::problem::TrtProblem,
    i: &[f64],
    t_star: &[f64],
    t: &[f64],
    mode: CollapseMode,
) -> Result<CollapsedOpacities> {
    let layout = problem.layout();
    let (nc, ng) = (layout.n_cells, layout.n_groups);
    let mut sigma = vec![0.0; nc * ng];
    let mut b_w = vec![0.0; nc * ng];
    let mut db_w = vec![0.0; nc * ng];
    for cell in 0..nc {
        let t_sigma = match mode {
            CollapseMode::Joint => t[cell],
            CollapseMode::Partitioned => t_star[cell],
        };
        let s = crate::material::group_sigmas(&problem.material(cell).law, &problem.groups, t_sigma);
        sigma[cell * ng..(cell + 1) * ng].copy_from_slice(&s);
        let (b, db) = crate::planck::group_planck_with_deriv(&problem.groups, t[cell])?;
        b_w[cell * ng..(cell + 1) * ng].copy_from_slice(&b);
        db_w[cell * ng..(cell + 1) * ng].copy_from_slice(&db);
    }
    let moments = crate::moments::cell_moments(&layout, &problem.quadrature, i, &sigma);
    collapse_strict(nc, ng, &sigma, &moments, &b_w, &db_w)
}

/// Face treatment of the low-order energy equation: the face flux is
/// `avg_weight * (F_left + F_right)/2 + constant`, where the constant
/// carries the high-order correction (or the frozen boundary flux).
#[derive(Debug, Clone)]
pub struct ClosureTerms {
    /// Additive source in the flux equation, per cell.
    pub gamma: Vec<f64>,
    /// Additive source in the energy equation, per cell (zero for the
    /// time-continuous closure; stage solves use it to absorb clipping
    /// defects, see [`stage_sources`]).
    pub e_source: Vec<f64>,
    /// Per-face constant part of the energy-equation face flux.
    pub face_const: Vec<f64>,
    /// Whether the face includes the two-point average of the unknowns.
    pub face_avg: Vec<bool>,
}

/// Builds the closure from the high-order moments. At (E, F) =
/// (E_HO, F_HO) the low-order energy and flux equations then reproduce
/// the discrete moments of the transport operator identically.
pub fn build_closure(
    mesh: &SlabMesh,
    moments: &CellMoments,
    faces: &FaceMoments,
    sigma_r: &[f64],
    bc_left: Boundary,
    bc_right: Boundary,
) -> ClosureTerms {
    let nc = mesh.cells();
    let c = C_LIGHT;
    let mut face_const = vec![0.0; nc + 1];
    let mut face_avg = vec![false; nc + 1];
    for k in 1..nc {
        face_avg[k] = true;
        face_const[k] = faces.flux[k] - 0.5 * (moments.f[k - 1] + moments.f[k]);
    }
    face_const[0] = match bc_left {
        Boundary::Reflecting => 0.0,
        _ => faces.flux[0],
    };
    face_const[nc] = match bc_right {
        Boundary::Reflecting => 0.0,
        _ => faces.flux[nc],
    };

    // One-sided E at boundary faces, two-point averages inside.
    let e_face = |k: usize| -> f64 {
        if k == 0 {
            moments.e[0]
        } else if k == nc {
            moments.e[nc - 1]
        } else {
            0.5 * (moments.e[k - 1] + moments.e[k])
        }
    };

    let mut gamma = vec![0.0; nc];
    for cell in 0..nc {
        let h = mesh.width(cell);
        gamma[cell] = c * c / 3.0 * (e_face(cell + 1) - e_face(cell)) / h
            - c * c * (faces.p_face[cell + 1] - faces.p_face[cell]) / h
            - c * moments.sigma_flux[cell]
            + c * sigma_r[cell] * moments.f[cell];
    }
    ClosureTerms { gamma, e_source: vec![0.0; nc], face_const, face_avg }
}

/// Replaces the closure sources by the stage-equation residuals at the
/// high-order moments:
///
/// ```text
/// gamma_i = (F_HO - known_F)/mu + (c^2/3) dEbar_HO/dx + c sigma_R F_HO
/// s_E,i   = (E_HO - known_E)/mu + dPhi_up/dx + c sigma_E E_HO - em_i
/// ```
///
/// with `em_i` the emission rate c sigma_P W(T) at the temperature the
/// sweep emitted at. Substituting (E_HO, F_HO) into the low-order stage
/// equations then gives zero residual identically, even when negativity
/// clipping perturbed the swept field or earlier stages accumulated
/// moment-inconsistent knowns; absent those effects the sources reduce to
/// the time-continuous closure of [`build_closure`].
#[allow(clippy::too_many_arguments)]
pub fn stage_sources(
    mesh: &SlabMesh,
    moments: &CellMoments,
    faces: &FaceMoments,
    opac: &CollapsedOpacities,
    mu: f64,
    known_e: &[f64],
    known_f: &[f64],
    emission: &[f64],
    closure: &mut ClosureTerms,
) {
    let nc = mesh.cells();
    let c = C_LIGHT;
    let e_face = |k: usize| -> f64 {
        if k == 0 {
            moments.e[0]
        } else if k == nc {
            moments.e[nc - 1]
        } else {
            0.5 * (moments.e[k - 1] + moments.e[k])
        }
    };
    for cell in 0..nc {
        let h = mesh.width(cell);
        closure.gamma[cell] = (moments.f[cell] - known_f[cell]) / mu
            + c * c / 3.0 * (e_face(cell + 1) - e_face(cell)) / h
            + c * opac.sigma_r[cell] * moments.f[cell];
        closure.e_source[cell] = (moments.e[cell] - known_e[cell]) / mu
            + (faces.flux[cell + 1] - faces.flux[cell]) / h
            + c * opac.sigma_e[cell] * moments.e[cell]
            - emission[cell];
    }
}
