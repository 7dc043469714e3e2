//! Angular/spectral moments of the discrete intensity.
//!
//! Cell values use the average of the two DG nodes (consistent with mass
//! lumping); face values use the upwind node of the neighboring cell, the
//! same convention the sweep integrates, so face-based divergences of the
//! moments telescope exactly against the swept transport operator.

use crate::constants::C_LIGHT;
use crate::quadrature::AngularQuadrature;
use crate::state::StateLayout;

/// Cell-centered moments and opacity-weighted reductions of an intensity
/// field. `e`, `f`, `p` are the 0th/1st/2nd angular moments (energy
/// density, flux, pressure-like moment); `absorb` is 2 pi sum w sigma I
/// (the sigma_E numerator times c) and `sigma_flux` is
/// 2 pi sum w mu sigma I.
#[derive(Debug, Clone)]
pub struct CellMoments {
    pub e: Vec<f64>,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
    pub absorb: Vec<f64>,
    pub sigma_flux: Vec<f64>,
}

/// One pass over the intensity block. `sigma` is (cell, group) indexed.
pub fn cell_moments(
    layout: &StateLayout,
    quad: &AngularQuadrature,
    i: &[f64],
    sigma: &[f64],
) -> CellMoments {
    let (n_mu, ng, nc) = (layout.n_mu, layout.n_groups, layout.n_cells);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut e = vec![0.0; nc];
    let mut f = vec![0.0; nc];
    let mut p = vec![0.0; nc];
    let mut absorb = vec![0.0; nc];
    let mut sigma_flux = vec![0.0; nc];
    for m in 0..n_mu {
        let mu = quad.mu()[m];
        let w = quad.weights()[m];
        for g in 0..ng {
            let strip = layout.strip(m, g);
            for cell in 0..nc {
                let avg = 0.5 * (i[strip + 2 * cell] + i[strip + 2 * cell + 1]);
                let sig = sigma[cell * ng + g];
                e[cell] += w * avg;
                f[cell] += w * mu * avg;
                p[cell] += w * mu * mu * avg;
                absorb[cell] += w * sig * avg;
                sigma_flux[cell] += w * mu * sig * avg;
            }
        }
    }
    for cell in 0..nc {
        e[cell] *= two_pi / C_LIGHT;
        f[cell] *= two_pi;
        p[cell] *= two_pi / C_LIGHT;
        absorb[cell] *= two_pi;
        sigma_flux[cell] *= two_pi;
    }
    CellMoments { e, f, p, absorb, sigma_flux }
}

/// Upwind face moments: `flux[k]` = 2 pi sum w mu I_up (the discrete HO
/// face flux, erg cm^-2 s^-1) and `p_face[k]` = (2 pi / c) sum w mu^2 I_up
/// at each of the K+1 faces.
#[derive(Debug, Clone)]
pub struct FaceMoments {
    pub flux: Vec<f64>,
    pub p_face: Vec<f64>,
}

pub fn upwind_face_moments(
    layout: &StateLayout,
    quad: &AngularQuadrature,
    i: &[f64],
    inflow_left: &[f64],
    inflow_right: &[f64],
) -> FaceMoments {
    let (n_mu, ng, nc) = (layout.n_mu, layout.n_groups, layout.n_cells);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut flux = vec![0.0; nc + 1];
    let mut p_face = vec![0.0; nc + 1];
    for m in 0..n_mu {
        let mu = quad.mu()[m];
        let w = quad.weights()[m];
        for g in 0..ng {
            let strip = layout.strip(m, g);
            for k in 0..=nc {
                let up = if mu > 0.0 {
                    if k == 0 {
                        inflow_left[m * ng + g]
                    } else {
                        i[strip + 2 * (k - 1) + 1]
                    }
                } else if k == nc {
                    inflow_right[m * ng + g]
                } else {
                    i[strip + 2 * k]
                };
                flux[k] += w * mu * up;
                p_face[k] += w * mu * mu * up;
            }
        }
    }
    for k in 0..=nc {
        flux[k] *= two_pi;
        p_face[k] *= two_pi / C_LIGHT;
    }
    FaceMoments { flux, p_face }
}
