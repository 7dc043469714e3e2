//! Assembled transport problem: mesh, discretization, materials, and
//! boundary conditions.

use crate::constants::{radiation_constant, C_LIGHT};
use crate::error::Result;
use crate::groups::EnergyGroups;
use crate::material::Material;
use crate::mesh::SlabMesh;
use crate::planck::group_planck_with_deriv;
use crate::quadrature::AngularQuadrature;
use crate::state::StateLayout;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    Vacuum,
    Reflecting,
    /// Isotropic Planckian inflow at boundary temperature `t_b` (eV) with
    /// total intensity a c T_b^4 / (4 pi), distributed over groups in
    /// proportion to B_g(T_b).
    Planckian { t_b: f64 },
}

#[derive(Debug, Clone)]
pub struct TrtProblem {
    pub mesh: SlabMesh,
    pub quadrature: AngularQuadrature,
    pub groups: EnergyGroups,
    pub materials: Vec<Material>,
    pub bc_left: Boundary,
    pub bc_right: Boundary,
}

impl TrtProblem {
    pub fn layout(&self) -> StateLayout {
        StateLayout {
            n_mu: self.quadrature.len(),
            n_groups: self.groups.count(),
            n_cells: self.mesh.cells(),
        }
    }

    pub fn material(&self, cell: usize) -> &Material {
        &self.materials[self.mesh.material_id(cell)]
    }

    pub fn rho_cv(&self, cell: usize) -> f64 {
        self.material(cell).rho_cv
    }

    /// Group-resolved inflow intensities for a Planckian boundary.
    pub fn planck_inflow(&self, t_b: f64) -> Result<Vec<f64>> {
        let (b, _) = group_planck_with_deriv(&self.groups, t_b)?;
        let total: f64 = b.iter().sum();
        let target = radiation_constant() * C_LIGHT * t_b.powi(4) / (4.0 * std::f64::consts::PI);
        Ok(b.iter().map(|bg| target * bg / total).collect())
    }
}
