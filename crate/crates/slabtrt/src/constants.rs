//! Physical constants in the cm-s-erg-eV unit system.
//!
//! Temperatures and photon energies are measured in eV with the Boltzmann
//! constant folded in, so x = (h nu)/T is dimensionless. The radiation
//! constant is computed from h and c rather than hardcoded.

/// Speed of light, cm/s.
pub const C_LIGHT: f64 = 2.997_924_58e10;

/// Planck constant, eV * s.
pub const H_PLANCK_EV_S: f64 = 4.135_667_696e-15;

/// One electron volt in erg.
pub const ERG_PER_EV: f64 = 1.602_176_634e-12;

/// Radiation constant a = 8 pi^5 / (15 h^3 c^3) in erg cm^-3 eV^-4
/// (about 137.2).
pub fn radiation_constant() -> f64 {
    let pi = std::f64::consts::PI;
    8.0 * pi.powi(5) / (15.0 * H_PLANCK_EV_S.powi(3) * C_LIGHT.powi(3)) * ERG_PER_EV
}

/// Prefactor of the group-integrated Planck intensity,
/// B_g = planck_prefactor() * T^4 * (G(x1) - G(x0)), in
/// erg cm^-2 s^-1 sr^-1 per eV^4.
pub fn planck_prefactor() -> f64 {
    2.0 * ERG_PER_EV / (H_PLANCK_EV_S.powi(3) * C_LIGHT * C_LIGHT)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radiation_constant_value() {
        let a = radiation_constant();
        assert!((a - 137.2).abs() < 0.05, "a = {a}");
        // a = 4 pi / c * prefactor * pi^4 / 15, the frequency-integrated
        // identity between intensity and energy density.
        let pi = std::f64::consts::PI;
        let alt = 4.0 * pi / C_LIGHT * planck_prefactor() * pi.powi(4) / 15.0;
        assert!((a - alt).abs() / a < 1e-14);
    }
}
