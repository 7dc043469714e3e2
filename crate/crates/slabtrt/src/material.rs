//! Material opacity laws and their multigroup collapse.

use crate::groups::EnergyGroups;

/// Analytic opacity law sigma(h nu, T), cm^-1, with h nu and T in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpacityLaw {
    /// Frequency- and temperature-independent opacity.
    Gray(f64),
    /// sigma = gamma (1 - e^(-e/T)) / e^3 with e = h nu; `gamma` in
    /// eV^3/cm. Decays like e^-3 at high energy and like
    /// gamma/(e^2 T) as e/T -> 0.
    InverseCubed { gamma: f64 },
}

impl OpacityLaw {
    pub fn sigma(&self, energy_ev: f64, t_ev: f64) -> f64 {
        match *self {
            OpacityLaw::Gray(s) => s,
            OpacityLaw::InverseCubed { gamma } => {
                let x = energy_ev / t_ev;
                gamma * (-(-x).exp_m1()) / (energy_ev * energy_ev * energy_ev)
            }
        }
    }
}

/// A material: opacity law plus volumetric heat capacity rho C_v in
/// erg eV^-1 cm^-3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub law: OpacityLaw,
    pub rho_cv: f64,
}

const QUAD_POINTS: usize = 16;

/// Gauss-Legendre nodes/weights on [-1, 1] for the in-group collapse,
/// generated once.
fn quad_16() -> &'static ([f64; QUAD_POINTS], [f64; QUAD_POINTS]) {
    use std::sync::OnceLock;
    static CELL: OnceLock<([f64; QUAD_POINTS], [f64; QUAD_POINTS])> = OnceLock::new();
    CELL.get_or_init(|| {
        let q = crate::quadrature::AngularQuadrature::gauss_legendre(QUAD_POINTS).unwrap();
        let mut x = [0.0; QUAD_POINTS];
        let mut w = [0.0; QUAD_POINTS];
        x.copy_from_slice(q.mu());
        w.copy_from_slice(q.weights());
        (x, w)
    })
}

/// Planck-weighted group opacity at temperature `t`:
/// integral_g sigma B / integral_g B, by 16-point Gauss-Legendre in log
/// energy. Exact for gray laws. Falls back to the group-center value when
/// the Planck weight underflows across the whole group (deep Wien tail).
pub fn group_sigma(law: &OpacityLaw, groups: &EnergyGroups, g: usize, t: f64) -> f64 {
    if let OpacityLaw::Gray(s) = law {
        return *s;
    }
    let (xs, ws) = quad_16();
    let (e0, e1) = (groups.edges()[g], groups.edges()[g + 1]);
    let (l0, l1) = (e0.ln(), e1.ln());
    let half = 0.5 * (l1 - l0);
    let mid = 0.5 * (l1 + l0);
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..QUAD_POINTS {
        let e = (mid + half * xs[k]).exp();
        let x = e / t;
        // Planck weight in log-energy measure: e^4 / (exp(x) - 1),
        // written with exp(-x) so the Wien tail underflows gracefully.
        let q = (-x).exp();
        let weight = e.powi(4) * q / (1.0 - q).max(f64::MIN_POSITIVE);
        num += ws[k] * weight * law.sigma(e, t);
        den += ws[k] * weight;
    }
    if den <= 0.0 || !num.is_finite() {
        return law.sigma(groups.center(g), t);
    }
    num / den
}

/// Group opacities for all groups of one material at one temperature.
pub fn group_sigmas(law: &OpacityLaw, groups: &EnergyGroups, t: f64) -> Vec<f64> {
    (0..groups.count()).map(|g| group_sigma(law, groups, g, t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_cubed_values_and_limits() {
        let law = OpacityLaw::InverseCubed { gamma: 1e9 };
        // Thin-region value at h nu = 1000 eV, T = 1 eV is about 1/cm.
        let s = law.sigma(1000.0, 1.0);
        assert!((s - 1.0e9 / 1.0e9).abs() < 1e-12, "sigma = {s}");
        // Monotone decreasing in photon energy at fixed T.
        let mut prev = f64::INFINITY;
        for k in 0..60 {
            let e = 1e-2 * 10f64.powf(8.0 * k as f64 / 59.0);
            let v = law.sigma(e, 5.0);
            assert!(v < prev);
            prev = v;
        }
        // Wien limit sigma -> gamma / e^3.
        let e = 1e5;
        assert!((law.sigma(e, 1.0) - 1e9 / e.powi(3)).abs() / (1e9 / e.powi(3)) < 1e-12);
        // Rayleigh limit sigma -> gamma / (e^2 T) (1 - e/(2T) + ...).
        let e = 1e-4_f64;
        let t = 10.0_f64;
        let expect = 1e9 / (e * e * t) * (1.0 - e / (2.0 * t) + (e / t).powi(2) / 6.0);
        assert!((law.sigma(e, t) - expect).abs() / expect < 1e-9);
    }

    #[test]
    fn gray_group_collapse_is_exact() {
        let groups = EnergyGroups::log_spaced(1e-3, 1e6, 4).unwrap();
        let law = OpacityLaw::Gray(1234.5);
        for g in 0..4 {
            assert_eq!(group_sigma(&law, &groups, g, 77.0), 1234.5);
        }
    }

    #[test]
    fn wien_tail_group_falls_back_to_center_value() {
        let groups = EnergyGroups::log_spaced(1e-2, 1e6, 10).unwrap();
        let law = OpacityLaw::InverseCubed { gamma: 1e9 };
        // Top group at T = 1 eV: x ~ 1e5, Planck weight underflows.
        let g = 9;
        let s = group_sigma(&law, &groups, g, 1.0);
        assert!((s - law.sigma(groups.center(g), 1.0)).abs() <= 1e-15 * s.abs());
    }
}
