//! Linear stability analysis of tableau pairs.
//!
//! The test equation y' = lt*y + l*y (lt treated explicitly, l implicitly)
//! has one-step amplification
//!
//! ```text
//! R(zt, z) = 1 + (zt + z) * b' (I - zt*At - z*A)^-1 e
//! ```
//!
//! with zt = dt*lt and z = dt*l. Setting zt = 0 recovers the classical
//! stability function of the implicit tableau, z = 0 that of the explicit
//! one. A-stability of a DIRK tableau (positive diagonal, so all poles lie
//! in the right half-plane) is decided on the boundary: the imaginary axis
//! plus the z -> -inf limit, which for weights w evaluates to the rational
//! limit 1 - w'A^-1 e.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tableau::ImexPair;

/// A point (zt, z) of scaled explicit/implicit eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityQuery {
    pub z_tilde: Complex64,
    pub z: Complex64,
}

impl StabilityQuery {
    pub fn new(z_tilde: Complex64, z: Complex64) -> Self {
        Self { z_tilde, z }
    }
}

/// Gaussian elimination with partial pivoting; `m` is row-major s x s.
fn solve_complex(mut m: Vec<Complex64>, mut rhs: Vec<Complex64>, s: usize) -> Result<Vec<Complex64>> {
    for col in 0..s {
        let (piv_row, piv_abs) = (col..s)
            .map(|r| (r, m[r * s + col].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if piv_abs < 1e-300 {
            return Err(Error::SingularMatrix {
                row: col,
                pivot: piv_abs,
            });
        }
        if piv_row != col {
            for k in 0..s {
                m.swap(col * s + k, piv_row * s + k);
            }
            rhs.swap(col, piv_row);
        }
        let piv = m[col * s + col];
        for r in col + 1..s {
            let factor = m[r * s + col] / piv;
            if factor != Complex64::new(0.0, 0.0) {
                for k in col..s {
                    let v = m[col * s + k];
                    m[r * s + k] -= factor * v;
                }
                let v = rhs[col];
                rhs[r] -= factor * v;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); s];
    for row in (0..s).rev() {
        let mut acc = rhs[row];
        for k in row + 1..s {
            acc -= m[row * s + k] * x[k];
        }
        x[row] = acc / m[row * s + row];
    }
    Ok(x)
}

fn amplification(
    a_exp: &[Vec<f64>],
    a_imp: &[Vec<f64>],
    weights: &[f64],
    q: StabilityQuery,
) -> Result<Complex64> {
    let s = weights.len();
    let mut m = vec![Complex64::new(0.0, 0.0); s * s];
    for i in 0..s {
        for j in 0..s {
            let delta = if i == j { 1.0 } else { 0.0 };
            m[i * s + j] = Complex64::new(delta, 0.0) - q.z_tilde * a_exp[i][j] - q.z * a_imp[i][j];
        }
    }
    let x = solve_complex(m, vec![Complex64::new(1.0, 0.0); s], s)?;
    let wx: Complex64 = weights.iter().zip(&x).map(|(w, xi)| xi * *w).sum();
    Ok(Complex64::new(1.0, 0.0) + (q.z_tilde + q.z) * wx)
}

/// Amplification of one step with the primary weights.
pub fn stability_function(pair: &ImexPair, q: StabilityQuery) -> Result<Complex64> {
    amplification(pair.a_explicit(), pair.a_implicit(), pair.b(), q)
}

/// Amplification of one step with the embedded weights.
pub fn embedded_stability_function(pair: &ImexPair, q: StabilityQuery) -> Result<Complex64> {
    amplification(pair.a_explicit(), pair.a_implicit(), pair.b_hat(), q)
}

/// The z -> inf limit of the implicit stability function with weights `w`:
/// 1 - w'A^-1 e. Fails when A is singular (e.g. explicit tableaux).
pub fn implicit_limit_at_infinity(a: &[Vec<f64>], weights: &[f64]) -> Result<f64> {
    let s = weights.len();
    let m: Vec<Complex64> = (0..s * s)
        .map(|k| Complex64::new(a[k / s][k % s], 0.0))
        .collect();
    let x = solve_complex(m, vec![Complex64::new(1.0, 0.0); s], s)?;
    let wx: f64 = weights.iter().zip(&x).map(|(w, xi)| w * xi.re).sum();
    Ok(1.0 - wx)
}

/// Outcome of the imaginary-axis A-stability check.
#[derive(Debug, Clone, Copy)]
pub struct AStability {
    pub is_a_stable: bool,
    /// Largest |R| found on the sampled boundary (1.0 for an A-stable
    /// method; the amplification at the origin is always 1).
    pub margin: f64,
}

/// Number of imaginary-axis samples used by the A-stability check.
pub const A_STABILITY_SAMPLES: usize = 480;

/// Checks |R(0, iy)| <= 1 + 1e-10 for |y| log-spaced over [1e-6, 1e8]
/// (conjugate symmetry covers y < 0) together with the z -> inf limit.
/// Poles of a DIRK tableau with nonnegative diagonal lie on the positive
/// real axis, so the boundary maximum bounds the left half-plane.
pub fn is_a_stable_implicit(a: &[Vec<f64>], weights: &[f64]) -> AStability {
    let s = weights.len();
    let mut margin: f64 = 0.0;
    let zero = vec![vec![0.0; s]; s];
    for k in 0..A_STABILITY_SAMPLES {
        let t = k as f64 / (A_STABILITY_SAMPLES - 1) as f64;
        let y = 10.0_f64.powf(-6.0 + 14.0 * t);
        let q = StabilityQuery::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, y));
        match amplification(&zero, a, weights, q) {
            Ok(r) => margin = margin.max(r.norm()),
            Err(_) => margin = f64::INFINITY,
        }
    }
    match implicit_limit_at_infinity(a, weights) {
        Ok(rinf) => margin = margin.max(rinf.abs()),
        Err(_) => {
            // Singular A: fall back to large-|z| samples along the axis.
            for y in [1e8, 1e10] {
                let q = StabilityQuery::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, y));
                match amplification(&zero, a, weights, q) {
                    Ok(r) => margin = margin.max(r.norm()),
                    Err(_) => margin = f64::INFINITY,
                }
            }
        }
    }
    AStability {
        is_a_stable: margin <= 1.0 + 1e-10,
        margin,
    }
}

/// Sampling plan for the joint stability region: a rectangular grid of
/// explicit eigenvalues zt, with the implicit eigenvalue z swept over the
/// boundary rays arg(z) = pi +- alpha of the sector.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    /// Sector half-angle in radians, in [0, pi/2].
    pub alpha: f64,
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
    /// Also sample ray fans inside the sector. The default (false) relies
    /// on the maximum-modulus principle for the rational R in z: interior
    /// maxima over the sector are attained on its boundary (rays plus the
    /// z -> inf limit), away from poles.
    pub dense: bool,
}

impl RegionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.alpha) {
            return Err(Error::InvalidArgument(format!(
                "alpha = {} outside [0, pi/2]",
                self.alpha
            )));
        }
        if self.n_re == 0 || self.n_im == 0 {
            return Err(Error::InvalidArgument("empty region grid".into()));
        }
        Ok(())
    }
}

/// Boolean stability field over the zt grid of `spec`.
#[derive(Debug, Clone)]
pub struct Region {
    pub spec: RegionSpec,
    /// Row-major over (im, re): index = i_im * n_re + i_re.
    pub stable: Vec<bool>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

const RAY_RADII: usize = 160;

fn sector_samples(alpha: f64, dense: bool) -> Vec<Complex64> {
    let mut zs = Vec::new();
    let angles: Vec<f64> = if dense {
        let n = 9;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                std::f64::consts::PI + alpha * (2.0 * t - 1.0)
            })
            .collect()
    } else if alpha == 0.0 {
        vec![std::f64::consts::PI]
    } else {
        vec![
            std::f64::consts::PI - alpha,
            std::f64::consts::PI + alpha,
        ]
    };
    for ang in angles {
        let dir = Complex64::new(ang.cos(), ang.sin());
        for k in 0..RAY_RADII {
            let t = k as f64 / (RAY_RADII - 1) as f64;
            let r = 10.0_f64.powf(-6.0 + 14.0 * t);
            zs.push(dir * r);
        }
    }
    zs
}

/// Evaluates the region: a grid point zt is stable when |R(zt, z)| <= 1
/// for every sampled z on the sector boundary and at the z -> inf limit.
pub fn stability_region(pair: &ImexPair, spec: &RegionSpec, use_embedded: bool) -> Result<Region> {
    spec.validate()?;
    let weights = if use_embedded { pair.b_hat() } else { pair.b() };
    let zs = sector_samples(spec.alpha, spec.dense);
    let rinf = implicit_limit_at_infinity(pair.a_implicit(), weights)?;
    let lim_ok = rinf.abs() <= 1.0 + 1e-12;

    let lin = |lo: f64, hi: f64, n: usize, k: usize| {
        if n == 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let re: Vec<f64> = (0..spec.n_re).map(|k| lin(spec.re_min, spec.re_max, spec.n_re, k)).collect();
    let im: Vec<f64> = (0..spec.n_im).map(|k| lin(spec.im_min, spec.im_max, spec.n_im, k)).collect();

    let mut stable = vec![false; spec.n_re * spec.n_im];
    for (ii, &b) in im.iter().enumerate() {
        for (ir, &a) in re.iter().enumerate() {
            let zt = Complex64::new(a, b);
            let mut ok = lim_ok;
            if ok {
                for &z in &zs {
                    let q = StabilityQuery::new(zt, z);
                    match amplification(pair.a_explicit(), pair.a_implicit(), weights, q) {
                        Ok(r) if r.norm() <= 1.0 + 1e-12 => {}
                        _ => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            stable[ii * spec.n_re + ir] = ok;
        }
    }
    Ok(Region {
        spec: spec.clone(),
        stable,
        re,
        im,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tableau::Scheme;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_amplification_at_origin() {
        for s in Scheme::ALL {
            let p = s.pair();
            let r = stability_function(&p, StabilityQuery::new(c(0.0, 0.0), c(0.0, 0.0))).unwrap();
            assert!((r - c(1.0, 0.0)).norm() < 1e-15);
            let rh =
                embedded_stability_function(&p, StabilityQuery::new(c(0.0, 0.0), c(0.0, 0.0)))
                    .unwrap();
            assert!((rh - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn h_ldirk2_explicit_part_is_second_order_polynomial() {
        // With z = 0 the explicit tableau gives R = 1 + zt + zt^2/2.
        let p = Scheme::HLdirk2.pair();
        for zt in [c(-1.0, 0.0), c(-0.3, 0.7), c(0.5, -1.2)] {
            let r = stability_function(&p, StabilityQuery::new(zt, c(0.0, 0.0))).unwrap();
            let exact = c(1.0, 0.0) + zt + zt * zt * 0.5;
            assert!((r - exact).norm() < 1e-13, "zt = {zt}");
        }
    }

    #[test]
    fn two_stage_implicit_closed_form() {
        // R(0, z) for a 2-stage DIRK: 1 + z b'(I - zA)^-1 e. For H-LDIRK2
        // expand by hand: stages x1 = 1/(1-z g), x2 = (1 + z(1-2g)x1)/(1-z g).
        let p = Scheme::HLdirk2.pair();
        let g = 1.0 - 1.0 / 2.0_f64.sqrt();
        for z in [c(-2.0, 0.0), c(-0.5, 3.0), c(-10.0, -4.0)] {
            let x1 = c(1.0, 0.0) / (c(1.0, 0.0) - z * g);
            let x2 = (c(1.0, 0.0) + z * (1.0 - 2.0 * g) * x1) / (c(1.0, 0.0) - z * g);
            let exact = c(1.0, 0.0) + z * (x1 + x2) * 0.5;
            let r = stability_function(&p, StabilityQuery::new(c(0.0, 0.0), z)).unwrap();
            assert!((r - exact).norm() < 1e-13);
        }
    }

    #[test]
    fn builtins_implicit_l_stable() {
        for s in Scheme::ALL {
            let p = s.pair();
            let rinf = implicit_limit_at_infinity(p.a_implicit(), p.b()).unwrap();
            assert!(rinf.abs() < 1e-10, "{}: |R(inf)| = {:e}", s.name(), rinf.abs());
            // Large-|z| samples agree with the rational limit.
            let zero = vec![vec![0.0; p.stages()]; p.stages()];
            let r8 = amplification(&zero, p.a_implicit(), p.b(), StabilityQuery::new(c(0.0, 0.0), c(-1e8, 0.0))).unwrap();
            let r10 = amplification(&zero, p.a_implicit(), p.b(), StabilityQuery::new(c(0.0, 0.0), c(-1e10, 0.0))).unwrap();
            assert!((r8.norm() - rinf.abs()).abs() < 1e-6);
            assert!((r10.norm() - rinf.abs()).abs() < 1e-6);
        }
    }

    #[test]
    fn builtins_embedded_a_stable_not_l_stable() {
        for s in Scheme::ALL {
            let p = s.pair();
            let st = is_a_stable_implicit(p.a_implicit(), p.b_hat());
            assert!(st.is_a_stable, "{}: margin = {}", s.name(), st.margin);
        }
        // The H-LDIRK2 embedding decays to a finite nonzero limit.
        let p = Scheme::HLdirk2.pair();
        let rinf = implicit_limit_at_infinity(p.a_implicit(), p.b_hat()).unwrap();
        assert!(rinf.abs() > 1e-3 && rinf.abs() < 1.0, "|R_hat(inf)| = {rinf}");
    }

    #[test]
    fn forward_euler_not_a_stable_backward_euler_is() {
        let fe = is_a_stable_implicit(&[vec![0.0]], &[1.0]);
        assert!(!fe.is_a_stable);
        let be = is_a_stable_implicit(&[vec![1.0]], &[1.0]);
        assert!(be.is_a_stable, "margin = {}", be.margin);
    }

    #[test]
    fn singular_stage_matrix_reported() {
        // z g = 1 makes the first stage matrix singular.
        let p = Scheme::HLdirk2.pair();
        let g = 1.0 - 1.0 / 2.0_f64.sqrt();
        let q = StabilityQuery::new(c(0.0, 0.0), c(1.0 / g, 0.0));
        assert!(matches!(
            stability_function(&p, q),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn region_zero_column_stable_and_large_zt_unstable() {
        let p = Scheme::ImexNprk2b.pair();
        let spec = RegionSpec {
            alpha: std::f64::consts::FRAC_PI_2,
            re_min: 0.0,
            re_max: 10.0,
            im_min: 0.0,
            im_max: 0.0,
            n_re: 2,
            n_im: 1,
            dense: false,
        };
        let region = stability_region(&p, &spec, false).unwrap();
        assert!(region.stable[0], "zt = 0 must be stable for all alpha");
        assert!(!region.stable[1], "zt = 10 is beyond any explicit region");
    }

    #[test]
    fn region_alpha_monotonicity() {
        let p = Scheme::HLdirk2.pair();
        let base = RegionSpec {
            alpha: 0.0,
            re_min: -3.0,
            re_max: 0.5,
            im_min: -2.5,
            im_max: 2.5,
            n_re: 12,
            n_im: 12,
            dense: false,
        };
        let r0 = stability_region(&p, &base, false).unwrap();
        for alpha in [0.4, std::f64::consts::FRAC_PI_2] {
            let spec = RegionSpec { alpha, ..base.clone() };
            let ra = stability_region(&p, &spec, false).unwrap();
            for (k, (&a, &b)) in ra.stable.iter().zip(&r0.stable).enumerate() {
                assert!(!a || b, "point {k}: stable at alpha={alpha} but not at 0");
            }
        }
    }

    #[test]
    fn dense_sampling_only_shrinks_the_region() {
        let p = Scheme::SspLdirk3.pair();
        let spec = RegionSpec {
            alpha: 0.7,
            re_min: -3.0,
            re_max: 0.5,
            im_min: 0.0,
            im_max: 2.0,
            n_re: 9,
            n_im: 5,
            dense: false,
        };
        let rays = stability_region(&p, &spec, false).unwrap();
        let dense = stability_region(&p, &RegionSpec { dense: true, ..spec }, false).unwrap();
        for (k, (&d, &r)) in dense.stable.iter().zip(&rays.stable).enumerate() {
            assert!(!d || r, "point {k}: dense-stable but ray-unstable");
        }
        // The documented maximum-modulus assumption holds here: interior
        // sampling changes nothing.
        assert_eq!(dense.stable, rays.stable);
    }

    #[test]
    fn region_matches_real_axis_brute_force() {
        // alpha = 0 restricts z to the negative real axis; check one point
        // against direct sampling.
        let p = Scheme::HLdirk2.pair();
        let spec = RegionSpec {
            alpha: 0.0,
            re_min: -1.0,
            re_max: -1.0,
            im_min: 0.0,
            im_max: 0.0,
            n_re: 1,
            n_im: 1,
            dense: false,
        };
        let region = stability_region(&p, &spec, false).unwrap();
        let brute = (0..2000).all(|k| {
            let x = -(10.0_f64.powf(-6.0 + 14.0 * k as f64 / 1999.0));
            let r = stability_function(&p, StabilityQuery::new(c(-1.0, 0.0), c(x, 0.0))).unwrap();
            r.norm() <= 1.0 + 1e-9
        });
        assert_eq!(region.stable[0], brute);
        assert!(region.stable[0]);
    }
}
