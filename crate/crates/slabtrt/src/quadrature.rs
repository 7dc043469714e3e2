//! Gauss-Legendre angular quadrature on mu in (-1, 1).

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AngularQuadrature {
    mu: Vec<f64>,
    weights: Vec<f64>,
}

impl AngularQuadrature {
    /// S_N quadrature: the N-point Gauss-Legendre rule. N must be even so
    /// the set is symmetric with no mu = 0 ordinate.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::BadProblem(format!(
                "S_N order must be a positive even number, got {n}"
            )));
        }
        let mut mu = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Newton iteration on P_n with the Chebyshev-like initial guess.
        for k in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            mu[k] = -x.abs();
            weights[k] = w;
            mu[n - 1 - k] = x.abs();
            weights[n - 1 - k] = w;
        }
        Ok(Self { mu, weights })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the ordinate with mu = -mu(m). Ordinates are stored
    /// symmetrically: m and len-1-m mirror each other.
    pub fn mirror(&self, m: usize) -> usize {
        self.len() - 1 - m
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_moments_match() {
        for n in [2, 4, 8, 16] {
            let q = AngularQuadrature::gauss_legendre(n).unwrap();
            let w: f64 = q.weights().iter().sum();
            assert!((w - 2.0).abs() < 1e-14, "S{n}: sum w = {w}");
            let m1: f64 = q.mu().iter().zip(q.weights()).map(|(m, w)| m * w).sum();
            assert!(m1.abs() < 1e-14);
            let m2: f64 = q.mu().iter().zip(q.weights()).map(|(m, w)| m * m * w).sum();
            assert!((m2 - 2.0 / 3.0).abs() < 1e-13, "S{n}: int mu^2 = {m2}");
            for m in 0..n {
                assert!((q.mu()[m] + q.mu()[q.mirror(m)]).abs() < 1e-15);
                assert!(q.mu()[m] != 0.0);
            }
        }
    }

    #[test]
    fn s8_matches_tabulated_nodes() {
        let q = AngularQuadrature::gauss_legendre(8).unwrap();
        // Largest Gauss-Legendre abscissa and weight for n = 8.
        assert!((q.mu()[7] - 0.960_289_856_497_536_2).abs() < 1e-14);
        assert!((q.weights()[7] - 0.101_228_536_290_376_26).abs() < 1e-14);
    }

    #[test]
    fn odd_orders_rejected() {
        assert!(AngularQuadrature::gauss_legendre(3).is_err());
        assert!(AngularQuadrature::gauss_legendre(0).is_err());
    }
}
