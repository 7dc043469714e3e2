//! Butcher tableau pairs for semi-implicit(-explicit) Runge-Kutta methods.
//!
//! A pair couples a strictly lower-triangular explicit tableau with a
//! diagonally implicit (DIRK) tableau. Both share the weight vector `b` and
//! the embedded weight vector `b_hat`, so a single set of stage derivatives
//! produces both the primary and the embedded solution. Abscissae are
//! defined as tableau row sums throughout.

use crate::error::{Error, Result};

/// Shared-weight explicit/implicit Butcher tableau pair with an embedding.
///
/// `a_explicit` must be strictly lower-triangular and `a_implicit`
/// lower-triangular for the pair to describe a sweepable method; violations
/// are reported by [`ImexPair::validate`] rather than rejected at
/// construction so that diagnostics can be exercised on broken pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ImexPair {
    name: String,
    s: usize,
    a_explicit: Vec<Vec<f64>>,
    a_implicit: Vec<Vec<f64>>,
    b: Vec<f64>,
    b_hat: Vec<f64>,
    c_explicit: Vec<f64>,
    c_implicit: Vec<f64>,
    p: u32,
    p_hat: u32,
}

impl ImexPair {
    /// Builds a pair from coefficient matrices and weights. Abscissae are
    /// computed as row sums. Fails only on dimension mismatches.
    pub fn new(
        name: impl Into<String>,
        a_explicit: Vec<Vec<f64>>,
        a_implicit: Vec<Vec<f64>>,
        b: Vec<f64>,
        b_hat: Vec<f64>,
        p: u32,
        p_hat: u32,
    ) -> Result<Self> {
        let name = name.into();
        let s = b.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == s && m.iter().all(|row| row.len() == s);
        if s == 0 || !square(&a_explicit) || !square(&a_implicit) || b_hat.len() != s {
            return Err(Error::BadTableauShape(name));
        }
        let row_sums = |m: &[Vec<f64>]| m.iter().map(|row| row.iter().sum()).collect::<Vec<f64>>();
        let c_explicit = row_sums(&a_explicit);
        let c_implicit = row_sums(&a_implicit);
        Ok(Self {
            name,
            s,
            a_explicit,
            a_implicit,
            b,
            b_hat,
            c_explicit,
            c_implicit,
            p,
            p_hat,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of stages.
    pub fn stages(&self) -> usize {
        self.s
    }

    pub fn a_explicit(&self) -> &[Vec<f64>] {
        &self.a_explicit
    }

    pub fn a_implicit(&self) -> &[Vec<f64>] {
        &self.a_implicit
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b_hat(&self) -> &[f64] {
        &self.b_hat
    }

    pub fn c_explicit(&self) -> &[f64] {
        &self.c_explicit
    }

    pub fn c_implicit(&self) -> &[f64] {
        &self.c_implicit
    }

    /// Order of the primary method.
    pub fn order(&self) -> u32 {
        self.p
    }

    /// Order of the embedded method.
    pub fn embedded_order(&self) -> u32 {
        self.p_hat
    }

    /// Returns a copy with primary and embedded weights exchanged. Useful
    /// for propagating the embedded solution in convergence studies.
    pub fn with_swapped_weights(&self) -> Self {
        let mut out = self.clone();
        out.name = format!("{} (embedded weights)", self.name);
        std::mem::swap(&mut out.b, &mut out.b_hat);
        std::mem::swap(&mut out.p, &mut out.p_hat);
        out
    }

    /// Returns a copy with the embedded weights replaced (e.g. by an
    /// optimizer output). The weight vector length must match the stage
    /// count.
    pub fn with_embedded_weights(&self, b_hat: Vec<f64>) -> Result<Self> {
        if b_hat.len() != self.s {
            return Err(Error::BadTableauShape(self.name.clone()));
        }
        let mut out = self.clone();
        out.b_hat = b_hat;
        Ok(out)
    }

    /// Structural and order-condition diagnostics. An empty list means the
    /// pair is a valid second-order method with first-order embedding.
    ///
    /// Checks: triangularity of both tableaux, weight sums, the order-2
    /// residuals of the primary weights, and the order-1 residual of the
    /// embedding, all to 1e-12.
    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        const TOL: f64 = 1e-12;
        for i in 0..self.s {
            for j in 0..self.s {
                if j >= i && self.a_explicit[i][j] != 0.0 {
                    diags.push(format!(
                        "a_explicit[{i}][{j}] = {} is on or above the diagonal",
                        self.a_explicit[i][j]
                    ));
                }
                if j > i && self.a_implicit[i][j] != 0.0 {
                    diags.push(format!(
                        "a_implicit[{i}][{j}] = {} is above the diagonal",
                        self.a_implicit[i][j]
                    ));
                }
            }
        }
        let res = crate::residuals::residuals(self);
        if res.tau1[0].abs() > TOL {
            diags.push(format!("tau1(1) = {:.3e} != 0 (weights do not sum to 1)", res.tau1[0]));
        }
        for (k, t) in res.tau2.iter().enumerate() {
            if t.abs() > TOL {
                diags.push(format!("tau{}(2) = {:.3e} != 0 (method is not second order)", k + 1, t));
            }
        }
        if res.tau1_hat[0].abs() > TOL {
            diags.push(format!(
                "tau_hat1(1) = {:.3e} != 0 (embedded weights do not sum to 1)",
                res.tau1_hat[0]
            ));
        }
        diags
    }
}

/// The four built-in second-order pairs with L-stable implicit components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    HLdirk2,
    SspLdirk2,
    SspLdirk3,
    ImexNprk2b,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::HLdirk2,
        Scheme::SspLdirk2,
        Scheme::SspLdirk3,
        Scheme::ImexNprk2b,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::HLdirk2 => "H-LDIRK2(2,2,2)",
            Scheme::SspLdirk2 => "SSP-LDIRK2(3,3,2)",
            Scheme::SspLdirk3 => "SSP-LDIRK3(3,3,2)",
            Scheme::ImexNprk2b => "IMEX-NPRK2[42]b",
        }
    }

    pub fn from_name(name: &str) -> Result<Scheme> {
        let trimmed = name.trim();
        Scheme::ALL
            .iter()
            .copied()
            .find(|s| s.name().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| Error::UnknownScheme {
                name: name.to_string(),
                valid: Scheme::ALL.map(|s| s.name()).join(", "),
            })
    }

    /// Constructs the tableau pair. Irrational coefficients are computed
    /// from exact expressions, not decimal literals.
    pub fn pair(&self) -> ImexPair {
        let g = 1.0 - 1.0 / 2.0_f64.sqrt();
        let r2 = 2.0_f64.sqrt();
        let pair = match self {
            Scheme::HLdirk2 => ImexPair::new(
                self.name(),
                vec![vec![0.0, 0.0], vec![1.0, 0.0]],
                vec![vec![g, 0.0], vec![1.0 - 2.0 * g, g]],
                vec![0.5, 0.5],
                vec![3.0 / 10.0, 7.0 / 10.0],
                2,
                1,
            ),
            Scheme::SspLdirk2 => ImexPair::new(
                self.name(),
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![0.5, 0.0, 0.0],
                    vec![0.5, 0.5, 0.0],
                ],
                vec![
                    vec![0.25, 0.0, 0.0],
                    vec![0.0, 0.25, 0.0],
                    vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                ],
                vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
                vec![7.0 / 41.0, 13.0 / 33.0, 589.0 / 1353.0],
                2,
                1,
            ),
            Scheme::SspLdirk3 => ImexPair::new(
                self.name(),
                vec![
                    vec![0.0, 0.0, 0.0],
                    vec![1.0, 0.0, 0.0],
                    vec![0.25, 0.25, 0.0],
                ],
                vec![
                    vec![g, 0.0, 0.0],
                    vec![1.0 - 2.0 * g, g, 0.0],
                    vec![0.5 - g, 0.0, g],
                ],
                vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
                vec![-2.0 / 17.0, 2.0 / 13.0, 213.0 / 221.0],
                2,
                1,
            ),
            Scheme::ImexNprk2b => ImexPair::new(
                self.name(),
                vec![
                    vec![0.0, 0.0],
                    vec![(26.0 + 3.0 * r2) / 42.0, 0.0],
                ],
                vec![
                    vec![g, 0.0],
                    vec![(-20.0 + 23.0 * r2) / 42.0, g],
                ],
                vec![(16.0 + 9.0 * r2) / 94.0, (78.0 - 9.0 * r2) / 94.0],
                vec![1.0 / 15.0, 14.0 / 15.0],
                2,
                1,
            ),
        };
        pair.expect("built-in tableau dimensions are consistent")
    }
}

/// Looks up a built-in scheme by its display name.
pub fn builtin_scheme(name: &str) -> Result<ImexPair> {
    Ok(Scheme::from_name(name)?.pair())
}
