//! Multigroup energy structure: photon energy bin edges in eV.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGroups {
    edges: Vec<f64>,
}

impl EnergyGroups {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::BadGroups("need at least two edges".into()));
        }
        if edges[0] <= 0.0 || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadGroups(
                "edges must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self { edges })
    }

    /// `count` groups with edges uniform in log energy over [lo, hi] eV.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::BadGroups("need at least one group".into()));
        }
        let (l0, l1) = (lo.ln(), hi.ln());
        let edges = (0..=count)
            .map(|k| (l0 + (l1 - l0) * k as f64 / count as f64).exp())
            .collect();
        Self::new(edges)
    }

    pub fn count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Geometric center of group `g`, eV.
    pub fn center(&self, g: usize) -> f64 {
        (self.edges[g] * self.edges[g + 1]).sqrt()
    }
}
