//! 1D slab mesh: cells with two linear DG nodes each and a material id.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SlabMesh {
    edges: Vec<f64>,
    material: Vec<usize>,
}

impl SlabMesh {
    pub fn new(edges: Vec<f64>, material: Vec<usize>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadMesh("edges must be strictly increasing".into()));
        }
        if material.len() != edges.len() - 1 {
            return Err(Error::BadMesh("one material id per cell required".into()));
        }
        Ok(Self { edges, material })
    }

    /// Uniform mesh over [x0, x1]; material ids assigned per cell center
    /// by `assign`.
    pub fn uniform(x0: f64, x1: f64, cells: usize, assign: impl Fn(f64) -> usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::BadMesh("need at least one cell".into()));
        }
        let edges: Vec<f64> = (0..=cells)
            .map(|k| x0 + (x1 - x0) * k as f64 / cells as f64)
            .collect();
        let material = (0..cells)
            .map(|i| assign(0.5 * (edges[i] + edges[i + 1])))
            .collect();
        Self::new(edges, material)
    }

    pub fn cells(&self) -> usize {
        self.material.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.edges[cell + 1] - self.edges[cell]
    }

    pub fn center(&self, cell: usize) -> f64 {
        0.5 * (self.edges[cell] + self.edges[cell + 1])
    }

    pub fn material_id(&self, cell: usize) -> usize {
        self.material[cell]
    }
}
