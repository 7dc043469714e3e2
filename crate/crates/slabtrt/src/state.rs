//! Flat state vector layout for the transport system.
//!
//! Order: intensity block, then radiation energy, radiation flux, and
//! material temperature, each cell-indexed. Intensity is indexed by
//! (ordinate, group, cell, node) with two DG nodes per cell, so each
//! (ordinate, group) pair is a contiguous spatial strip for sweeping.
//! Temperature sits in one contiguous block at the tail: it is the only
//! component read through the explicit argument of the partitioned
//! right-hand side.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    pub n_mu: usize,
    pub n_groups: usize,
    pub n_cells: usize,
}

impl StateLayout {
    pub fn intensity_len(&self) -> usize {
        self.n_mu * self.n_groups * self.n_cells * 2
    }

    pub fn dim(&self) -> usize {
        self.intensity_len() + 3 * self.n_cells
    }

    /// Start of the contiguous (cell, node) strip of one (m, g) pair.
    pub fn strip(&self, m: usize, g: usize) -> usize {
        ((m * self.n_groups + g) * self.n_cells) * 2
    }

    pub fn idx(&self, m: usize, g: usize, cell: usize, node: usize) -> usize {
        self.strip(m, g) + 2 * cell + node
    }

    pub fn intensity_range(&self) -> Range<usize> {
        0..self.intensity_len()
    }

    pub fn rad_energy_range(&self) -> Range<usize> {
        let s = self.intensity_len();
        s..s + self.n_cells
    }

    pub fn flux_range(&self) -> Range<usize> {
        let s = self.intensity_len() + self.n_cells;
        s..s + self.n_cells
    }

    pub fn temperature_range(&self) -> Range<usize> {
        let s = self.intensity_len() + 2 * self.n_cells;
        s..s + self.n_cells
    }

    /// Splits a state vector into (I, E, F, T) slices.
    pub fn split<'a>(&self, y: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (i, rest) = y.split_at(self.intensity_len());
        let (e, rest) = rest.split_at(self.n_cells);
        let (f, t) = rest.split_at(self.n_cells);
        (i, e, f, t)
    }

    pub fn split_mut<'a>(
        &self,
        y: &'a mut [f64],
    ) -> (&'a mut [f64], &'a mut [f64], &'a mut [f64], &'a mut [f64]) {
        let (i, rest) = y.split_at_mut(self.intensity_len());
        let (e, rest) = rest.split_at_mut(self.n_cells);
        let (f, t) = rest.split_at_mut(self.n_cells);
        (i, e, f, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_blocks_tile_the_state() {
        let l = StateLayout { n_mu: 4, n_groups: 3, n_cells: 5 };
        assert_eq!(l.dim(), 4 * 3 * 5 * 2 + 15);
        assert_eq!(l.intensity_range().end, l.rad_energy_range().start);
        assert_eq!(l.rad_energy_range().end, l.flux_range().start);
        assert_eq!(l.flux_range().end, l.temperature_range().start);
        assert_eq!(l.temperature_range().end, l.dim());
        assert_eq!(l.idx(0, 0, 0, 0), 0);
        assert_eq!(l.idx(0, 0, 1, 0) - l.idx(0, 0, 0, 0), 2);
        assert_eq!(l.strip(1, 0) - l.strip(0, 2), 10);
    }
}
