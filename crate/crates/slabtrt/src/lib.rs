//! Deterministic 1D slab thermal radiation transport with moment-based
//! adaptive time integration.
//!
//! Discretization: discrete ordinates in angle, multigroup in photon
//! energy, lumped linear discontinuous Galerkin in space, coupled to a
//! gray low-order moment system through a consistency closure. Time
//! integration uses the embedded semi-implicit(-explicit) Runge-Kutta
//! pairs from the `imexrk` crate, with error estimation restricted to
//! temperature and/or radiation energy.

pub mod closure;
pub mod config;
pub mod constants;
pub mod driver;
pub mod error;
pub mod groups;
pub mod lo;
pub mod material;
pub mod mesh;
pub mod moments;
pub mod output;
pub mod planck;
pub mod problem;
pub mod problems;
pub mod quadrature;
pub mod state;
pub mod sweep;
pub mod system;

pub use error::{Error, Result};
pub use problem::{Boundary, TrtProblem};
pub use problems::{make_equilibrium, make_gray_slab, make_larsen, ProblemSpec};
pub use system::{Formulation, SolverOptions, TrtSystem};
