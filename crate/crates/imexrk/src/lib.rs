//! Semi-implicit(-explicit) Runge-Kutta integration for nonlinearly
//! partitioned ODE systems.
//!
//! The crate provides:
//!
//! - tableau pairs with shared primary and embedded weights, including
//!   four built-in second-order schemes with L-stable implicit parts
//!   ([`tableau`]);
//! - order-condition residuals through order three and embedding-quality
//!   measures (the `residuals` module);
//! - joint linear stability functions, A/L-stability checks, and sampled
//!   stability regions ([`stability`]);
//! - numerical optimization of embedded weight vectors ([`embedding`]);
//! - a generic stepper and adaptive error-controlled integrator over a
//!   partitioned right-hand side N(y*, y) ([`stepper`], [`controller`]);
//! - brute-force verification oracles ([`oracle`]).

pub mod controller;
pub mod embedding;
pub mod error;
pub mod oracle;
pub mod residuals;
pub mod stability;
pub mod stepper;
pub mod system;
pub mod tableau;

pub use controller::{
    error_norm, integrate, propose_dt, write_history_csv, Integration, Mode, StepControllerConfig,
    StepRecord, Tolerance,
};
pub use embedding::{embedding_objective, optimize_embedding, OptimizedEmbedding};
pub use error::{Error, Result};
pub use residuals::{quality, quality_for_weights, residuals, QualityReport, ResidualSet};
pub use stability::{
    embedded_stability_function, implicit_limit_at_infinity, is_a_stable_implicit,
    stability_function, stability_region, AStability, Region, RegionSpec, StabilityQuery,
};
pub use stepper::{step, StepOutput};
pub use system::{PartitionedSystem, StageStats};
pub use tableau::{builtin_scheme, ImexPair, Scheme};
