//! Radial grids, the two-representation [`Field`], frame derivatives, the
//! discrete Helmholtz operator and weighted / module-regularity norms.

mod cutoff;
mod field;
mod grid;
pub mod io;
mod norms;
mod ops;

pub use cutoff::{cutoff_chi, smoothstep, smoothstep_d1, smoothstep_d2, Cutoff};
pub use field::{Domain, Field, MAX_LAMBDA_SPACING};
pub use grid::{Grading, RadialGrid, MIN_RADIAL_NODES};
pub use norms::{module_generator, module_norm, weighted_norm, NormSpec, Sign};
pub use ops::{apply_helmholtz, frame_derivative, FrameDir};
