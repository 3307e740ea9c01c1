pub mod angular;
pub mod error;
pub mod farfield;
pub mod fields;
pub mod flow;
mod linalg;
pub mod lineig;
pub mod nonlin;
pub mod ode;
pub mod resolvent;
pub mod solver;
pub mod specialfn;

pub use error::{Error, Result};
