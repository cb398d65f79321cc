//! Numerical toolkit for weighted Monge-Ampère energies of radial
//! plurisubharmonic functions on the unit ball: Young weights, Luxembourg and
//! Choquet norms from distribution functions, the radial model, an inequality
//! verification harness, and searches for empirical Orlicz-norm ratios.

pub mod conjecture;
pub mod error;
pub mod jsonf64;
pub mod orlicz;
pub mod parse;
pub mod quad;
pub mod radial;
pub mod search;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use orlicz::DistributionFunction;
pub use quad::QuadratureSpec;
pub use radial::{RadialMeasure, RadialProfile};
pub use weights::Weight;
