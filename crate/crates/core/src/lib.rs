//! Multiple orthogonal polynomials for Nikishin systems on star-like sets,
//! their recurrence coefficients, and the limit formulas coming from a
//! genus-zero Riemann surface.

pub mod checks;
pub mod counting;
pub mod error;
pub mod harness;
pub mod limits;
pub mod linalg;
pub mod measures;
pub mod mop;
pub mod num;
pub mod surface;

pub use counting::{IndexPair, SystemShape};
pub use error::{Error, Result};
pub use measures::{DiscretizedMeasure, MeasureSet, StarSystemConfig};
