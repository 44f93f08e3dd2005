//! Numerical toolkit for traceless SU(2) character varieties of tangles and
//! surfaces: quaternion algebra, free-group words, twisted cohomology, a
//! constrained solver, surface twist flows, symplectic reduction and tangle data.

pub mod cohomology;
pub mod error;
pub mod linalg;
pub mod reduction;
pub mod sampling;
pub mod solver;
pub mod su2;
pub mod surface;
pub mod tangles;
pub mod words;

pub use error::{Error, Result};
pub use su2::{ImVector, ShapeFunction, UnitQuaternion};
pub use words::{Presentation, Representation, Word};
