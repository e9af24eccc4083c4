//! Herz–Hardy spaces: Schwartz windows, radial maximal functions, atoms,
//! molecules and atomic decompositions.

mod atoms;
mod decompose;
mod window;

pub use atoms::*;
pub use decompose::*;
pub use window::*;
