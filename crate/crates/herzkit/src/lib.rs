//! Anisotropic mixed-norm Herz and Herz–Hardy spaces on sampled functions.
//!
//! The crate evaluates quasi-norms, mixed Lebesgue and Herz norms, block and
//! atomic decompositions, maximal/fractional/singular operators, weight
//! constants, Littlewood–Paley square functions and the Rubio de Francia
//! iteration on functions sampled over symmetric tensor grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anisotropy;
pub mod builtins;
mod conv;
pub mod error;
pub mod hardy;
pub mod herz;
pub mod littlewood_paley;
pub mod mixed_norm;
pub mod operators;
pub mod par;
pub mod sampled;
mod serde_ext;
pub mod verify;

pub use anisotropy::{AnisotropicBall, AnisotropyVector};
pub use error::{Error, Result};
pub use herz::{herz_norm, BlockDecomposition, HerzParams, HerzSpace};
pub use mixed_norm::{mixed_lebesgue_norm, ExponentVector};
pub use sampled::{quadrature_integral, DyadicWindow, Grid, SampledFunction};
