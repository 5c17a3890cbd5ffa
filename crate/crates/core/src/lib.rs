#![allow(clippy::needless_range_loop)]

//! Numerical engine for Finsler geometry under the h-Matsumoto metric change.
//!
//! The crate computes, at sampled point-directions, every tensor of a Finsler
//! space (metric, Cartan tensor, spray, nonlinear / Cartan / Berwald
//! connections), the transformed objects of the change `L̄ = L²/(L−β)` built
//! from an h-vector, and the fundamentals of parametrized hypersurfaces in
//! both spaces.  Every closed-form object can be cross-checked against an
//! independent route: truncated Taylor jets differentiate the fundamental
//! function directly, finite differences back the jets, and raw index loops
//! back the collapsed identity chain on algebraic fixtures.

pub mod error;
pub mod expr;
pub mod hmatsumoto;
pub mod hvector;
pub mod hypersurface;
pub mod jets;
pub mod linalg;
pub mod point;
pub mod report;
pub mod sample;
pub mod space;
pub mod tensor;
pub mod verify;

pub use error::{HmxError, Result};
pub use point::PointDirection;
