//! The operator Poincaré disk `{z : ‖z‖ < 1}` in `M_n(C)`: its automorphism
//! group `U(θ)`, geodesics and distance, the projective-line picture, the
//! operator cross ratio and its coefficient bundle, and central traces.
//!
//! Every fallible routine takes [`matrix::Tolerances`] and reports failures
//! through [`error::Error`].

pub mod bundle;
pub mod cross_ratio;
pub mod disk;
pub mod error;
pub mod line;
pub mod matrix;
pub mod pair;
pub mod sample;
pub mod trace;
