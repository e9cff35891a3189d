//! Numerical laboratory for maximal directional singular integrals along
//! finite-order lacunary direction sets.
//!
//! The crate splits into direction-set geometry ([`direction`]), closed-form
//! frequency symbols ([`symbols`]), an FFT spectral engine on the torus
//! ([`grid`], [`fft`], [`multiplier`]), grid realizations of the directional
//! operators ([`operators`]), directional Muckenhoupt weights ([`weights`]),
//! and reproducible verification experiments ([`experiments`]).

pub mod direction;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod grid;
pub mod multiplier;
pub mod operators;
pub mod parallel;
pub mod symbols;
pub mod weights;

pub use direction::{Direction, DirectionSet, SigmaIndex};
pub use grid::{GridFunction, Side, TorusGrid};
pub use symbols::HmProfile;
