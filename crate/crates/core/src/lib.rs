//! Random polynomial ensembles, Kac–Rice zero densities, toy special-geometry
//! period models and lattice counting of attractor points and flux vacua.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs; sampling is keyed by `(seed, index)` so work can be
//! split across threads by the caller without changing results. File formats,
//! thread pools and the command-line front end live in the `randcrit` crate.
//!
//! Float math goes through `num_traits::Float` (backed by `libm`); those
//! imports are marked `allow(unused_imports)` because the inherent `f64`
//! methods take precedence whenever std ends up linked.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ensembles;
pub mod error;
pub mod grid;
pub mod kacrice;
pub mod montecarlo;
pub mod quad;
pub mod rng;
pub mod roots;
pub mod special_geometry;
pub mod stats;
pub mod vacua;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
