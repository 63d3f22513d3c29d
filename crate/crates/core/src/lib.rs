//! Cut-off operators on exponentially weighted Sobolev spaces `H1_{-eta}`.
//!
//! The crate implements a partition-of-unity cut-off `chi` that maps every
//! function of `H1_{-eta}` into a bounded ball of the uniformly local space
//! `H1_u`, acts as the identity on a small ball, commutes with translations
//! and is globally Lipschitz. It also implements the naive pointwise cut-off
//! this construction replaces, and a harness that measures every property
//! on seeded sample families.
//!
//! * [`grid`]: functions on a uniform grid over `[-L, L]`
//! * [`norms`]: windowed H1, weighted `H1_{-eta}`, uniformly local `H1_u`
//! * [`partition`]: the smooth bump and partition-of-unity generator
//! * [`cutoff`]: `chi`, `chi_eps`, and the derivative of `chi(u)^2`
//! * [`nonlin`]: superposition nonlinearities and the sawtooth pair
//! * [`harness`]: experiment suites, reports, and the CLI

pub mod conv;
pub mod cutoff;
pub mod error;
pub mod grid;
pub mod harness;
pub mod nonlin;
pub mod norms;
pub mod partition;

pub use cutoff::{apply_cutoff, chi_one, derivative_candidate, multiplier, rho_field, CutoffConfig, RhoField};
pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, Window};
pub use norms::{h1_inner, h1_norm_window, uniform_norm, weighted_norm, WeightedNormSpec};
pub use partition::{certify, Certification, PartitionPair};
