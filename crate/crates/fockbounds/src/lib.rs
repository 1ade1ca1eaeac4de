//! Numerical toolkit for one-mode bosonic Gaussian channels on truncated
//! Fock spaces: exact channel simulation through unitary dilations,
//! closed-form output-entropy lower bounds, capacity-region outer bounds,
//! and a Monte Carlo verification harness.
//!
//! Layout:
//! - [`fock`]: states, ladder operators, entropies, the `g` function
//! - [`channels`]: attenuator, amplifier, contravariant amplifier and
//!   additive-noise channel via their dilations
//! - [`bounds`]: entropy-power and quantum-limited-composition lower
//!   bounds plus the conjectured Gaussian (thermal) output value
//! - [`regions`]: broadcast and trade-off rate regions built from those
//!   bounds
//! - [`verify`]: reproducible randomized verification of the bounds on
//!   simulated channel outputs

pub mod bounds;
pub mod channels;
pub mod error;
pub mod fock;
mod linalg;
pub mod regions;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{
    annihilation_operator, dagger, g, g_inverse, mean_photons, number_operator, partial_trace,
    tensor, thermal_state, thermal_support, von_neumann_entropy, Entropy, FockState, MeanPhotons,
};
