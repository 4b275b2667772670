//! Pseudospectral simulator and numerical probe suite for the 2D massless
//! Dirac equation with honeycomb power (ℓ = 1) and Hartree (ℓ = 2)
//! nonlinearities.

pub mod error;
pub mod evolution;
pub mod fit;
pub mod harness;
pub mod illposedness_probe;
pub mod nonlinearity;
pub(crate) mod par;
pub mod spectral_core;
pub mod xsb_probe;

pub use error::{Error, Result};
