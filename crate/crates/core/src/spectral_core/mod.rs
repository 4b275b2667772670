//! Periodic grids, transforms, Fourier multipliers, Dirac projections and
//! frequency localization.

pub mod checkpoint;
pub mod dirac;
pub mod fft;
pub mod field;
pub mod grid;
pub mod localize;
pub mod multiplier;
pub mod norms;

pub use dirac::{dirac_operator, dirac_projection, half_wave_propagate, CouplingForm, DiracParams, NonlinearitySelector, Sign};
pub use field::{Field, Representation, ScalarField, SpinorField};
pub use grid::Grid2D;
pub use localize::{frequency_project, Region};
pub use multiplier::{apply_multiplier, MultiplierSpec};
pub use norms::sobolev_norm;
