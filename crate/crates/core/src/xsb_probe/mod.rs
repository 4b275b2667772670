//! Discrete Bourgain-space machinery on a periodic space-time lattice.

pub mod experiments;
pub mod packets;
pub mod spacetime;

pub use experiments::{
    ball_probe, bilinear_product_experiment, embedding_probe, l4_cone_experiment, BilinearConfig, BilinearSetup, EmbeddingProbeConfig, ExperimentReport, L4ConeConfig, Sweep, XsbRow,
};
pub use packets::{cone_packet, random_phase_packet, trial_rng, weighted_l4_ascent, xsb_norm, xsb_weights, Ball, ConePacketSpec, XsbParams};
pub use spacetime::{PaddedTransform, SpacetimeField, SpacetimeLattice, SpectralFrame};
