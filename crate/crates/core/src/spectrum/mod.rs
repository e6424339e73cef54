//! Finite-difference spectral estimates for conformal patches.
//!
//! A patch is sampled on a uniform node grid. Region nodes away from the
//! rectangle edge and outside the excluded set are unknowns; every other
//! node carries a homogeneous Dirichlet condition.

mod ball;
mod barta;
mod geodesic;
mod grid;
mod lobpcg;
mod multigrid;
mod tone;
mod witness;

pub use ball::{ball_property_check, cutoff, BallData, BallPropertyReport};
pub use barta::{barta_bound, BartaResult};
pub use geodesic::geodesic_distance;
pub use grid::{discretize, Grid, NodeKind, SpectralProblem, MIN_NODES_PER_SIDE, NONE};
pub use lobpcg::{smallest_eigs, EigOptions, EigenResult};
pub use tone::{
    fundamental_tone, fundamental_tone_on, persson_sweep, persson_sweep_on, PerssonReport,
    RegionFn, ToneResult, MONOTONE_SLACK,
};
pub use witness::{barta_witness, ConvexDomain, CoverBall, WitnessBarriers, WitnessReport};
