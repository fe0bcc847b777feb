//! Geometry of `U_k / H` for tractable `H`: quotient distances, packing and
//! covering estimates, separated families, and ball volumes.

mod families;
mod packing;
mod quotient;
mod subgroup;
mod volume;

pub use families::{combine_separated_families, SeparatedFamily};
pub use packing::{
    cover_greedy, exponent_fit, geometric_grid, pack_greedy, quotient_metric, rho, torus_metric, DistanceMatrix,
    ExponentFit, FiniteSetSampler, HaarSampler, OrbitSampler, PackingResult, PointCloud, PointSampler, SeparatedSet,
    TorusSampler, Traversal, DISTANCE_MATRIX_LIMIT,
};
pub use quotient::{
    d2_unchecked, quotient_distance_d2, quotient_distance_dinf, scalar_quotient_distance, DinfBracket, QuotientDistance,
};
pub use subgroup::{SubgroupFactor, TractableSubgroup};
pub use volume::{ball_volume_theta, estimate_opnorm_ball_volume, log_ball_volume_theta, VolumeEstimate};

/// `k² − dim H`.
pub fn quotient_dim(h: &TractableSubgroup) -> u64 {
    h.quotient_dim()
}
