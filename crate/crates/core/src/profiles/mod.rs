//! Dimension profiles from minimum-energy ladders and Laplace-exponent
//! indices.

mod energy_profiles;
mod indices;
mod report;

pub use energy_profiles::{
    box_profile, fh_profile, invert_phi, lambda_ladder_for_phi, stable_profile, subordinator_box_dim,
    ProfileOptions,
};
pub use indices::{
    fh_subordinator_predicted, phi_index, theta_grid, theta_index, IndexKind, ThetaReport, THETA_LAMBDA_MAX,
    THETA_POINTS_PER_DECADE,
};
pub use report::ProfileReport;
