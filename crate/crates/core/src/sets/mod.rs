//! Compact subsets of the half-line, their nets, point clouds and capacities.

mod capacity;
mod cloud;
mod compact;

pub use capacity::{
    capacity_sorted, greedy_separated, kolmogorov_capacity, minkowski_dim_estimate, SEPARATION_SLACK,
};
pub use cloud::PointCloud;
pub use compact::{CompactSet, DeltaNet, SelfCoverCertificate, SetDescriptor, DEFAULT_DEPTH, NET_CAP};
