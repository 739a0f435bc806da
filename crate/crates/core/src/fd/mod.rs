//! RBF-FD: stencils, local weights and sparse global operators.

pub mod interp;
pub mod neighbors;
pub mod operator;

pub use interp::{cluster_interpolate_1d, cluster_windows, rbf_fd_interpolate, ClusterFit};
pub use neighbors::{assign_evaluation_points, nearest_neighbors, NeighborIndex};
pub use operator::{
    assemble_global_operator, local_laplacian_weights, FdConfig, FdMode, GlobalOperator, StencilMap, StencilRule,
};
