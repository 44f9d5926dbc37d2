//! Generalized roundness of finite metric spaces.
//!
//! The crate computes the supremal exponent `p` for which `d^p` is a kernel of
//! negative type (which, for finite spaces, is the generalized roundness),
//! searches for violating 2n-gon configurations, realizes negative-type
//! kernels as squared Euclidean distances, and builds the hyperplane-counting
//! `l¹` embedding of median graphs.
//!
//! Heavy inner loops (exhaustive gon enumeration, all-pairs BFS, isometry
//! checks, batch runs) take an [`Exec`] policy. With the `parallel` feature
//! (on by default) [`Exec::Parallel`] runs on the rayon pool; without it every
//! policy falls back to sequential iteration.

pub mod cubical;
pub mod error;
pub mod exec;
pub mod generators;
pub mod metric;
pub mod negtype;
pub mod roundness;

pub use cubical::{
    halfspace_embedding, orbit_metric, separation_count, theta_classes, verify_isometry,
    HyperplaneSet, IsometryReport, L1Embedding,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use generators::{
    cycle, free_group_ball, grid, hypercube, load_graph, lp_sample, parse_edge_list, path,
    zn_ball, Graph, GroupBallSpec, GroupFamily,
};
pub use metric::{power_transform, restrict, validate_metric, Axiom, FiniteMetricSpace, Kernel, MetricReport, Violation};
pub use negtype::{
    compression_lower_bound, default_threshold, gns_embed, gram_from_kernel, is_negative_type,
    supremal_p, EuclideanConfiguration, NegTypeCertificate, PStarResult, DEFAULT_P_MAX,
    DEFAULT_TOL,
};
pub use roundness::{
    batch_roundness, gon_deficiency, generalized_roundness, search_violation, GonConfiguration,
    SearchOptions, Strategy, ViolationCertificate,
};
