//! Parameter statistics and sampling.

pub mod hierarchy;
pub mod model;
pub mod mvn;

pub use hierarchy::{ClusterDraw, HierarchicalGaussian, LevelCounts};
pub use model::{
    knot_from_stat_vector, knot_stat_vector, surface_knot_from_stat_vector, surface_knot_stat_vector, BaseShapeStats, ModelStatistics,
    Range, SampledKnot, ThicknessStats, WhorlStats, KNOT_STAT_NAMES, STATISTICS_SCHEMA, SURFACE_KNOT_STAT_NAMES,
};
pub use mvn::{hadamard_covariance, repair_correlation, sample_mvn, MvnStats};
