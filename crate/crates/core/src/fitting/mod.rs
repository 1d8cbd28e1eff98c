//! Model fitting from annotated point clouds.

pub mod cluster;
pub mod knot;
pub mod log;

pub use cluster::{cluster_knots, Clustering, DEFAULT_CLUSTER_GAP};
pub use knot::{fit_knot, KnotFitOptions, KnotFitResult};
pub use log::{
    fit_log, reconstruct, summary_table, AnnotatedKnot, AnnotatedLogData, FitConfig, KnotRecord, LogFitReport, LogModel, MeanBand,
    Provenance, ReconstructOptions, Reconstruction, LOG_MODEL_SCHEMA,
};
