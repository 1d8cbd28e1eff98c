//! Parametric models of debarked wooden logs.
//!
//! A log is described in log-centric coordinates `(theta, l, rho)` around a
//! centerline. The model has three parts:
//!
//! - a [`centerline::Centerline`] given as two Chebyshev series `y(x)`, `z(x)`,
//! - a set of internal knots, each described by nine scalars
//!   ([`knotmodel::KnotParams`]),
//! - a surface heightmap decomposed into a thickness profile, a
//!   Fourier x Chebyshev base shape, difference-of-Gaussians surface knots and
//!   sparse Gabor grain ([`surface`]).
//!
//! [`fitting`] recovers these parts from annotated point clouds, [`stats`]
//! learns their distribution across logs, and [`synth`] draws new labeled
//! logs from those statistics. [`io`] holds the file formats.

pub mod centerline;
pub mod error;
pub mod fitting;
pub mod io;
pub mod knotmodel;
pub mod logcentric;
pub mod numeric;
pub mod optim;
pub mod stats;
pub mod surface;
pub mod synth;

pub use centerline::Centerline;
pub use error::{Error, Result};
pub use fitting::{AnnotatedLogData, FitConfig, KnotFitResult, KnotRecord, LogFitReport, LogModel};
pub use knotmodel::{KnotParams, ResolvedKnot};
pub use logcentric::{CartesianPoint, Heightmap, KnotFramePoint, LogCentricPoint};
pub use stats::{HierarchicalGaussian, ModelStatistics};
pub use surface::{BaseShape, GrainConfig, GridSpec, SurfaceKnot, ThicknessModel};
pub use synth::{GenerationConfig, GeneratedLog};
