//! Surface heightmap model: thickness profile, smooth base shape, knot bumps
//! and grain, plus their composition.

pub mod base_shape;
pub mod compose;
pub mod grain;
pub mod surface_knot;
pub mod thickness;

pub use crate::logcentric::GridSpec;
pub use base_shape::{eval_base_shape, fit_base_shape, BaseShape};
pub use compose::{compose_heightmap, SurfaceLayers};
pub use grain::{gabor_grain, GaborNoise, GrainConfig};
pub use surface_knot::{fit_surface_knot, surface_knot_imprint, SurfaceKnot, SurfaceKnotFit, SurfacePatch};
pub use thickness::{eval_thickness, fit_thickness, ThicknessCluster, ThicknessModel};
