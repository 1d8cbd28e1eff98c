//! Shared inputs for the benchmarks.

use logsynth::knotmodel::resolve_knot;
use logsynth::{KnotParams, LogCentricPoint};

/// Sampled body of a typical knot, 40 stations by 24 points.
pub fn knot_points() -> Vec<LogCentricPoint> {
    let p = KnotParams { s0: 0.0, l0: 1500.0, gamma: 1.2, rho_max: 130.0, phi0: 0.6, phi1: 0.5, r_max: 14.0, psi0: 0.7, psi1: 0.6 };
    resolve_knot(&p, 50.0).expect("valid knot").body_points(1.0, 40, 24).expect("sampled body")
}
