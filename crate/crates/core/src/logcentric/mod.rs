//! Log-centric coordinates `(theta, l, rho)` around a centerline, the knot-local
//! arc-length frame, and the cyclic surface heightmap.
//!
//! Frame convention: the normal plane of the centerline carries a
//! rotation-minimizing frame `(N, B)` seeded with the global `+z` axis at the start
//! of the centerline. `theta = 0` points along `N`, `theta = pi/2` along
//! `B = N x T`; for a straight centerline along `+x` these are `+z` and `+y`.
//! `l` is the arc length along the centerline measured from `x_min`.

mod frame;
mod heightmap;

pub use frame::LogFrame;
pub use heightmap::{build_heightmap, build_heightmap_on, GridSpec, Heightmap};

use serde::{Deserialize, Serialize};

use crate::numeric::wrap_angle;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &CartesianPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCentricPoint {
    /// Angle around the centerline in `[0, 2pi)`.
    pub theta: f64,
    /// Arc position along the centerline, mm.
    pub l: f64,
    /// Distance from the centerline, mm.
    pub rho: f64,
}

impl LogCentricPoint {
    pub fn new(theta: f64, l: f64, rho: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            l,
            rho,
        }
    }
}

/// Knot-local coordinates: `s = (theta - theta_mean) * rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotFramePoint {
    pub s: f64,
    pub l: f64,
    pub rho: f64,
}

pub fn to_log_centric(p: &CartesianPoint, frame: &LogFrame) -> Result<LogCentricPoint> {
    frame.to_log_centric(p)
}

pub fn from_log_centric(q: &LogCentricPoint, frame: &LogFrame) -> Result<CartesianPoint> {
    frame.from_log_centric(q)
}

/// Unwraps the angles so the largest angular gap sits on the cut, and returns
/// the unwrapped angles (contiguous, possibly exceeding `2pi`).
pub fn unwrap_angles(thetas: &[f64]) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let wrapped: Vec<f64> = thetas.iter().map(|t| wrap_angle(*t)).collect();
    let mut sorted = wrapped.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n < 2 {
        return wrapped;
    }
    // gap after sorted[i]; the last gap wraps around
    let mut best = (sorted[0] + tau - sorted[n - 1], n - 1);
    for i in 0..n - 1 {
        let gap = sorted[i + 1] - sorted[i];
        if gap > best.0 {
            best = (gap, i);
        }
    }
    if best.1 == n - 1 {
        return wrapped;
    }
    let start = sorted[best.1 + 1];
    wrapped.iter().map(|&t| if t < start { t + tau } else { t }).collect()
}

/// Converts knot points to the arc-length frame. Returns the points and the mean
/// angle (wrapped into `[0, 2pi)`).
pub fn to_knot_frame(points: &[LogCentricPoint]) -> Result<(Vec<KnotFramePoint>, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyInput("knot points"));
    }
    let thetas: Vec<f64> = points.iter().map(|p| p.theta).collect();
    let unwrapped = unwrap_angles(&thetas);
    let theta_mean = unwrapped.iter().sum::<f64>() / unwrapped.len() as f64;
    let out = points
        .iter()
        .zip(&unwrapped)
        .map(|(p, &t)| KnotFramePoint {
            s: (t - theta_mean) * p.rho,
            l: p.l,
            rho: p.rho,
        })
        .collect();
    Ok((out, wrap_angle(theta_mean)))
}

/// Inverse of [`to_knot_frame`] for a known mean angle. Points at `rho = 0` map to
/// `theta_mean`.
pub fn from_knot_frame(p: &KnotFramePoint, theta_mean: f64) -> LogCentricPoint {
    let theta = if p.rho > 0.0 { theta_mean + p.s / p.rho } else { theta_mean };
    LogCentricPoint::new(theta, p.l, p.rho.max(0.0))
}
