//! Log centerline as two Chebyshev series `y(x)` and `z(x)`.
//!
//! The constant Chebyshev term is not part of the model parameters: the curve is
//! described by `n` coefficients per axis (`T_1 .. T_n`), and the constant offset
//! removed during fitting is kept separately so that the fitted curve still sits
//! on the scanned data.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::logcentric::CartesianPoint;
use crate::numeric::chebyshev::{self, ChebDomain};
use crate::numeric::median_in_place;
use crate::optim::linear_least_squares_multi;
use crate::{Error, Result};

/// Fraction of the domain length that evaluation may extrapolate past either end.
pub const DOMAIN_MARGIN: f64 = 0.1;

pub const DEFAULT_COEFFICIENTS: usize = 5;
pub const DEFAULT_SLICE_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Centerline {
    /// Coefficients of `T_1 .. T_n` for `y(x)`.
    pub coeffs_y: Vec<f64>,
    /// Coefficients of `T_1 .. T_n` for `z(x)`.
    pub coeffs_z: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    /// Constant offset removed by fitting; zero for generated logs.
    #[serde(default)]
    pub offset_y: f64,
    #[serde(default)]
    pub offset_z: f64,
}

impl Centerline {
    pub fn new(coeffs_y: Vec<f64>, coeffs_z: Vec<f64>, x_min: f64, x_max: f64) -> Result<Self> {
        let c = Self {
            coeffs_y,
            coeffs_z,
            x_min,
            x_max,
            offset_y: 0.0,
            offset_z: 0.0,
        };
        c.validate()?;
        Ok(c)
    }

    /// A straight centerline along the x axis.
    pub fn straight(n: usize, x_min: f64, x_max: f64) -> Result<Self> {
        Self::new(vec![0.0; n], vec![0.0; n], x_min, x_max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs_y.is_empty() || self.coeffs_y.len() != self.coeffs_z.len() {
            return Err(Error::InvalidParameter(
                "centerline needs n >= 1 coefficients per axis, equal for y and z".into(),
            ));
        }
        if !(self.x_max > self.x_min) || !self.x_min.is_finite() || !self.x_max.is_finite() {
            return Err(Error::InvalidParameter("centerline domain must satisfy x_max > x_min".into()));
        }
        if self
            .coeffs_y
            .iter()
            .chain(&self.coeffs_z)
            .chain([&self.offset_y, &self.offset_z])
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidParameter("non-finite centerline coefficient".into()));
        }
        Ok(())
    }

    /// Coefficients per axis.
    pub fn n(&self) -> usize {
        self.coeffs_y.len()
    }

    /// Model parameters: `n` for y and `n` for z.
    pub fn parameter_count(&self) -> usize {
        2 * self.n()
    }

    /// `[y coefficients.., z coefficients..]`
    pub fn parameters(&self) -> Vec<f64> {
        self.coeffs_y.iter().chain(&self.coeffs_z).copied().collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn domain(&self) -> ChebDomain {
        ChebDomain::new(self.x_min, self.x_max)
    }

    pub fn in_domain(&self, x: f64) -> bool {
        let m = DOMAIN_MARGIN * self.length();
        x >= self.x_min - m && x <= self.x_max + m
    }

    /// `(y, z)` at `x`, including the stored offset.
    pub fn evaluate(&self, x: f64) -> Result<(f64, f64)> {
        if !self.in_domain(x) {
            return Err(Error::Domain(format!(
                "x = {x} outside centerline domain [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(self.position(x))
    }

    /// Unchecked evaluation.
    pub fn position(&self, x: f64) -> (f64, f64) {
        let t = self.domain().to_unit(x);
        (
            self.offset_y + chebyshev::eval_without_constant(&self.coeffs_y, t),
            self.offset_z + chebyshev::eval_without_constant(&self.coeffs_z, t),
        )
    }

    /// Full coefficient vectors `T_0 .. T_n` including the offsets.
    pub fn full_coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        (
            std::iter::once(self.offset_y).chain(self.coeffs_y.iter().copied()).collect(),
            std::iter::once(self.offset_z).chain(self.coeffs_z.iter().copied()).collect(),
        )
    }
}

/// Fits a centerline to surface points: the points are cut into slices along x,
/// each well-filled interior slice contributes its (y, z) centroid with equal
/// weight, and a Chebyshev
/// series `T_0 .. T_n` is fitted per axis by least squares. The `T_0` term becomes
/// the stored offset.
pub fn fit_centerline(points: &[CartesianPoint], n: usize, slice_width: f64) -> Result<Centerline> {
    if points.is_empty() {
        return Err(Error::EmptyInput("centerline points"));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("centerline needs n >= 1".into()));
    }
    if !(slice_width > 0.0) {
        return Err(Error::InvalidParameter("slice width must be positive".into()));
    }
    let (x_min, x_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.x), hi.max(p.x)));
    if !(x_max > x_min) {
        return Err(Error::InsufficientData("points span no length along x".into()));
    }
    let n_slices = ((x_max - x_min) / slice_width).ceil().max(1.0) as usize;
    let mut acc = vec![(0.0f64, 0.0f64, 0.0f64, 0usize); n_slices];
    for p in points {
        let i = (((p.x - x_min) / slice_width) as usize).min(n_slices - 1);
        let a = &mut acc[i];
        a.0 += p.x;
        a.1 += p.y;
        a.2 += p.z;
        a.3 += 1;
    }
    let mut counts: Vec<f64> = acc.iter().filter(|a| a.3 >= 3).map(|a| a.3 as f64).collect();
    let min_count = if counts.is_empty() { 3.0 } else { (0.5 * median_in_place(&mut counts)).max(3.0) };
    let mut stations: Vec<(f64, f64, f64)> = acc
        .iter()
        .filter(|a| a.3 as f64 >= min_count)
        .map(|a| {
            let k = a.3 as f64;
            (a.0 / k, a.1 / k, a.2 / k)
        })
        .collect();
    // the end faces are not perpendicular to x in general, so the outermost
    // slices hold lopsided partial rings
    if stations.len() >= n + 3 {
        stations.pop();
        stations.remove(0);
    }
    if stations.len() < n + 1 {
        return Err(Error::InsufficientData(format!(
            "{} valid slices, need at least {}",
            stations.len(),
            n + 1
        )));
    }
    let domain = ChebDomain::new(x_min, x_max);
    let design = DMatrix::from_fn(stations.len(), n + 1, |r, c| {
        chebyshev::basis(domain.to_unit(stations[r].0), n + 1)[c]
    });
    let targets = DMatrix::from_fn(stations.len(), 2, |r, c| if c == 0 { stations[r].1 } else { stations[r].2 });
    let sol = linear_least_squares_multi(&design, &targets)?;
    let coeffs_y: Vec<f64> = (1..=n).map(|k| sol[(k, 0)]).collect();
    let coeffs_z: Vec<f64> = (1..=n).map(|k| sol[(k, 1)]).collect();
    let c = Centerline {
        coeffs_y,
        coeffs_z,
        x_min,
        x_max,
        offset_y: sol[(0, 0)],
        offset_z: sol[(0, 1)],
    };
    c.validate()?;
    Ok(c)
}
