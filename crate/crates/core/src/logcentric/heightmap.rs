use serde::{Deserialize, Serialize};

use crate::numeric::{median_in_place, wrap_angle};
use crate::{Error, Result};

use super::LogCentricPoint;

/// Grid layout of a heightmap. Columns sit at `theta_j = 2pi j / n_theta`; rows at
/// `l_i = l_min + i (l_max - l_min) / (n_l - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_l: usize,
    pub l_min: f64,
    pub l_max: f64,
}

impl GridSpec {
    pub fn new(n_theta: usize, n_l: usize, l_min: f64, l_max: f64) -> Result<Self> {
        let g = Self { n_theta, n_l, l_min, l_max };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_theta < 8 || self.n_l < 8 {
            return Err(Error::InvalidParameter(format!(
                "heightmap grid {}x{} is below the 8x8 minimum",
                self.n_theta, self.n_l
            )));
        }
        if !(self.l_max > self.l_min) || !self.l_min.is_finite() || !self.l_max.is_finite() {
            return Err(Error::InvalidParameter("heightmap needs l_max > l_min".into()));
        }
        Ok(())
    }

    pub fn d_theta(&self) -> f64 {
        std::f64::consts::TAU / self.n_theta as f64
    }

    pub fn d_l(&self) -> f64 {
        (self.l_max - self.l_min) / (self.n_l - 1) as f64
    }

    pub fn theta(&self, col: usize) -> f64 {
        col as f64 * self.d_theta()
    }

    pub fn l(&self, row: usize) -> f64 {
        if row + 1 == self.n_l {
            self.l_max
        } else {
            self.l_min + row as f64 * self.d_l()
        }
    }

    pub fn cells(&self) -> usize {
        self.n_theta * self.n_l
    }

    /// Nearest cell for a coordinate, `None` when `l` falls outside the grid.
    pub fn cell_of(&self, theta: f64, l: f64) -> Option<(usize, usize)> {
        let v = (l - self.l_min) / self.d_l();
        if !(v > -0.5 && v < self.n_l as f64 - 0.5) {
            return None;
        }
        let row = (v.round() as usize).min(self.n_l - 1);
        let col = (wrap_angle(theta) / self.d_theta()).round() as usize % self.n_theta;
        Some((row, col))
    }
}

/// Cyclic grid of surface radius over `(theta, l)`, stored row-major (one row per
/// `l` position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heightmap {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// `true` where the cell was observed, `false` where it was filled in.
    pub observed: Vec<bool>,
}

impl Heightmap {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.cells() {
            return Err(Error::InvalidParameter(format!(
                "heightmap expects {} values, got {}",
                grid.cells(),
                values.len()
            )));
        }
        let observed = vec![true; values.len()];
        Ok(Self { grid, values, observed })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.cells());
        for r in 0..grid.n_l {
            let l = grid.l(r);
            for c in 0..grid.n_theta {
                values.push(f(grid.theta(c), l));
            }
        }
        Self::from_values(grid, values)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        Self::from_values(grid, vec![value; grid.cells()])
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.grid.n_theta + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.grid.n_theta + col] = v;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.grid.n_theta;
        &self.values[row * n..(row + 1) * n]
    }

    /// Every value is finite and strictly positive.
    pub fn check_physical(&self) -> Result<()> {
        match self.values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            None => Ok(()),
            Some(i) => Err(Error::Validation(format!(
                "heightmap cell (row {}, col {}) has nonphysical radius {}",
                i / self.grid.n_theta,
                i % self.grid.n_theta,
                self.values[i]
            ))),
        }
    }

    /// Bilinear interpolation, cyclic in theta.
    pub fn sample(&self, theta: f64, l: f64) -> Result<f64> {
        let g = &self.grid;
        if !(l >= g.l_min && l <= g.l_max) {
            return Err(Error::Domain(format!("l = {l} outside heightmap range [{}, {}]", g.l_min, g.l_max)));
        }
        Ok(self.sample_unchecked(theta, l))
    }

    /// Like `sample`, with `l` clamped into the grid instead of rejected.
    pub fn sample_unchecked(&self, theta: f64, l: f64) -> f64 {
        let g = &self.grid;
        let u = wrap_angle(theta) / g.d_theta();
        let c0f = u.floor();
        let fu = u - c0f;
        let c0 = (c0f as usize) % g.n_theta;
        let c1 = (c0 + 1) % g.n_theta;
        let v = ((l - g.l_min) / g.d_l()).clamp(0.0, (g.n_l - 1) as f64);
        let r0 = (v.floor() as usize).min(g.n_l - 2);
        let fv = v - r0 as f64;
        let a = self.get(r0, c0) * (1.0 - fu) + self.get(r0, c1) * fu;
        let b = self.get(r0 + 1, c0) * (1.0 - fu) + self.get(r0 + 1, c1) * fu;
        a * (1.0 - fv) + b * fv
    }

    /// Fraction of cells that were observed.
    pub fn coverage(&self) -> f64 {
        self.observed.iter().filter(|o| **o).count() as f64 / self.observed.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
    }
}

/// Bins points into a grid spanning their `l` range.
pub fn build_heightmap(points: &[LogCentricPoint], n_theta: usize, n_l: usize) -> Result<Heightmap> {
    if points.is_empty() {
        return Err(Error::EmptyInput("heightmap points"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.l), b.max(p.l)));
    build_heightmap_on(points, GridSpec::new(n_theta, n_l, lo, hi)?)
}

/// Bins points into the given grid: each cell takes the median radius of its
/// points; empty cells are filled by cyclic neighbor averaging and flagged as
/// unobserved.
pub fn build_heightmap_on(points: &[LogCentricPoint], grid: GridSpec) -> Result<Heightmap> {
    grid.validate()?;
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); grid.cells()];
    for p in points {
        if let Some((r, c)) = grid.cell_of(p.theta, p.l) {
            bins[r * grid.n_theta + c].push(p.rho);
        }
    }
    let observed: Vec<bool> = bins.iter().map(|b| !b.is_empty()).collect();
    let n_obs = observed.iter().filter(|o| **o).count();
    if n_obs == 0 {
        return Err(Error::InsufficientData("no heightmap cell received a point".into()));
    }
    let mut values: Vec<f64> = bins.iter_mut().map(|b| median_in_place(b)).collect();
    let fill = values.iter().zip(&observed).filter(|(_, o)| **o).map(|(v, _)| *v).sum::<f64>() / n_obs as f64;
    let empty: Vec<usize> = (0..values.len()).filter(|&i| !observed[i]).collect();
    for &i in &empty {
        values[i] = fill;
    }
    fill_holes(&grid, &mut values, &empty);
    Ok(Heightmap { grid, values, observed })
}

/// Gauss-Seidel neighbor averaging over the empty cells until the largest update
/// falls below 1e-6.
fn fill_holes(grid: &GridSpec, values: &mut [f64], empty: &[usize]) {
    if empty.is_empty() {
        return;
    }
    let nt = grid.n_theta;
    for _ in 0..100_000 {
        let mut max_delta = 0.0f64;
        for &i in empty {
            let (r, c) = (i / nt, i % nt);
            let mut sum = values[r * nt + (c + 1) % nt] + values[r * nt + (c + nt - 1) % nt];
            let mut k = 2.0;
            if r > 0 {
                sum += values[(r - 1) * nt + c];
                k += 1.0;
            }
            if r + 1 < grid.n_l {
                sum += values[(r + 1) * nt + c];
                k += 1.0;
            }
            let v = sum / k;
            max_delta = max_delta.max((v - values[i]).abs());
            values[i] = v;
        }
        if max_delta < 1e-6 {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn grid() -> GridSpec {
        GridSpec::new(32, 16, 0.0, 150.0).unwrap()
    }

    #[test]
    fn cylinder_points_give_constant_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<_> = (0..40_000)
            .map(|_| LogCentricPoint::new(rng.random_range(0.0..TAU), rng.random_range(0.0..150.0), 100.0))
            .collect();
        let h = build_heightmap_on(&pts, grid()).unwrap();
        assert!(h.observed.iter().all(|o| *o));
        assert!(h.values.iter().all(|v| (v - 100.0).abs() < 1e-12));
    }

    #[test]
    fn single_hole_is_filled_and_flagged() {
        let g = grid();
        let mut pts = Vec::new();
        for r in 0..g.n_l {
            for c in 0..g.n_theta {
                if (r, c) != (5, 7) {
                    pts.push(LogCentricPoint::new(g.theta(c), g.l(r), 100.0));
                }
            }
        }
        let h = build_heightmap_on(&pts, g).unwrap();
        assert!(!h.observed[5 * g.n_theta + 7]);
        assert!((h.get(5, 7) - 100.0).abs() < 1e-9);
        assert_eq!(h.observed.iter().filter(|o| !**o).count(), 1);
    }

    #[test]
    fn hole_at_seam_uses_cyclic_neighbors() {
        let g = grid();
        let mut pts = Vec::new();
        for r in 0..g.n_l {
            for c in 0..g.n_theta {
                if c != 0 {
                    let v = if c == g.n_theta - 1 || c == 1 { 90.0 } else { 100.0 };
                    pts.push(LogCentricPoint::new(g.theta(c), g.l(r), v));
                }
            }
        }
        let h = build_heightmap_on(&pts, g).unwrap();
        assert!((h.get(3, 0) - 90.0).abs() < 1e-5);
    }

    #[test]
    fn analytic_surface_binning_error_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = |t: f64| 100.0 + 5.0 * t.cos();
        let pts: Vec<_> = (0..200_000)
            .map(|_| {
                let t = rng.random_range(0.0..TAU);
                LogCentricPoint::new(t, rng.random_range(0.0..150.0), f(t))
            })
            .collect();
        let g = grid();
        let h = build_heightmap_on(&pts, g).unwrap();
        for r in 0..g.n_l {
            for c in 0..g.n_theta {
                let t = g.theta(c);
                let grad = 5.0 * t.sin().abs().max(5.0f64.recip() * g.d_theta());
                let bound = 0.5 * grad * g.d_theta() + 1e-9;
                assert!((h.get(r, c) - f(t)).abs() <= bound, "({r},{c})");
            }
        }
    }

    #[test]
    fn all_empty_is_error() {
        let pts = [LogCentricPoint::new(0.0, 1e6, 10.0)];
        assert!(build_heightmap_on(&pts, grid()).is_err());
        assert!(build_heightmap(&[], 16, 16).is_err());
    }

    #[test]
    fn sample_at_cell_center_and_midpoint() {
        let g = grid();
        let h = Heightmap::from_fn(g, |t, l| 100.0 + t + 0.01 * l).unwrap();
        assert!((h.sample(g.theta(3), g.l(4)).unwrap() - h.get(4, 3)).abs() < 1e-12);
        let mid = 0.5 * (g.theta(3) + g.theta(4));
        let expect = 0.5 * (h.get(4, 3) + h.get(4, 4));
        assert!((h.sample(mid, g.l(4)).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn sample_is_cyclic() {
        let g = grid();
        let h = Heightmap::from_fn(g, |t, l| 100.0 + (3.0 * t).sin() + 0.01 * l).unwrap();
        assert_eq!(h.sample(0.0, 50.0).unwrap(), h.sample(TAU, 50.0).unwrap());
        for t in [0.25, 1.0, 3.0, 6.0] {
            assert!((h.sample(t, 70.0).unwrap() - h.sample(t + TAU, 70.0).unwrap()).abs() < 1e-12);
        }
        // last column interpolates toward column 0
        let near = g.theta(g.n_theta - 1) + 0.5 * g.d_theta();
        let expect = 0.5 * (h.get(2, g.n_theta - 1) + h.get(2, 0));
        assert!((h.sample(near, g.l(2)).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_sample_is_domain_error() {
        let h = Heightmap::constant(grid(), 1.0).unwrap();
        assert!(matches!(h.sample(0.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn grid_minimum_enforced() {
        assert!(GridSpec::new(4, 16, 0.0, 1.0).is_err());
    }
}
