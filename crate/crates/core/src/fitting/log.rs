//! Whole-log fitting, the serialized log model, and reconstruction.

use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centerline::{fit_centerline, Centerline, DEFAULT_COEFFICIENTS, DEFAULT_SLICE_WIDTH};
use crate::knotmodel::{resolve_knot, KnotParams, ResolvedKnot};
use crate::logcentric::{build_heightmap_on, GridSpec, Heightmap, LogCentricPoint, LogFrame};
use crate::numeric::{median_in_place, wrap_angle};
use crate::surface::{
    compose_heightmap, fit_base_shape, fit_surface_knot, fit_thickness, BaseShape, GrainConfig, SurfaceKnot, SurfaceLayers,
    SurfacePatch, ThicknessModel,
};
use crate::surface::thickness::{fit_thickness_profile, row_means};
use crate::logcentric::CartesianPoint;
use crate::{Error, Result};

use super::cluster::{cluster_knots, clustering_from_labels, Clustering, DEFAULT_CLUSTER_GAP};
use super::knot::{fit_knot, KnotFitOptions};

pub const LOG_MODEL_SCHEMA: u32 = 1;

/// Average surface points per heightmap cell below which the fitting grid is
/// coarsened along the log.
pub const MIN_POINTS_PER_CELL: f64 = 2.0;

/// One annotated knot: its id, an optional whorl label, and its points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedKnot {
    pub knot_id: u32,
    #[serde(default)]
    pub cluster_id: Option<u32>,
    pub points: Vec<CartesianPoint>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotatedLogData {
    pub id: String,
    pub surface_points: Vec<CartesianPoint>,
    pub knots: Vec<AnnotatedKnot>,
}

impl AnnotatedLogData {
    /// Knot ids must be unique and every group non-empty.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for k in &self.knots {
            if !seen.insert(k.knot_id) {
                return Err(Error::Validation(format!("duplicate knot id {}", k.knot_id)));
            }
            if k.points.is_empty() {
                return Err(Error::Validation(format!("knot {} has no points", k.knot_id)));
            }
        }
        if self.surface_points.is_empty() {
            return Err(Error::EmptyInput("surface points"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub centerline_coefficients: usize,
    pub slice_width: f64,
    pub n_theta: usize,
    /// Row spacing of the heightmap, mm.
    pub l_step: f64,
    pub n_fourier: usize,
    pub m_cheb: usize,
    pub cluster_gap: f64,
    pub knot: KnotFitOptions,
    /// Half size of the surface-knot window, in zero-crossing radii.
    pub surface_window: f64,
    /// Grain settings recorded into fitted models; grain is not fitted.
    pub grain: GrainConfig,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            centerline_coefficients: DEFAULT_COEFFICIENTS,
            slice_width: DEFAULT_SLICE_WIDTH,
            n_theta: 256,
            l_step: 4.0,
            n_fourier: 10,
            m_cheb: 10,
            cluster_gap: DEFAULT_CLUSTER_GAP,
            knot: KnotFitOptions::default(),
            surface_window: 6.0,
            grain: GrainConfig::default(),
        }
    }
}

impl FitConfig {
    /// Heightmap grid covering `[l_min, l_max]` at the configured spacing.
    pub fn grid_for(&self, l_min: f64, l_max: f64) -> Result<GridSpec> {
        if !(self.l_step > 0.0) {
            return Err(Error::InvalidParameter("l_step must be positive".into()));
        }
        let n_l = (((l_max - l_min) / self.l_step).round() as usize + 1).max(8);
        GridSpec::new(self.n_theta, n_l, l_min, l_max)
    }
}

/// Which part of the model supplies the mean radius of each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanBand {
    /// The constant Fourier band of the base shape.
    BaseShape,
    /// The thickness profile, replacing the constant Fourier band.
    Thickness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotRecord {
    pub id: u32,
    pub cluster: usize,
    pub params: KnotParams,
    /// Signed rise from origin to surface, mm.
    pub delta_l: f64,
    pub theta_mean: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    /// Surface bump where the knot emerges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceKnot>,
}

impl KnotRecord {
    pub fn resolve(&self) -> Result<ResolvedKnot> {
        resolve_knot(&self.params, self.delta_l)
    }

    /// Where the knot axis meets the surface.
    pub fn emergence(&self) -> LogCentricPoint {
        let p = &self.params;
        LogCentricPoint::new(self.theta_mean + p.s0 / p.rho_max, p.l0 + self.delta_l, p.rho_max)
    }

    /// Incline angle of the chord from origin to surface.
    pub fn incline(&self) -> f64 {
        self.delta_l.atan2(self.params.rho_max)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Provenance {
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub producer: String,
}

/// Complete parametric description of one log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogModel {
    pub schema_version: u32,
    pub centerline: Centerline,
    /// Heightmap grid the surface was fitted or generated on.
    pub grid: GridSpec,
    pub thickness: ThicknessModel,
    pub base_shape: BaseShape,
    pub mean_band: MeanBand,
    pub grain: GrainConfig,
    pub knots: Vec<KnotRecord>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl LogModel {
    pub fn surface_knots(&self) -> Vec<SurfaceKnot> {
        self.knots.iter().filter_map(|k| k.surface).collect()
    }

    /// Mean surface radius, used to unroll the surface for grain.
    pub fn reference_radius(&self) -> f64 {
        let g = &self.grid;
        let n = 32;
        let mean = (0..n)
            .map(|i| {
                let l = g.l_min + (g.l_max - g.l_min) * (i as f64 + 0.5) / n as f64;
                match self.mean_band {
                    MeanBand::Thickness => self.thickness.eval(l),
                    MeanBand::BaseShape => self.base_shape.dc(l),
                }
            })
            .sum::<f64>()
            / n as f64;
        mean.max(1.0)
    }

    /// Checks every structural invariant, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: String| Err(Error::Validation(what));
        if self.schema_version != LOG_MODEL_SCHEMA {
            return fail(format!("schema_version {} is not supported (expected {LOG_MODEL_SCHEMA})", self.schema_version));
        }
        self.centerline.validate().map_err(|e| Error::Validation(format!("centerline: {e}")))?;
        self.grid.validate().map_err(|e| Error::Validation(format!("grid: {e}")))?;
        self.thickness.validate().map_err(|e| Error::Validation(format!("thickness: {e}")))?;
        self.base_shape.validate().map_err(|e| Error::Validation(format!("base_shape: {e}")))?;
        self.grain.validate().map_err(|e| Error::Validation(format!("grain: {e}")))?;
        let tol = 1e-9 * (1.0 + self.grid.l_max.abs());
        if (self.base_shape.l_min - self.grid.l_min).abs() > tol || (self.base_shape.l_max - self.grid.l_max).abs() > tol {
            return fail("shared l-domain: base shape and grid disagree".into());
        }
        let mut ids = HashSet::new();
        for k in &self.knots {
            if !ids.insert(k.id) {
                return fail(format!("knot ids unique: id {} repeats", k.id));
            }
            if !(k.params.rho_max > 0.0) {
                return fail(format!("knot {}: rho_max > 0 (got {})", k.id, k.params.rho_max));
            }
            k.params.validate().map_err(|e| Error::Validation(format!("knot {}: {e}", k.id)))?;
            let r = k.resolve().map_err(|e| Error::Validation(format!("knot {}: {e}", k.id)))?;
            if r.alpha_l < 0.0 || r.alpha_r < 0.0 {
                return fail(format!("knot {}: non-negative alpha", k.id));
            }
            if let Some(s) = &k.surface {
                s.validate().map_err(|e| Error::Validation(format!("knot {} surface bump: {e}", k.id)))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotReportRow {
    pub id: u32,
    pub cluster: usize,
    pub points: usize,
    pub rmse: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedKnot {
    pub id: u32,
    pub reason: String,
}

/// Fit summary of one log. Knot RMSE statistics use the sample standard
/// deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogFitReport {
    pub log_id: String,
    pub knots: Vec<KnotReportRow>,
    pub skipped: Vec<SkippedKnot>,
    pub knot_count: usize,
    pub rmse_mean: f64,
    pub rmse_sd: f64,
    /// RMS difference between the binned heightmap and its smooth reconstruction.
    pub surface_rmse: f64,
    pub thickness_rmse: Option<f64>,
    pub stage_failures: Vec<String>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (m, 0.0);
    }
    (m, (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

impl LogFitReport {
    /// Per-knot table followed by the log's mean and standard deviation.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Log {}", self.log_id);
        let _ = writeln!(s, "{:>6} {:>8} {:>7} {:>10} {:>10}", "knot", "cluster", "points", "RMSE [mm]", "converged");
        for k in &self.knots {
            let _ = writeln!(s, "{:>6} {:>8} {:>7} {:>10.3} {:>10}", k.id, k.cluster, k.points, k.rmse, k.converged);
        }
        for k in &self.skipped {
            let _ = writeln!(s, "{:>6} skipped: {}", k.id, k.reason);
        }
        let _ = writeln!(s, "mu    {:>10.3}", self.rmse_mean);
        let _ = writeln!(s, "sigma {:>10.3}", self.rmse_sd);
        let _ = writeln!(s, "surface RMSE {:.3} mm", self.surface_rmse);
        for f in &self.stage_failures {
            let _ = writeln!(s, "stage failure: {f}");
        }
        s
    }
}

/// Table with one column per log plus an "All" column: knot count, RMSE mean
/// and RMSE standard deviation.
pub fn summary_table(reports: &[LogFitReport]) -> String {
    let all: Vec<f64> = reports.iter().flat_map(|r| r.knots.iter().map(|k| k.rmse)).collect();
    let (m, sd) = mean_sd(&all);
    let mut s = String::new();
    let _ = write!(s, "{:<12}", "Log");
    for r in reports {
        let _ = write!(s, "{:>10}", r.log_id);
    }
    let _ = writeln!(s, "{:>10}", "All");
    let _ = write!(s, "{:<12}", "Knots");
    for r in reports {
        let _ = write!(s, "{:>10}", r.knot_count);
    }
    let _ = writeln!(s, "{:>10}", all.len());
    let _ = write!(s, "{:<12}", "RMSE mu");
    for r in reports {
        let _ = write!(s, "{:>10.2}", r.rmse_mean);
    }
    let _ = writeln!(s, "{:>10.2}", m);
    let _ = write!(s, "{:<12}", "RMSE sigma");
    for r in reports {
        let _ = write!(s, "{:>10.2}", r.rmse_sd);
    }
    let _ = writeln!(s, "{:>10.2}", sd);
    s
}

/// 3x3 median filter, cyclic in theta, clamped at the log ends.
pub fn median_filter3(h: &Heightmap) -> Heightmap {
    let g = h.grid;
    let (nt, nl) = (g.n_theta, g.n_l);
    let mut out = h.clone();
    let mut buf = Vec::with_capacity(9);
    for r in 0..nl {
        for c in 0..nt {
            buf.clear();
            for dr in [-1i64, 0, 1] {
                let rr = (r as i64 + dr).clamp(0, nl as i64 - 1) as usize;
                for dc in [nt - 1, 0, 1] {
                    buf.push(h.get(rr, (c + dc) % nt));
                }
            }
            out.set(r, c, median_in_place(&mut buf));
        }
    }
    out
}

/// Fits a complete log model to annotated data.
pub fn fit_log(data: &AnnotatedLogData, cfg: &FitConfig) -> Result<(LogModel, LogFitReport)> {
    data.validate()?;
    let mut failures = Vec::new();
    let centerline = fit_centerline(&data.surface_points, cfg.centerline_coefficients, cfg.slice_width)?;
    let frame = LogFrame::new(&centerline)?;
    let surface: Vec<LogCentricPoint> = data
        .surface_points
        .par_iter()
        .map(|p| frame.to_log_centric(p))
        .collect::<Result<_>>()?;
    let (l_min, l_max) = surface
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.l), b.max(p.l)));
    let mut h = build_heightmap_on(&surface, fitting_grid(cfg, &surface, l_min, l_max)?)?;
    // oblique or ragged end faces leave partial rings in the end rows; the
    // modeled surface starts and stops at the first and last half-full rows
    if let Some((lo, hi)) = full_ring_span(&h) {
        if lo > h.grid.l_min || hi < h.grid.l_max {
            let inside: Vec<LogCentricPoint> = surface.iter().filter(|p| p.l >= lo && p.l <= hi).copied().collect();
            h = build_heightmap_on(&inside, fitting_grid(cfg, &inside, lo, hi)?)?;
        }
    }
    let grid = h.grid;

    let base_shape = fit_base_shape(&h, cfg.n_fourier, cfg.m_cheb)?;
    // smooth surface for anchoring knots: the row means keep the whorl
    // swellings that the Chebyshev band cannot follow, while surface bumps and
    // grain average out around the circumference
    let means = row_means(&h);
    let mut anchor = h.clone();
    for (r, mean) in means.iter().enumerate() {
        let row = base_shape.row(grid.l(r), grid.n_theta, false);
        for (c, v) in row.iter().enumerate() {
            anchor.set(r, c, v + mean);
        }
    }
    let fits: Vec<(u32, Option<u32>, Result<super::KnotFitResult>)> = data
        .knots
        .par_iter()
        .map(|k| {
            let pts = k.points.iter().map(|p| frame.to_log_centric(p)).collect::<Result<Vec<_>>>();
            (k.knot_id, k.cluster_id, pts.and_then(|pts| fit_knot(&pts, Some(&anchor), &cfg.knot)))
        })
        .collect();
    let mut skipped = Vec::new();
    let mut fitted = Vec::new();
    for (id, label, r) in fits {
        match r {
            Ok(f) => fitted.push((id, label, f)),
            Err(e) => skipped.push(SkippedKnot { id, reason: e.to_string() }),
        }
    }

    let l0s: Vec<f64> = fitted.iter().map(|f| f.2.params.l0).collect();
    let clustering: Clustering = if !fitted.is_empty() && fitted.iter().all(|f| f.1.is_some()) {
        let labels: Vec<u32> = fitted.iter().map(|f| f.1.unwrap_or(0)).collect();
        clustering_from_labels(&l0s, &labels)
    } else {
        cluster_knots(&l0s, cfg.cluster_gap)
    };

    // surface bands
    let centers: Vec<f64> = clustering.centers.iter().copied().filter(|c| *c >= grid.l_min && *c <= grid.l_max).collect();
    let (thickness, mut mean_band) = match fit_thickness(&h, &centers) {
        Ok(t) => (t, MeanBand::Thickness),
        Err(e) => {
            failures.push(format!("thickness: {e}"));
            let ls: Vec<f64> = (0..grid.n_l).map(|r| grid.l(r)).collect();
            (fit_thickness_profile(&ls, &means, &[])?, MeanBand::BaseShape)
        }
    };
    let smooth_with = |band: MeanBand| {
        compose_heightmap(
            &grid,
            &SurfaceLayers {
                base: Some(&base_shape),
                thickness: (band == MeanBand::Thickness).then_some(&thickness),
                ..Default::default()
            },
        )
    };
    let smooth = match smooth_with(mean_band) {
        Ok(s) => s,
        Err(e) if mean_band == MeanBand::Thickness => {
            failures.push(format!("thickness band: {e}"));
            mean_band = MeanBand::BaseShape;
            smooth_with(mean_band)?
        }
        Err(e) => return Err(e),
    };
    let mut residual = h.clone();
    residual.values.iter_mut().zip(&smooth.values).for_each(|(a, b)| *a -= b);
    let residual = median_filter3(&residual);

    let mut knots = Vec::with_capacity(fitted.len());
    for (i, (id, _, f)) in fitted.iter().enumerate() {
        let mut rec = KnotRecord {
            id: *id,
            cluster: clustering.assignment[i],
            params: f.params,
            delta_l: f.delta_l,
            theta_mean: f.theta_mean,
            rmse: Some(f.rmse),
            surface: None,
        };
        let e = rec.emergence();
        if e.l >= grid.l_min && e.l <= grid.l_max {
            let arc_radius = h.sample(e.theta, e.l)?;
            let template = SurfaceKnot {
                theta: e.theta,
                l: e.l,
                arc_radius,
                r_theta: f.params.r_max,
                r_l: f.params.gamma * f.params.r_max,
                alpha_theta: 0.5,
                alpha_l: 0.5,
                m: 2.0,
                amplitude: 0.0,
            };
            let patch = SurfacePatch::from_heightmap(
                &residual,
                e.theta,
                e.l,
                arc_radius,
                cfg.surface_window * template.r_theta,
                cfg.surface_window * template.r_l,
            );
            match fit_surface_knot(&patch, &template) {
                Ok(s) if !s.degenerate => rec.surface = Some(s.knot),
                Ok(_) => failures.push(format!("surface knot {id}: no bump resolved in the window")),
                Err(err) => failures.push(format!("surface knot {id}: {err}")),
            }
        }
        knots.push(rec);
    }

    let model = LogModel {
        schema_version: LOG_MODEL_SCHEMA,
        centerline,
        grid,
        thickness,
        base_shape,
        mean_band,
        grain: cfg.grain.clone(),
        knots,
        provenance: Provenance { source: data.id.clone(), seed: None, producer: producer() },
    };
    let recon = reconstruct(&model, &ReconstructOptions { grain: false, ..Default::default() })?;
    let surface_rmse = rms_diff(&recon.heightmap.values, &h.values);

    let rows: Vec<KnotReportRow> = fitted
        .iter()
        .enumerate()
        .map(|(i, (id, _, f))| KnotReportRow {
            id: *id,
            cluster: clustering.assignment[i],
            points: f.point_count,
            rmse: f.rmse,
            converged: f.converged,
        })
        .collect();
    let (rmse_mean, rmse_sd) = mean_sd(&rows.iter().map(|r| r.rmse).collect::<Vec<_>>());
    let report = LogFitReport {
        log_id: data.id.clone(),
        knot_count: rows.len(),
        knots: rows,
        skipped,
        rmse_mean,
        rmse_sd,
        surface_rmse,
        thickness_rmse: model.thickness.rmse,
        stage_failures: failures,
    };
    Ok((model, report))
}

/// Fitting grid over `[l_min, l_max]`. Sparse clouds get longer cells so that
/// most cells hold data.
fn fitting_grid(cfg: &FitConfig, surface: &[LogCentricPoint], l_min: f64, l_max: f64) -> Result<GridSpec> {
    let grid = cfg.grid_for(l_min, l_max)?;
    let per_cell = surface.len() as f64 / grid.cells() as f64;
    if per_cell < MIN_POINTS_PER_CELL {
        let n_l = ((surface.len() as f64 / (MIN_POINTS_PER_CELL * grid.n_theta as f64)) as usize).max(8);
        return GridSpec::new(grid.n_theta, n_l, l_min, l_max);
    }
    Ok(grid)
}

/// l range from the outer edge of the first row to the outer edge of the last
/// row that has at least half of its cells observed.
fn full_ring_span(h: &Heightmap) -> Option<(f64, f64)> {
    let g = &h.grid;
    let full = |r: &usize| 2 * h.observed[r * g.n_theta..(r + 1) * g.n_theta].iter().filter(|o| **o).count() >= g.n_theta;
    let first = (0..g.n_l).find(full)?;
    let last = (0..g.n_l).rev().find(full)?;
    if last < first + 7 {
        return None;
    }
    let half = 0.5 * g.d_l();
    let lo = if first == 0 { g.l_min } else { g.l(first) - half };
    let hi = if last == g.n_l - 1 { g.l_max } else { g.l(last) + half };
    Some((lo, hi))
}

pub(crate) fn producer() -> String {
    format!("logsynth {}", env!("CARGO_PKG_VERSION"))
}

pub fn rms_diff(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n == 0 {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructOptions {
    /// Grid to render on; the model's own grid when `None`.
    pub grid: Option<GridSpec>,
    pub grain: bool,
    pub knot_samples_axis: usize,
    pub knot_samples_angle: usize,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self { grid: None, grain: true, knot_samples_axis: 32, knot_samples_angle: 24 }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub heightmap: Heightmap,
    /// Sampled shell of every knot, in model order.
    pub knot_shells: Vec<Vec<LogCentricPoint>>,
}

/// Renders the surface heightmap and the knot shells of a model.
pub fn reconstruct(model: &LogModel, opts: &ReconstructOptions) -> Result<Reconstruction> {
    let grid = opts.grid.unwrap_or(model.grid);
    let bumps = model.surface_knots();
    let radius = model.reference_radius();
    let layers = SurfaceLayers {
        base: Some(&model.base_shape),
        thickness: (model.mean_band == MeanBand::Thickness).then_some(&model.thickness),
        knots: &bumps,
        grain: opts.grain.then_some((&model.grain, radius)),
    };
    let heightmap = compose_heightmap(&grid, &layers)?;
    let knot_shells = model
        .knots
        .iter()
        .map(|k| k.resolve()?.body_points(k.theta_mean, opts.knot_samples_axis, opts.knot_samples_angle))
        .collect::<Result<Vec<_>>>()?;
    Ok(Reconstruction { heightmap, knot_shells })
}

/// Converts log-centric points of a model to Cartesian coordinates.
pub fn to_cartesian(model: &LogModel, points: &[LogCentricPoint]) -> Result<Vec<CartesianPoint>> {
    let frame = LogFrame::new(&model.centerline)?;
    points.iter().map(|p| frame.from_log_centric(p)).collect()
}

/// Model of a plain cylinder of radius `radius` along `+x`.
pub fn cylinder_model(radius: f64, length: f64, grid: GridSpec) -> Result<LogModel> {
    let mut base_shape = BaseShape::zeros(10, 10, grid.l_min, grid.l_max)?;
    base_shape.set_coeff(0, 0, num_complex::Complex64::new(radius, 0.0));
    Ok(LogModel {
        schema_version: LOG_MODEL_SCHEMA,
        centerline: Centerline::straight(DEFAULT_COEFFICIENTS, 0.0, length)?,
        grid,
        thickness: ThicknessModel::linear(0.0, radius),
        base_shape,
        mean_band: MeanBand::BaseShape,
        grain: GrainConfig { amplitude: 0.0, ..Default::default() },
        knots: Vec::new(),
        provenance: Provenance { source: "cylinder".into(), seed: None, producer: producer() },
    })
}

/// Azimuth of a point in `[0, 2pi)`; re-exported for callers that mix frames.
pub fn normalize_azimuth(theta: f64) -> f64 {
    wrap_angle(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_reconstructs_exactly() {
        let g = GridSpec::new(64, 100, 0.0, 1000.0).unwrap();
        let m = cylinder_model(120.0, 1000.0, g).unwrap();
        m.validate().unwrap();
        let r = reconstruct(&m, &ReconstructOptions::default()).unwrap();
        assert!(r.heightmap.values.iter().all(|v| (v - 120.0).abs() < 1e-12));
        let thick = LogModel { mean_band: MeanBand::Thickness, base_shape: BaseShape::zeros(10, 10, 0.0, 1000.0).unwrap(), ..m };
        let r = reconstruct(&thick, &ReconstructOptions::default()).unwrap();
        assert!(r.heightmap.values.iter().all(|v| (v - 120.0).abs() < 1e-12));
    }

    #[test]
    fn validation_names_the_invariant() {
        let g = GridSpec::new(64, 100, 0.0, 1000.0).unwrap();
        let mut m = cylinder_model(120.0, 1000.0, g).unwrap();
        m.knots.push(KnotRecord {
            id: 1,
            cluster: 0,
            params: KnotParams { s0: 0.0, l0: 500.0, gamma: 1.0, rho_max: -5.0, phi0: 0.5, phi1: 0.5, r_max: 5.0, psi0: 0.5, psi1: 0.5 },
            delta_l: 10.0,
            theta_mean: 0.0,
            rmse: None,
            surface: None,
        });
        match m.validate() {
            Err(Error::Validation(msg)) => assert!(msg.contains("rho_max"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_statistics() {
        let rows = [1.0, 2.0, 4.0];
        let (m, sd) = mean_sd(&rows);
        assert!((m - 7.0 / 3.0).abs() < 1e-12);
        let expect = (((1.0 - m) * (1.0 - m) + (2.0 - m) * (2.0 - m) + (4.0 - m) * (4.0 - m)) / 2.0f64).sqrt();
        assert!((sd - expect).abs() < 1e-12);
    }

    #[test]
    fn median_filter_removes_spike() {
        let g = GridSpec::new(16, 16, 0.0, 100.0).unwrap();
        let mut h = Heightmap::constant(g, 1.0).unwrap();
        h.set(4, 0, 50.0);
        let f = median_filter3(&h);
        assert!(f.values.iter().all(|v| *v == 1.0));
    }
}
