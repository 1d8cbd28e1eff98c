//! Generation of new logs from parameter statistics, and sampling of
//! synthetic scan data from generated logs.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centerline::Centerline;
use crate::fitting::log::{producer, Provenance};
use crate::fitting::{reconstruct, AnnotatedKnot, AnnotatedLogData, KnotRecord, LogModel, MeanBand, ReconstructOptions, LOG_MODEL_SCHEMA};
use crate::knotmodel::surface_rise;
use crate::logcentric::{CartesianPoint, GridSpec, Heightmap, LogCentricPoint, LogFrame};
use crate::numeric::wrap_angle;
use crate::stats::{surface_knot_from_stat_vector, ModelStatistics};
use crate::surface::{compose_heightmap, BaseShape, GrainConfig, SurfaceKnot, SurfaceLayers, ThicknessCluster, ThicknessModel};
use crate::{Error, Result};

/// Attempts per generation stage before giving up.
const STAGE_TRIES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputToggles {
    pub heightmap: bool,
    pub point_cloud: bool,
    pub mesh: bool,
    pub knot_labels: bool,
}

impl Default for OutputToggles {
    fn default() -> Self {
        Self { heightmap: true, point_cloud: false, mesh: false, knot_labels: true }
    }
}

/// Replacements for individual statistics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatOverrides {
    /// Fixed number of knots in every whorl.
    pub knots_per_cluster: Option<usize>,
    /// Fixed distance between whorls, mm.
    pub whorl_spacing: Option<f64>,
    /// Use a straight centerline.
    pub straight_centerline: bool,
    /// Replaces the whole grain configuration; its seed is still derived per log.
    pub grain: Option<GrainConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub seed: u64,
    /// Log length along x, mm; drawn from the statistics' range when absent.
    pub log_length: Option<f64>,
    pub n_theta: usize,
    /// Heightmap rows; one row per 4 mm when absent.
    pub n_l: Option<usize>,
    /// Whorls keep at least this distance from either log end, mm.
    pub end_margin: f64,
    /// Surface samples per mm^2 when a point cloud is produced.
    pub point_density: f64,
    pub overrides: StatOverrides,
    pub outputs: OutputToggles,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            log_length: None,
            n_theta: 256,
            n_l: None,
            end_margin: 200.0,
            point_density: 0.02,
            overrides: StatOverrides::default(),
            outputs: OutputToggles::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.log_length {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!("log length must be positive, got {l}")));
            }
        }
        if self.n_theta < 64 || self.n_l.is_some_and(|n| n < 64) {
            return Err(Error::InvalidParameter("generation grid must be at least 64 x 64".into()));
        }
        if !(self.end_margin >= 0.0) || !(self.point_density > 0.0) {
            return Err(Error::InvalidParameter("end margin must be >= 0 and point density > 0".into()));
        }
        if let Some(s) = self.overrides.whorl_spacing {
            if !(s > 0.0) {
                return Err(Error::InvalidParameter("whorl spacing must be positive".into()));
            }
        }
        Ok(())
    }
}

/// A generated log with its rendered surface and knot geometry.
#[derive(Debug, Clone)]
pub struct GeneratedLog {
    pub model: LogModel,
    /// Final surface including surface knots and grain.
    pub heightmap: Heightmap,
    /// Surface before surface knots and grain were added.
    pub base: Heightmap,
    /// Sampled knot shells in log-centric coordinates, in model order.
    pub knot_shells: Vec<Vec<LogCentricPoint>>,
}

/// Independent random stream for log `index` of a run with `seed`.
pub fn log_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn whorl_centers<R: Rng + ?Sized>(stats: &ModelStatistics, cfg: &GenerationConfig, length: f64, rng: &mut R) -> Vec<f64> {
    let spacing = |rng: &mut R| cfg.overrides.whorl_spacing.unwrap_or_else(|| stats.whorls.sample_spacing(rng));
    let (lo, hi) = (cfg.end_margin, length - cfg.end_margin);
    let mut centers = Vec::new();
    if hi <= lo {
        return centers;
    }
    let mut c = lo + rng.random::<f64>() * spacing(rng);
    while c <= hi {
        centers.push(c);
        c += spacing(rng).max(1.0);
    }
    centers
}

/// Generates log `index` of a run. The same `(stats, cfg, index)` always gives
/// the same log.
pub fn generate_log(stats: &ModelStatistics, cfg: &GenerationConfig, index: u64) -> Result<GeneratedLog> {
    cfg.validate()?;
    stats.validate()?;
    let mut rng = log_rng(cfg.seed, index);
    let rng = &mut rng;
    let length = cfg.log_length.unwrap_or_else(|| stats.length.min + rng.random::<f64>() * (stats.length.max - stats.length.min));

    // centerline
    let n = stats.centerline.dimension() / 2;
    let coeffs = if cfg.overrides.straight_centerline { vec![0.0; 2 * n] } else { stats.centerline.sample(rng)? };
    let centerline = Centerline::new(coeffs[..n].to_vec(), coeffs[n..].to_vec(), 0.0, length)?;
    let frame = LogFrame::new(&centerline)?;
    let arc = frame.core_length();
    let n_l = cfg.n_l.unwrap_or(((arc / 4.0).round() as usize + 1).max(64));
    let grid = GridSpec::new(cfg.n_theta, n_l, 0.0, arc)?;

    // whorls, thickness and base shape
    let centers = whorl_centers(stats, cfg, arc, rng);
    let counts: Vec<usize> = centers
        .iter()
        .map(|_| cfg.overrides.knots_per_cluster.unwrap_or_else(|| stats.whorls.sample_knot_count(rng)))
        .collect();
    let bs = &stats.base_shape;
    let mut surface = None;
    for _ in 0..STAGE_TRIES {
        let line = stats.thickness.line.sample(rng)?;
        let clusters = centers
            .iter()
            .map(|c| {
                let v = stats.thickness.cluster.sample(rng)?;
                Ok(ThicknessCluster { center: *c, alpha: v[0], beta: v[1], gamma: v[2].exp() })
            })
            .collect::<Result<Vec<_>>>()?;
        let thickness = ThicknessModel { a: line[0], b: line[1], clusters, rmse: None };
        let mut base_shape = BaseShape::zeros(bs.n_fourier, bs.m_cheb, grid.l_min, grid.l_max)?;
        base_shape.coeffs = bs.sample(rng);
        for j in 0..bs.m_cheb {
            base_shape.set_coeff(j, 0, num_complex::Complex64::new(0.0, 0.0));
        }
        let layers = SurfaceLayers { base: Some(&base_shape), thickness: Some(&thickness), ..Default::default() };
        if let Ok(h) = compose_heightmap(&grid, &layers) {
            surface = Some((thickness, base_shape, h));
            break;
        }
    }
    let (thickness, base_shape, base) =
        surface.ok_or_else(|| Error::Numeric(format!("no physical base surface after {STAGE_TRIES} draws")))?;

    // internal knots
    let mut knots = Vec::new();
    let mut id = 1u32;
    let mut sampled = None;
    for _ in 0..STAGE_TRIES {
        let draw = stats.sample_knot_hierarchy(rng, &counts)?;
        let mut recs = Vec::new();
        let mut ok = true;
        'outer: for (ci, cluster) in draw.iter().enumerate() {
            for k in cluster {
                let mut placed = None;
                for _ in 0..STAGE_TRIES {
                    let theta_mean = rng.random::<f64>() * TAU;
                    let mut p = k.params;
                    p.l0 += centers[ci];
                    if let Ok(rise) = surface_rise(&p, k.tau.tan(), &base, theta_mean) {
                        p.rho_max = rise.rho_max;
                        if p.validate().is_ok() {
                            placed = Some((p, rise.delta_l, theta_mean));
                            break;
                        }
                    }
                }
                match placed {
                    Some((params, delta_l, theta_mean)) => recs.push((ci, params, delta_l, theta_mean)),
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            sampled = Some(recs);
            break;
        }
    }
    let sampled = sampled.ok_or_else(|| Error::Numeric(format!("knots could not be placed inside the log after {STAGE_TRIES} draws")))?;
    for (cluster, params, delta_l, theta_mean) in sampled {
        let v = stats.surface_knot.sample(rng)?;
        let (alpha_theta, alpha_l, m, amplitude) = surface_knot_from_stat_vector(&v);
        let rec = KnotRecord { id, cluster, params, delta_l, theta_mean: wrap_angle(theta_mean), rmse: None, surface: None };
        let e = rec.emergence();
        let surface = SurfaceKnot {
            theta: wrap_angle(e.theta),
            l: e.l,
            arc_radius: params.rho_max,
            r_theta: params.r_max,
            r_l: params.gamma * params.r_max,
            alpha_theta,
            alpha_l,
            m,
            amplitude,
        };
        knots.push(KnotRecord { surface: Some(surface), ..rec });
        id += 1;
    }

    let mut grain = cfg.overrides.grain.clone().unwrap_or_default();
    grain.seed = rng.random();
    let model = LogModel {
        schema_version: LOG_MODEL_SCHEMA,
        centerline,
        grid,
        thickness,
        base_shape,
        mean_band: MeanBand::Thickness,
        grain,
        knots,
        provenance: Provenance { source: format!("generated log {index}"), seed: Some(cfg.seed), producer: producer() },
    };
    model.validate()?;
    let r = reconstruct(&model, &ReconstructOptions::default())?;
    Ok(GeneratedLog { model, heightmap: r.heightmap, base, knot_shells: r.knot_shells })
}

/// Generates `count` logs in parallel, log `i` from stream `i`.
pub fn generate_logs(stats: &ModelStatistics, cfg: &GenerationConfig, count: usize) -> Result<Vec<GeneratedLog>> {
    (0..count as u64).into_par_iter().map(|i| generate_log(stats, cfg, i)).collect()
}

/// Stratified random points on the surface described by `h`, in Cartesian
/// coordinates of the model's centerline. Each grid cell receives a count
/// proportional to its area, rounded randomly so the total is unbiased.
pub fn sample_surface_points<R: Rng + ?Sized>(model: &LogModel, h: &Heightmap, density: f64, rng: &mut R) -> Result<Vec<CartesianPoint>> {
    if !(density > 0.0) || !density.is_finite() {
        return Err(Error::InvalidParameter(format!("point density must be positive, got {density}")));
    }
    let frame = LogFrame::new(&model.centerline)?;
    let g = h.grid;
    let (dt, dl) = (g.d_theta(), g.d_l());
    let mut out = Vec::new();
    for r in 0..g.n_l - 1 {
        for c in 0..g.n_theta {
            let mean_rho = 0.25 * (h.get(r, c) + h.get(r, (c + 1) % g.n_theta) + h.get(r + 1, c) + h.get(r + 1, (c + 1) % g.n_theta));
            let expected = density * mean_rho * dt * dl;
            let count = expected.floor() as usize + usize::from(rng.random::<f64>() < expected.fract());
            for _ in 0..count {
                let theta = g.theta(c) + rng.random::<f64>() * dt;
                let l = g.l(r) + rng.random::<f64>() * dl;
                let rho = h.sample_unchecked(theta, l);
                out.push(frame.from_log_centric(&LogCentricPoint::new(theta, l, rho))?);
            }
        }
    }
    Ok(out)
}

/// Knot shell points in Cartesian coordinates.
pub fn sample_knot_points(model: &LogModel, knot: usize, samples_axis: usize, samples_angle: usize) -> Result<Vec<CartesianPoint>> {
    let frame = LogFrame::new(&model.centerline)?;
    let k = &model.knots[knot];
    k.resolve()?
        .body_points(k.theta_mean, samples_axis, samples_angle)?
        .iter()
        .map(|p| frame.from_log_centric(p))
        .collect()
}

impl GeneratedLog {
    /// Synthetic scan of this log: surface points at `density` and labelled
    /// knot shells, all noise-free.
    pub fn annotated(&self, id: &str, density: f64, seed: u64) -> Result<AnnotatedLogData> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let surface_points = sample_surface_points(&self.model, &self.heightmap, density, &mut rng)?;
        let knots = (0..self.model.knots.len())
            .map(|i| {
                let k = &self.model.knots[i];
                Ok(AnnotatedKnot { knot_id: k.id, cluster_id: Some(k.cluster as u32), points: sample_knot_points(&self.model, i, 40, 24)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AnnotatedLogData { id: id.to_string(), surface_points, knots })
    }
}
