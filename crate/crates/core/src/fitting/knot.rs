//! Fitting the nine-parameter knot model to annotated knot points.
//!
//! The fit works in the knot frame `(s, l, rho)`. Besides the nine knot
//! parameters, two more unknowns are refined: the signed rise `delta_l` and a
//! small azimuth correction `shear`, which re-centers the frame as
//! `s' = s - shear * rho`. Without it the frame's mean azimuth, which noisy
//! points near the pith pull around, would bend the straight axis `s = s0`.
//!
//! A point's residual is its distance to the elliptical shell, measured from
//! the nearest point on the axis, plus an overshoot term for points past either
//! end of the axis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::knotmodel::{resolve_knot, KnotParams, ResolvedKnot};
use crate::logcentric::{to_knot_frame, Heightmap, KnotFramePoint, LogCentricPoint};
use crate::numeric::{median_in_place, squash_ratio as squash, std_dev, unsquash_ratio as unsquash, wrap_angle};
use crate::optim::{levenberg_marquardt, LmOptions, Termination};
use crate::{Error, Result};

pub const MIN_KNOT_POINTS: usize = 30;
pub const AXIS_STATIONS: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnotFitOptions {
    pub lm: LmOptions,
    pub stations: usize,
    pub min_points: usize,
}

impl Default for KnotFitOptions {
    fn default() -> Self {
        Self {
            lm: LmOptions { max_iterations: 150, relative_cost_tolerance: 1e-10, ..Default::default() },
            stations: AXIS_STATIONS,
            min_points: MIN_KNOT_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotFitResult {
    pub params: KnotParams,
    /// Signed rise from origin to surface, mm.
    pub delta_l: f64,
    /// Azimuth of the knot frame, radians in `[0, 2pi)`.
    pub theta_mean: f64,
    pub rmse: f64,
    pub initial_rmse: f64,
    pub point_count: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl KnotFitResult {
    pub fn resolve(&self) -> Result<ResolvedKnot> {
        resolve_knot(&self.params, self.delta_l)
    }
}

/// Free vector: s0, l0, ln gamma, ln rho_max, phi0, phi1, ln r_max, psi0, psi1,
/// delta_l, shear.
fn to_free(p: &KnotParams, delta: f64, shear: f64) -> Vec<f64> {
    vec![
        p.s0,
        p.l0,
        p.gamma.ln(),
        p.rho_max.ln(),
        unsquash(p.phi0),
        unsquash(p.phi1),
        p.r_max.ln(),
        unsquash(p.psi0),
        unsquash(p.psi1),
        delta,
        shear,
    ]
}

fn from_free(x: &[f64]) -> (KnotParams, f64, f64) {
    (
        KnotParams {
            s0: x[0],
            l0: x[1],
            gamma: x[2].exp(),
            rho_max: x[3].exp(),
            phi0: squash(x[4]),
            phi1: squash(x[5]),
            r_max: x[6].exp(),
            psi0: squash(x[7]),
            psi1: squash(x[8]),
        },
        x[9],
        x[10],
    )
}

/// Sampled axis used to find the nearest axis point of every data point.
struct AxisSampler<'a> {
    k: &'a ResolvedKnot,
    step: f64,
    l: Vec<f64>,
    arc: crate::knotmodel::ArcTable,
}

impl<'a> AxisSampler<'a> {
    fn new(k: &'a ResolvedKnot, stations: usize) -> Self {
        let n = stations.max(8);
        let rm = k.params.rho_max;
        let step = rm / (n - 1) as f64;
        let l = (0..n).map(|i| k.axis_l(i as f64 * step)).collect();
        Self { k, step, l, arc: k.arc_table(rm, n - 1) }
    }

    fn dist2(&self, i: usize, q: &KnotFramePoint) -> f64 {
        let rho = i as f64 * self.step;
        (self.k.params.s0 - q.s).powi(2) + (self.l[i] - q.l).powi(2) + (rho - q.rho).powi(2)
    }

    /// Nearest axis parameter in `[0, rho_max]`.
    fn nearest(&self, q: &KnotFramePoint) -> f64 {
        let n = self.l.len();
        let rm = self.k.params.rho_max;
        let guess = ((q.rho / self.step).round().max(0.0) as usize).min(n - 1);
        let bound = self.dist2(guess, q).sqrt();
        let lo = (((q.rho - bound) / self.step).floor().max(0.0) as usize).min(n - 1);
        let hi = (((q.rho + bound) / self.step).ceil().max(0.0) as usize).min(n - 1);
        let mut best = guess;
        let mut best_d = self.dist2(guess, q);
        for i in lo..=hi {
            let d = self.dist2(i, q);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        let a = best.saturating_sub(1) as f64 * self.step;
        let b = ((best + 1).min(n - 1) as f64 * self.step).min(rm);
        let dir = self.k.direction;
        let mut rho = best as f64 * self.step;
        for _ in 0..30 {
            let dl = self.k.axis_l(rho) - q.l;
            let k1 = dir * self.k.axis_slope(rho);
            let k2 = dir * self.k.axis_curvature(rho);
            let f = dl * k1 + (rho - q.rho);
            let fp = k1 * k1 + dl * k2 + 1.0;
            let mut next = if fp > 0.0 { rho - f / fp } else { rho - f.signum() * 0.25 * (b - a) };
            next = next.clamp(a, b);
            let moved = (next - rho).abs();
            rho = next;
            if moved <= 1e-13 * (1.0 + rm) {
                break;
            }
        }
        rho
    }

    /// Shell distance and end overshoot of one point.
    fn residual(&self, q: &KnotFramePoint) -> [f64; 2] {
        let k = self.k;
        let rm = k.params.rho_max;
        let rho = self.nearest(q);
        let slope = k.direction * k.axis_slope(rho);
        let norm = (1.0 + slope * slope).sqrt();
        let (os, ol, orho) = (q.s - k.params.s0, q.l - k.axis_l(rho), q.rho - rho);
        let along = (ol * slope + orho) / norm;
        let ov = (ol - orho * slope) / norm;
        let pn = (os * os + ov * ov).sqrt();
        let r = k.radius(self.arc.at(k, rho));
        let g = k.params.gamma;
        let reach = if pn > 1e-12 {
            let (c, s) = (os / pn, ov / pn);
            r * g / ((g * c).powi(2) + s * s).sqrt()
        } else {
            r
        };
        let over = if (rho >= rm && along > 0.0) || (rho <= 0.0 && along < 0.0) { along } else { 0.0 };
        [pn - reach, over]
    }
}

/// Residual vector (two entries per point) of a knot against knot-frame points
/// after removing `shear`.
pub fn knot_residuals(k: &ResolvedKnot, shear: f64, points: &[KnotFramePoint], stations: usize) -> Vec<f64> {
    let axis = AxisSampler::new(k, stations);
    let res: Vec<[f64; 2]> = points
        .par_iter()
        .with_min_len(64)
        .map(|p| axis.residual(&KnotFramePoint { s: p.s - shear * p.rho, ..*p }))
        .collect();
    res.into_iter().flatten().collect()
}

fn rmse_of(res: &[f64], points: usize) -> f64 {
    if points == 0 {
        return 0.0;
    }
    (res.iter().map(|v| v * v).sum::<f64>() / points as f64).sqrt()
}

/// Shell distance RMSE of a knot against knot-frame points.
pub fn knot_rmse(k: &ResolvedKnot, points: &[KnotFramePoint]) -> f64 {
    rmse_of(&knot_residuals(k, 0.0, points, AXIS_STATIONS), points.len())
}

fn line_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 1e-12).then(|| sxy / sxx)
}

fn median_of(mut v: Vec<f64>) -> f64 {
    median_in_place(&mut v)
}

/// Data-driven starting point: origin, rise, incline ratios, radius profile and
/// ovality estimated from the point distribution.
pub fn initialize_knot(points: &[KnotFramePoint], rho_surface: Option<f64>) -> Result<(KnotParams, f64, f64)> {
    if points.len() < 8 {
        return Err(Error::InsufficientData(format!("{} knot points are too few to initialize", points.len())));
    }
    let mut sorted: Vec<KnotFramePoint> = points.to_vec();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    let n = sorted.len();
    let tail = (n / 20).max(3);
    let l0 = median_of(sorted[..tail].iter().map(|p| p.l).collect());
    let l_top = median_of(sorted[n - tail..].iter().map(|p| p.l).collect());
    let rho_top = median_of(sorted[n - tail..].iter().map(|p| p.rho).collect());
    let mut delta = l_top - l0;
    let rho_max = rho_surface.filter(|r| *r > 0.0).unwrap_or(rho_top).max(1e-3 + sorted[0].rho.max(0.0));
    let dir = if delta < 0.0 { -1.0 } else { 1.0 };
    if delta.abs() < 1e-6 {
        delta = 0.0;
    }
    let chord = delta.abs() / rho_max;

    let cut = (3 * n / 10).max(2);
    let slope_of = |pts: &[KnotFramePoint]| {
        line_slope(&pts.iter().map(|p| p.rho).collect::<Vec<_>>(), &pts.iter().map(|p| p.l).collect::<Vec<_>>())
    };
    let s_in = slope_of(&sorted[..cut]).unwrap_or(0.0) * dir;
    let s_out = slope_of(&sorted[n - cut..]).unwrap_or(0.0) * dir;
    let (phi0, phi1) = if chord > 1e-6 {
        let phi1 = (s_out / chord).clamp(0.05, 1.0);
        let e = if phi1 < 0.999 { (s_in / chord - phi1) / (1.0 - phi1) } else { 2.0 };
        (if e > 2.0 { (2.0 / e).clamp(0.05, 1.0) } else { 1.0 }, phi1)
    } else {
        (0.5, 0.5)
    };

    let mut p = KnotParams { s0: 0.0, l0, gamma: 1.0, rho_max, phi0, phi1, r_max: 1.0, psi0: 0.5, psi1: 0.5 };
    let axis = resolve_knot(&p, delta)?;

    // spreads per radial bin: a ring of radius R has std(s) = R / sqrt 2
    let bins = 10usize;
    let mut radii = Vec::new();
    let mut gammas = Vec::new();
    for b in 0..bins {
        let (lo, hi) = (rho_max * b as f64 / bins as f64, rho_max * (b + 1) as f64 / bins as f64);
        let inside: Vec<&KnotFramePoint> = sorted.iter().filter(|q| q.rho >= lo && q.rho < hi).collect();
        if inside.len() < 4 {
            continue;
        }
        let rho_mid = inside.iter().map(|q| q.rho).sum::<f64>() / inside.len() as f64;
        let ss: Vec<f64> = inside.iter().map(|q| q.s).collect();
        let slope = dir * axis.axis_slope(rho_mid);
        let vs: Vec<f64> = inside
            .iter()
            .map(|q| (q.l - axis.axis_l(q.rho)) / (1.0 + slope * slope).sqrt())
            .collect();
        let (sd_s, sd_v) = (std_dev(&ss), std_dev(&vs));
        radii.push((axis.arc_length(rho_mid)?, std::f64::consts::SQRT_2 * sd_s));
        if sd_s > 1e-9 {
            gammas.push(sd_v / sd_s);
        }
    }
    p.gamma = if gammas.is_empty() { 1.0 } else { median_of(gammas).clamp(0.3, 3.0) };
    let r_guess = radii.last().map(|r| r.1).filter(|r| *r > 1e-3).unwrap_or(rho_max / 20.0);
    p.r_max = r_guess;
    if radii.len() >= 3 {
        let base = p;
        let f = |x: &[f64]| {
            let q = KnotParams { r_max: x[0].exp(), psi0: squash(x[1]), psi1: squash(x[2]), ..base };
            match resolve_knot(&q, delta) {
                Ok(k) => radii.iter().map(|(c, r)| k.radius(*c) - r).collect(),
                Err(_) => vec![f64::NAN; radii.len()],
            }
        };
        let opts = LmOptions { max_iterations: 100, ..Default::default() };
        if let Ok((x, _)) = levenberg_marquardt(f, &[r_guess.ln(), 0.0, 0.0], &opts) {
            p.r_max = x[0].exp();
            p.psi0 = squash(x[1]);
            p.psi1 = squash(x[2]);
        }
    }
    let rho_sum: f64 = points.iter().map(|q| q.rho).sum();
    let shear = if rho_sum > 0.0 { points.iter().map(|q| q.s).sum::<f64>() / rho_sum } else { 0.0 };
    Ok((p, delta, shear))
}

/// Ratios below this after a fit are treated as collapsed.
const COLLAPSED_RATIO: f64 = 0.02;

/// Fits the knot model to knot points given in log-centric coordinates. The
/// heightmap, when given, supplies the surface radius above the knot.
pub fn fit_knot(points: &[LogCentricPoint], h: Option<&Heightmap>, opts: &KnotFitOptions) -> Result<KnotFitResult> {
    if points.len() < opts.min_points {
        return Err(Error::InsufficientData(format!(
            "knot has {} points, at least {} are needed",
            points.len(),
            opts.min_points
        )));
    }
    let (frame, theta_bar) = to_knot_frame(points)?;
    let mut sorted: Vec<&KnotFramePoint> = frame.iter().collect();
    sorted.sort_by(|a, b| a.rho.total_cmp(&b.rho));
    let tail = (sorted.len() / 20).max(3);
    let l_top = median_of(sorted[sorted.len() - tail..].iter().map(|p| p.l).collect());
    let rho_top = median_of(sorted[sorted.len() - tail..].iter().map(|p| p.rho).collect());
    let rho_surface = match h {
        Some(h) => Some(h.sample(theta_bar, l_top.clamp(h.grid.l_min, h.grid.l_max))?),
        None => None,
    };
    let (p0, d0, sh0) = initialize_knot(&frame, rho_surface)?;
    let x0 = to_free(&p0, d0, sh0);
    let stations = opts.stations;
    let n = frame.len();
    // ties the outer end of the knot to the surface; without a heightmap the
    // data's own outer end stands in for it, with a weight that only keeps
    // poorly constrained fits from drifting
    let anchor_weight = if h.is_some() { (n as f64).sqrt() } else { 1.0 };
    let surface_at = |p: &KnotParams, d: f64, sh: f64| match h {
        Some(h) => {
            let theta = theta_bar + sh + p.s0 / p.rho_max;
            h.sample_unchecked(theta, (p.l0 + d).clamp(h.grid.l_min, h.grid.l_max))
        }
        None => rho_top,
    };
    let residual_fn = |x: &[f64]| {
        let (p, d, sh) = from_free(x);
        match resolve_knot(&p, d) {
            Ok(k) => {
                let mut r = knot_residuals(&k, sh, &frame, stations);
                r.push(anchor_weight * (p.rho_max - surface_at(&p, d, sh)));
                r
            }
            Err(_) => vec![f64::NAN; 2 * n + 1],
        }
    };
    let initial = residual_fn(&x0);
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("knot initialization produced non-finite residuals".into()));
    }
    let initial_rmse = rmse_of(&initial[..2 * n], n);
    let solve = |start: &[f64]| match levenberg_marquardt(residual_fn, start, &opts.lm) {
        Ok((x, rep)) => Some((x, rep.termination != Termination::MaxIterations, rep.iterations, rep.final_cost)),
        Err(_) => None,
    };
    let (mut x, mut converged, mut iterations) = (x0.clone(), false, 0);
    let mut best_cost = f64::INFINITY;
    if let Some((xs, c, it, cost)) = solve(&x0) {
        (x, converged, iterations, best_cost) = (xs, c, it, cost);
    }
    // A ratio squashed against its floor has a vanishing gradient and cannot
    // recover; restart with such ratios reset to the middle of their range.
    let collapsed = |x: &[f64]| {
        let (p, _, _) = from_free(x);
        [p.phi0, p.phi1, p.psi0, p.psi1].iter().any(|v| *v < COLLAPSED_RATIO)
    };
    if collapsed(&x) {
        let (mut p, d, sh) = from_free(&x);
        for v in [&mut p.phi0, &mut p.phi1, &mut p.psi0, &mut p.psi1] {
            if *v < COLLAPSED_RATIO {
                *v = 0.5;
            }
        }
        if let Some((xs, c, it, cost)) = solve(&to_free(&p, d, sh)) {
            if cost < best_cost {
                (x, converged) = (xs, c);
            }
            iterations += it;
        }
    }
    let (params, delta_l, shear) = from_free(&x);
    let k = resolve_knot(&params, delta_l)?;
    let rmse = rmse_of(&knot_residuals(&k, shear, &frame, stations), n);
    Ok(KnotFitResult {
        params,
        delta_l,
        // the shear folds into the frame azimuth
        theta_mean: wrap_angle(theta_bar + shear),
        rmse,
        initial_rmse,
        point_count: n,
        converged,
        iterations,
    })
}
