//! Nine-parameter knot model.
//!
//! A knot grows from its origin `(s0, l0)` on the pith outward. Its axis rises
//! along `l` as `K_l(rho)` and its radius grows with the axis arc length `c` as
//! `K_r(c)`. Both use the same curve family
//!
//! ```text
//! K(x) = alpha * (1 - exp(-E x / max(0, x_max - x))) + L x
//! ```
//!
//! which is exponential near the origin and linear near the surface. The
//! coefficients are not stored directly. Instead, two shape ratios in `(0, 1]`
//! are stored:
//!
//! - `phi1` (`psi1`) is the endpoint slope as a fraction of the chord slope:
//!   `L = phi1 * rise / x_max`, so `alpha = rise * (1 - phi1) >= 0`.
//! - `phi0` (`psi0`) sets the initial incline through `E = 2 / phi0`. The curve
//!   is concave on `[0, x_max)` exactly when `E >= 2`, so `phi0 = 1` is the
//!   flattest concave member and `phi0 -> 0` approaches a vertical start.
//!
//! Cross-sections are ellipses perpendicular to the axis with horizontal
//! (tangential) semi-axis `K_r` and vertical semi-axis `gamma * K_r`.

use serde::{Deserialize, Serialize};

use crate::logcentric::{from_knot_frame, Heightmap, KnotFramePoint, LogCentricPoint};
use crate::numeric::quadrature::{gauss_legendre5, integrate};
use crate::{Error, Result};

/// The nine scalars describing one knot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnotParams {
    /// Origin arc coordinate, mm.
    pub s0: f64,
    /// Origin longitudinal coordinate, mm.
    pub l0: f64,
    /// Ovality: vertical over horizontal semi-axis.
    pub gamma: f64,
    /// Radial distance at which the knot reaches the surface, mm.
    pub rho_max: f64,
    pub phi0: f64,
    pub phi1: f64,
    /// Knot radius at the surface, mm.
    pub r_max: f64,
    pub psi0: f64,
    pub psi1: f64,
}

pub const KNOT_PARAM_NAMES: [&str; 9] = ["s0", "l0", "gamma", "rho_max", "phi0", "phi1", "r_max", "psi0", "psi1"];

impl KnotParams {
    pub fn to_array(&self) -> [f64; 9] {
        [
            self.s0, self.l0, self.gamma, self.rho_max, self.phi0, self.phi1, self.r_max, self.psi0, self.psi1,
        ]
    }

    pub fn from_array(a: [f64; 9]) -> Self {
        Self {
            s0: a[0],
            l0: a[1],
            gamma: a[2],
            rho_max: a[3],
            phi0: a[4],
            phi1: a[5],
            r_max: a[6],
            psi0: a[7],
            psi1: a[8],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite knot parameter".into()));
        }
        let ratio = |name: &str, v: f64| {
            if v > 0.0 && v <= 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {v} must lie in (0, 1]")))
            }
        };
        ratio("phi0", self.phi0)?;
        ratio("phi1", self.phi1)?;
        ratio("psi0", self.psi0)?;
        ratio("psi1", self.psi1)?;
        for (name, v) in [("gamma", self.gamma), ("rho_max", self.rho_max), ("r_max", self.r_max)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[inline]
fn growth(alpha: f64, slope: f64, exponent: f64, x: f64, x_max: f64) -> f64 {
    let d = (x_max - x).max(0.0);
    if d == 0.0 {
        return alpha + slope * x;
    }
    alpha * (1.0 - (-exponent * x / d).exp()) + slope * x
}

#[inline]
fn growth_slope(alpha: f64, slope: f64, exponent: f64, x: f64, x_max: f64) -> f64 {
    let d = (x_max - x).max(0.0);
    let g = if d == 0.0 { f64::INFINITY } else { exponent * x / d };
    if g > 700.0 {
        return slope;
    }
    alpha * exponent * x_max / (d * d) * (-g).exp() + slope
}

#[inline]
fn growth_curvature(alpha: f64, exponent: f64, x: f64, x_max: f64) -> f64 {
    let d = (x_max - x).max(0.0);
    let g = if d == 0.0 { f64::INFINITY } else { exponent * x / d };
    if g > 700.0 {
        return 0.0;
    }
    let g1 = exponent * x_max / (d * d);
    let g2 = 2.0 * exponent * x_max / (d * d * d);
    alpha * (-g).exp() * (g2 - g1 * g1)
}

/// Knot parameters together with the derived coefficients of both curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolvedKnot {
    pub params: KnotParams,
    /// Longitudinal rise from origin to surface (magnitude), mm.
    pub delta_l: f64,
    /// `+1` for knots growing toward larger `l`, `-1` otherwise.
    pub direction: f64,
    /// Axis arc length at the surface, mm.
    pub c_max: f64,
    pub alpha_l: f64,
    pub slope_l: f64,
    pub exponent_l: f64,
    pub alpha_r: f64,
    pub slope_r: f64,
    pub exponent_r: f64,
}

/// Resolves the curve coefficients. A negative `delta_l` marks a knot growing
/// toward smaller `l`.
pub fn resolve_knot(p: &KnotParams, delta_l: f64) -> Result<ResolvedKnot> {
    p.validate()?;
    if !delta_l.is_finite() {
        return Err(Error::InvalidParameter("delta_l must be finite".into()));
    }
    let direction = if delta_l < 0.0 { -1.0 } else { 1.0 };
    let rise = delta_l.abs();
    let mut k = ResolvedKnot {
        params: *p,
        delta_l: rise,
        direction,
        c_max: 0.0,
        alpha_l: rise * (1.0 - p.phi1),
        slope_l: p.phi1 * rise / p.rho_max,
        exponent_l: 2.0 / p.phi0,
        alpha_r: 0.0,
        slope_r: 0.0,
        exponent_r: 2.0 / p.psi0,
    };
    k.c_max = k.arc_length(p.rho_max)?;
    k.alpha_r = p.r_max * (1.0 - p.psi1);
    k.slope_r = p.psi1 * p.r_max / k.c_max;
    Ok(k)
}

impl ResolvedKnot {
    /// Unsigned axis rise `K_l(rho)`.
    pub fn axis(&self, rho: f64) -> f64 {
        growth(self.alpha_l, self.slope_l, self.exponent_l, rho, self.params.rho_max)
    }

    pub fn axis_slope(&self, rho: f64) -> f64 {
        growth_slope(self.alpha_l, self.slope_l, self.exponent_l, rho, self.params.rho_max)
    }

    pub fn axis_curvature(&self, rho: f64) -> f64 {
        growth_curvature(self.alpha_l, self.exponent_l, rho, self.params.rho_max)
    }

    /// Knot radius `K_r(c)` at axis arc length `c`.
    pub fn radius(&self, c: f64) -> f64 {
        growth(self.alpha_r, self.slope_r, self.exponent_r, c, self.c_max)
    }

    pub fn radius_slope(&self, c: f64) -> f64 {
        growth_slope(self.alpha_r, self.slope_r, self.exponent_r, c, self.c_max)
    }

    /// Signed longitudinal position of the axis: `l0 + direction * K_l(rho)`.
    pub fn axis_l(&self, rho: f64) -> f64 {
        self.params.l0 + self.direction * self.axis(rho)
    }

    fn speed(&self, rho: f64) -> f64 {
        let d = self.axis_slope(rho);
        (1.0 + d * d).sqrt()
    }

    /// Length of the axis curve from the origin to `rho`.
    pub fn arc_length(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) {
            return Err(Error::Domain(format!("arc length needs rho >= 0, got {rho}")));
        }
        let rm = self.params.rho_max;
        let inner = integrate(|t| self.speed(t), 0.0, rho.min(rm), 1e-10)?;
        if rho <= rm {
            return Ok(inner);
        }
        Ok(inner + (rho - rm) * (1.0 + self.slope_l * self.slope_l).sqrt())
    }

    /// Arc-length table on `n + 1` evenly spaced axis stations over `[0, rho_end]`.
    pub fn arc_table(&self, rho_end: f64, n: usize) -> ArcTable {
        let step = rho_end / n as f64;
        let mut c = Vec::with_capacity(n + 1);
        c.push(0.0);
        for i in 0..n {
            let a = i as f64 * step;
            let prev = c[i];
            c.push(prev + gauss_legendre5(|t| self.speed(t), a, a + step));
        }
        ArcTable { step, c }
    }

    /// Point on the knot axis in knot-frame coordinates.
    pub fn axis_point(&self, rho: f64) -> KnotFramePoint {
        KnotFramePoint {
            s: self.params.s0,
            l: self.axis_l(rho),
            rho,
        }
    }

    /// Sampled knot shell in knot-frame coordinates. Stations run from the
    /// origin to `rho_max`; each carries an ellipse perpendicular to the axis.
    pub fn body_frame_points(&self, samples_axis: usize, samples_angle: usize) -> Result<Vec<KnotFramePoint>> {
        if samples_axis < 4 || samples_angle < 4 {
            return Err(Error::InvalidParameter("knot body needs at least 4 samples per direction".into()));
        }
        let rm = self.params.rho_max;
        let mut out = Vec::with_capacity(samples_axis * samples_angle);
        let mut c = 0.0;
        let mut prev = 0.0;
        for i in 0..samples_axis {
            let rho = rm * i as f64 / (samples_axis - 1) as f64;
            if i > 0 {
                c += integrate(|t| self.speed(t), prev, rho, 1e-10)?;
            }
            prev = rho;
            let r = self.radius(c);
            out.extend(self.ellipse(rho, r, samples_angle));
        }
        Ok(out)
    }

    /// Ellipse of horizontal semi-axis `r` around the axis point at `rho`.
    pub fn ellipse(&self, rho: f64, r: f64, samples_angle: usize) -> impl Iterator<Item = KnotFramePoint> + '_ {
        let center = self.axis_point(rho);
        let slope = self.direction * self.axis_slope(rho);
        let norm = (1.0 + slope * slope).sqrt();
        // vertical direction: tangent x s-axis
        let (vl, vr) = (1.0 / norm, -slope / norm);
        let gamma = self.params.gamma;
        (0..samples_angle).map(move |j| {
            let a = std::f64::consts::TAU * j as f64 / samples_angle as f64;
            let (sn, cs) = a.sin_cos();
            KnotFramePoint {
                s: center.s + r * cs,
                l: center.l + gamma * r * sn * vl,
                rho: center.rho + gamma * r * sn * vr,
            }
        })
    }

    /// Sampled knot shell converted to log-centric coordinates.
    pub fn body_points(&self, theta_mean: f64, samples_axis: usize, samples_angle: usize) -> Result<Vec<LogCentricPoint>> {
        Ok(self
            .body_frame_points(samples_axis, samples_angle)?
            .iter()
            .map(|p| from_knot_frame(p, theta_mean))
            .collect())
    }

    /// Where the axis meets the surface, in log-centric coordinates.
    pub fn surface_point(&self, theta_mean: f64) -> LogCentricPoint {
        let rm = self.params.rho_max;
        LogCentricPoint::new(theta_mean + self.params.s0 / rm, self.axis_l(rm), rm)
    }
}

/// Cumulative axis arc length on evenly spaced stations.
#[derive(Debug, Clone)]
pub struct ArcTable {
    pub step: f64,
    pub c: Vec<f64>,
}

impl ArcTable {
    /// Arc length at any `rho` in the table range (linear extension beyond it).
    pub fn at(&self, knot: &ResolvedKnot, rho: f64) -> f64 {
        let last = self.c.len() - 1;
        let i = ((rho / self.step).floor().max(0.0) as usize).min(last);
        let a = i as f64 * self.step;
        self.c[i] + gauss_legendre5(|t| knot.speed(t), a, rho)
    }
}

pub fn knot_axis(k: &ResolvedKnot, rho: f64) -> f64 {
    k.axis(rho)
}

pub fn knot_radius(k: &ResolvedKnot, c: f64) -> f64 {
    k.radius(c)
}

pub fn arc_length(k: &ResolvedKnot, rho: f64) -> Result<f64> {
    k.arc_length(rho)
}

pub fn knot_body_points(k: &ResolvedKnot, theta_mean: f64, samples_axis: usize, samples_angle: usize) -> Result<Vec<LogCentricPoint>> {
    k.body_points(theta_mean, samples_axis, samples_angle)
}

/// Result of intersecting a knot axis with the log surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceRise {
    pub delta_l: f64,
    pub rho_max: f64,
    pub iterations: usize,
}

/// Fixed-point search for the rise `delta_l` at which a knot with mean incline
/// `tan_tau` (rise over run) meets the surface: `delta = H(theta0, l0 + delta) * tan_tau`.
pub fn surface_rise(p: &KnotParams, tan_tau: f64, h: &Heightmap, theta_mean: f64) -> Result<SurfaceRise> {
    if !tan_tau.is_finite() {
        return Err(Error::InvalidParameter("incline must be finite".into()));
    }
    let theta_at = |rho: f64| if rho > 0.0 { theta_mean + p.s0 / rho } else { theta_mean };
    let sample = |rho_hint: f64, delta: f64| {
        h.sample(theta_at(rho_hint), p.l0 + delta)
            .map_err(|_| Error::Domain(format!("knot at l0 = {} leaves the heightmap (too close to a log end)", p.l0)))
    };
    let mut delta = 0.0;
    let mut rho = sample(0.0, 0.0)?;
    for it in 1..=10 {
        rho = sample(rho, delta)?;
        let next = rho * tan_tau;
        let moved = (next - delta).abs();
        delta = next;
        if moved < 0.1 {
            let rho_max = sample(rho, delta)?;
            return Ok(SurfaceRise { delta_l: delta, rho_max, iterations: it });
        }
    }
    let rho_max = sample(rho, delta)?;
    Ok(SurfaceRise { delta_l: delta, rho_max, iterations: 10 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logcentric::GridSpec;

    fn params() -> KnotParams {
        KnotParams {
            s0: 0.0,
            l0: 1000.0,
            gamma: 1.2,
            rho_max: 100.0,
            phi0: 1.0,
            phi1: 0.4,
            r_max: 15.0,
            psi0: 0.6,
            psi1: 0.5,
        }
    }

    #[test]
    fn substitution_values() {
        let k = resolve_knot(&params(), 50.0).unwrap();
        assert!((k.slope_l - 0.2).abs() < 1e-15);
        assert!((k.alpha_l - 30.0).abs() < 1e-12);
        assert_eq!(k.exponent_l, 2.0);
        // independent restatement of the alpha relation
        assert!((k.alpha_l - (50.0 - k.slope_l * 100.0)).abs() < 1e-12);
    }

    #[test]
    fn straight_axis_when_phi1_is_one() {
        let k = resolve_knot(&KnotParams { phi1: 1.0, ..params() }, 50.0).unwrap();
        assert_eq!(k.alpha_l, 0.0);
        for rho in [0.0, 10.0, 55.5, 100.0] {
            assert!((k.axis(rho) - 0.5 * rho).abs() < 1e-12);
        }
        let c = k.arc_length(100.0).unwrap();
        assert!((c - (100.0f64.powi(2) + 50.0f64.powi(2)).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn hand_evaluated_axis() {
        let k = resolve_knot(&params(), 50.0).unwrap();
        // 30 (1 - e^-2) + 0.2 * 50
        let expected = 30.0 * (1.0 - (-2.0f64).exp()) + 10.0;
        assert!((k.axis(50.0) - expected).abs() < 1e-12);
        assert!((k.axis(50.0) - 35.94).abs() < 5e-3);
    }

    #[test]
    fn boundary_values() {
        let k = resolve_knot(&params(), 50.0).unwrap();
        assert_eq!(k.axis(0.0), 0.0);
        assert!((k.axis(100.0) - 50.0).abs() < 1e-12);
        assert_eq!(k.radius(0.0), 0.0);
        assert!((k.radius(k.c_max) - 15.0).abs() < 1e-12);
        assert_eq!(k.arc_length(0.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_cone_when_psi1_is_one() {
        let k = resolve_knot(&KnotParams { psi1: 1.0, ..params() }, 50.0).unwrap();
        for c in [0.0, 20.0, k.c_max] {
            assert!((k.radius(c) - 15.0 / k.c_max * c).abs() < 1e-12);
        }
    }

    #[test]
    fn saturation_beyond_surface() {
        let k = resolve_knot(&params(), 50.0).unwrap();
        for rho in [100.0, 120.0, 300.0] {
            assert_eq!(k.axis(rho) - (k.alpha_l + k.slope_l * rho), 0.0);
        }
    }

    #[test]
    fn invalid_ratios_rejected() {
        assert!(resolve_knot(&KnotParams { phi0: 0.0, ..params() }, 10.0).is_err());
        assert!(resolve_knot(&KnotParams { psi0: 0.0, ..params() }, 10.0).is_err());
        assert!(resolve_knot(&KnotParams { rho_max: 0.0, ..params() }, 10.0).is_err());
        assert!(resolve_knot(&KnotParams { rho_max: -3.0, ..params() }, 10.0).is_err());
    }

    #[test]
    fn downward_knot_mirrors_upward() {
        let up = resolve_knot(&params(), 40.0).unwrap();
        let down = resolve_knot(&params(), -40.0).unwrap();
        for rho in [10.0, 60.0, 100.0] {
            assert!((up.axis_l(rho) - 1000.0 + (down.axis_l(rho) - 1000.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn arc_length_matches_polyline() {
        let k = resolve_knot(&KnotParams { phi0: 0.3, phi1: 0.2, ..params() }, 70.0).unwrap();
        let n = 1_000_000;
        let h = 100.0 / n as f64;
        let mut sum = 0.0;
        let mut prev = k.axis(0.0);
        for i in 1..=n {
            let cur = k.axis(i as f64 * h);
            sum += (h * h + (cur - prev).powi(2)).sqrt();
            prev = cur;
        }
        let c = k.arc_length(100.0).unwrap();
        assert!(((c - sum) / sum).abs() < 1e-4, "{c} vs {sum}");
        assert!(c >= 100.0);
    }

    #[test]
    fn arc_table_agrees_with_adaptive() {
        let k = resolve_knot(&KnotParams { phi0: 0.3, ..params() }, 60.0).unwrap();
        let t = k.arc_table(100.0, 512);
        for rho in [3.3, 50.0, 99.9, 100.0] {
            assert!((t.at(&k, rho) - k.arc_length(rho).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn circular_sections_when_gamma_is_one() {
        let k = resolve_knot(&KnotParams { gamma: 1.0, ..params() }, 50.0).unwrap();
        let c = k.arc_length(60.0).unwrap();
        let r = k.radius(c);
        let center = k.axis_point(60.0);
        let d: Vec<f64> = k
            .ellipse(60.0, r, 32)
            .map(|p| ((p.s - center.s).powi(2) + (p.l - center.l).powi(2) + (p.rho - center.rho).powi(2)).sqrt())
            .collect();
        let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
        assert!((hi / lo - 1.0).abs() < 1e-12);
    }

    #[test]
    fn body_collapses_at_origin_and_matches_formulas() {
        let k = resolve_knot(&params(), 50.0).unwrap();
        let pts = k.body_frame_points(20, 16).unwrap();
        assert!(pts[..16].iter().all(|p| p.s == 0.0 && p.l == 1000.0 && p.rho == 0.0));
        let mut c = 0.0;
        for i in 0..20 {
            let rho = 100.0 * i as f64 / 19.0;
            if i > 0 {
                c = k.arc_length(rho).unwrap();
            }
            let ring = &pts[i * 16..(i + 1) * 16];
            let mean_l = ring.iter().map(|p| p.l).sum::<f64>() / 16.0;
            let mean_rho = ring.iter().map(|p| p.rho).sum::<f64>() / 16.0;
            assert!((mean_l - (1000.0 + k.axis(rho))).abs() < 1e-9);
            assert!((mean_rho - rho).abs() < 1e-9);
            let r = k.radius(c);
            for p in ring {
                let d = ((p.s).powi(2) + (p.l - mean_l).powi(2) + (p.rho - mean_rho).powi(2)).sqrt();
                assert!(d <= 1.2 * r + 1e-6);
            }
        }
    }

    #[test]
    fn surface_rise_on_cylinder() {
        let g = GridSpec::new(64, 64, 0.0, 3000.0).unwrap();
        let h = Heightmap::constant(g, 100.0).unwrap();
        let flat = surface_rise(&params(), 0.0, &h, 1.0).unwrap();
        assert_eq!((flat.delta_l, flat.rho_max), (0.0, 100.0));
        let inclined = surface_rise(&params(), 0.5, &h, 1.0).unwrap();
        assert!((inclined.delta_l - 50.0).abs() < 1e-12);
        assert_eq!(inclined.rho_max, 100.0);
    }

    #[test]
    fn surface_rise_matches_bisection_on_taper() {
        let g = GridSpec::new(64, 256, 0.0, 3000.0).unwrap();
        let h = Heightmap::from_fn(g, |_, l| 150.0 - 0.01 * l).unwrap();
        let tan_tau = 0.6;
        let r = surface_rise(&params(), tan_tau, &h, 0.3).unwrap();
        let f = |d: f64| d - h.sample(0.3, 1000.0 + d).unwrap() * tan_tau;
        let (mut lo, mut hi) = (0.0, 200.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((r.delta_l - lo).abs() < 0.1, "{} vs {lo}", r.delta_l);
    }

    #[test]
    fn surface_rise_off_the_map_is_error() {
        let g = GridSpec::new(16, 16, 0.0, 1050.0).unwrap();
        let h = Heightmap::constant(g, 100.0).unwrap();
        assert!(surface_rise(&params(), 1.0, &h, 0.0).is_err());
    }

    mod properties {
        use super::super::*;
        use proptest::prelude::*;

        fn valid_knot() -> impl Strategy<Value = (KnotParams, f64)> {
            (
                (-50.0..50.0f64, 100.0..3000.0f64, 0.3..3.0f64, 20.0..250.0f64),
                (1e-3..=1.0f64, 0.0..=1.0f64, 1.0..40.0f64, 1e-3..=1.0f64, 0.0..=1.0f64),
                0.0..200.0f64,
            )
                .prop_map(|((s0, l0, gamma, rho_max), (phi0, phi1, r_max, psi0, psi1), delta)| {
                    let p = KnotParams {
                        s0,
                        l0,
                        gamma,
                        rho_max,
                        phi0,
                        phi1: phi1.max(1e-9),
                        r_max,
                        psi0,
                        psi1: psi1.max(1e-9),
                    };
                    (p, delta)
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn boundary_identities((p, delta) in valid_knot()) {
                let k = resolve_knot(&p, delta).unwrap();
                prop_assert!(k.axis(0.0).abs() < 1e-12);
                prop_assert!((k.axis(p.rho_max) - delta).abs() <= 1e-9 * delta);
                prop_assert!((k.radius(k.c_max) - p.r_max).abs() <= 1e-9 * p.r_max);
                prop_assert!(k.alpha_l >= 0.0 && k.alpha_r >= 0.0);
                prop_assert!(k.exponent_l >= 2.0 && k.exponent_r >= 2.0);
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(500))]
            #[test]
            fn concave_and_monotone((p, delta) in valid_knot()) {
                let k = resolve_knot(&p, delta).unwrap();
                let n = 1000;
                let h = p.rho_max / n as f64;
                let vals: Vec<f64> = (0..n).map(|i| k.axis(i as f64 * h)).collect();
                for w in vals.windows(3) {
                    prop_assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9);
                }
                for w in vals.windows(2) {
                    prop_assert!(w[1] >= w[0]);
                }
                let hc = k.c_max / n as f64;
                let radii: Vec<f64> = (0..=n).map(|i| k.radius(i as f64 * hc)).collect();
                for w in radii.windows(2) {
                    prop_assert!(w[1] >= w[0]);
                }
            }

            #[test]
            fn saturation_is_exact((p, delta) in valid_knot(), extra in 1e-6..500.0f64) {
                let k = resolve_knot(&p, delta).unwrap();
                let rho = p.rho_max + extra;
                prop_assert_eq!(k.axis(rho) - (k.alpha_l + k.slope_l * rho), 0.0);
            }

            #[test]
            fn arc_length_increasing_and_superlinear((p, delta) in valid_knot()) {
                let k = resolve_knot(&p, delta).unwrap();
                let mut prev = 0.0;
                for i in 1..=20 {
                    let rho = p.rho_max * 1.2 * i as f64 / 20.0;
                    let c = k.arc_length(rho).unwrap();
                    prop_assert!(c > prev);
                    prop_assert!(c >= rho * (1.0 - 1e-12));
                    prev = c;
                }
            }
        }
    }
}
