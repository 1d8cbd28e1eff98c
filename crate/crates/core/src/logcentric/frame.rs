use crate::centerline::{Centerline, DOMAIN_MARGIN};
use crate::numeric::chebyshev;
use crate::numeric::quadrature::gauss_legendre5;
use crate::numeric::wrap_angle;
use crate::{Error, Result};

use super::{CartesianPoint, LogCentricPoint};

const CORE_INTERVALS: usize = 2048;

type V3 = [f64; 3];

#[inline]
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[inline]
fn normalize(a: V3) -> V3 {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Rotates `v` by the minimal rotation taking unit vector `a` onto unit vector `b`.
#[inline]
fn rotate_minimal(a: V3, b: V3, v: V3) -> V3 {
    let k = cross(a, b);
    let c = dot(a, b);
    let kv = cross(k, v);
    let f = dot(k, v) / (1.0 + c);
    [
        v[0] * c + kv[0] + k[0] * f,
        v[1] * c + kv[1] + k[1] * f,
        v[2] * c + kv[2] + k[2] * f,
    ]
}

/// Precomputed geometry of a centerline: arc-length table and a
/// rotation-minimizing normal frame. Immutable once built.
#[derive(Debug, Clone)]
pub struct LogFrame {
    centerline: Centerline,
    y: Vec<f64>,
    z: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<f64>,
    ddy: Vec<f64>,
    ddz: Vec<f64>,
    x_lo: f64,
    step: f64,
    /// Arc length at each station, zero at `x_min`.
    arc: Vec<f64>,
    tangents: Vec<V3>,
    normals: Vec<V3>,
}

impl LogFrame {
    pub fn new(centerline: &Centerline) -> Result<Self> {
        centerline.validate()?;
        let (y, z) = centerline.full_coefficients();
        let dy = chebyshev::derivative(&y);
        let dz = chebyshev::derivative(&z);
        let ddy = chebyshev::derivative(&dy);
        let ddz = chebyshev::derivative(&dz);
        let len = centerline.length();
        let step = len / CORE_INTERVALS as f64;
        let extra = (DOMAIN_MARGIN * len / step).ceil() as usize;
        let x_lo = centerline.x_min - extra as f64 * step;
        let n_stations = CORE_INTERVALS + 2 * extra + 1;
        let mut frame = Self {
            centerline: centerline.clone(),
            y,
            z,
            dy,
            dz,
            ddy,
            ddz,
            x_lo,
            step,
            arc: vec![0.0; n_stations],
            tangents: vec![[1.0, 0.0, 0.0]; n_stations],
            normals: vec![[0.0, 0.0, 1.0]; n_stations],
        };
        for i in 0..n_stations {
            frame.tangents[i] = frame.tangent(frame.station_x(i));
        }
        for i in 1..n_stations {
            let (a, b) = (frame.station_x(i - 1), frame.station_x(i));
            frame.arc[i] = frame.arc[i - 1] + gauss_legendre5(|x| frame.speed(x), a, b);
        }
        let zero = frame.arc[extra];
        frame.arc.iter_mut().for_each(|a| *a -= zero);

        let t0 = frame.tangents[extra];
        let zaxis = [0.0, 0.0, 1.0];
        let seed = {
            let d = dot(zaxis, t0);
            let v = [zaxis[0] - d * t0[0], zaxis[1] - d * t0[1], zaxis[2] - d * t0[2]];
            if dot(v, v) < 1e-20 {
                return Err(Error::InvalidParameter("centerline tangent parallel to +z".into()));
            }
            normalize(v)
        };
        frame.normals[extra] = seed;
        for i in extra + 1..n_stations {
            let n = rotate_minimal(frame.tangents[i - 1], frame.tangents[i], frame.normals[i - 1]);
            frame.normals[i] = frame.orthonormalize(n, frame.tangents[i]);
        }
        for i in (0..extra).rev() {
            let n = rotate_minimal(frame.tangents[i + 1], frame.tangents[i], frame.normals[i + 1]);
            frame.normals[i] = frame.orthonormalize(n, frame.tangents[i]);
        }
        Ok(frame)
    }

    fn orthonormalize(&self, n: V3, t: V3) -> V3 {
        let d = dot(n, t);
        normalize([n[0] - d * t[0], n[1] - d * t[1], n[2] - d * t[2]])
    }

    pub fn centerline(&self) -> &Centerline {
        &self.centerline
    }

    fn station_x(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.step
    }

    fn x_hi(&self) -> f64 {
        self.station_x(self.arc.len() - 1)
    }

    fn station_index(&self, x: f64) -> usize {
        let i = ((x - self.x_lo) / self.step).floor();
        (i.max(0.0) as usize).min(self.arc.len() - 2)
    }

    /// Position, first and second derivative with respect to x.
    fn curve(&self, x: f64) -> (V3, V3, V3) {
        let dom = self.centerline.domain();
        let t = dom.to_unit(x);
        let s = dom.scale();
        (
            [x, chebyshev::eval(&self.y, t), chebyshev::eval(&self.z, t)],
            [1.0, s * chebyshev::eval(&self.dy, t), s * chebyshev::eval(&self.dz, t)],
            [0.0, s * s * chebyshev::eval(&self.ddy, t), s * s * chebyshev::eval(&self.ddz, t)],
        )
    }

    fn speed(&self, x: f64) -> f64 {
        let (_, d, _) = self.curve(x);
        dot(d, d).sqrt()
    }

    fn tangent(&self, x: f64) -> V3 {
        normalize(self.curve(x).1)
    }

    /// `(T, N, B)` at x.
    pub fn frame_at(&self, x: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let i = self.station_index(x);
        let t = self.tangent(x);
        let n = self.orthonormalize(rotate_minimal(self.tangents[i], t, self.normals[i]), t);
        let b = cross(n, t);
        (t, n, b)
    }

    /// Arc length from `x_min` to `x`.
    pub fn arc_length_at(&self, x: f64) -> f64 {
        let i = self.station_index(x);
        self.arc[i] + gauss_legendre5(|u| self.speed(u), self.station_x(i), x)
    }

    /// Inverse of [`LogFrame::arc_length_at`].
    pub fn x_at_arc(&self, l: f64) -> Result<f64> {
        let last = self.arc.len() - 1;
        if !(l >= self.arc[0] && l <= self.arc[last]) {
            return Err(Error::Domain(format!(
                "l = {l} outside centerline range [{}, {}]",
                self.arc[0], self.arc[last]
            )));
        }
        let i = match self.arc.binary_search_by(|a| a.total_cmp(&l)) {
            Ok(i) => return Ok(self.station_x(i)),
            Err(i) => i.clamp(1, last) - 1,
        };
        let frac = (l - self.arc[i]) / (self.arc[i + 1] - self.arc[i]);
        let mut x = self.station_x(i) + frac * self.step;
        for _ in 0..20 {
            let dx = (self.arc_length_at(x) - l) / self.speed(x);
            x -= dx;
            if dx.abs() < 1e-13 * (1.0 + x.abs()) {
                break;
            }
        }
        Ok(x)
    }

    /// Arc-length range covered by the frame (domain plus extrapolation margin).
    pub fn l_range(&self) -> (f64, f64) {
        (self.arc[0], self.arc[self.arc.len() - 1])
    }

    /// Arc length of the core domain `[x_min, x_max]`.
    pub fn core_length(&self) -> f64 {
        self.arc_length_at(self.centerline.x_max)
    }

    /// Parameter of the point on the centerline closest to `p`.
    pub fn project(&self, p: &CartesianPoint) -> Result<f64> {
        let pv = [p.x, p.y, p.z];
        let (lo, hi) = (self.x_lo, self.x_hi());
        let mut x = p.x.clamp(lo, hi);
        let mut converged = false;
        for _ in 0..60 {
            let (c, d1, d2) = self.curve(x);
            let off = [c[0] - pv[0], c[1] - pv[1], c[2] - pv[2]];
            let g = dot(off, d1);
            let mut h = dot(d1, d1) + dot(off, d2);
            if h <= 0.0 {
                h = dot(d1, d1);
            }
            let dx = g / h;
            let next = (x - dx).clamp(lo, hi);
            let moved = (next - x).abs();
            x = next;
            if moved < 1e-12 * (1.0 + x.abs()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numeric("centerline projection did not converge".into()));
        }
        if !self.centerline.in_domain(x) || x <= lo || x >= hi {
            return Err(Error::Domain(format!("point projects to x = {x}, outside the centerline domain")));
        }
        Ok(x)
    }

    pub fn to_log_centric(&self, p: &CartesianPoint) -> Result<LogCentricPoint> {
        let x = self.project(p)?;
        let (c, _, _) = self.curve(x);
        let off = [p.x - c[0], p.y - c[1], p.z - c[2]];
        let rho = dot(off, off).sqrt();
        let l = self.arc_length_at(x);
        if rho < 1e-12 {
            return Ok(LogCentricPoint { theta: 0.0, l, rho: 0.0 });
        }
        let (_, n, b) = self.frame_at(x);
        let theta = wrap_angle(dot(off, b).atan2(dot(off, n)));
        Ok(LogCentricPoint { theta, l, rho })
    }

    pub fn from_log_centric(&self, q: &LogCentricPoint) -> Result<CartesianPoint> {
        let x = self.x_at_arc(q.l)?;
        let (c, _, _) = self.curve(x);
        if q.rho == 0.0 {
            return Ok(CartesianPoint::new(c[0], c[1], c[2]));
        }
        let (_, n, b) = self.frame_at(x);
        let (s, co) = q.theta.sin_cos();
        Ok(CartesianPoint::new(
            c[0] + q.rho * (co * n[0] + s * b[0]),
            c[1] + q.rho * (co * n[1] + s * b[1]),
            c[2] + q.rho * (co * n[2] + s * b[2]),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::wrap_signed;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn straight() -> LogFrame {
        LogFrame::new(&Centerline::straight(3, 0.0, 1000.0).unwrap()).unwrap()
    }

    fn bent() -> Centerline {
        Centerline::new(vec![6.0, 9.0, -1.5], vec![-4.0, 3.0, 0.8], 0.0, 2000.0).unwrap()
    }

    #[test]
    fn straight_line_projection() {
        let f = straight();
        let q = f.to_log_centric(&CartesianPoint::new(10.0, 0.0, 5.0)).unwrap();
        assert!(q.theta.abs() < 1e-12 || (q.theta - TAU).abs() < 1e-12);
        assert!((q.l - 10.0).abs() < 1e-9);
        assert!((q.rho - 5.0).abs() < 1e-12);
        let y = f.to_log_centric(&CartesianPoint::new(10.0, 5.0, 0.0)).unwrap();
        assert!((y.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn point_on_centerline_has_zero_theta() {
        let f = straight();
        let q = f.to_log_centric(&CartesianPoint::new(300.0, 0.0, 0.0)).unwrap();
        assert_eq!((q.theta, q.rho), (0.0, 0.0));
    }

    #[test]
    fn straight_inverse() {
        let f = straight();
        let p = f.from_log_centric(&LogCentricPoint::new(0.0, 10.0, 5.0)).unwrap();
        assert!((p.x - 10.0).abs() < 1e-9 && p.y.abs() < 1e-12 && (p.z - 5.0).abs() < 1e-12);
        let on = f.from_log_centric(&LogCentricPoint::new(1.0, 250.0, 0.0)).unwrap();
        assert!((on.x - 250.0).abs() < 1e-9 && on.y == 0.0 && on.z == 0.0);
    }

    #[test]
    fn out_of_range_l_is_domain_error() {
        let f = straight();
        assert!(matches!(f.from_log_centric(&LogCentricPoint::new(0.0, 5000.0, 5.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn curved_projection_matches_dense_polyline() {
        let c = Centerline::new(vec![0.0, 40.0], vec![0.0, 0.0], 0.0, 1000.0).unwrap();
        let f = LogFrame::new(&c).unwrap();
        // polyline oracle: 1e5 segments, arc length accumulated along the polyline
        let n = 100_000;
        let xs: Vec<f64> = (0..=n).map(|i| -50.0 + 1100.0 * i as f64 / n as f64).collect();
        let pts: Vec<V3> = xs.iter().map(|&x| { let (y, z) = c.position(x); [x, y, z] }).collect();
        let mut arc = vec![0.0; pts.len()];
        for i in 1..pts.len() {
            let d = [pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1], pts[i][2] - pts[i - 1][2]];
            arc[i] = arc[i - 1] + dot(d, d).sqrt();
        }
        let i0 = xs.iter().position(|&x| x >= 0.0).unwrap();
        let zero = arc[i0] - (xs[i0] - 0.0) * (arc[i0 + 1] - arc[i0]) / (xs[i0 + 1] - xs[i0]);
        for p in [CartesianPoint::new(200.0, 30.0, 10.0), CartesianPoint::new(500.0, -60.0, 20.0), CartesianPoint::new(820.0, 10.0, -75.0)] {
            let q = f.to_log_centric(&p).unwrap();
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..n {
                let a = pts[i];
                let b = pts[i + 1];
                let ab = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
                let ap = [p.x - a[0], p.y - a[1], p.z - a[2]];
                let t = (dot(ap, ab) / dot(ab, ab)).clamp(0.0, 1.0);
                let d = [ap[0] - t * ab[0], ap[1] - t * ab[1], ap[2] - t * ab[2]];
                let dist = dot(d, d).sqrt();
                if dist < best.0 {
                    best = (dist, arc[i] + t * (arc[i + 1] - arc[i]) - zero);
                }
            }
            assert!((q.rho - best.0).abs() < 0.01, "rho {} vs {}", q.rho, best.0);
            assert!((q.l - best.1).abs() < 0.01, "l {} vs {}", q.l, best.1);
        }
    }

    #[test]
    fn rigid_rotation_about_straight_axis_shifts_theta() {
        let f = straight();
        let delta: f64 = 0.7;
        for (x, y, z) in [(100.0, 3.0, 40.0), (400.0, -20.0, 5.0), (900.0, 11.0, -60.0)] {
            let a = f.to_log_centric(&CartesianPoint::new(x, y, z)).unwrap();
            // theta runs from +z toward +y
            let (s, c) = delta.sin_cos();
            let rz = z * c - y * s;
            let ry = z * s + y * c;
            let b = f.to_log_centric(&CartesianPoint::new(x, ry, rz)).unwrap();
            assert!(wrap_signed(b.theta - a.theta - delta).abs() < 1e-12);
            assert!((b.l - a.l).abs() < 1e-12 && (b.rho - a.rho).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn round_trip(theta in 0.0..TAU, l in 0.0..2000.0f64, rho in 1.0..200.0f64) {
            let f = bent_frame();
            let q = LogCentricPoint::new(theta, l, rho);
            let p = f.from_log_centric(&q).unwrap();
            let back = f.to_log_centric(&p).unwrap();
            let p2 = f.from_log_centric(&back).unwrap();
            prop_assert!(p.distance(&p2) < 1e-6);
            prop_assert!((back.l - l).abs() < 1e-6 && (back.rho - rho).abs() < 1e-6);
            prop_assert!(wrap_signed(back.theta - q.theta).abs() < 1e-9);
        }
    }

    fn bent_frame() -> &'static LogFrame {
        use std::sync::OnceLock;
        static F: OnceLock<LogFrame> = OnceLock::new();
        F.get_or_init(|| LogFrame::new(&bent()).unwrap())
    }
}
