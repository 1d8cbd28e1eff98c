//! Sparse Gabor convolution noise for wood grain.
//!
//! Impulses are scattered by a Poisson process on the unrolled surface
//! `(arc, l)`, with `arc = theta * R` for a reference radius `R`. Every impulse
//! carries a random sign and a Gabor kernel
//!
//! ```text
//! g(dx, dy) = exp(-pi (dx^2 / b^2 + dy^2 / (e b)^2)) * cos(2 pi f dx)
//! ```
//!
//! whose frequency runs across the log, so ridges line up with the log axis.
//! The envelope is stretched by `e` along the log. Octave `o` doubles the
//! frequency, halves the kernel width, quadruples the impulse density and scales
//! the amplitude by `persistence^o`.
//!
//! The surface is split into buckets at least one kernel cutoff wide. Bucket
//! columns tile the circumference exactly, and each bucket draws its impulses
//! from an RNG seeded by `(seed, octave, column, row)`, so the field is seam-free
//! and depends only on the configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::logcentric::{GridSpec, Heightmap};
use crate::numeric::wrap_angle;
use crate::{Error, Result};

/// Kernel support in units of the envelope width.
const CUTOFF: f64 = 2.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrainConfig {
    pub octaves: u32,
    /// Cycles per mm across the log, first octave.
    pub base_frequency: f64,
    /// Envelope width `b` of the first octave, mm.
    pub kernel_bandwidth: f64,
    /// Impulses per mm^2, first octave.
    pub impulse_density: f64,
    /// Standard deviation of the summed field, mm.
    pub amplitude: f64,
    pub persistence: f64,
    /// Envelope stretch along the log.
    pub elongation: f64,
    pub seed: u64,
}

impl Default for GrainConfig {
    fn default() -> Self {
        Self {
            octaves: 4,
            base_frequency: 0.15,
            kernel_bandwidth: 4.0,
            impulse_density: 0.05,
            amplitude: 0.6,
            persistence: 0.5,
            elongation: 2.0,
            seed: 0,
        }
    }
}

impl GrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.octaves == 0 {
            return Err(Error::InvalidParameter("grain needs at least one octave".into()));
        }
        if !(self.persistence > 0.0 && self.persistence <= 1.0) {
            return Err(Error::InvalidParameter(format!("grain persistence {} must lie in (0, 1]", self.persistence)));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("grain amplitude must be non-negative".into()));
        }
        for (name, v) in [
            ("base_frequency", self.base_frequency),
            ("kernel_bandwidth", self.kernel_bandwidth),
            ("impulse_density", self.impulse_density),
            ("elongation", self.elongation),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("grain {name} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Octave {
    index: u32,
    freq: f64,
    band: f64,
    band_l: f64,
    density: f64,
    /// Multiplier applied to the raw octave sum.
    gain: f64,
    bucket_arc: f64,
    n_cols: i64,
    bucket_l: f64,
}

#[derive(Debug, Clone, Copy)]
struct Impulse {
    arc: f64,
    l: f64,
    weight: f64,
}

/// Gabor noise field on a cylinder of a given reference radius.
#[derive(Debug, Clone)]
pub struct GaborNoise {
    seed: u64,
    circumference: f64,
    radius: f64,
    octaves: Vec<Octave>,
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn bucket_seed(seed: u64, octave: u32, col: i64, row: i64) -> u64 {
    let mut h = mix(seed ^ 0x9e37_79b9_7f4a_7c15);
    h = mix(h ^ octave as u64);
    h = mix(h ^ col as u64);
    mix(h ^ row as u64)
}

impl GaborNoise {
    pub fn new(cfg: &GrainConfig, reference_radius: f64) -> Result<Self> {
        cfg.validate()?;
        if !(reference_radius > 0.0 && reference_radius.is_finite()) {
            return Err(Error::InvalidParameter("grain reference radius must be positive".into()));
        }
        let circumference = std::f64::consts::TAU * reference_radius;
        let norm = (0..cfg.octaves).map(|o| cfg.persistence.powi(2 * o as i32)).sum::<f64>().sqrt();
        let mut octaves = Vec::with_capacity(cfg.octaves as usize);
        for o in 0..cfg.octaves {
            let scale = 2f64.powi(o as i32);
            let freq = cfg.base_frequency * scale;
            let band = cfg.kernel_bandwidth / scale;
            let band_l = band * cfg.elongation;
            let density = cfg.impulse_density * scale * scale;
            // variance of unit-sign sparse convolution: density * integral of g^2
            let g2 = 0.25 * band * band_l * (1.0 + (-2.0 * std::f64::consts::PI * freq * freq * band * band).exp());
            let gain = cfg.amplitude * cfg.persistence.powi(o as i32) / (norm * (density * g2).sqrt());
            let cut_arc = CUTOFF * band;
            if circumference < 2.0 * cut_arc {
                return Err(Error::InvalidParameter(format!(
                    "grain kernel ({cut_arc:.2} mm) too wide for circumference {circumference:.2} mm"
                )));
            }
            let n_cols = (circumference / cut_arc).floor() as i64;
            octaves.push(Octave {
                index: o,
                freq,
                band,
                band_l,
                density,
                gain,
                bucket_arc: circumference / n_cols as f64,
                n_cols,
                bucket_l: CUTOFF * band_l,
            });
        }
        Ok(Self { seed: cfg.seed, circumference, radius: reference_radius, octaves })
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    fn bucket(&self, o: &Octave, col: i64, row: i64, out: &mut Vec<Impulse>) {
        let mut rng = ChaCha8Rng::seed_from_u64(bucket_seed(self.seed, o.index, col, row));
        let mean = o.density * o.bucket_arc * o.bucket_l;
        let count = Poisson::new(mean).map(|p| p.sample(&mut rng) as usize).unwrap_or(0);
        let (a0, l0) = (col as f64 * o.bucket_arc, row as f64 * o.bucket_l);
        for _ in 0..count {
            let arc = a0 + rng.random::<f64>() * o.bucket_arc;
            let l = l0 + rng.random::<f64>() * o.bucket_l;
            let weight = if rng.random::<bool>() { 1.0 } else { -1.0 };
            out.push(Impulse { arc, l, weight });
        }
    }

    /// Bucket column of `arc` and its two neighbors, without repeats.
    fn columns(o: &Octave, arc: f64) -> impl Iterator<Item = i64> {
        let n = o.n_cols;
        let c = ((arc / o.bucket_arc).floor() as i64).rem_euclid(n);
        let mut uniq = [0i64; 3];
        let mut k = 0;
        for v in [(c + n - 1) % n, c, (c + 1) % n] {
            if !uniq[..k].contains(&v) {
                uniq[k] = v;
                k += 1;
            }
        }
        uniq.into_iter().take(k)
    }

    #[inline]
    fn kernel(&self, o: &Octave, dx: f64, dy: f64) -> f64 {
        let q = (dx / o.band).powi(2) + (dy / o.band_l).powi(2);
        if q > CUTOFF * CUTOFF {
            return 0.0;
        }
        (-std::f64::consts::PI * q).exp() * (std::f64::consts::TAU * o.freq * dx).cos()
    }

    #[inline]
    fn arc_offset(&self, a: f64, b: f64) -> f64 {
        let c = self.circumference;
        let d = (a - b).rem_euclid(c);
        if d > 0.5 * c {
            d - c
        } else {
            d
        }
    }

    /// Field value at arc position `arc` (mm, periodic) and `l` (mm).
    pub fn eval(&self, arc: f64, l: f64) -> f64 {
        let mut buf = Vec::new();
        let mut total = 0.0;
        for o in &self.octaves {
            let row = (l / o.bucket_l).floor() as i64;
            let mut sum = 0.0;
            for col in Self::columns(o, arc.rem_euclid(self.circumference)) {
                for r in row - 1..=row + 1 {
                    buf.clear();
                    self.bucket(o, col, r, &mut buf);
                    for imp in &buf {
                        sum += imp.weight * self.kernel(o, self.arc_offset(arc, imp.arc), l - imp.l);
                    }
                }
            }
            total += o.gain * sum;
        }
        total
    }

    /// Field value at azimuth `theta` on the reference cylinder.
    pub fn eval_theta(&self, theta: f64, l: f64) -> f64 {
        self.eval(wrap_angle(theta) * self.radius, l)
    }

    /// Values along one grid row, in column order.
    pub fn row(&self, grid: &GridSpec, l: f64) -> Vec<f64> {
        let arcs: Vec<f64> = (0..grid.n_theta).map(|c| grid.theta(c) * self.radius).collect();
        let mut out = vec![0.0; grid.n_theta];
        let mut cache: Vec<Vec<Impulse>> = Vec::new();
        for o in &self.octaves {
            let row = (l / o.bucket_l).floor() as i64;
            cache.clear();
            cache.resize(o.n_cols as usize, Vec::new());
            for (col, imps) in cache.iter_mut().enumerate() {
                for r in row - 1..=row + 1 {
                    self.bucket(o, col as i64, r, imps);
                }
            }
            for (c, &arc) in arcs.iter().enumerate() {
                let mut sum = 0.0;
                for col in Self::columns(o, arc) {
                    for imp in &cache[col as usize] {
                        sum += imp.weight * self.kernel(o, self.arc_offset(arc, imp.arc), l - imp.l);
                    }
                }
                out[c] += o.gain * sum;
            }
        }
        out
    }
}

/// Grain field sampled on a heightmap grid (values in mm, zero mean).
pub fn gabor_grain(grid: &GridSpec, cfg: &GrainConfig, reference_radius: f64) -> Result<Heightmap> {
    grid.validate()?;
    if cfg.amplitude == 0.0 {
        cfg.validate()?;
        return Heightmap::constant(*grid, 0.0);
    }
    let noise = GaborNoise::new(cfg, reference_radius)?;
    let rows: Vec<Vec<f64>> = (0..grid.n_l).into_par_iter().map(|r| noise.row(grid, grid.l(r))).collect();
    Heightmap::from_values(*grid, rows.concat())
}
