//! Smooth base shape: each heightmap row is reduced to its first Fourier
//! coefficients, and each coefficient is followed along the log by a Chebyshev
//! series.
//!
//! Coefficients are complex, `c_k = (1/N) sum_j rho_j exp(-i k theta_j)`, so a row
//! is rebuilt as `Re(c_0) + 2 sum_{k>=1} Re(c_k exp(i k theta))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::logcentric::Heightmap;
use crate::numeric::chebyshev::{self, ChebDomain};
use crate::numeric::wrap_angle;
use crate::optim::linear_least_squares_multi;
use crate::{Error, Result};

pub const DEFAULT_FOURIER: usize = 10;
pub const DEFAULT_CHEBYSHEV: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseShape {
    pub n_fourier: usize,
    pub m_cheb: usize,
    pub l_min: f64,
    pub l_max: f64,
    /// Row-major `m_cheb x n_fourier`: entry `(j, k)` is the `T_j` coefficient of
    /// Fourier coefficient `k`.
    pub coeffs: Vec<Complex64>,
}

impl BaseShape {
    pub fn zeros(n_fourier: usize, m_cheb: usize, l_min: f64, l_max: f64) -> Result<Self> {
        let s = Self { n_fourier, m_cheb, l_min, l_max, coeffs: vec![Complex64::new(0.0, 0.0); n_fourier * m_cheb] };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_fourier == 0 || self.m_cheb == 0 {
            return Err(Error::InvalidParameter("base shape needs at least one coefficient".into()));
        }
        if self.coeffs.len() != self.n_fourier * self.m_cheb {
            return Err(Error::InvalidParameter(format!(
                "base shape holds {} coefficients, expected {}",
                self.coeffs.len(),
                self.n_fourier * self.m_cheb
            )));
        }
        if !(self.l_max > self.l_min) {
            return Err(Error::InvalidParameter("base shape needs l_max > l_min".into()));
        }
        if self.coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite base shape coefficient".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn coeff(&self, j: usize, k: usize) -> Complex64 {
        self.coeffs[j * self.n_fourier + k]
    }

    pub fn set_coeff(&mut self, j: usize, k: usize, v: Complex64) {
        self.coeffs[j * self.n_fourier + k] = v;
    }

    pub fn coefficient_count(&self) -> usize {
        self.coeffs.len()
    }

    fn domain(&self) -> ChebDomain {
        ChebDomain::new(self.l_min, self.l_max)
    }

    /// Fourier coefficients of the row at `l`.
    pub fn fourier_at(&self, l: f64) -> Vec<Complex64> {
        let basis = chebyshev::basis(self.domain().to_unit(l), self.m_cheb);
        (0..self.n_fourier)
            .map(|k| (0..self.m_cheb).map(|j| self.coeff(j, k) * basis[j]).sum())
            .collect()
    }

    /// Mean radius of the row at `l`.
    pub fn dc(&self, l: f64) -> f64 {
        let basis = chebyshev::basis(self.domain().to_unit(l), self.m_cheb);
        (0..self.m_cheb).map(|j| self.coeff(j, 0).re * basis[j]).sum()
    }

    pub fn eval(&self, theta: f64, l: f64) -> f64 {
        synthesize(&self.fourier_at(l), wrap_angle(theta), true)
    }

    /// Base shape with the mean-radius band removed.
    pub fn eval_without_dc(&self, theta: f64, l: f64) -> f64 {
        synthesize(&self.fourier_at(l), wrap_angle(theta), false)
    }

    /// Evaluates one whole row on `n_theta` equally spaced columns.
    pub fn row(&self, l: f64, n_theta: usize, with_dc: bool) -> Vec<f64> {
        let c = self.fourier_at(l);
        (0..n_theta)
            .map(|j| synthesize(&c, std::f64::consts::TAU * j as f64 / n_theta as f64, with_dc))
            .collect()
    }
}

fn synthesize(c: &[Complex64], theta: f64, with_dc: bool) -> f64 {
    let mut v = if with_dc { c[0].re } else { 0.0 };
    for (k, ck) in c.iter().enumerate().skip(1) {
        let (s, co) = (k as f64 * theta).sin_cos();
        v += 2.0 * (ck.re * co - ck.im * s);
    }
    v
}

pub fn eval_base_shape(bs: &BaseShape, theta: f64, l: f64) -> f64 {
    bs.eval(theta, l)
}

/// First `n` discrete Fourier coefficients of a uniformly sampled periodic row.
pub fn row_fourier(row: &[f64], n: usize) -> Vec<Complex64> {
    let len = row.len() as f64;
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in row.iter().enumerate() {
                let a = -std::f64::consts::TAU * ((k * j) % row.len()) as f64 / len;
                acc += Complex64::from_polar(*v, a);
            }
            acc / len
        })
        .collect()
}

/// Fits a base shape to a heightmap. Rows with fewer than half of their cells
/// observed are left out of the Chebyshev fit.
pub fn fit_base_shape(h: &Heightmap, n_fourier: usize, m_cheb: usize) -> Result<BaseShape> {
    let g = &h.grid;
    if n_fourier == 0 || 2 * n_fourier > g.n_theta {
        return Err(Error::InvalidParameter(format!(
            "n_fourier = {n_fourier} must lie in 1..={}",
            g.n_theta / 2
        )));
    }
    if m_cheb == 0 || m_cheb > g.n_l {
        return Err(Error::InvalidParameter(format!("m_cheb = {m_cheb} must lie in 1..={}", g.n_l)));
    }
    let rows: Vec<usize> = (0..g.n_l)
        .filter(|&r| {
            let obs = h.observed[r * g.n_theta..(r + 1) * g.n_theta].iter().filter(|o| **o).count();
            2 * obs >= g.n_theta
        })
        .collect();
    if 2 * rows.len() < g.n_l {
        return Err(Error::InsufficientData(format!(
            "{} of {} heightmap rows are masked out",
            g.n_l - rows.len(),
            g.n_l
        )));
    }
    if rows.len() < m_cheb {
        return Err(Error::InsufficientData(format!("{} usable rows for {m_cheb} Chebyshev terms", rows.len())));
    }
    let domain = ChebDomain::new(g.l_min, g.l_max);
    let design = DMatrix::from_fn(rows.len(), m_cheb, |i, j| chebyshev::basis(domain.to_unit(g.l(rows[i])), m_cheb)[j]);
    let mut targets = DMatrix::zeros(rows.len(), 2 * n_fourier);
    for (i, &r) in rows.iter().enumerate() {
        for (k, c) in row_fourier(h.row(r), n_fourier).into_iter().enumerate() {
            targets[(i, 2 * k)] = c.re;
            targets[(i, 2 * k + 1)] = c.im;
        }
    }
    let sol = linear_least_squares_multi(&design, &targets)?;
    let mut bs = BaseShape::zeros(n_fourier, m_cheb, g.l_min, g.l_max)?;
    for j in 0..m_cheb {
        for k in 0..n_fourier {
            bs.set_coeff(j, k, Complex64::new(sol[(j, 2 * k)], sol[(j, 2 * k + 1)]));
        }
    }
    Ok(bs)
}
