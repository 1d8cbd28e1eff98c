//! Longitudinal thickness profile: a linear taper plus one Gaussian swelling per
//! knot cluster.

use serde::{Deserialize, Serialize};

use crate::logcentric::Heightmap;
use crate::optim::{levenberg_marquardt, linear_least_squares, LmOptions};
use crate::{Error, Result};

/// Width guess for a cluster swelling, mm. Rows farther than three widths from
/// every cluster are treated as plain taper.
pub const DEFAULT_CLUSTER_WIDTH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessCluster {
    /// Cluster position along the log, mm.
    pub center: f64,
    /// Peak height of the swelling, mm.
    pub alpha: f64,
    /// Offset of the peak from `center`, mm.
    pub beta: f64,
    /// Gaussian width, mm.
    pub gamma: f64,
}

impl ThicknessCluster {
    #[inline]
    pub fn eval(&self, l: f64) -> f64 {
        let d = l - (self.center + self.beta);
        self.alpha * (-(d * d) / (2.0 * self.gamma * self.gamma)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessModel {
    /// Taper slope, mm per mm.
    pub a: f64,
    /// Radius at `l = 0`, mm.
    pub b: f64,
    pub clusters: Vec<ThicknessCluster>,
    /// RMSE of the fit against the row means, when the model was fitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
}

impl ThicknessModel {
    pub fn linear(a: f64, b: f64) -> Self {
        Self { a, b, clusters: Vec::new(), rmse: None }
    }

    pub fn eval(&self, l: f64) -> f64 {
        self.a * l + self.b + self.clusters.iter().map(|c| c.eval(l)).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::InvalidParameter("thickness line must be finite".into()));
        }
        for c in &self.clusters {
            if !(c.gamma > 0.0) || !c.alpha.is_finite() || !c.beta.is_finite() || !c.center.is_finite() {
                return Err(Error::InvalidParameter(format!("invalid thickness cluster {c:?}")));
            }
        }
        Ok(())
    }
}

pub fn eval_thickness(t: &ThicknessModel, l: f64) -> f64 {
    t.eval(l)
}

/// Circumferential mean radius of each heightmap row.
pub fn row_means(h: &Heightmap) -> Vec<f64> {
    (0..h.grid.n_l)
        .map(|r| h.row(r).iter().sum::<f64>() / h.grid.n_theta as f64)
        .collect()
}

/// Fits the thickness profile to the row means of a heightmap.
pub fn fit_thickness(h: &Heightmap, cluster_centers: &[f64]) -> Result<ThicknessModel> {
    let ls: Vec<f64> = (0..h.grid.n_l).map(|r| h.grid.l(r)).collect();
    for &c in cluster_centers {
        if !(c >= h.grid.l_min && c <= h.grid.l_max) {
            return Err(Error::Domain(format!("cluster center {c} lies outside the heightmap")));
        }
    }
    fit_thickness_profile(&ls, &row_means(h), cluster_centers)
}

/// Fits the thickness profile to a sampled profile `(ls[i], radius[i])`.
///
/// The line comes from rows away from all clusters. Each cluster bump is then
/// fitted alone on its neighborhood, and a final joint pass refines everything.
pub fn fit_thickness_profile(ls: &[f64], radius: &[f64], cluster_centers: &[f64]) -> Result<ThicknessModel> {
    if ls.len() != radius.len() {
        return Err(Error::InvalidParameter("profile length mismatch".into()));
    }
    if ls.len() < 3 {
        return Err(Error::InsufficientData(format!("thickness fit needs at least 3 rows, got {}", ls.len())));
    }
    let l_ref = ls.iter().sum::<f64>() / ls.len() as f64;
    let guard = 3.0 * DEFAULT_CLUSTER_WIDTH;
    let mut far: Vec<usize> = (0..ls.len())
        .filter(|&i| cluster_centers.iter().all(|c| (ls[i] - c).abs() > guard))
        .collect();
    if far.len() < 3 {
        far = (0..ls.len()).collect();
    }
    let design = nalgebra::DMatrix::from_fn(far.len(), 2, |r, c| if c == 0 { ls[far[r]] - l_ref } else { 1.0 });
    let targets = nalgebra::DVector::from_iterator(far.len(), far.iter().map(|&i| radius[i]));
    let line = linear_least_squares(&design, &targets)?;
    let (a, b_ref) = (line[0], line[1]);

    let step = ((ls[ls.len() - 1] - ls[0]) / (ls.len() - 1) as f64).abs().max(1e-9);
    let opts = LmOptions { relative_cost_tolerance: 1e-14, step_tolerance: 1e-14, ..Default::default() };

    // clusters alone, on the residual of the line
    let mut clusters = Vec::with_capacity(cluster_centers.len());
    for &c in cluster_centers {
        let window: Vec<usize> = (0..ls.len()).filter(|&i| (ls[i] - c).abs() <= guard).collect();
        if window.len() < 3 {
            clusters.push(ThicknessCluster { center: c, alpha: 0.0, beta: 0.0, gamma: DEFAULT_CLUSTER_WIDTH });
            continue;
        }
        let resid: Vec<f64> = window.iter().map(|&i| radius[i] - (a * (ls[i] - l_ref) + b_ref)).collect();
        let peak = (0..window.len())
            .max_by(|&x, &y| resid[x].abs().total_cmp(&resid[y].abs()))
            .unwrap_or(0);
        let x0 = [resid[peak], ls[window[peak]] - c, DEFAULT_CLUSTER_WIDTH.max(2.0 * step).ln()];
        let f = |x: &[f64]| {
            let k = ThicknessCluster { center: c, alpha: x[0], beta: x[1], gamma: x[2].exp() };
            window.iter().zip(&resid).map(|(&i, r)| k.eval(ls[i]) - r).collect::<Vec<f64>>()
        };
        let (x, _) = levenberg_marquardt(f, &x0, &opts)?;
        clusters.push(ThicknessCluster { center: c, alpha: x[0], beta: x[1], gamma: x[2].exp() });
    }

    // joint refinement of the line and all bumps
    let mut x0 = vec![a, b_ref];
    for k in &clusters {
        x0.extend([k.alpha, k.beta, k.gamma.ln()]);
    }
    let unpack = |x: &[f64]| -> (f64, f64, Vec<ThicknessCluster>) {
        let ks = cluster_centers
            .iter()
            .enumerate()
            .map(|(j, &c)| ThicknessCluster { center: c, alpha: x[2 + 3 * j], beta: x[3 + 3 * j], gamma: x[4 + 3 * j].exp() })
            .collect();
        (x[0], x[1], ks)
    };
    let f = |x: &[f64]| {
        let (a, b, ks) = unpack(x);
        ls.iter()
            .zip(radius)
            .map(|(&l, &r)| a * (l - l_ref) + b + ks.iter().map(|k| k.eval(l)).sum::<f64>() - r)
            .collect::<Vec<f64>>()
    };
    let (x, report) = levenberg_marquardt(f, &x0, &opts)?;
    let (a, b_ref, clusters) = unpack(&x);
    let model = ThicknessModel { a, b: b_ref - a * l_ref, clusters, rmse: Some(report.rmse()) };
    model.validate()?;
    Ok(model)
}
