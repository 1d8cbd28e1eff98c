//! Three-level compound Gaussian: logs, clusters within a log, and knots within
//! a cluster. A knot vector is drawn as `X ~ N(mu_c, (sigma_c sigma_c^T) . P)`
//! where the cluster mean `mu_c` varies around a log mean, the log mean around
//! the global mean, and the cluster spread `sigma_c ~ N(mu_2, sigma_2)`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mvn::{
    correlation_from_covariance, covariance_factor, hadamard_covariance, population_moments, repair_correlation,
    sample_with_factor, shrink_correlation,
};
use crate::{Error, Result};

/// Knot vectors grouped as logs, then clusters, then knots.
pub type Grouped = [Vec<Vec<Vec<f64>>>];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LevelCounts {
    pub logs: usize,
    pub clusters: usize,
    pub knots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchicalGaussian {
    pub names: Vec<String>,
    pub levels: Vec<String>,
    /// Mean of the cluster means.
    pub global_mu_mean: Vec<f64>,
    /// Spread of cluster means around the global mean, logs included.
    pub global_mu_sd: Vec<f64>,
    /// Part of `global_mu_sd` that is shared by all clusters of one log.
    pub log_mu_sd: Vec<f64>,
    /// Mean of the within-cluster standard deviations.
    pub global_sigma_mean: Vec<f64>,
    pub global_sigma_sd: Vec<f64>,
    /// Pooled within-cluster correlation, row-major.
    pub correlation: Vec<Vec<f64>>,
    /// Degrees of freedom behind `correlation`; the correlation is shrunk
    /// toward the identity by `1 / correlation_dof` when sampling.
    pub correlation_dof: f64,
    pub counts: LevelCounts,
    /// Fields that could not be estimated and were set to zero or identity.
    #[serde(default)]
    pub defaulted: Vec<String>,
}

/// Mean and spread of one sampled cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDraw {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

fn sample_sd(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / n as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

impl HierarchicalGaussian {
    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    /// Level structure with zero spread everywhere: every draw equals `mean`.
    pub fn point_mass(names: &[&str], mean: &[f64]) -> Self {
        let d = names.len();
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            levels: default_levels(),
            global_mu_mean: mean.to_vec(),
            global_mu_sd: vec![0.0; d],
            log_mu_sd: vec![0.0; d],
            global_sigma_mean: vec![0.0; d],
            global_sigma_sd: vec![0.0; d],
            correlation: identity_rows(d),
            correlation_dof: 0.0,
            counts: LevelCounts::default(),
            defaulted: Vec::new(),
        }
    }

    /// Method-of-moments estimate from grouped knot vectors. Between-group
    /// variances are corrected for the within-group noise that enters group
    /// means, and clipped at zero.
    pub fn fit(names: &[&str], logs: &Grouped) -> Result<Self> {
        let d = names.len();
        let clusters: Vec<(usize, &Vec<Vec<f64>>)> = logs
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(|c| !c.is_empty()).map(move |c| (i, c)))
            .collect();
        if clusters.is_empty() {
            return Err(Error::EmptyInput("knot vectors"));
        }
        if clusters.iter().flat_map(|c| c.1.iter()).any(|x| x.len() != d || x.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter(format!("knot vectors must be finite with dimension {d}")));
        }
        let mut defaulted = Vec::new();
        let knots: usize = clusters.iter().map(|c| c.1.len()).sum();
        let logs_used: Vec<usize> = {
            let mut v: Vec<usize> = clusters.iter().map(|c| c.0).collect();
            v.dedup();
            v
        };

        struct ClusterMoments {
            log: usize,
            n: usize,
            mean: Vec<f64>,
            sd: Vec<f64>,
        }
        let moments: Vec<ClusterMoments> = clusters
            .iter()
            .map(|(log, rows)| ClusterMoments {
                log: *log,
                n: rows.len(),
                mean: (0..d).map(|k| population_moments(&column(rows, k)).0).collect(),
                sd: (0..d).map(|k| sample_sd(&column(rows, k))).collect(),
            })
            .collect();
        let spread: Vec<&ClusterMoments> = moments.iter().filter(|m| m.n >= 2).collect();

        let mut global_mu_mean = vec![0.0; d];
        let mut global_mu_sd = vec![0.0; d];
        let mut log_mu_sd = vec![0.0; d];
        let mut global_sigma_mean = vec![0.0; d];
        let mut global_sigma_sd = vec![0.0; d];
        for k in 0..d {
            let means: Vec<f64> = moments.iter().map(|m| m.mean[k]).collect();
            let (mu, between) = population_moments(&means);
            global_mu_mean[k] = mu;
            // E[var of cluster means] = var(mu_c) + E[sigma^2 / n]
            let noise = if spread.is_empty() {
                0.0
            } else {
                spread.iter().map(|m| m.sd[k].powi(2) / m.n as f64).sum::<f64>() / spread.len() as f64
            };
            global_mu_sd[k] = (between * between - noise).max(0.0).sqrt();

            // log level: spread of per-log averages of cluster means beyond the
            // spread expected from clusters alone
            let mut log_means = Vec::new();
            let mut within_noise = Vec::new();
            for &l in &logs_used {
                let cm: Vec<f64> = moments.iter().filter(|m| m.log == l).map(|m| m.mean[k]).collect();
                log_means.push(population_moments(&cm).0);
                within_noise.push(if cm.len() >= 2 { sample_sd(&cm).powi(2) / cm.len() as f64 } else { 0.0 });
            }
            let (_, between_logs) = population_moments(&log_means);
            let noise_logs = within_noise.iter().sum::<f64>() / within_noise.len() as f64;
            log_mu_sd[k] = (between_logs * between_logs - noise_logs).max(0.0).sqrt().min(global_mu_sd[k]);

            let sds: Vec<f64> = spread.iter().map(|m| m.sd[k]).collect();
            let (sm, ss) = population_moments(&sds);
            global_sigma_mean[k] = sm;
            global_sigma_sd[k] = ss;
        }
        if moments.len() < 2 {
            defaulted.push("global_mu_sd".to_string());
        }
        if logs_used.len() < 2 {
            defaulted.push("log_mu_sd".to_string());
        }
        if spread.is_empty() {
            defaulted.push("global_sigma_mean".to_string());
        }
        if spread.len() < 2 {
            defaulted.push("global_sigma_sd".to_string());
        }

        // pooled correlation of within-cluster standardized vectors
        let mut pooled = DMatrix::<f64>::zeros(d, d);
        let mut dof = 0.0;
        for (m, (_, rows)) in moments.iter().zip(&clusters) {
            if m.n < 2 {
                continue;
            }
            for x in rows.iter() {
                let z: Vec<f64> = (0..d).map(|k| if m.sd[k] > 0.0 { (x[k] - m.mean[k]) / m.sd[k] } else { 0.0 }).collect();
                for i in 0..d {
                    for j in 0..d {
                        pooled[(i, j)] += z[i] * z[j];
                    }
                }
            }
            dof += (m.n - 1) as f64;
        }
        let correlation = if dof > 0.0 {
            repair_correlation(&correlation_from_covariance(&pooled))
        } else {
            defaulted.push("correlation".to_string());
            DMatrix::identity(d, d)
        };

        Ok(Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            levels: default_levels(),
            global_mu_mean,
            global_mu_sd,
            log_mu_sd,
            global_sigma_mean,
            global_sigma_sd,
            correlation: (0..d).map(|i| (0..d).map(|j| correlation[(i, j)]).collect()).collect(),
            correlation_dof: dof,
            counts: LevelCounts { logs: logs_used.len(), clusters: moments.len(), knots },
            defaulted,
        })
    }

    pub fn correlation_matrix(&self) -> DMatrix<f64> {
        let d = self.dimension();
        DMatrix::from_fn(d, d, |i, j| self.correlation[i][j])
    }

    /// Correlation used for sampling, after small-sample shrinkage.
    pub fn effective_correlation(&self) -> DMatrix<f64> {
        let w = if self.correlation_dof >= 1.0 { 1.0 / self.correlation_dof } else { 1.0 };
        shrink_correlation(&self.correlation_matrix(), w)
    }

    /// Spread of cluster means around their log's mean.
    pub fn cluster_mu_sd(&self) -> Vec<f64> {
        self.global_mu_sd
            .iter()
            .zip(&self.log_mu_sd)
            .map(|(g, l)| (g * g - l * l).max(0.0).sqrt())
            .collect()
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        let d = self.dimension();
        let vecs = [
            ("global_mu_mean", &self.global_mu_mean),
            ("global_mu_sd", &self.global_mu_sd),
            ("log_mu_sd", &self.log_mu_sd),
            ("global_sigma_mean", &self.global_sigma_mean),
            ("global_sigma_sd", &self.global_sigma_sd),
        ];
        for (name, v) in vecs {
            if v.len() != d {
                return Err(Error::Validation(format!("{what}: {name} has length {} instead of {d}", v.len())));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("{what}: {name} is not finite")));
            }
            if name != "global_mu_mean" && v.iter().any(|x| *x < 0.0) {
                return Err(Error::Validation(format!("{what}: {name} must be non-negative")));
            }
        }
        if self.log_mu_sd.iter().zip(&self.global_mu_sd).any(|(l, g)| *l > *g * (1.0 + 1e-12)) {
            return Err(Error::Validation(format!("{what}: log_mu_sd exceeds global_mu_sd")));
        }
        if self.correlation.len() != d || self.correlation.iter().any(|r| r.len() != d) {
            return Err(Error::Validation(format!("{what}: correlation must be {d}x{d}")));
        }
        let p = self.correlation_matrix();
        super::mvn::check_correlation(&p, 1e-9).map_err(|e| Error::Validation(format!("{what}: correlation: {e}")))?;
        covariance_factor(&p).map_err(|e| Error::Validation(format!("{what}: correlation PSD: {e}")))?;
        Ok(())
    }

    /// Mean of the clusters of one log.
    pub fn sample_log_mean<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.global_mu_mean
            .iter()
            .zip(&self.log_mu_sd)
            .map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    /// Mean and spread of a new cluster in a log with mean `log_mean`. The
    /// spread draw is folded at zero.
    pub fn sample_cluster<R: Rng + ?Sized>(&self, log_mean: &[f64], rng: &mut R) -> ClusterDraw {
        let within = self.cluster_mu_sd();
        let mu = log_mean.iter().zip(&within).map(|(m, s)| m + s * rng.sample::<f64, _>(StandardNormal)).collect();
        let sigma = self
            .global_sigma_mean
            .iter()
            .zip(&self.global_sigma_sd)
            .map(|(m, s)| (m + s * rng.sample::<f64, _>(StandardNormal)).abs())
            .collect();
        ClusterDraw { mu, sigma }
    }

    /// Knots of one cluster.
    pub fn sample_knots<R: Rng + ?Sized>(&self, cluster: &ClusterDraw, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        let factor = covariance_factor(&hadamard_covariance(&cluster.sigma, &self.effective_correlation()))?;
        Ok((0..count).map(|_| sample_with_factor(&cluster.mu, &factor, rng)).collect())
    }
}

fn default_levels() -> Vec<String> {
    ["log", "cluster", "knot"].iter().map(|s| s.to_string()).collect()
}

fn identity_rows(d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}
