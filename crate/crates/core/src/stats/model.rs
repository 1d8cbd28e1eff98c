//! Statistics over a collection of log models, and the reference prior used
//! when no data is available.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::hierarchy::{Grouped, HierarchicalGaussian};
use super::mvn::{population_moments, MvnStats};
use crate::fitting::{KnotRecord, LogModel};
use crate::knotmodel::KnotParams;
use crate::numeric::{logistic, logit, squash_ratio, unsquash_ratio};
use crate::surface::{SurfaceKnot, ThicknessCluster};
use crate::{Error, Result};

pub const STATISTICS_SCHEMA: u32 = 1;

/// Coordinates of the knot statistics: the nine shape parameters in
/// unconstrained form, with `l0` taken relative to the cluster center, plus the
/// mean incline angle `tau` in radians.
pub const KNOT_STAT_NAMES: [&str; 10] = [
    "s0",
    "l0_offset",
    "ln_gamma",
    "ln_rho_max",
    "logit_phi0",
    "logit_phi1",
    "ln_r_max",
    "logit_psi0",
    "logit_psi1",
    "tau",
];

pub const SURFACE_KNOT_STAT_NAMES: [&str; 4] = ["logit_alpha_theta", "logit_alpha_l", "ln_m_minus_1", "amplitude"];
pub const THICKNESS_LINE_NAMES: [&str; 2] = ["a", "b"];
pub const THICKNESS_CLUSTER_NAMES: [&str; 3] = ["alpha", "beta", "ln_gamma"];

/// Largest incline magnitude accepted from a draw, radians.
const MAX_INCLINE: f64 = 1.4;
const MAX_REDRAWS: usize = 100;

pub fn knot_stat_vector(params: &KnotParams, delta_l: f64, cluster_center: f64) -> Vec<f64> {
    vec![
        params.s0,
        params.l0 - cluster_center,
        params.gamma.ln(),
        params.rho_max.ln(),
        unsquash_ratio(params.phi0),
        unsquash_ratio(params.phi1),
        params.r_max.ln(),
        unsquash_ratio(params.psi0),
        unsquash_ratio(params.psi1),
        delta_l.atan2(params.rho_max),
    ]
}

/// Knot parameters and incline from a statistics vector. The returned `l0`
/// is relative to the cluster center.
pub fn knot_from_stat_vector(v: &[f64]) -> (KnotParams, f64) {
    (
        KnotParams {
            s0: v[0],
            l0: v[1],
            gamma: v[2].exp(),
            rho_max: v[3].exp(),
            phi0: squash_ratio(v[4]),
            phi1: squash_ratio(v[5]),
            r_max: v[6].exp(),
            psi0: squash_ratio(v[7]),
            psi1: squash_ratio(v[8]),
        },
        v[9],
    )
}

pub fn surface_knot_stat_vector(k: &SurfaceKnot) -> Vec<f64> {
    vec![logit(k.alpha_theta), logit(k.alpha_l), (k.m - 1.0).ln(), k.amplitude]
}

/// `(alpha_theta, alpha_l, m, amplitude)` from a statistics vector.
pub fn surface_knot_from_stat_vector(v: &[f64]) -> (f64, f64, f64, f64) {
    let ratio = |u: f64| logistic(u).clamp(1e-6, 1.0 - 1e-6);
    (ratio(v[0]), ratio(v[1]), 1.0 + v[2].exp().max(1e-6), v[3])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseShapeStats {
    pub n_fourier: usize,
    pub m_cheb: usize,
    /// Row-major `m_cheb x n_fourier`, like the coefficients themselves.
    pub mean_re: Vec<f64>,
    pub mean_im: Vec<f64>,
    pub sd_re: Vec<f64>,
    pub sd_im: Vec<f64>,
    pub sample_count: usize,
    pub defaulted: bool,
}

impl BaseShapeStats {
    /// Independent normal draw of every coefficient.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        use rand_distr::StandardNormal;
        (0..self.mean_re.len())
            .map(|i| {
                let re = self.mean_re[i] + self.sd_re[i] * rng.sample::<f64, _>(StandardNormal);
                let im = self.mean_im[i] + self.sd_im[i] * rng.sample::<f64, _>(StandardNormal);
                Complex64::new(re, im)
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_fourier * self.m_cheb;
        if n == 0 || [&self.mean_re, &self.mean_im, &self.sd_re, &self.sd_im].iter().any(|v| v.len() != n) {
            return Err(Error::Validation("base_shape statistics: need m_cheb x n_fourier entries per field".into()));
        }
        let all = self.mean_re.iter().chain(&self.mean_im).chain(&self.sd_re).chain(&self.sd_im);
        if all.clone().any(|v| !v.is_finite()) || self.sd_re.iter().chain(&self.sd_im).any(|v| *v < 0.0) {
            return Err(Error::Validation("base_shape statistics: entries must be finite with sd >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThicknessStats {
    /// Slope and intercept of the thickness line.
    pub line: MvnStats,
    /// Swelling of one whorl: height, offset and log width.
    pub cluster: MvnStats,
}

/// Layout of whorls along a log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhorlStats {
    /// Spacing between consecutive whorls is log-normal with these parameters.
    pub spacing_ln_mean: f64,
    pub spacing_ln_sd: f64,
    /// Probability of each knot count, indexed by the count.
    pub knots_per_cluster: Vec<f64>,
    pub spacing_samples: usize,
    pub cluster_samples: usize,
    pub defaulted: bool,
}

impl WhorlStats {
    pub fn sample_spacing<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use rand_distr::StandardNormal;
        (self.spacing_ln_mean + self.spacing_ln_sd * rng.sample::<f64, _>(StandardNormal)).exp()
    }

    pub fn sample_knot_count<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.knots_per_cluster.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (k, p) in self.knots_per_cluster.iter().enumerate() {
            if u < *p {
                return k;
            }
            u -= p;
        }
        self.knots_per_cluster.iter().rposition(|p| *p > 0.0).unwrap_or(0)
    }

    pub fn mean_knots_per_cluster(&self) -> f64 {
        let total: f64 = self.knots_per_cluster.iter().sum();
        self.knots_per_cluster.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>() / total
    }

    fn validate(&self) -> Result<()> {
        if !self.spacing_ln_mean.is_finite() || !(self.spacing_ln_sd >= 0.0) || !self.spacing_ln_sd.is_finite() {
            return Err(Error::Validation("whorl statistics: spacing parameters must be finite with sd >= 0".into()));
        }
        if self.knots_per_cluster.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || !(self.knots_per_cluster.iter().sum::<f64>() > 0.0) {
            return Err(Error::Validation("whorl statistics: knots_per_cluster must be a non-negative, non-empty distribution".into()));
        }
        Ok(())
    }
}

/// Closed range `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Self { min, max })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelStatistics {
    pub schema_version: u32,
    pub log_count: usize,
    pub knot_params: HierarchicalGaussian,
    pub surface_knot: MvnStats,
    pub centerline: MvnStats,
    pub base_shape: BaseShapeStats,
    pub thickness: ThicknessStats,
    pub whorls: WhorlStats,
    pub length: Range,
    pub diameter: Range,
    pub ranges_defaulted: bool,
}

/// One sampled knot. `params.l0` is relative to the cluster center.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKnot {
    pub params: KnotParams,
    pub tau: f64,
}

fn cluster_centers(knots: &[KnotRecord]) -> BTreeMap<usize, (f64, usize)> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for k in knots {
        let e = acc.entry(k.cluster).or_insert((0.0, 0));
        e.0 += k.params.l0;
        e.1 += 1;
    }
    for v in acc.values_mut() {
        v.0 /= v.1 as f64;
    }
    acc
}

impl ModelStatistics {
    /// Prior for Scots pine saw logs, used where data is missing.
    pub fn reference() -> Self {
        let knot_mean = [
            0.0,
            0.0,
            1.2f64.ln(),
            120.0f64.ln(),
            unsquash_ratio(0.6),
            unsquash_ratio(0.5),
            12.0f64.ln(),
            unsquash_ratio(0.7),
            unsquash_ratio(0.6),
            0.35,
        ];
        let mu_sd = [1.0, 5.0, 0.08, 0.05, 0.3, 0.3, 0.15, 0.3, 0.3, 0.08];
        let sigma_mean = [1.5, 8.0, 0.05, 0.03, 0.2, 0.2, 0.1, 0.2, 0.2, 0.05];
        let mut knots = HierarchicalGaussian::point_mass(&KNOT_STAT_NAMES, &knot_mean);
        knots.global_mu_sd = mu_sd.to_vec();
        knots.log_mu_sd = mu_sd.iter().map(|v| 0.5 * v).collect();
        knots.global_sigma_mean = sigma_mean.to_vec();
        knots.global_sigma_sd = sigma_mean.iter().map(|v| 0.2 * v).collect();
        // thicker knots rise more steeply; the two slope ratios move together
        knots.correlation[6][9] = 0.3;
        knots.correlation[9][6] = 0.3;
        knots.correlation[4][5] = 0.4;
        knots.correlation[5][4] = 0.4;
        knots.correlation_dof = 100.0;
        knots.defaulted = vec!["prior".to_string()];

        let n_center = 5;
        let cl_sd: Vec<f64> = [4.0, 1.5, 0.6, 0.3, 0.15].iter().chain(&[4.0, 1.5, 0.6, 0.3, 0.15]).copied().collect();
        let cl_names: Vec<String> = centerline_names(n_center);
        let cl_refs: Vec<&str> = cl_names.iter().map(|s| s.as_str()).collect();

        let (nf, mc) = (10, 10);
        let mut sd = vec![0.0; nf * mc];
        // slice centroids define the centerline, so fitted logs carry almost
        // no first harmonic; the prior leaves it out
        for j in 0..mc {
            for k in 2..nf {
                sd[j * nf + k] = 1.2 / (k as f64 * (1.0 + j as f64));
            }
        }
        Self {
            schema_version: STATISTICS_SCHEMA,
            log_count: 0,
            knot_params: knots,
            surface_knot: MvnStats::diagonal(&SURFACE_KNOT_STAT_NAMES, &[0.0, 0.0, 0.0, 1.5], &[0.3, 0.3, 0.2, 0.4]),
            centerline: MvnStats::diagonal(&cl_refs, &vec![0.0; 2 * n_center], &cl_sd),
            base_shape: BaseShapeStats {
                n_fourier: nf,
                m_cheb: mc,
                mean_re: vec![0.0; nf * mc],
                mean_im: vec![0.0; nf * mc],
                sd_re: sd.clone(),
                sd_im: sd,
                sample_count: 0,
                defaulted: true,
            },
            thickness: ThicknessStats {
                line: MvnStats::diagonal(&THICKNESS_LINE_NAMES, &[-0.004, 125.0], &[0.0015, 12.0]),
                cluster: MvnStats::diagonal(&THICKNESS_CLUSTER_NAMES, &[1.5, 0.0, 35.0f64.ln()], &[0.5, 8.0, 0.2]),
            },
            whorls: WhorlStats {
                spacing_ln_mean: 450.0f64.ln(),
                spacing_ln_sd: 0.25,
                knots_per_cluster: vec![0.0, 0.0, 0.15, 0.3, 0.3, 0.2, 0.05],
                spacing_samples: 0,
                cluster_samples: 0,
                defaulted: true,
            },
            length: Range { min: 2000.0, max: 4000.0 },
            diameter: Range { min: 180.0, max: 320.0 },
            ranges_defaulted: true,
        }
    }

    /// Estimates statistics from fitted or generated models. Sections with
    /// fewer than two samples keep the reference prior and are flagged.
    pub fn fit(models: &[LogModel]) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::EmptyInput("log models"));
        }
        let mut stats = Self::reference();
        stats.log_count = models.len();

        // knots, grouped log -> cluster -> knot
        let grouped: Vec<Vec<Vec<Vec<f64>>>> = models
            .iter()
            .map(|m| {
                let centers = cluster_centers(&m.knots);
                centers
                    .iter()
                    .map(|(id, (c, _))| {
                        m.knots
                            .iter()
                            .filter(|k| k.cluster == *id)
                            .map(|k| knot_stat_vector(&k.params, k.delta_l, *c))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let knot_count: usize = models.iter().map(|m| m.knots.len()).sum();
        if knot_count > 0 {
            stats.knot_params = HierarchicalGaussian::fit(&KNOT_STAT_NAMES, &grouped as &Grouped)?;
        }

        let surface: Vec<Vec<f64>> = models.iter().flat_map(|m| m.surface_knots()).map(|s| surface_knot_stat_vector(&s)).collect();
        if surface.len() >= 2 {
            stats.surface_knot = MvnStats::from_samples(&SURFACE_KNOT_STAT_NAMES, &surface);
        }

        let n = models[0].centerline.n();
        if models.iter().all(|m| m.centerline.n() == n) && models.len() >= 2 {
            let names = centerline_names(n);
            let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            let rows: Vec<Vec<f64>> = models.iter().map(|m| m.centerline.parameters()).collect();
            stats.centerline = MvnStats::from_samples(&refs, &rows);
        }

        let (nf, mc) = (models[0].base_shape.n_fourier, models[0].base_shape.m_cheb);
        let shapes: Vec<&Vec<Complex64>> = models
            .iter()
            .filter(|m| m.base_shape.n_fourier == nf && m.base_shape.m_cheb == mc)
            .map(|m| &m.base_shape.coeffs)
            .collect();
        if shapes.len() >= 2 {
            let count = nf * mc;
            let mut bs = BaseShapeStats {
                n_fourier: nf,
                m_cheb: mc,
                mean_re: vec![0.0; count],
                mean_im: vec![0.0; count],
                sd_re: vec![0.0; count],
                sd_im: vec![0.0; count],
                sample_count: shapes.len(),
                defaulted: false,
            };
            for i in 0..count {
                let (m, s) = population_moments(&shapes.iter().map(|c| c[i].re).collect::<Vec<_>>());
                bs.mean_re[i] = m;
                bs.sd_re[i] = s;
                let (m, s) = population_moments(&shapes.iter().map(|c| c[i].im).collect::<Vec<_>>());
                bs.mean_im[i] = m;
                bs.sd_im[i] = s;
            }
            stats.base_shape = bs;
        }

        if models.len() >= 2 {
            let rows: Vec<Vec<f64>> = models.iter().map(|m| vec![m.thickness.a, m.thickness.b]).collect();
            stats.thickness.line = MvnStats::from_samples(&THICKNESS_LINE_NAMES, &rows);
        }
        let bumps: Vec<Vec<f64>> = models
            .iter()
            .flat_map(|m| m.thickness.clusters.iter())
            .map(|c: &ThicknessCluster| vec![c.alpha, c.beta, c.gamma.ln()])
            .collect();
        if bumps.len() >= 2 {
            stats.thickness.cluster = MvnStats::from_samples(&THICKNESS_CLUSTER_NAMES, &bumps);
        }

        let mut spacings = Vec::new();
        let mut sizes = Vec::new();
        for m in models {
            let centers = cluster_centers(&m.knots);
            let mut cs: Vec<f64> = centers.values().map(|v| v.0).collect();
            sizes.extend(centers.values().map(|v| v.1));
            cs.sort_by(|a, b| a.total_cmp(b));
            spacings.extend(cs.windows(2).map(|w| (w[1] - w[0]).max(1e-6).ln()));
        }
        if spacings.len() >= 2 && sizes.len() >= 2 {
            let (mu, sd) = population_moments(&spacings);
            let max = sizes.iter().copied().max().unwrap_or(0);
            let mut pmf = vec![0.0; max + 1];
            for s in &sizes {
                pmf[*s] += 1.0 / sizes.len() as f64;
            }
            stats.whorls = WhorlStats {
                spacing_ln_mean: mu,
                spacing_ln_sd: sd,
                knots_per_cluster: pmf,
                spacing_samples: spacings.len(),
                cluster_samples: sizes.len(),
                defaulted: false,
            };
        }

        if models.len() >= 2 {
            let lengths: Vec<f64> = models.iter().map(|m| m.grid.l_max - m.grid.l_min).collect();
            let diameters: Vec<f64> = models.iter().map(|m| 2.0 * m.reference_radius()).collect();
            if let (Some(l), Some(d)) = (Range::of(&lengths), Range::of(&diameters)) {
                stats.length = l;
                stats.diameter = d;
                stats.ranges_defaulted = false;
            }
        }
        Ok(stats)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != STATISTICS_SCHEMA {
            return Err(Error::Validation(format!(
                "schema_version {} is not supported (expected {STATISTICS_SCHEMA})",
                self.schema_version
            )));
        }
        if self.knot_params.dimension() != KNOT_STAT_NAMES.len() {
            return Err(Error::Validation(format!("knot_params must have dimension {}", KNOT_STAT_NAMES.len())));
        }
        self.knot_params.validate("knot_params")?;
        if self.surface_knot.dimension() != SURFACE_KNOT_STAT_NAMES.len() {
            return Err(Error::Validation("surface_knot must have dimension 4".into()));
        }
        self.surface_knot.validate("surface_knot")?;
        if self.centerline.dimension() == 0 || self.centerline.dimension() % 2 != 0 {
            return Err(Error::Validation("centerline must have 2n coefficients".into()));
        }
        self.centerline.validate("centerline")?;
        self.base_shape.validate()?;
        self.thickness.line.validate("thickness.line")?;
        self.thickness.cluster.validate("thickness.cluster")?;
        self.whorls.validate()?;
        for (name, r) in [("length", self.length), ("diameter", self.diameter)] {
            if !(r.min > 0.0) || !(r.max >= r.min) || !r.max.is_finite() {
                return Err(Error::Validation(format!("{name} range must satisfy 0 < min <= max")));
            }
        }
        Ok(())
    }

    /// Samples knots for `knots_per_cluster.len()` clusters of one log. Draws
    /// that land outside the usable parameter region are redrawn, up to 100
    /// times per knot.
    pub fn sample_knot_hierarchy<R: Rng + ?Sized>(&self, rng: &mut R, knots_per_cluster: &[usize]) -> Result<Vec<Vec<SampledKnot>>> {
        let h = &self.knot_params;
        let log_mean = h.sample_log_mean(rng);
        let mut out = Vec::with_capacity(knots_per_cluster.len());
        for &count in knots_per_cluster {
            let cluster = h.sample_cluster(&log_mean, rng);
            let mut knots = Vec::with_capacity(count);
            for _ in 0..count {
                let mut last = String::new();
                let mut accepted = None;
                for _ in 0..MAX_REDRAWS {
                    let v = h.sample_knots(&cluster, 1, rng)?.remove(0);
                    match check_knot_vector(&v) {
                        Ok(k) => {
                            accepted = Some(k);
                            break;
                        }
                        Err(dim) => last = dim,
                    }
                }
                match accepted {
                    Some(k) => knots.push(k),
                    None => {
                        return Err(Error::Numeric(format!("knot draw stayed invalid after {MAX_REDRAWS} tries in dimension {last}")))
                    }
                }
            }
            out.push(knots);
        }
        Ok(out)
    }
}

fn check_knot_vector(v: &[f64]) -> std::result::Result<SampledKnot, String> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(KNOT_STAT_NAMES[i].to_string());
    }
    let (params, tau) = knot_from_stat_vector(v);
    if tau.abs() >= MAX_INCLINE {
        return Err("tau".into());
    }
    let named = [
        ("gamma", params.gamma),
        ("rho_max", params.rho_max),
        ("r_max", params.r_max),
        ("phi0", params.phi0),
        ("phi1", params.phi1),
        ("psi0", params.psi0),
        ("psi1", params.psi1),
    ];
    if let Some((n, _)) = named.iter().find(|(_, x)| !(*x > 0.0) || !x.is_finite()) {
        return Err(n.to_string());
    }
    Ok(SampledKnot { params, tau })
}

fn centerline_names(n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("y{k}")).chain((1..=n).map(|k| format!("z{k}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_prior_is_valid() {
        ModelStatistics::reference().validate().unwrap();
    }

    #[test]
    fn knot_vector_round_trip() {
        let p = KnotParams { s0: 1.5, l0: 1030.0, gamma: 1.3, rho_max: 110.0, phi0: 0.6, phi1: 0.4, r_max: 9.0, psi0: 0.8, psi1: 0.3 };
        let v = knot_stat_vector(&p, 40.0, 1000.0);
        let (q, tau) = knot_from_stat_vector(&v);
        assert!((tau - (40.0f64 / 110.0).atan()).abs() < 1e-15);
        assert!((q.l0 - 30.0).abs() < 1e-12);
        for (a, b) in [(q.gamma, p.gamma), (q.rho_max, p.rho_max), (q.phi0, p.phi0), (q.phi1, p.phi1), (q.r_max, p.r_max), (q.psi0, p.psi0), (q.psi1, p.psi1)] {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn sampled_knots_lie_in_valid_boxes() {
        let mut s = ModelStatistics::reference();
        // very wide spreads push draws toward the transform limits
        s.knot_params.global_mu_sd = vec![50.0; 10];
        s.knot_params.global_sigma_mean = vec![20.0; 10];
        s.knot_params.global_mu_sd[9] = 0.2;
        s.knot_params.global_sigma_mean[9] = 0.1;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            for c in s.sample_knot_hierarchy(&mut rng, &[4, 4]).unwrap() {
                for k in c {
                    let p = k.params;
                    assert!(p.gamma > 0.0 && p.rho_max > 0.0 && p.r_max > 0.0);
                    for r in [p.phi0, p.phi1, p.psi0, p.psi1] {
                        assert!(r > 0.0 && r <= 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn impossible_incline_is_error_naming_dimension() {
        let mut s = ModelStatistics::reference();
        s.knot_params.global_mu_mean[9] = 3.0;
        s.knot_params.global_mu_sd[9] = 0.0;
        s.knot_params.log_mu_sd[9] = 0.0;
        s.knot_params.global_sigma_mean[9] = 0.0;
        s.knot_params.global_sigma_sd[9] = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        match s.sample_knot_hierarchy(&mut rng, &[1]) {
            Err(Error::Numeric(m)) => assert!(m.contains("tau"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn knot_count_distribution() {
        let w = ModelStatistics::reference().whorls;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20_000;
        let mean = (0..n).map(|_| w.sample_knot_count(&mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - w.mean_knots_per_cluster()).abs() < 0.03);
    }

    #[test]
    fn empty_model_list_is_error() {
        assert!(matches!(ModelStatistics::fit(&[]), Err(Error::EmptyInput(_))));
    }
}
