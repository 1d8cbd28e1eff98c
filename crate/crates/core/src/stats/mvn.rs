//! Multivariate normal sampling with covariance `(sigma sigma^T) . P`, moment
//! estimators and correlation repair.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Eigenvalues below `-NEG_TOLERANCE * scale` mean a covariance is not PSD.
const NEG_TOLERANCE: f64 = 1e-9;

/// Covariance `(sigma sigma^T) . P` as a dense matrix.
pub fn hadamard_covariance(sigma: &[f64], corr: &DMatrix<f64>) -> DMatrix<f64> {
    let d = sigma.len();
    DMatrix::from_fn(d, d, |i, j| sigma[i] * sigma[j] * corr[(i, j)])
}

/// Square-root factor `A` with `A A^T = cov`, from the symmetric
/// eigendecomposition. Eigenvalues that are negative only by rounding are
/// clipped to zero; larger negative ones are an error.
pub fn covariance_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = cov.nrows();
    if cov.ncols() != d {
        return Err(Error::InvalidParameter("covariance must be square".into()));
    }
    if d == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite covariance".into()));
    }
    let sym = (cov + cov.transpose()) * 0.5;
    let scale = sym.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -NEG_TOLERANCE * scale {
        return Err(Error::Numeric(format!("covariance is not positive semi-definite (eigenvalue {min:e})")));
    }
    let mut a = eig.eigenvectors;
    for (k, lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        a.column_mut(k).scale_mut(s);
    }
    Ok(a)
}

/// One draw from `N(mu, (sigma sigma^T) . P)`.
pub fn sample_mvn<R: Rng + ?Sized>(mu: &[f64], sigma: &[f64], corr: &DMatrix<f64>, rng: &mut R) -> Result<Vec<f64>> {
    let d = mu.len();
    if sigma.len() != d || corr.nrows() != d || corr.ncols() != d {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: mu {d}, sigma {}, P {}x{}",
            sigma.len(),
            corr.nrows(),
            corr.ncols()
        )));
    }
    if sigma.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(Error::InvalidParameter("standard deviations must be finite and non-negative".into()));
    }
    check_correlation(corr, 1e-9)?;
    let factor = covariance_factor(&hadamard_covariance(sigma, corr))?;
    Ok(sample_with_factor(mu, &factor, rng))
}

/// `mu + A z` with standard normal `z`.
pub fn sample_with_factor<R: Rng + ?Sized>(mu: &[f64], factor: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let z = DVector::from_fn(mu.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = factor * z;
    mu.iter().zip(x.iter()).map(|(m, v)| m + v).collect()
}

/// Symmetric with unit diagonal and entries in `[-1, 1]`.
pub fn check_correlation(p: &DMatrix<f64>, tol: f64) -> Result<()> {
    let d = p.nrows();
    if p.ncols() != d {
        return Err(Error::InvalidParameter("correlation matrix must be square".into()));
    }
    for i in 0..d {
        if (p[(i, i)] - 1.0).abs() > tol {
            return Err(Error::InvalidParameter(format!("correlation diagonal entry {i} is {}", p[(i, i)])));
        }
        for j in 0..i {
            if (p[(i, j)] - p[(j, i)]).abs() > tol || !p[(i, j)].is_finite() || p[(i, j)].abs() > 1.0 + tol {
                return Err(Error::InvalidParameter(format!("correlation entry ({i}, {j}) is invalid")));
            }
        }
    }
    Ok(())
}

/// Nearest-by-eigenvalue-clipping correlation matrix. Matrices that are already
/// positive semi-definite come back unchanged apart from symmetrization.
pub fn repair_correlation(p: &DMatrix<f64>) -> DMatrix<f64> {
    let d = p.nrows();
    let sym = (p + p.transpose()) * 0.5;
    if d == 0 {
        return sym;
    }
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.min() >= 0.0 {
        return sym;
    }
    let floor = 1e-10;
    let clipped = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(floor)));
    let q = &eig.eigenvectors * clipped * eig.eigenvectors.transpose();
    let mut out = DMatrix::from_fn(d, d, |i, j| q[(i, j)] / (q[(i, i)] * q[(j, j)]).sqrt());
    for i in 0..d {
        out[(i, i)] = 1.0;
    }
    out
}

/// Correlation shrunk toward the identity: `(1 - w) P + w I`.
pub fn shrink_correlation(p: &DMatrix<f64>, w: f64) -> DMatrix<f64> {
    let w = w.clamp(0.0, 1.0);
    let d = p.nrows();
    DMatrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { (1.0 - w) * p[(i, j)] })
}

/// Population mean and standard deviation.
pub fn population_moments(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let m = values.iter().sum::<f64>() / n;
    let v = values.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, v.max(0.0).sqrt())
}

/// Mean vector and population covariance of row samples.
pub fn population_covariance(rows: &[Vec<f64>], d: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = rows.len();
    let mut mean = vec![0.0; d];
    if n == 0 {
        return (mean, DMatrix::zeros(d, d));
    }
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let mut cov = DMatrix::zeros(d, d);
    for r in rows {
        for i in 0..d {
            for j in 0..=i {
                cov[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]) / n as f64;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[(j, i)] = cov[(i, j)];
        }
    }
    (mean, cov)
}

/// Correlation from a covariance; dimensions with zero variance get an
/// identity row and column.
pub fn correlation_from_covariance(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let d = cov.nrows();
    let sd: Vec<f64> = (0..d).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            1.0
        } else if sd[i] > 1e-300 && sd[j] > 1e-300 {
            (cov[(i, j)] / (sd[i] * sd[j])).clamp(-1.0, 1.0)
        } else {
            0.0
        }
    })
}

/// Mean and covariance of a multivariate normal over named coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MvnStats {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    /// Row-major covariance.
    pub covariance: Vec<Vec<f64>>,
    pub sample_count: usize,
    /// True when the values come from the reference prior rather than data.
    pub defaulted: bool,
}

impl MvnStats {
    pub fn from_samples(names: &[&str], rows: &[Vec<f64>]) -> Self {
        let d = names.len();
        let (mean, cov) = population_covariance(rows, d);
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            mean,
            covariance: (0..d).map(|i| (0..d).map(|j| cov[(i, j)]).collect()).collect(),
            sample_count: rows.len(),
            defaulted: false,
        }
    }

    /// Independent coordinates with the given means and standard deviations.
    pub fn diagonal(names: &[&str], mean: &[f64], sd: &[f64]) -> Self {
        let d = names.len();
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            mean: mean.to_vec(),
            covariance: (0..d).map(|i| (0..d).map(|j| if i == j { sd[i] * sd[i] } else { 0.0 }).collect()).collect(),
            sample_count: 0,
            defaulted: true,
        }
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let d = self.dimension();
        DMatrix::from_fn(d, d, |i, j| self.covariance[i][j])
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        let d = self.mean.len();
        if self.names.len() != d || self.covariance.len() != d || self.covariance.iter().any(|r| r.len() != d) {
            return Err(Error::Validation(format!("{what}: dimensions of names, mean and covariance disagree")));
        }
        if self.mean.iter().chain(self.covariance.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("{what}: non-finite entry")));
        }
        let c = self.covariance_matrix();
        for i in 0..d {
            for j in 0..i {
                if (c[(i, j)] - c[(j, i)]).abs() > 1e-9 * (1.0 + c[(i, j)].abs()) {
                    return Err(Error::Validation(format!("{what}: covariance is not symmetric")));
                }
            }
        }
        covariance_factor(&c).map_err(|e| Error::Validation(format!("{what}: covariance PSD: {e}")))?;
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let factor = covariance_factor(&self.covariance_matrix())?;
        Ok(sample_with_factor(&self.mean, &factor, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn draws(mu: &[f64], sigma: &[f64], p: &DMatrix<f64>, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = covariance_factor(&hadamard_covariance(sigma, p)).unwrap();
        (0..n).map(|_| sample_with_factor(mu, &f, &mut rng)).collect()
    }

    #[test]
    fn identity_correlation_gives_uncorrelated_draws() {
        let sigma = [1.0, 3.0, 0.5];
        let rows = draws(&[0.0; 3], &sigma, &DMatrix::identity(3, 3), 100_000, 1);
        let (_, cov) = population_covariance(&rows, 3);
        let corr = correlation_from_covariance(&cov);
        for i in 0..3 {
            for j in 0..i {
                assert!(corr[(i, j)].abs() < 0.02, "{corr}");
            }
        }
    }

    #[test]
    fn zero_sigma_returns_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, 1.0]);
        for _ in 0..10 {
            assert_eq!(sample_mvn(&[1.5, -2.0], &[0.0, 0.0], &p, &mut rng).unwrap(), vec![1.5, -2.0]);
        }
    }

    #[test]
    fn empirical_covariance_matches_hadamard_product() {
        let sigma = [2.0, 0.5, 1.0, 4.0];
        let p = DMatrix::from_row_slice(4, 4, &[1.0, 0.6, -0.3, 0.1, 0.6, 1.0, 0.2, 0.0, -0.3, 0.2, 1.0, 0.5, 0.1, 0.0, 0.5, 1.0]);
        let target = hadamard_covariance(&sigma, &p);
        let rows = draws(&[1.0, 2.0, 3.0, 4.0], &sigma, &p, 100_000, 3);
        let (_, cov) = population_covariance(&rows, 4);
        let rel = (&cov - &target).norm() / target.norm();
        assert!(rel < 0.05, "{rel}");
    }

    #[test]
    fn non_psd_correlation_is_rejected_and_repairable() {
        let p = DMatrix::from_row_slice(3, 3, &[1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_mvn(&[0.0; 3], &[1.0; 3], &p, &mut rng), Err(Error::Numeric(_))));
        let q = repair_correlation(&p);
        check_correlation(&q, 1e-12).unwrap();
        assert!(SymmetricEigen::new(q.clone()).eigenvalues.min() > -1e-12);
        sample_mvn(&[0.0; 3], &[1.0; 3], &q, &mut rng).unwrap();
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_mvn(&[0.0; 2], &[1.0; 3], &DMatrix::identity(2, 2), &mut rng).is_err());
    }

    #[test]
    fn shrinkage_keeps_unit_diagonal() {
        let p = DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0]);
        let s = shrink_correlation(&p, 0.25);
        assert_eq!(s[(0, 0)], 1.0);
        assert!((s[(0, 1)] - 0.6).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn repair_leaves_valid_correlations_alone(a in -1.0f64..1.0, b in -1.0f64..1.0, t in 0.0f64..1.0) {
            // a Gram matrix of unit vectors is always a valid correlation
            let v = [[1.0, 0.0, 0.0], [a.cos(), a.sin(), 0.0], [b.cos() * t.cos(), b.sin() * t.cos(), t.sin()]];
            let p = DMatrix::from_fn(3, 3, |i, j| (0..3).map(|k| v[i][k] * v[j][k]).sum::<f64>());
            let q = repair_correlation(&p);
            prop_assert!((&q - &p).norm() < 1e-6);
        }
    }
}
