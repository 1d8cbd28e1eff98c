//! Least-squares machinery: dense linear least squares and a Levenberg-Marquardt
//! minimizer with finite-difference Jacobians.

mod lm;
mod transform;

pub use lm::{finite_difference_jacobian, levenberg_marquardt, FitReport, LmOptions, Termination};
pub use transform::Transform;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Minimizes `|design * x - targets|_2` with an SVD; rank-deficient systems get the
/// minimum-norm solution.
pub fn linear_least_squares(design: &DMatrix<f64>, targets: &DVector<f64>) -> Result<DVector<f64>> {
    let rhs = DMatrix::from_column_slice(targets.len(), 1, targets.as_slice());
    let x = linear_least_squares_multi(design, &rhs)?;
    Ok(x.column(0).into_owned())
}

/// Same as [`linear_least_squares`] for several right-hand sides at once (one per column).
pub fn linear_least_squares_multi(design: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if design.nrows() == 0 || design.ncols() == 0 {
        return Err(Error::EmptyInput("least-squares system"));
    }
    if design.nrows() != targets.nrows() {
        return Err(Error::InvalidParameter(format!(
            "design has {} rows but targets have {}",
            design.nrows(),
            targets.nrows()
        )));
    }
    if design.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entry in least-squares system".into()));
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * f64::EPSILON * design.nrows().max(design.ncols()) as f64;
    svd.solve(targets, eps).map_err(|e| Error::Numeric(e.to_string()))
}
