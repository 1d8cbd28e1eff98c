//! Small numerical building blocks shared by the geometric models.

pub mod chebyshev;
pub mod quadrature;

/// Wraps an angle into `[0, 2pi)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = theta.rem_euclid(tau);
    // rem_euclid can round up to exactly tau for tiny negative inputs
    if w >= tau {
        0.0
    } else {
        w
    }
}

/// Wraps an angle difference into `[-pi, pi)`.
pub fn wrap_signed(delta: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (delta + pi).rem_euclid(std::f64::consts::TAU) - pi
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Median of a slice; reorders the input.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Population standard deviation.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Smallest value `squash_ratio` can produce.
pub const RATIO_FLOOR: f64 = 1e-3;

/// Maps the real line onto the ratio interval `(RATIO_FLOOR, 1)`.
pub fn squash_ratio(u: f64) -> f64 {
    RATIO_FLOOR + (1.0 - RATIO_FLOOR) * logistic(u)
}

/// Inverse of `squash_ratio`, saturating near the interval ends.
pub fn unsquash_ratio(v: f64) -> f64 {
    logit(((v - RATIO_FLOOR) / (1.0 - RATIO_FLOOR)).clamp(1e-9, 1.0 - 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn wrap_angle_stays_in_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!((wrap_angle(TAU + 1.0) - 1.0).abs() < 1e-12);
        assert!(wrap_angle(-1e-300) < TAU);
    }

    #[test]
    fn wrap_signed_range() {
        assert!((wrap_signed(TAU - 0.1) + 0.1).abs() < 1e-12);
        assert!((wrap_signed(PI - 0.1) - (PI - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_in_place(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn logistic_logit_inverse() {
        for p in [0.01, 0.3, 0.5, 0.9, 0.999] {
            assert!((logistic(logit(p)) - p).abs() < 1e-12);
        }
    }
}
