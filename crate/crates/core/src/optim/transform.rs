use serde::{Deserialize, Serialize};

use crate::numeric::{logistic, logit};

/// Smooth bijection between a bounded parameter and an unconstrained value,
/// so that the minimizer can work without box constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Transform {
    Identity,
    /// `value = lower + exp(u)`
    LowerBound(f64),
    /// `value = lo + (hi - lo) * logistic(u)`
    Interval(f64, f64),
}

impl Transform {
    /// Parameter value to unconstrained coordinate. Values on or outside the
    /// boundary are pulled just inside it.
    pub fn to_free(&self, value: f64) -> f64 {
        match *self {
            Transform::Identity => value,
            Transform::LowerBound(lo) => {
                let d = (value - lo).max(1e-12 * (1.0 + lo.abs()));
                d.ln()
            }
            Transform::Interval(lo, hi) => {
                let p = ((value - lo) / (hi - lo)).clamp(1e-9, 1.0 - 1e-9);
                logit(p)
            }
        }
    }

    pub fn from_free(&self, u: f64) -> f64 {
        match *self {
            Transform::Identity => u,
            Transform::LowerBound(lo) => lo + u.exp(),
            Transform::Interval(lo, hi) => lo + (hi - lo) * logistic(u),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_inside_bounds() {
        let ts = [Transform::Identity, Transform::LowerBound(1.0), Transform::Interval(0.0, 1.0)];
        for t in ts {
            for v in [1.2, 1.5, 1.9] {
                let v = if matches!(t, Transform::Interval(..)) { v - 1.0 } else { v };
                assert!((t.from_free(t.to_free(v)) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn outputs_stay_in_box() {
        let t = Transform::Interval(0.0, 1.0);
        for u in [-800.0, -10.0, 0.0, 10.0, 800.0] {
            let v = t.from_free(u);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(Transform::LowerBound(1.0).from_free(-20.0) > 1.0);
        assert!(Transform::LowerBound(1.0).from_free(-800.0) >= 1.0);
    }
}
