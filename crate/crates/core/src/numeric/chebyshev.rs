//! Chebyshev series of the first kind on an affine domain.

/// Affine map of `[lo, hi]` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ChebDomain {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    #[inline]
    pub fn to_unit(&self, x: f64) -> f64 {
        (2.0 * x - (self.lo + self.hi)) / (self.hi - self.lo)
    }

    /// d(t)/d(x) of the affine map.
    #[inline]
    pub fn scale(&self) -> f64 {
        2.0 / (self.hi - self.lo)
    }
}

/// Evaluates `sum_k c[k] T_k(t)` with Clenshaw's recurrence.
pub fn eval(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    match coeffs.first() {
        Some(&c0) => t * b1 - b2 + c0,
        None => 0.0,
    }
}

/// Evaluates `sum_k c[k] T_{k+1}(t)`, i.e. a series whose constant term is omitted.
pub fn eval_without_constant(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().rev() {
        let b0 = 2.0 * t * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2
}

/// Coefficients of the derivative series d/dt.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n - 1];
    // c'_{k-1} = c'_{k+1} + 2 k c_k, with c'_{n-1} = c'_n = 0
    for k in (1..n).rev() {
        let next = if k + 1 < n - 1 { d[k + 1] } else { 0.0 };
        d[k - 1] = next + 2.0 * k as f64 * coeffs[k];
    }
    d[0] *= 0.5;
    d
}

/// Values `T_0(t) .. T_{n-1}(t)`.
pub fn basis(t: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(1.0);
    if n == 1 {
        return out;
    }
    out.push(t);
    for k in 2..n {
        let v = 2.0 * t * out[k - 1] - out[k - 2];
        out.push(v);
    }
    out
}
