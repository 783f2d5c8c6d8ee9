//! First-order zero-chains: the smooth tridiagonal quadratic and the
//! nonsmooth max-plus-quadratic function.
//!
//! Both are built so that a point supported on the first `k` coordinates has
//! a (sub)gradient supported on the first `k + 1`, with exact floating-point
//! zeros everywhere else.

use crate::error::{invalid, Result};
use crate::oracle::Objective;
use crate::Vector;

/// Parameters of a chain: dimension `q`, regularity constant (`L` or `C`) and
/// scale `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub q: usize,
    pub constant: f64,
    pub r: f64,
}

impl ChainSpec {
    pub fn new(q: usize, constant: f64, r: f64) -> Result<Self> {
        if q == 0 {
            return Err(invalid("chain dimension q must be at least 1"));
        }
        if !(constant > 0.0 && constant.is_finite() && r > 0.0 && r.is_finite()) {
            return Err(invalid("chain constant and scale must be positive"));
        }
        Ok(ChainSpec { q, constant, r })
    }
}

/// `h(x) = (L/4) * (1/2 * (x_1^2 + sum (x_i - x_{i+1})^2 + x_q^2) - R x_1)`.
#[derive(Debug, Clone)]
pub struct SmoothChain {
    spec: ChainSpec,
}

impl SmoothChain {
    pub fn new(spec: ChainSpec) -> Self {
        SmoothChain { spec }
    }

    pub fn spec(&self) -> ChainSpec {
        self.spec
    }

    /// `x*_j = R (1 - j / (q + 1))`, one-based `j`.
    pub fn minimizer(&self) -> Vector {
        let q = self.spec.q;
        Vector::from_fn(q, |i, _| self.spec.r * (1.0 - (i + 1) as f64 / (q + 1) as f64))
    }

    /// `-(L R^2 / 8) * q / (q + 1)`.
    pub fn min_value(&self) -> f64 {
        let ChainSpec { q, constant, r } = self.spec;
        -(constant * r * r / 8.0) * q as f64 / (q + 1) as f64
    }
}

impl Objective for SmoothChain {
    fn dim(&self) -> usize {
        self.spec.q
    }

    fn value(&self, x: &Vector) -> f64 {
        let q = self.spec.q;
        let mut quad = x[0] * x[0] + x[q - 1] * x[q - 1];
        for i in 0..q - 1 {
            let d = x[i] - x[i + 1];
            quad += d * d;
        }
        self.spec.constant / 4.0 * (0.5 * quad - self.spec.r * x[0])
    }

    fn first_order(&self, x: &Vector) -> Vector {
        let q = self.spec.q;
        let scale = self.spec.constant / 4.0;
        let mut grad = Vector::zeros(q);
        for i in 0..q {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < q { x[i + 1] } else { 0.0 };
            grad[i] = scale * (2.0 * x[i] - left - right);
        }
        grad[0] -= scale * self.spec.r;
        grad
    }
}

/// `r(x) = (C sqrt(q) / (1 + sqrt(q))) max_j x_j + (C / (2 R (1 + sqrt(q)))) |x|^2`.
///
/// The max term contributes `e_j` for the smallest index `j` attaining the
/// maximum (exact float comparison), which keeps the chain resisting.
#[derive(Debug, Clone)]
pub struct LipschitzChain {
    spec: ChainSpec,
}

impl LipschitzChain {
    pub fn new(spec: ChainSpec) -> Self {
        LipschitzChain { spec }
    }

    pub fn spec(&self) -> ChainSpec {
        self.spec
    }

    fn coefficients(&self) -> (f64, f64) {
        let ChainSpec { q, constant, r } = self.spec;
        let sq = (q as f64).sqrt();
        (constant * sq / (1.0 + sq), constant / (2.0 * r * (1.0 + sq)))
    }

    /// `-(R / sqrt(q)) * 1`.
    pub fn minimizer(&self) -> Vector {
        let q = self.spec.q;
        Vector::from_element(q, -self.spec.r / (q as f64).sqrt())
    }

    /// `-C R / (2 (1 + sqrt(q)))`.
    pub fn min_value(&self) -> f64 {
        let ChainSpec { q, constant, r } = self.spec;
        -constant * r / (2.0 * (1.0 + (q as f64).sqrt()))
    }
}

fn first_argmax(x: &Vector) -> (usize, f64) {
    let mut best = (0, x[0]);
    for (i, &v) in x.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

impl Objective for LipschitzChain {
    fn dim(&self) -> usize {
        self.spec.q
    }

    fn value(&self, x: &Vector) -> f64 {
        let (lin, quad) = self.coefficients();
        lin * first_argmax(x).1 + quad * x.norm_squared()
    }

    fn first_order(&self, x: &Vector) -> Vector {
        let (lin, quad) = self.coefficients();
        let mut s = x * (2.0 * quad);
        s[first_argmax(x).0] += lin;
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn smooth_chain_minimizer_example() {
        let h = SmoothChain::new(ChainSpec::new(3, 4.0, 1.0).unwrap());
        let xs = h.minimizer();
        assert!((xs - v(&[0.75, 0.5, 0.25])).norm() < 1e-15);
        assert!(h.first_order(&h.minimizer()).norm() < 1e-15);
        assert!((h.value(&h.minimizer()) - h.min_value()).abs() < 1e-15);
    }

    #[test]
    fn smooth_chain_at_origin() {
        let (l, r) = (4.0, 1.5);
        let h = SmoothChain::new(ChainSpec::new(5, l, r).unwrap());
        let zero = Vector::zeros(5);
        assert_eq!(h.value(&zero), 0.0);
        let mut expected = Vector::zeros(5);
        expected[0] = -l * r / 4.0;
        assert_eq!(h.first_order(&zero), expected);
    }

    #[test]
    fn smooth_chain_q1() {
        let h = SmoothChain::new(ChainSpec::new(1, 2.0, 1.0).unwrap());
        // (L/4)(x^2 - R x) with minimizer R/2
        assert!((h.minimizer()[0] - 0.5).abs() < 1e-15);
        assert!(h.first_order(&h.minimizer()).norm() < 1e-15);
    }

    #[test]
    fn lipschitz_chain_at_origin() {
        let r = LipschitzChain::new(ChainSpec::new(4, 1.0, 1.0).unwrap());
        let zero = Vector::zeros(4);
        assert_eq!(r.value(&zero), 0.0);
        let s = r.first_order(&zero);
        assert!((s - v(&[2.0 / 3.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn lipschitz_chain_minimizer() {
        let r = LipschitzChain::new(ChainSpec::new(4, 1.0, 1.0).unwrap());
        let xs = r.minimizer();
        assert!((xs.norm() - 1.0).abs() < 1e-15);
        assert!((r.value(&xs) + 1.0 / 6.0).abs() < 1e-15);
        assert!((r.min_value() + 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn resisting_rule_picks_smallest_index() {
        let r = LipschitzChain::new(ChainSpec::new(4, 1.0, 1.0).unwrap());
        let x = v(&[-0.5, 0.0, 0.0, -0.1]);
        let s = r.first_order(&x);
        // max 0 attained at indices 1 and 2; smallest is 1
        assert!(s[1] > 0.0);
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(ChainSpec::new(0, 1.0, 1.0).is_err());
        assert!(ChainSpec::new(2, 0.0, 1.0).is_err());
        assert!(ChainSpec::new(2, 1.0, -1.0).is_err());
    }
}
