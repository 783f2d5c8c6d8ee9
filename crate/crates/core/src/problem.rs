//! Problem containers: feasible ball, regularity constants, tolerances and the
//! bilevel problem itself.

use crate::error::{invalid, Result};
use crate::oracle::{CallCounts, Oracle};
use crate::Vector;

/// Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    center: Vector,
    radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("ball radius must be positive, got {radius}")));
        }
        if center.is_empty() {
            return Err(invalid("ball dimension must be at least one"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(invalid("ball center must be finite"));
        }
        Ok(Ball { center, radius })
    }

    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Ball::new(Vector::zeros(dim), radius)
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `D = 2R`. Every step-size and iteration-count formula uses this.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        (x - &self.center).norm() <= self.radius + tol
    }
}

/// Which first-order regime the problem lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    Lipschitz,
    Smooth,
}

/// Regularity constants for the two levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularity {
    /// `f` is `l_f`-smooth, `g` is `l_g`-smooth.
    Smooth { l_f: f64, l_g: f64 },
    /// `f` is `c_f`-Lipschitz, `g` is `c_g`-Lipschitz on the feasible set.
    Lipschitz { c_f: f64, c_g: f64 },
}

impl Regularity {
    pub fn setting(&self) -> Setting {
        match self {
            Regularity::Smooth { .. } => Setting::Smooth,
            Regularity::Lipschitz { .. } => Setting::Lipschitz,
        }
    }

    pub fn upper(&self) -> f64 {
        match *self {
            Regularity::Smooth { l_f, .. } => l_f,
            Regularity::Lipschitz { c_f, .. } => c_f,
        }
    }

    pub fn lower(&self) -> f64 {
        match *self {
            Regularity::Smooth { l_g, .. } => l_g,
            Regularity::Lipschitz { c_g, .. } => c_g,
        }
    }

    /// Same setting with the lower-level constant multiplied by `c`.
    pub fn with_lower_scaled(&self, c: f64) -> Regularity {
        match *self {
            Regularity::Smooth { l_f, l_g } => Regularity::Smooth { l_f, l_g: c * l_g },
            Regularity::Lipschitz { c_f, c_g } => Regularity::Lipschitz { c_f, c_g: c * c_g },
        }
    }

    /// `max` of the two constants, as used by the minimax subroutines.
    pub fn joint(&self) -> f64 {
        self.upper().max(self.lower())
    }

    fn validate(&self) -> Result<()> {
        let (a, b) = (self.upper(), self.lower());
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(invalid(format!("regularity constants must be positive, got ({a}, {b})")));
        }
        Ok(())
    }
}

/// Target accuracies for the weak-optimality certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eps_f: f64,
    pub eps_g: f64,
}

impl Tolerances {
    pub fn new(eps_f: f64, eps_g: f64) -> Result<Self> {
        if !(eps_f > 0.0 && eps_f.is_finite() && eps_g > 0.0 && eps_g.is_finite()) {
            return Err(invalid(format!("tolerances must be positive, got ({eps_f}, {eps_g})")));
        }
        Ok(Tolerances { eps_f, eps_g })
    }

    pub fn uniform(eps: f64) -> Result<Self> {
        Tolerances::new(eps, eps)
    }
}

/// `min f(x)` over the minimizers of `g` on a ball.
#[derive(Debug, Clone)]
pub struct BilevelProblem {
    pub f: Oracle,
    pub g: Oracle,
    pub set: Ball,
    pub regularity: Regularity,
    /// Initial point of every solver; defaults to the ball center.
    pub start: Vector,
    /// A known lower bound on `min_Z f` (e.g. zero for nonnegative `f`).
    pub f_lower_bound: Option<f64>,
    /// A known lower bound on `min_Z g`, enabling early exit of the
    /// lower-level initialization solve.
    pub g_lower_bound: Option<f64>,
    /// Non-fatal construction notes (e.g. a floored smoothness constant).
    pub warnings: Vec<String>,
}

impl BilevelProblem {
    pub fn new(f: Oracle, g: Oracle, set: Ball, regularity: Regularity) -> Result<Self> {
        regularity.validate()?;
        let n = set.dim();
        if f.dim() != n || g.dim() != n {
            return Err(invalid(format!(
                "dimension mismatch: f is {}, g is {}, set is {n}",
                f.dim(),
                g.dim()
            )));
        }
        let start = set.center().clone();
        Ok(BilevelProblem {
            f,
            g,
            set,
            regularity,
            start,
            f_lower_bound: None,
            g_lower_bound: None,
            warnings: Vec::new(),
        })
    }

    pub fn with_start(mut self, start: Vector) -> Result<Self> {
        if start.len() != self.dim() || start.iter().any(|v| !v.is_finite()) {
            return Err(invalid("start point must be finite and match the problem dimension"));
        }
        if !self.set.contains(&start, 1e-10) {
            return Err(invalid("start point must lie in the feasible ball"));
        }
        self.start = start;
        Ok(self)
    }

    /// Declares `f >= 0`, so the initial bracket may use zero as its lower end.
    pub fn with_nonnegative_f(mut self) -> Self {
        self.f_lower_bound = Some(0.0);
        self
    }

    pub fn with_g_lower_bound(mut self, bound: f64) -> Self {
        self.g_lower_bound = Some(bound);
        self
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn setting(&self) -> Setting {
        self.regularity.setting()
    }

    pub fn f_counts(&self) -> CallCounts {
        self.f.counts()
    }

    pub fn g_counts(&self) -> CallCounts {
        self.g.counts()
    }

    /// Total first-order calls over both levels.
    pub fn first_order_calls(&self) -> u64 {
        self.f.counts().first_order + self.g.counts().first_order
    }
}

/// Known optimum of a test instance.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub x_star: Vector,
    pub f_star: f64,
    pub g_star: f64,
}

/// A problem bundled with its ground truth.
#[derive(Debug, Clone)]
pub struct Instance {
    pub problem: BilevelProblem,
    pub truth: GroundTruth,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Zero;

    #[test]
    fn ball_validation() {
        assert!(Ball::centered(2, 0.0).is_err());
        assert!(Ball::centered(2, -1.0).is_err());
        assert!(Ball::centered(0, 1.0).is_err());
        let b = Ball::centered(3, 2.0).unwrap();
        assert_eq!(b.diameter(), 4.0);
    }

    #[test]
    fn tolerances_must_be_positive() {
        assert!(Tolerances::new(0.0, 1.0).is_err());
        assert!(Tolerances::new(1e-3, -1.0).is_err());
        assert!(Tolerances::uniform(1e-6).is_ok());
    }

    #[test]
    fn problem_checks_dimensions_and_constants() {
        let set = Ball::centered(2, 1.0).unwrap();
        let f = Oracle::new("f", Zero(2));
        let g = Oracle::new("g", Zero(3));
        assert!(BilevelProblem::new(f.clone(), g, set.clone(), Regularity::Smooth { l_f: 1.0, l_g: 1.0 }).is_err());
        let g = Oracle::new("g", Zero(2));
        assert!(BilevelProblem::new(f.clone(), g.clone(), set.clone(), Regularity::Smooth { l_f: 0.0, l_g: 1.0 }).is_err());
        let p = BilevelProblem::new(f, g, set, Regularity::Lipschitz { c_f: 1.0, c_g: 2.0 }).unwrap();
        assert_eq!(p.regularity.joint(), 2.0);
        assert!(p.clone().with_start(Vector::from_vec(vec![2.0, 0.0])).is_err());
    }
}
