//! Worst-case instances built from zero-chains.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::oracle::{Objective, Oracle, Zero};
use crate::problem::{Ball, BilevelProblem, GroundTruth, Instance, Regularity, Setting};
use crate::Vector;

use super::chain::{ChainSpec, LipschitzChain, SmoothChain};

/// `1/2 * sum_{j >= start} x_j^2` (zero-based `start`).
#[derive(Debug, Clone, Copy)]
pub struct TailQuadratic {
    dim: usize,
    start: usize,
}

impl TailQuadratic {
    pub fn new(dim: usize, start: usize) -> Self {
        TailQuadratic { dim, start }
    }
}

impl Objective for TailQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.rows(self.start, self.dim - self.start).norm_squared()
    }

    fn first_order(&self, x: &Vector) -> Vector {
        let mut g = x.clone();
        g.rows_mut(0, self.start).fill(0.0);
        g
    }
}

fn check_horizon(t: usize) -> Result<()> {
    if t == 0 {
        return Err(invalid("horizon T must be at least 1"));
    }
    Ok(())
}

/// Smooth instance on which no zero-respecting method moves the upper-level
/// value within `T` first-order calls: `q = 2T`, `f = 1/2 sum_{j>T} x_j^2`,
/// `g = h_{2T, 1, 1/sqrt(2T)}`, `Z = B(0, 1)`.
pub fn make_smooth_hard_instance(t: usize) -> Result<Instance> {
    check_horizon(t)?;
    let q = 2 * t;
    let chain = SmoothChain::new(ChainSpec::new(q, 1.0, 1.0 / (q as f64).sqrt())?);
    let x_star = chain.minimizer();
    let g_star = chain.min_value();
    let f_star = (t as f64 + 1.0) / (24.0 * (2.0 * t as f64 + 1.0));
    let f = Oracle::new("tail", TailQuadratic::new(q, t));
    let g = Oracle::new("h_chain", chain);
    let problem = BilevelProblem::new(f, g, Ball::centered(q, 1.0)?, Regularity::Smooth { l_f: 1.0, l_g: 1.0 })?;
    Ok(Instance {
        problem,
        truth: GroundTruth { x_star, f_star, g_star },
    })
}

/// Lipschitz counterpart: `g = r_{2T, 1, 1}` with the same tail `f`; `f* = 1/4`.
pub fn make_lipschitz_hard_instance(t: usize) -> Result<Instance> {
    check_horizon(t)?;
    let q = 2 * t;
    let chain = LipschitzChain::new(ChainSpec::new(q, 1.0, 1.0)?);
    let x_star = chain.minimizer();
    let g_star = chain.min_value();
    let f = Oracle::new("tail", TailQuadratic::new(q, t));
    let g = Oracle::new("r_chain", chain);
    let problem = BilevelProblem::new(f, g, Ball::centered(q, 1.0)?, Regularity::Lipschitz { c_f: 1.0, c_g: 1.0 })?;
    Ok(Instance {
        problem,
        truth: GroundTruth { x_star, f_star: 0.25, g_star },
    })
}

/// Which level carries the chain in a lower-bound instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Upper,
    Lower,
}

/// Single-level lower-bound instance lifted to the bilevel setting: one level
/// is a chain, the other is identically zero, and `Z = B(0, D)`.
///
/// Smooth uses `h_{2T+1, constant, D}`; Lipschitz uses `r_{T, constant, D}`.
/// The ground truth is the chain's own unconstrained minimizer and value.
pub fn make_lower_bound_instance(
    setting: Setting,
    level: Level,
    t: usize,
    constant: f64,
    d: f64,
) -> Result<Instance> {
    check_horizon(t)?;
    let (chain, dim, x_star, chain_min): (Arc<dyn Objective>, usize, Vector, f64) = match setting {
        Setting::Smooth => {
            let c = SmoothChain::new(ChainSpec::new(2 * t + 1, constant, d)?);
            let (x, m) = (c.minimizer(), c.min_value());
            (Arc::new(c), 2 * t + 1, x, m)
        }
        Setting::Lipschitz => {
            let c = LipschitzChain::new(ChainSpec::new(t, constant, d)?);
            let (x, m) = (c.minimizer(), c.min_value());
            (Arc::new(c), t, x, m)
        }
    };
    let zero = Oracle::new("zero", Zero(dim));
    let chain = Oracle::from_arc("chain", chain);
    let (f, g, f_star, g_star) = match level {
        Level::Upper => (chain, zero, chain_min, 0.0),
        Level::Lower => (zero, chain, 0.0, chain_min),
    };
    let regularity = match setting {
        Setting::Smooth => Regularity::Smooth { l_f: constant, l_g: constant },
        Setting::Lipschitz => Regularity::Lipschitz { c_f: constant, c_g: constant },
    };
    let problem = BilevelProblem::new(f, g, Ball::centered(dim, d)?, regularity)?;
    // the zero level's optimal value is known exactly
    let problem = match level {
        Level::Upper => problem.with_g_lower_bound(0.0),
        Level::Lower => problem.with_nonnegative_f(),
    };
    Ok(Instance {
        problem,
        truth: GroundTruth { x_star, f_star, g_star },
    })
}
