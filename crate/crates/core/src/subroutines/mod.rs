//! Inner solvers for `psi*(t) = min_Z max{f(x) - t, g~(x)}` and the
//! single-level solvers used to initialize the bisection.

mod agm;
mod sgm;

use crate::error::{invalid, Result};
use crate::oracle::Oracle;
use crate::problem::{Ball, Setting};
use crate::Vector;

pub use agm::{agm_minimax, agm_minimax_with, gradient_mapping_step, next_alpha, single_level_agm, single_level_agm_with, QuadraticModels};
pub use sgm::{sgm_minimax, sgm_minimax_with, single_level_sgm, single_level_sgm_with};

/// Feasibility slack for iterates.
pub const FEASIBILITY_TOL: f64 = 1e-10;

/// Cadence (in iterations) of the early-exit check inside SGM.
pub const SGM_CHECK_EVERY: u64 = 50;

/// The discrete minimax problem at level `t`.
#[derive(Debug, Clone)]
pub struct MinimaxProblem {
    pub f: Oracle,
    pub g_tilde: Oracle,
    pub t: f64,
    pub set: Ball,
    /// `max{L_f, L_g~}` or `max{C_f, C_g~}`.
    pub constant: f64,
    pub setting: Setting,
}

impl MinimaxProblem {
    pub fn new(f: Oracle, g_tilde: Oracle, t: f64, set: Ball, constant: f64, setting: Setting) -> Result<Self> {
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(invalid(format!("minimax constant must be positive, got {constant}")));
        }
        if !t.is_finite() {
            return Err(invalid("level t must be finite"));
        }
        if f.dim() != set.dim() || g_tilde.dim() != set.dim() {
            return Err(invalid("oracle and set dimensions differ"));
        }
        Ok(MinimaxProblem { f, g_tilde, t, set, constant, setting })
    }

    /// Same problem at another level.
    pub fn at_level(&self, t: f64) -> MinimaxProblem {
        MinimaxProblem { t, ..self.clone() }
    }

    /// Sum of first-order calls on both branches.
    pub fn first_order_calls(&self) -> u64 {
        let f = self.f.counts().first_order;
        if self.f.shares_counter_with(&self.g_tilde) {
            f
        } else {
            f + self.g_tilde.counts().first_order
        }
    }

    /// Uncounted `psi(t, x)`.
    pub fn peek_psi(&self, x: &Vector) -> f64 {
        (self.f.peek(x) - self.t).max(self.g_tilde.peek(x))
    }
}

/// Output of one inner solve.
#[derive(Debug, Clone)]
pub struct SubroutineResult {
    pub x_hat: Vector,
    pub psi_hat: f64,
    pub inner_iterations: u64,
    /// First-order calls spent inside this solve.
    pub oracle_calls: u64,
    /// The solve stopped on the `psi <= threshold` test before `K` iterations.
    pub early_exit: bool,
}

/// Output of a single-level solve.
#[derive(Debug, Clone)]
pub struct SingleLevelResult {
    pub x: Vector,
    pub value: f64,
    pub iterations: u64,
    pub early_exit: bool,
}

/// `psi(t, x) = max{f(x) - t, g~(x)}` (two value calls).
pub fn psi_value(p: &MinimaxProblem, x: &Vector) -> f64 {
    (p.f.value(x) - p.t).max(p.g_tilde.value(x))
}

/// A subgradient of `psi(t, .)` at `x`: the active branch's (sub)gradient,
/// the `f` branch on exact ties.
pub fn psi_subgradient(p: &MinimaxProblem, x: &Vector) -> Vector {
    let f_branch = p.f.value(x) - p.t;
    let g_branch = p.g_tilde.value(x);
    if f_branch >= g_branch {
        p.f.first_order(x)
    } else {
        p.g_tilde.first_order(x)
    }
}

fn ceil_iterations(v: f64) -> u64 {
    if v.is_finite() {
        (v.ceil() as u64).max(1)
    } else {
        u64::MAX
    }
}

/// `ceil(4 D^2 C^2 / eps^2)`: enough SGM steps for an `eps/2`-accurate value.
pub fn sgm_iterations(diameter: f64, lipschitz: f64, eps: f64) -> u64 {
    ceil_iterations(4.0 * diameter * diameter * lipschitz * lipschitz / (eps * eps))
}

/// `ceil(D sqrt(12 L / eps))`: enough AGM steps for an `eps/2`-accurate value.
pub fn agm_iterations(diameter: f64, smoothness: f64, eps: f64) -> u64 {
    ceil_iterations(diameter * (12.0 * smoothness / eps).sqrt())
}

/// Iteration count for the setting-appropriate solver.
pub fn certified_iterations(setting: Setting, diameter: f64, constant: f64, eps: f64) -> u64 {
    match setting {
        Setting::Lipschitz => sgm_iterations(diameter, constant, eps),
        Setting::Smooth => agm_iterations(diameter, constant, eps),
    }
}

/// Runs SGM or AGM according to the problem's setting.
pub fn solve_minimax_with(
    p: &MinimaxProblem,
    x0: &Vector,
    k: u64,
    stop_below: Option<f64>,
    observe: impl FnMut(u64, &Vector),
) -> Result<SubroutineResult> {
    match p.setting {
        Setting::Lipschitz => sgm_minimax_with(p, x0, k, stop_below, observe),
        Setting::Smooth => agm_minimax_with(p, x0, k, stop_below, observe),
    }
}

fn check_start(set: &Ball, x0: &Vector, k: u64) -> Result<()> {
    if k == 0 {
        return Err(invalid("iteration count K must be positive"));
    }
    if x0.len() != set.dim() {
        return Err(invalid("start point dimension mismatch"));
    }
    if !set.contains(x0, FEASIBILITY_TOL) {
        return Err(invalid("start point lies outside the feasible set"));
    }
    Ok(())
}
