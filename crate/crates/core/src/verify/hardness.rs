//! Monitored runs on the worst-case instances.

use crate::driver::{fc_bio, SolverOptions};
use crate::error::Result;
use crate::problem::{Setting, Tolerances};
use crate::problems::{make_lipschitz_hard_instance, make_lower_bound_instance, make_smooth_hard_instance, Level};

use super::monitor::{monitor_zero_respecting, Side};

/// Upper-level values seen during the first `horizon` first-order calls.
#[derive(Debug, Clone)]
pub struct StallReport {
    pub horizon: u64,
    /// Upper-level values at every query made before `horizon` responses.
    pub f_values: Vec<f64>,
    /// Upper-level value at the start point.
    pub f_start: f64,
    pub f_star: f64,
    /// Every query before the horizon had its point stored.
    pub complete: bool,
    pub violations: usize,
    pub total_first_order: u64,
}

impl StallReport {
    /// `f(x_k) == f(x_0)` bitwise for every checked query.
    pub fn stalled(&self) -> bool {
        self.complete && !self.f_values.is_empty() && self.f_values.iter().all(|v| *v == self.f_start)
    }

    pub fn initial_gap(&self) -> f64 {
        (self.f_start - self.f_star).abs()
    }
}

/// Runs the bisection method from the origin on the `T`-hard instance of the
/// given setting and inspects its first `T` first-order calls.
pub fn hardness_stall(setting: Setting, t: usize, eps: f64) -> Result<StallReport> {
    let inst = match setting {
        Setting::Smooth => make_smooth_hard_instance(t)?,
        Setting::Lipschitz => make_lipschitz_hard_instance(t)?,
    };
    let (problem, ledger) = monitor_zero_respecting(&inst.problem);
    let report = fc_bio(&problem, Tolerances::uniform(eps)?, &SolverOptions::default())?;
    let horizon = t as u64;
    let f = inst.problem.f.function();
    let f_values = ledger.points_before(horizon).iter().map(|x| f.value(x)).collect();
    Ok(StallReport {
        horizon,
        f_values,
        f_start: f.value(&inst.problem.start),
        f_star: inst.truth.f_star,
        complete: ledger.complete_before(horizon),
        violations: ledger.violations().len(),
        total_first_order: report.first_order_calls,
    })
}

/// Optimality gap of the best point queried before `T` chain responses.
#[derive(Debug, Clone)]
pub struct FloorReport {
    pub best_gap: f64,
    pub floor: f64,
    pub points: usize,
    pub complete: bool,
    pub violations: usize,
}

impl FloorReport {
    pub fn holds(&self, margin: f64) -> bool {
        self.complete && self.points > 0 && self.best_gap >= self.floor - margin
    }
}

/// `3 L D^2 / (32 (T+1)^2)` for smooth chains, `C D / (2 (1 + sqrt T))` for
/// Lipschitz ones.
pub fn lower_bound_floor_value(setting: Setting, t: usize, constant: f64, d: f64) -> f64 {
    let t = t as f64;
    match setting {
        Setting::Smooth => 3.0 * constant * d * d / (32.0 * (t + 1.0) * (t + 1.0)),
        Setting::Lipschitz => constant * d / (2.0 * (1.0 + t.sqrt())),
    }
}

/// Runs the bisection method on a lower-bound instance and measures the
/// chain-level gap over the points queried before the `T`-th chain response.
pub fn lower_bound_floor(setting: Setting, level: Level, t: usize, constant: f64, d: f64, eps: f64) -> Result<FloorReport> {
    let inst = make_lower_bound_instance(setting, level, t, constant, d)?;
    let (problem, ledger) = monitor_zero_respecting(&inst.problem);
    fc_bio(&problem, Tolerances::uniform(eps)?, &SolverOptions::default())?;
    let (side, chain, star) = match level {
        Level::Upper => (Side::Upper, inst.problem.f.function().clone(), inst.truth.f_star),
        Level::Lower => (Side::Lower, inst.problem.g.function().clone(), inst.truth.g_star),
    };
    let horizon = t as u64;
    let points = ledger.points_before_side(side, horizon);
    let best_gap = points.iter().map(|x| chain.value(x) - star).fold(f64::INFINITY, f64::min);
    let complete = ledger
        .queries()
        .iter()
        .filter(|q| match side {
            Side::Upper => q.upper_calls_before < horizon,
            Side::Lower => q.lower_calls_before < horizon,
        })
        .all(|q| q.point.is_some());
    Ok(FloorReport {
        best_gap,
        floor: lower_bound_floor_value(setting, t, constant, d),
        points: points.len(),
        complete,
        violations: ledger.violations().len(),
    })
}
