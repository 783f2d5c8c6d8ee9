use std::sync::Arc;

use nalgebra::DMatrix;

use crate::driver::{fc_bio, BudgetPolicy, SolveReport, SolverOptions};
use crate::error::Result;
use crate::oracle::Oracle;
use crate::problem::{BilevelProblem, Tolerances};
use crate::subroutines::{certified_iterations, solve_minimax_with, MinimaxProblem};
use crate::Vector;

/// Largest dimension handled by the ellipsoid cross-check.
pub const ELLIPSOID_MAX_DIM: usize = 10;

/// Cap on subroutine iterations for the long reference run.
pub const REFERENCE_MAX_ITERATIONS: u64 = 1_000_000;

/// A reference value of `psi*(t)` with a certified lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiReference {
    /// Best `psi` value found at a feasible point.
    pub value: f64,
    /// Lower bound on `psi*(t)`; `-inf` when no certificate is available.
    pub lower: f64,
}

fn psi(p: &MinimaxProblem, x: &Vector) -> f64 {
    p.peek_psi(x)
}

fn psi_subgradient(p: &MinimaxProblem, x: &Vector) -> Vector {
    let f = p.f.function();
    let g = p.g_tilde.function();
    if f.value(x) - p.t >= g.value(x) {
        f.first_order(x)
    } else {
        g.first_order(x)
    }
}

/// Reference value of `psi*(t)` to the requested accuracy: the best `psi`
/// seen over a long subroutine run, tightened by a cutting-plane solve in
/// low dimension.
pub fn psi_star_reference(p: &MinimaxProblem, accuracy: f64) -> f64 {
    psi_star_bounds(p, accuracy).value
}

pub fn psi_star_bounds(p: &MinimaxProblem, accuracy: f64) -> PsiReference {
    let d = p.set.diameter();
    let k = certified_iterations(p.setting, d, p.constant, 2.0 * accuracy)
        .saturating_mul(16)
        .min(REFERENCE_MAX_ITERATIONS);
    let mut best = psi(p, p.set.center());
    let mut probe = p.clone();
    // uncounted copies so reference runs do not disturb callers' counters
    probe.f = Oracle::from_arc(p.f.label(), Arc::clone(p.f.function()));
    probe.g_tilde = Oracle::from_arc(p.g_tilde.label(), Arc::clone(p.g_tilde.function()));
    if let Ok(r) = solve_minimax_with(&probe, p.set.center(), k, None, |_, x| {
        let v = psi(p, x);
        if v < best {
            best = v;
        }
    }) {
        best = best.min(r.psi_hat);
    }
    let n = p.set.dim();
    let mut lower = f64::NEG_INFINITY;
    if n == 1 {
        let (v, lo) = interval_search(p);
        best = best.min(v);
        lower = lo;
    } else if n <= ELLIPSOID_MAX_DIM {
        let (v, lo) = ellipsoid(p, 1e-3 * accuracy);
        best = best.min(v);
        lower = lo;
    }
    PsiReference { value: best, lower }
}

/// Re-solves `problem` with `factor` times the per-round budget of an earlier
/// run. Used where no exact optimum is known.
pub fn long_run_reference(problem: &BilevelProblem, tol: Tolerances, per_round: u64, factor: u64) -> Result<SolveReport> {
    let budget = BudgetPolicy::PerRound(per_round.max(1).saturating_mul(factor.max(1)));
    fc_bio(problem, tol, &SolverOptions { budget, early_exit: false, trace_every: 0 })
}

/// Subgradient bisection on an interval.
fn interval_search(p: &MinimaxProblem) -> (f64, f64) {
    let c = p.set.center()[0];
    let r = p.set.radius();
    let (mut a, mut b) = (c - r, c + r);
    let mut best = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    for x in [a, b] {
        best = best.min(psi(p, &Vector::from_element(1, x)));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let x = Vector::from_element(1, m);
        let v = psi(p, &x);
        best = best.min(v);
        let s = psi_subgradient(p, &x)[0];
        lower = lower.max(v - s.abs() * (b - a));
        if s > 0.0 {
            b = m;
        } else if s < 0.0 {
            a = m;
        } else {
            lower = lower.max(v);
            break;
        }
        if b - a <= 1e-15 * (1.0 + c.abs() + r) {
            break;
        }
    }
    (best, lower.min(best))
}

/// Central-cut ellipsoid method over the ball, started from the ball itself.
/// Returns the best feasible value and the lower bound implied by the
/// objective cuts.
fn ellipsoid(p: &MinimaxProblem, tol: f64) -> (f64, f64) {
    let n = p.set.dim();
    let nf = n as f64;
    let c = p.set.center().clone();
    let r = p.set.radius();
    let mut x = c.clone();
    let mut shape = DMatrix::<f64>::identity(n, n) * (r * r);
    let mut best = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let max_iter = 400 * n * n * (n + 1) + 2000;
    for _ in 0..max_iter {
        let offset = &x - &c;
        let feasible = offset.norm() <= r;
        let cut = if feasible {
            let v = psi(p, &x);
            best = best.min(v);
            let s = psi_subgradient(p, &x);
            let width = (s.dot(&(&shape * &s))).max(0.0).sqrt();
            if width == 0.0 {
                lower = lower.max(v);
                break;
            }
            lower = lower.max(v - width);
            if best - lower <= tol {
                break;
            }
            s
        } else {
            offset
        };
        let ps = &shape * &cut;
        let width2 = cut.dot(&ps);
        if !(width2 > 0.0) || !width2.is_finite() {
            break;
        }
        let step = ps / width2.sqrt();
        x -= &step / (nf + 1.0);
        shape = (&shape - (&step * step.transpose()) * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0));
        shape = (&shape + shape.transpose()) * 0.5;
    }
    (best, lower.min(best))
}
