//! Bisection on the level `t` of the minimax relaxation, with warm-started
//! inner solves and a convergence trace.

use std::io::Write;
use std::time::Instant;

use crate::error::{invalid, Error, Result};
use crate::oracle::{relaxed_constraint, scale_oracle, Oracle};
use crate::problem::{BilevelProblem, Setting, Tolerances};
use crate::subroutines::{
    certified_iterations, single_level_agm_with, single_level_sgm_with, solve_minimax_with, MinimaxProblem,
    SingleLevelResult,
};
use crate::Vector;

/// Interval `[lower, upper]` known to contain the relaxed optimal value.
///
/// Stored as lower end plus width so that each halving is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lower: f64,
    width: f64,
}

impl Bracket {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) {
            return Err(invalid(format!("bracket ends must be finite, got [{lower}, {upper}]")));
        }
        if upper < lower {
            return Err(Error::BracketInversion { lower, upper });
        }
        Ok(Bracket { lower, width: upper - lower })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.lower + self.width
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn midpoint(&self) -> f64 {
        self.lower + 0.5 * self.width
    }

    /// `lower <- midpoint`.
    pub fn raise_lower(&mut self) {
        self.lower = self.midpoint();
        self.width *= 0.5;
    }

    /// `upper <- midpoint`.
    pub fn drop_upper(&mut self) {
        self.width *= 0.5;
    }

    /// Number of halvings `ceil(log2(width / (eps/2)))`, zero if the bracket
    /// is already within `eps/2`.
    pub fn rounds(&self, eps: f64) -> u64 {
        let target = 0.5 * eps;
        if self.width <= target {
            return 0;
        }
        let mut n = (self.width / target).log2().ceil().max(1.0) as u64;
        // guard against rounding in log2
        while n > 1 && self.width * 0.5f64.powi(n as i32 - 1) <= target {
            n -= 1;
        }
        while self.width * 0.5f64.powi(n as i32) > target {
            n += 1;
        }
        n
    }
}

/// How the inner iteration count `K` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetPolicy {
    /// The per-round count that certifies an `eps/2`-accurate inner solve.
    #[default]
    Certified,
    /// A total first-order budget `T`, split as `K = ceil(T / N)`.
    FixedTotal(u64),
    /// A fixed `K` per round.
    PerRound(u64),
}

impl BudgetPolicy {
    pub fn per_round(&self, setting: Setting, diameter: f64, constant: f64, eps: f64, rounds: u64) -> Result<u64> {
        match *self {
            BudgetPolicy::Certified => Ok(certified_iterations(setting, diameter, constant, eps)),
            BudgetPolicy::FixedTotal(total) => {
                if total == 0 || total < rounds {
                    return Err(Error::InvalidBudget { total, rounds });
                }
                Ok(total.div_ceil(rounds.max(1)))
            }
            BudgetPolicy::PerRound(k) => {
                if k == 0 {
                    return Err(Error::InvalidBudget { total: 0, rounds });
                }
                Ok(k)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub budget: BudgetPolicy,
    /// Stop an inner solve once its iterate reaches `psi <= eps/2`.
    pub early_exit: bool,
    /// Emit a trace row every this many inner iterations (0: round ends only).
    pub trace_every: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { budget: BudgetPolicy::Certified, early_exit: true, trace_every: 0 }
    }
}

impl SolverOptions {
    pub fn with_budget(budget: BudgetPolicy) -> Self {
        SolverOptions { budget, ..Default::default() }
    }
}

/// One trace line. Initialization rows carry `outer_iter = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub outer_iter: i64,
    pub inner_iter: u64,
    pub oracle_calls: u64,
    pub t: f64,
    pub psi_hat: f64,
    pub f: f64,
    pub g: f64,
    pub wall_seconds: f64,
}

pub const TRACE_HEADER: &str = "outer_iter,inner_iter,oracle_calls,t,psi_hat,f,g,wall_seconds";

/// Writes the trace as CSV with [`TRACE_HEADER`].
pub fn write_trace_csv(rows: &[TraceRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.outer_iter, r.inner_iter, r.oracle_calls, r.t, r.psi_hat, r.f, r.g, r.wall_seconds
        )?;
    }
    Ok(())
}

struct Tracer {
    f: Oracle,
    g: Oracle,
    every: u64,
    clock: Instant,
    rows: Vec<TraceRow>,
}

impl Tracer {
    fn push(&mut self, outer: i64, inner: u64, t: f64, psi_hat: f64, x: &Vector) {
        let oracle_calls = self.f.counts().first_order + self.g.counts().first_order;
        self.rows.push(TraceRow {
            outer_iter: outer,
            inner_iter: inner,
            oracle_calls,
            t,
            psi_hat,
            f: self.f.peek(x),
            g: self.g.peek(x),
            wall_seconds: self.clock.elapsed().as_secs_f64(),
        });
    }

    fn due(&self, inner: u64) -> bool {
        self.every > 0 && inner.is_multiple_of(self.every)
    }
}

/// Output of the initialization phase.
#[derive(Debug, Clone)]
pub struct Initialization {
    pub g_hat_star: f64,
    pub x_g: Vector,
    pub bracket: Bracket,
    pub g_iterations: u64,
    /// Iterations of the upper-level solve; `None` when a declared lower
    /// bound on `f` was used instead.
    pub f_iterations: Option<u64>,
}

fn single_level(
    problem: &BilevelProblem,
    h: &Oracle,
    constant: f64,
    target: f64,
    stop_below: Option<f64>,
    observe: impl FnMut(u64, &Vector),
) -> Result<SingleLevelResult> {
    let d = problem.set.diameter();
    let k = certified_iterations(problem.setting(), d, constant, target);
    match problem.setting() {
        Setting::Smooth => single_level_agm_with(h, &problem.set, constant, &problem.start, k, stop_below, observe),
        Setting::Lipschitz => single_level_sgm_with(h, &problem.set, constant, &problem.start, k, stop_below, observe),
    }
}

fn initialize_traced(problem: &BilevelProblem, tol: Tolerances, tracer: &mut Tracer) -> Result<Initialization> {
    tracer.push(-1, 0, f64::NAN, f64::NAN, &problem.start);
    let stop = problem.g_lower_bound.map(|b| b + 0.5 * tol.eps_g);
    let g_run = single_level(problem, &problem.g, problem.regularity.lower(), 0.5 * tol.eps_g, stop, |k, x| {
        if tracer.due(k) {
            tracer.push(-1, k, f64::NAN, f64::NAN, x);
        }
    })?;
    tracer.push(-1, g_run.iterations, f64::NAN, f64::NAN, &g_run.x);
    let g_hat_star = g_run.value;
    let upper = problem.f.value(&g_run.x);

    let (lower, f_iterations) = match problem.f_lower_bound {
        Some(b) => (b, None),
        None => {
            let eps = tol.eps_f;
            let r = single_level(problem, &problem.f, problem.regularity.upper(), 0.5 * eps, None, |_, _| {})?;
            tracer.push(-1, g_run.iterations + r.iterations, f64::NAN, f64::NAN, &r.x);
            (r.value - 0.5 * eps, Some(r.iterations))
        }
    };
    let bracket = Bracket::new(lower, upper)?;
    Ok(Initialization { g_hat_star, x_g: g_run.x, bracket, g_iterations: g_run.iterations, f_iterations })
}

/// Computes `g_hat*`, the lower-level point `x_g` and the starting bracket.
pub fn initialize(problem: &BilevelProblem, tol: Tolerances) -> Result<Initialization> {
    let mut tracer = Tracer {
        f: problem.f.clone(),
        g: problem.g.clone(),
        every: 0,
        clock: Instant::now(),
        rows: Vec::new(),
    };
    initialize_traced(problem, tol, &mut tracer)
}

/// Which end of the bracket a round moved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    RaisedLower,
    DroppedUpper,
}

#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub t: f64,
    pub psi_hat: f64,
    pub start: Vector,
    pub result: Vector,
    pub inner_iterations: u64,
    pub oracle_calls: u64,
    pub early_exit: bool,
    pub branch: Branch,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vector,
    pub f_value: f64,
    pub g_value: f64,
    pub tolerances: Tolerances,
    pub g_hat_star: f64,
    /// Initialization output: the lower-level point and the initial bracket.
    pub x_g: Vector,
    /// `(lower, upper)` before the first round and after each round.
    pub bracket_history: Vec<Bracket>,
    pub bracket: Bracket,
    pub rounds: Vec<RoundRecord>,
    /// Planned number of bisection rounds `N`.
    pub planned_rounds: u64,
    /// Inner iteration cap `K` per round.
    pub per_round: u64,
    /// Factor applied to the relaxed constraint (`eps_f / eps_g`).
    pub scale: f64,
    /// Constant handed to the inner solver.
    pub minimax_constant: f64,
    /// The upper end never moved, so the lower-level point was returned.
    pub upper_never_updated: bool,
    pub first_order_calls: u64,
    pub f_first_order: u64,
    pub g_first_order: u64,
    pub value_calls: u64,
    pub wall_seconds: f64,
    pub trace: Vec<TraceRow>,
}

/// Runs the bisection method and returns the point stored at the last
/// update of the upper bracket end.
pub fn fc_bio(problem: &BilevelProblem, tol: Tolerances, options: &SolverOptions) -> Result<SolveReport> {
    if let BudgetPolicy::PerRound(0) | BudgetPolicy::FixedTotal(0) = options.budget {
        return Err(Error::InvalidBudget { total: 0, rounds: 0 });
    }
    let clock = Instant::now();
    let calls_before = problem.f.counts().value + problem.g.counts().value;
    let mut tracer = Tracer {
        f: problem.f.clone(),
        g: problem.g.clone(),
        every: options.trace_every,
        clock,
        rows: Vec::new(),
    };
    let init = initialize_traced(problem, tol, &mut tracer)?;
    let eps = tol.eps_f;
    let scale = tol.eps_f / tol.eps_g;
    let g_tilde = scale_oracle(&relaxed_constraint(&problem.g, init.g_hat_star)?, scale)?;
    let regularity = problem.regularity.with_lower_scaled(scale);
    let constant = regularity.joint();
    let base = MinimaxProblem::new(
        problem.f.clone(),
        g_tilde,
        init.bracket.upper(),
        problem.set.clone(),
        constant,
        problem.setting(),
    )?;

    let mut bracket = init.bracket;
    let planned = bracket.rounds(eps);
    let k = options.budget.per_round(problem.setting(), problem.set.diameter(), constant, eps, planned)?;
    let threshold = 0.5 * eps;
    let mut history = vec![bracket];
    let mut rounds = Vec::with_capacity(planned as usize);
    let mut x_upper = init.x_g.clone();
    let mut upper_never_updated = true;

    if planned == 0 {
        let psi = crate::subroutines::psi_value(&base, &init.x_g);
        tracer.push(0, 0, base.t, psi, &init.x_g);
        upper_never_updated = false;
    }

    let mut x_prev = init.x_g.clone();
    for round in 0..planned {
        let t = bracket.midpoint();
        let p = base.at_level(t);
        let stop = options.early_exit.then_some(threshold);
        let r = solve_minimax_with(&p, &x_prev, k, stop, |i, x| {
            if tracer.due(i) {
                tracer.push(round as i64, i, t, p.peek_psi(x), x);
            }
        })?;
        let branch = if r.psi_hat > threshold {
            bracket.raise_lower();
            Branch::RaisedLower
        } else {
            bracket.drop_upper();
            x_upper = r.x_hat.clone();
            upper_never_updated = false;
            Branch::DroppedUpper
        };
        tracer.push(round as i64, r.inner_iterations, t, r.psi_hat, &r.x_hat);
        history.push(bracket);
        rounds.push(RoundRecord {
            t,
            psi_hat: r.psi_hat,
            start: x_prev,
            result: r.x_hat.clone(),
            inner_iterations: r.inner_iterations,
            oracle_calls: r.oracle_calls,
            early_exit: r.early_exit,
            branch,
        });
        x_prev = r.x_hat;
    }

    let f_first_order = problem.f.counts().first_order;
    let g_first_order = problem.g.counts().first_order;
    Ok(SolveReport {
        f_value: problem.f.peek(&x_upper),
        g_value: problem.g.peek(&x_upper),
        solution: x_upper,
        tolerances: tol,
        g_hat_star: init.g_hat_star,
        x_g: init.x_g,
        bracket_history: history,
        bracket,
        rounds,
        planned_rounds: planned,
        per_round: k,
        scale,
        minimax_constant: constant,
        upper_never_updated,
        first_order_calls: f_first_order + g_first_order,
        f_first_order,
        g_first_order,
        value_calls: problem.f.counts().value + problem.g.counts().value - calls_before,
        wall_seconds: clock.elapsed().as_secs_f64(),
        trace: tracer.rows,
    })
}

/// Weak-optimality verdict against a known optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certification {
    /// Signed `f(x_hat) - f*`; may be negative.
    pub f_gap: Option<f64>,
    pub g_gap: Option<f64>,
    pub f_ok: bool,
    pub g_ok: bool,
    pub certified: bool,
}

pub fn certify(report: &SolveReport, truth: Option<(f64, f64)>) -> Certification {
    match truth {
        None => Certification { f_gap: None, g_gap: None, f_ok: false, g_ok: false, certified: false },
        Some((f_star, g_star)) => {
            let f_gap = report.f_value - f_star;
            let g_gap = report.g_value - g_star;
            let f_ok = f_gap <= report.tolerances.eps_f;
            let g_ok = g_gap <= report.tolerances.eps_g;
            Certification { f_gap: Some(f_gap), g_gap: Some(g_gap), f_ok, g_ok, certified: f_ok && g_ok }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnObjective;
    use crate::problem::{Ball, Regularity};

    fn one_dim() -> BilevelProblem {
        let f = Oracle::new(
            "(x-1)^2",
            FnObjective::new(1, |x: &Vector| (x[0] - 1.0).powi(2), |x: &Vector| Vector::from_element(1, 2.0 * (x[0] - 1.0))),
        );
        let g = Oracle::new("x^2", FnObjective::new(1, |x: &Vector| x[0] * x[0], |x: &Vector| x * 2.0));
        BilevelProblem::new(f, g, Ball::centered(1, 1.0).unwrap(), Regularity::Smooth { l_f: 2.0, l_g: 2.0 }).unwrap()
    }

    #[test]
    fn round_count_example() {
        let b = Bracket::new(0.0, 1.0).unwrap();
        assert_eq!(b.rounds(0.25), 3);
        assert_eq!(b.rounds(2.0), 0);
        assert_eq!(Bracket::new(0.0, 1.0 + 1e-12).unwrap().rounds(0.25), 4);
        assert_eq!(Bracket::new(0.0, 0.3).unwrap().rounds(0.25), 2);
    }

    #[test]
    fn bracket_halving_is_exact() {
        let mut b = Bracket::new(-0.3, 1.7).unwrap();
        let w0 = b.width();
        for i in 1..=40 {
            if i % 3 == 0 {
                b.raise_lower()
            } else {
                b.drop_upper()
            }
            assert_eq!(b.width(), w0 / 2f64.powi(i));
            assert!(b.lower() <= b.upper());
        }
        assert!(matches!(Bracket::new(1.0, 0.0), Err(Error::BracketInversion { .. })));
    }

    #[test]
    fn initialization_one_dim() {
        let p = one_dim();
        let init = initialize(&p, Tolerances::uniform(1e-3).unwrap()).unwrap();
        assert!(init.g_hat_star >= 0.0 && init.g_hat_star <= 5e-4);
        assert!((init.bracket.upper() - 1.0).abs() < 1e-3);
        assert!(init.bracket.lower() >= -5e-4 && init.bracket.lower() <= 0.0);
        let init = initialize(&p.clone().with_nonnegative_f(), Tolerances::uniform(1e-3).unwrap()).unwrap();
        assert_eq!(init.bracket.lower(), 0.0);
    }

    #[test]
    fn solve_one_dim() {
        let p = one_dim();
        let r = fc_bio(&p, Tolerances::uniform(1e-3).unwrap(), &SolverOptions::default()).unwrap();
        assert!(r.f_value <= 1.0 + 1e-3, "{}", r.f_value);
        assert!(r.g_value <= 1e-3);
        assert_eq!(r.rounds.len() as u64, r.planned_rounds);
        assert_eq!(r.scale, 1.0);
        let c = certify(&r, Some((1.0, 0.0)));
        assert!(c.certified);
    }

    #[test]
    fn inconsistent_nonnegativity() {
        let f = Oracle::new("x-2", FnObjective::new(1, |x: &Vector| x[0] - 2.0, |_x: &Vector| Vector::from_element(1, 1.0)));
        let g = Oracle::new("x^2", FnObjective::new(1, |x: &Vector| x[0] * x[0], |x: &Vector| x * 2.0));
        let p = BilevelProblem::new(f, g, Ball::centered(1, 1.0).unwrap(), Regularity::Smooth { l_f: 1.0, l_g: 2.0 })
            .unwrap()
            .with_nonnegative_f();
        let err = fc_bio(&p, Tolerances::uniform(1e-2).unwrap(), &SolverOptions::default()).unwrap_err();
        assert!(matches!(err, Error::BracketInversion { .. }));
    }

    #[test]
    fn budget_validation() {
        let p = one_dim();
        let tol = Tolerances::uniform(1e-3).unwrap();
        let err = fc_bio(&p, tol, &SolverOptions::with_budget(BudgetPolicy::FixedTotal(3))).unwrap_err();
        assert!(matches!(err, Error::InvalidBudget { total: 3, .. }));
        assert!(fc_bio(&p, tol, &SolverOptions::with_budget(BudgetPolicy::PerRound(0))).is_err());
        let r = fc_bio(&p, tol, &SolverOptions::with_budget(BudgetPolicy::FixedTotal(1000))).unwrap();
        assert_eq!(r.per_round, 1000u64.div_ceil(r.planned_rounds));
    }

    #[test]
    fn degenerate_bracket_skips_bisection() {
        let p = one_dim().with_nonnegative_f();
        let r = fc_bio(&p, Tolerances::uniform(4.0).unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(r.planned_rounds, 0);
        assert!(r.rounds.is_empty());
        assert_eq!(r.solution, r.x_g);
    }

    #[test]
    fn certify_cases() {
        let p = one_dim();
        let mut r = fc_bio(&p, Tolerances::uniform(1e-3).unwrap(), &SolverOptions::default()).unwrap();
        r.f_value = 1.0 + 5e-4;
        r.g_value = 5e-4;
        assert!(certify(&r, Some((1.0, 0.0))).certified);
        r.f_value = 0.9;
        let c = certify(&r, Some((1.0, 0.0)));
        assert!(c.certified && c.f_gap.unwrap() < 0.0);
        r.g_value = 0.1;
        assert!(!certify(&r, Some((1.0, 0.0))).certified);
        assert!(!certify(&r, None).certified);
    }

    #[test]
    fn trace_csv_layout() {
        let p = one_dim();
        let opts = SolverOptions { trace_every: 5, ..Default::default() };
        let r = fc_bio(&p, Tolerances::uniform(1e-2).unwrap(), &opts).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&r.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_HEADER);
        assert!(r.trace.windows(2).all(|w| w[0].oracle_calls <= w[1].oracle_calls));
        assert_eq!(r.trace[0].outer_iter, -1);
        assert_eq!(r.trace.last().unwrap().oracle_calls, r.first_order_calls);
    }
}
