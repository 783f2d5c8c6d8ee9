//! Named groups of invariant checks with a printable result table.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::synthetic_min_norm;
use crate::driver::{certify, fc_bio, Branch, SolverOptions};
use crate::error::Error;
use crate::geometry::{project_ball, project_ball_hyperplane, Hyperplane};
use crate::oracle::{relaxed_constraint, FnObjective, Oracle};
use crate::problem::{Ball, BilevelProblem, Regularity, Setting, Tolerances};
use crate::problems::{make_min_norm_problem, Level};
use crate::subroutines::{
    certified_iterations, gradient_mapping_step, next_alpha, solve_minimax_with, FEASIBILITY_TOL,
};
use crate::Vector;

use super::bruteforce::{gradient_mapping_bruteforce, models_at};
use super::ground_truth::min_norm_ground_truth;
use super::hardness::{hardness_stall, lower_bound_floor};
use super::instances::{random_lipschitz_minimax, random_smooth_minimax};
use super::reference::psi_star_bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Projections,
    Subroutines,
    Driver,
    Hardness,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["projections", "subroutines", "driver", "hardness", "all"];

    fn name(&self) -> &'static str {
        match self {
            Suite::Projections => "projections",
            Suite::Subroutines => "subroutines",
            Suite::Driver => "driver",
            Suite::Hardness => "hardness",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "projections" => Ok(Suite::Projections),
            "subroutines" => Ok(Suite::Subroutines),
            "driver" => Ok(Suite::Driver),
            "hardness" => Ok(Suite::Hardness),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown suite '{other}', expected one of {}",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: &'static str, name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { suite, name: name.to_string(), passed, detail }
}

fn failed(suite: &'static str, name: &str, err: Error) -> CheckResult {
    check(suite, name, false, format!("error: {err}"))
}

pub fn run_suite(suite: Suite) -> Vec<CheckResult> {
    match suite {
        Suite::Projections => projections(),
        Suite::Subroutines => subroutines(),
        Suite::Driver => driver(),
        Suite::Hardness => hardness(),
        Suite::All => [projections(), subroutines(), driver(), hardness()].concat(),
    }
}

/// Fixed-width table, one row per check.
pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<12} {:<width$} {:<6} detail\n", "suite", "check", "status");
    for r in results {
        let status = if r.passed { "pass" } else { "FAIL" };
        out.push_str(&format!("{:<12} {:<width$} {:<6} {}\n", r.suite, r.name, status, r.detail));
    }
    out
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn projections() -> Vec<CheckResult> {
    const S: &str = "projections";
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::new();

    let mut worst_idem = 0.0f64;
    let mut worst_expand = 0.0f64;
    let mut worst_out = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(1..6);
        let ball = Ball::new(gaussian(&mut rng, n, 1.0), rng.random_range(0.1..3.0)).unwrap();
        let z = gaussian(&mut rng, n, 3.0);
        let w = gaussian(&mut rng, n, 3.0);
        let pz = project_ball(&z, &ball);
        let pw = project_ball(&w, &ball);
        worst_idem = worst_idem.max((project_ball(&pz, &ball) - &pz).norm());
        worst_expand = worst_expand.max((&pz - &pw).norm() - (&z - &w).norm());
        worst_out = worst_out.max((&pz - ball.center()).norm() - ball.radius());
    }
    out.push(check(S, "ball_idempotent", worst_idem <= 1e-12, format!("max drift {worst_idem:.2e}")));
    out.push(check(S, "ball_nonexpansive", worst_expand <= 1e-12, format!("max expansion {worst_expand:.2e}")));
    out.push(check(S, "ball_feasible", worst_out <= 1e-12, format!("max excess {worst_out:.2e}")));

    let unit = Ball::centered(2, 1.0).unwrap();
    let cases = [
        (vec![1.0, 0.0], -0.5, vec![2.0, 0.0], vec![0.5, 0.0]),
        (vec![1.0, 0.0], -0.5, vec![0.5, 3.0], vec![0.5, 0.8660254]),
        (vec![0.0, 1.0], 0.0, vec![0.3, 0.0], vec![0.3, 0.0]),
    ];
    let mut worst = 0.0f64;
    for (normal, offset, z, expected) in cases {
        let h = Hyperplane::new(Vector::from_vec(normal), offset).unwrap();
        match project_ball_hyperplane(&Vector::from_vec(z), &unit, &h) {
            Ok(x) => worst = worst.max((x - Vector::from_vec(expected)).norm()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(check(S, "ball_hyperplane_examples", worst <= 1e-7, format!("max error {worst:.2e}")));

    // variational inequality against sampled feasible points
    let mut worst_vi = f64::NEG_INFINITY;
    let mut worst_feas = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(2..5);
        let ball = Ball::new(gaussian(&mut rng, n, 0.5), rng.random_range(0.5..2.0)).unwrap();
        let normal = gaussian(&mut rng, n, 1.0);
        let dist = rng.random_range(-0.9..0.9) * ball.radius();
        let offset = -(normal.dot(ball.center()) + dist * normal.norm());
        let h = Hyperplane::new(normal.clone(), offset).unwrap();
        let z = gaussian(&mut rng, n, 3.0);
        let x = match project_ball_hyperplane(&z, &ball, &h) {
            Ok(x) => x,
            Err(_) => {
                worst_vi = f64::INFINITY;
                continue;
            }
        };
        worst_feas = worst_feas.max(h.residual(&x).abs()).max((&x - ball.center()).norm() - ball.radius());
        let c_h = h.project(ball.center());
        let r_h = (ball.radius().powi(2) - (&c_h - ball.center()).norm_squared()).max(0.0).sqrt();
        for _ in 0..200 {
            let u = h.project(&(gaussian(&mut rng, n, 1.0) + &c_h)) - &c_h;
            let u = if u.norm() > 0.0 { u.normalize() } else { u };
            let p = &c_h + u * (r_h * rng.random::<f64>());
            worst_vi = worst_vi.max((&z - &x).dot(&(p - &x)));
        }
    }
    out.push(check(S, "ball_hyperplane_optimality", worst_vi <= 1e-9, format!("max <z-x, p-x> {worst_vi:.2e}")));
    out.push(check(S, "ball_hyperplane_feasible", worst_feas <= 1e-10, format!("max violation {worst_feas:.2e}")));

    let far = Hyperplane::new(Vector::from_vec(vec![1.0, 0.0]), 2.0).unwrap();
    let empty = matches!(
        project_ball_hyperplane(&Vector::zeros(2), &unit, &far),
        Err(Error::InfeasibleSubproblem { .. })
    );
    out.push(check(S, "ball_hyperplane_empty", empty, "disjoint plane rejected".into()));
    out
}

fn certificate_check(setting: Setting, seeds: std::ops::Range<u64>) -> (bool, String) {
    let eps = 0.1;
    let mut worst_hi = f64::NEG_INFINITY;
    let mut worst_lo = f64::INFINITY;
    for seed in seeds {
        let p = match setting {
            Setting::Lipschitz => random_lipschitz_minimax(seed, 1 + (seed as usize % 5)),
            Setting::Smooth => random_smooth_minimax(seed, 1 + (seed as usize % 5)),
        };
        let k = certified_iterations(setting, p.set.diameter(), p.constant, eps);
        let Ok(r) = solve_minimax_with(&p, p.set.center(), k, None, |_, _| {}) else {
            return (false, "subroutine error".into());
        };
        let reference = psi_star_bounds(&p, 1e-7);
        let diff = r.psi_hat - reference.value;
        worst_hi = worst_hi.max(diff);
        worst_lo = worst_lo.min(diff);
    }
    let ok = worst_lo >= -1e-9 && worst_hi <= eps / 2.0 + 1e-6;
    (ok, format!("gap range [{worst_lo:.2e}, {worst_hi:.2e}]"))
}

fn subroutines() -> Vec<CheckResult> {
    const S: &str = "subroutines";
    let mut out = Vec::new();
    let mut a = 0.5;
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let b = next_alpha(a);
        worst = worst.max((b * b - (1.0 - b) * a * a).abs());
        a = b;
    }
    out.push(check(S, "alpha_recursion", worst <= 1e-14, format!("max residual {worst:.2e}")));

    let mut worst = 0.0f64;
    for seed in 0..20 {
        let p = random_smooth_minimax(1000 + seed, 3);
        let y = project_ball(&(p.set.center() + Vector::from_vec(vec![0.4, -0.3, 0.2])), &p.set);
        let x = gradient_mapping_step(&p, &y);
        let (_, brute) = gradient_mapping_bruteforce(&p, &y, 100);
        worst = worst.max((models_at(&p, &y).value(&x) - brute).abs());
    }
    out.push(check(S, "gradient_mapping_bruteforce", worst <= 1e-6, format!("max model gap {worst:.2e}")));

    let (ok, detail) = certificate_check(Setting::Lipschitz, 0..5);
    out.push(check(S, "sgm_certificate", ok, detail));
    let (ok, detail) = certificate_check(Setting::Smooth, 0..5);
    out.push(check(S, "agm_certificate", ok, detail));

    let mut feasible = true;
    for seed in 0..5 {
        for p in [random_smooth_minimax(seed, 4), random_lipschitz_minimax(seed, 4)] {
            let _ = solve_minimax_with(&p, p.set.center(), 500, None, |_, x| {
                feasible &= p.set.contains(x, FEASIBILITY_TOL)
            });
        }
    }
    out.push(check(S, "iterates_feasible", feasible, "10 runs x 500 iterations".into()));
    out
}

fn one_dim() -> BilevelProblem {
    let f = Oracle::new(
        "(x-1)^2",
        FnObjective::new(1, |x: &Vector| (x[0] - 1.0).powi(2), |x: &Vector| Vector::from_element(1, 2.0 * (x[0] - 1.0))),
    );
    let g = Oracle::new("x^2", FnObjective::new(1, |x: &Vector| x[0] * x[0], |x: &Vector| x * 2.0));
    BilevelProblem::new(f, g, Ball::centered(1, 1.0).unwrap(), Regularity::Smooth { l_f: 2.0, l_g: 2.0 })
        .expect("valid problem")
}

fn min_norm_check(suite: &'static str, name: &str, m: usize, n: usize, tol: Tolerances) -> CheckResult {
    let run = || -> crate::error::Result<CheckResult> {
        let data = synthetic_min_norm(m, n, 7)?;
        let (_, f_star) = min_norm_ground_truth(&data)?;
        let problem = make_min_norm_problem(&data, 2.0)?;
        let report = fc_bio(&problem, tol, &SolverOptions::default())?;
        let c = certify(&report, Some((f_star, 0.0)));
        Ok(check(
            suite,
            name,
            c.certified,
            format!("f-gap {:.2e}, g-gap {:.2e}", c.f_gap.unwrap_or(f64::NAN), c.g_gap.unwrap_or(f64::NAN)),
        ))
    };
    run().unwrap_or_else(|e| failed(suite, name, e))
}

fn driver() -> Vec<CheckResult> {
    const S: &str = "driver";
    let mut out = Vec::new();
    let tol = Tolerances::uniform(1e-3).expect("positive");
    match fc_bio(&one_dim(), tol, &SolverOptions::default()) {
        Ok(r) => {
            let c = certify(&r, Some((1.0, 0.0)));
            out.push(check(S, "one_dim_weak_optimal", c.certified, format!("f {:.6}, g {:.2e}", r.f_value, r.g_value)));
        }
        Err(e) => out.push(failed(S, "one_dim_weak_optimal", e)),
    }

    let data = synthetic_min_norm(10, 20, 3);
    let bracket = data.and_then(|d| make_min_norm_problem(&d, 2.0)).and_then(|p| {
        let tol = Tolerances::uniform(1e-4)?;
        fc_bio(&p, tol, &SolverOptions::default())
    });
    match bracket {
        Ok(r) => {
            let w0 = r.bracket_history[0].width();
            let expected = (w0 / (0.5 * r.tolerances.eps_f)).log2().ceil().max(0.0) as u64;
            let halving = r
                .bracket_history
                .windows(2)
                .all(|w| w[1].width() == 0.5 * w[0].width());
            let final_ok = r.bracket.width() <= 0.5 * r.tolerances.eps_f;
            out.push(check(
                S,
                "bracket_mechanics",
                r.rounds.len() as u64 == expected && halving && final_ok,
                format!("N = {} (expected {expected}), final width {:.2e}", r.rounds.len(), r.bracket.width()),
            ));
            let warm = r.rounds.windows(2).all(|w| w[1].start == w[0].result) && r.rounds[0].start == r.x_g;
            out.push(check(S, "warm_start", warm, format!("{} rounds", r.rounds.len())));
            let u_ok = r.rounds.iter().all(|k| k.branch == Branch::RaisedLower || k.psi_hat <= 0.5 * r.tolerances.eps_f);
            out.push(check(S, "upper_invariant", u_ok, "psi <= eps/2 at each upper update".into()));
            let calls_ok = r.trace.windows(2).all(|w| w[0].oracle_calls <= w[1].oracle_calls);
            out.push(check(S, "trace_monotone_calls", calls_ok, format!("{} rows", r.trace.len())));
        }
        Err(e) => out.push(failed(S, "bracket_mechanics", e)),
    }

    out.push(min_norm_check(S, "min_norm_weak_optimal", 20, 40, Tolerances::uniform(1e-5).expect("positive")));
    out.push(min_norm_check(S, "min_norm_scaled_tolerances", 20, 40, Tolerances::new(1e-4, 1e-2).expect("positive")));

    let shift = relaxed_constraint(&one_dim().g, 0.5);
    let ok = shift.map(|o| o.peek(&Vector::from_element(1, 1.0)) == 0.5).unwrap_or(false);
    out.push(check(S, "relaxed_constraint_shift", ok, "g(1) - 0.5 = 0.5".into()));
    out
}

fn hardness() -> Vec<CheckResult> {
    const S: &str = "hardness";
    let mut out = Vec::new();
    for (name, setting, eps) in [("smooth_stall", Setting::Smooth, 1e-3), ("lipschitz_stall", Setting::Lipschitz, 0.1)] {
        match hardness_stall(setting, 50, eps) {
            Ok(r) => out.push(check(
                S,
                name,
                r.stalled() && r.violations == 0,
                format!(
                    "{} queries with f = {}, |f(x0) - f*| = {:.6}, violations {}",
                    r.f_values.len(),
                    r.f_start,
                    r.initial_gap(),
                    r.violations
                ),
            )),
            Err(e) => out.push(failed(S, name, e)),
        }
    }
    for (name, setting, level) in [
        ("smooth_floor_upper", Setting::Smooth, Level::Upper),
        ("lipschitz_floor_upper", Setting::Lipschitz, Level::Upper),
        ("smooth_floor_lower", Setting::Smooth, Level::Lower),
        ("lipschitz_floor_lower", Setting::Lipschitz, Level::Lower),
    ] {
        match lower_bound_floor(setting, level, 20, 1.0, 1.0, 0.05) {
            Ok(r) => out.push(check(
                S,
                name,
                r.holds(1e-12) && r.violations == 0,
                format!("best gap {:.4e} vs floor {:.4e} over {} points", r.best_gap, r.floor, r.points),
            )),
            Err(e) => out.push(failed(S, name, e)),
        }
    }
    out
}
