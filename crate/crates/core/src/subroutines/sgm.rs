use crate::error::Result;
use crate::geometry::project_ball;
use crate::oracle::Oracle;
use crate::problem::Ball;
use crate::Vector;

use super::{check_start, psi_subgradient, psi_value, MinimaxProblem, SingleLevelResult, SubroutineResult, SGM_CHECK_EVERY};

/// Projected subgradient method on `psi(t, .)` with constant step
/// `D / (C sqrt(K))`, returning the average of `x_0 .. x_{K-1}`.
pub fn sgm_minimax(p: &MinimaxProblem, x0: &Vector, k: u64) -> Result<SubroutineResult> {
    sgm_minimax_with(p, x0, k, None, |_, _| {})
}

/// [`sgm_minimax`] with an optional early exit: every [`SGM_CHECK_EVERY`]
/// steps the running average is returned as soon as its `psi` value is at
/// most `stop_below`. `observe` sees every new iterate.
pub fn sgm_minimax_with(
    p: &MinimaxProblem,
    x0: &Vector,
    k: u64,
    stop_below: Option<f64>,
    mut observe: impl FnMut(u64, &Vector),
) -> Result<SubroutineResult> {
    check_start(&p.set, x0, k)?;
    let calls_before = p.first_order_calls();
    let eta = p.set.diameter() / (p.constant * (k as f64).sqrt());
    let mut x = x0.clone();
    let mut sum = Vector::zeros(x0.len());
    for i in 0..k {
        sum += &x;
        let s = psi_subgradient(p, &x);
        x = project_ball(&(&x - s * eta), &p.set);
        observe(i + 1, &x);
        let done = i + 1;
        if let Some(threshold) = stop_below {
            if done < k && done % SGM_CHECK_EVERY == 0 {
                let avg = &sum / done as f64;
                let psi = psi_value(p, &avg);
                if psi <= threshold {
                    return Ok(SubroutineResult {
                        x_hat: avg,
                        psi_hat: psi,
                        inner_iterations: done,
                        oracle_calls: p.first_order_calls() - calls_before,
                        early_exit: true,
                    });
                }
            }
        }
    }
    let x_hat = sum / k as f64;
    let psi_hat = psi_value(p, &x_hat);
    Ok(SubroutineResult {
        x_hat,
        psi_hat,
        inner_iterations: k,
        oracle_calls: p.first_order_calls() - calls_before,
        early_exit: false,
    })
}

/// Averaged projected subgradient method on a single objective.
pub fn single_level_sgm(h: &Oracle, set: &Ball, lipschitz: f64, x0: &Vector, k: u64) -> Result<SingleLevelResult> {
    single_level_sgm_with(h, set, lipschitz, x0, k, None, |_, _| {})
}

pub fn single_level_sgm_with(
    h: &Oracle,
    set: &Ball,
    lipschitz: f64,
    x0: &Vector,
    k: u64,
    stop_below: Option<f64>,
    mut observe: impl FnMut(u64, &Vector),
) -> Result<SingleLevelResult> {
    check_start(set, x0, k)?;
    let eta = set.diameter() / (lipschitz * (k as f64).sqrt());
    let mut x = x0.clone();
    let mut sum = Vector::zeros(x0.len());
    for i in 0..k {
        sum += &x;
        let s = h.first_order(&x);
        x = project_ball(&(&x - s * eta), set);
        observe(i + 1, &x);
        let done = i + 1;
        if let Some(threshold) = stop_below {
            if done < k && done % SGM_CHECK_EVERY == 0 {
                let avg = &sum / done as f64;
                let value = h.value(&avg);
                if value <= threshold {
                    return Ok(SingleLevelResult { x: avg, value, iterations: done, early_exit: true });
                }
            }
        }
    }
    let avg = sum / k as f64;
    let value = h.value(&avg);
    Ok(SingleLevelResult { x: avg, value, iterations: k, early_exit: false })
}
