use crate::error::Result;
use crate::geometry::{project_ball, project_ball_hyperplane, Hyperplane};
use crate::oracle::Oracle;
use crate::problem::Ball;
use crate::Vector;

use super::{check_start, psi_value, MinimaxProblem, SingleLevelResult, SubroutineResult};

/// Positive root of `a'^2 = (1 - a') a^2`.
pub fn next_alpha(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    // rationalized (-a^2 + sqrt(a^4 + 4a^2)) / 2
    2.0 * a2 / (a2 + (a2 * a2 + 4.0 * a2).sqrt())
}

fn momentum(alpha: f64, alpha_next: f64) -> f64 {
    alpha * (1.0 - alpha) / (alpha * alpha + alpha_next)
}

/// The two `L`-quadratic upper models of `f - t` and `g~` built at `y`.
#[derive(Debug, Clone)]
pub struct QuadraticModels {
    pub y: Vector,
    pub f_y: f64,
    pub grad_f: Vector,
    pub g_y: f64,
    pub grad_g: Vector,
    pub t: f64,
    pub l: f64,
}

impl QuadraticModels {
    /// Builds the models with one first-order call on each branch.
    pub fn at(p: &MinimaxProblem, y: &Vector) -> Self {
        let (f_y, grad_f) = p.f.evaluate(y);
        let (g_y, grad_g) = p.g_tilde.evaluate(y);
        QuadraticModels { y: y.clone(), f_y, grad_f, g_y, grad_g, t: p.t, l: p.constant }
    }

    pub fn f_model(&self, x: &Vector) -> f64 {
        let d = x - &self.y;
        self.f_y - self.t + self.grad_f.dot(&d) + 0.5 * self.l * d.norm_squared()
    }

    pub fn g_model(&self, x: &Vector) -> f64 {
        let d = x - &self.y;
        self.g_y + self.grad_g.dot(&d) + 0.5 * self.l * d.norm_squared()
    }

    /// `psi_bar(t, x; y)`.
    pub fn value(&self, x: &Vector) -> f64 {
        self.f_model(x).max(self.g_model(x))
    }

    /// The equal-model hyperplane, or `None` when the gradients coincide.
    pub fn hyperplane(&self) -> Option<Hyperplane> {
        let w = &self.grad_f - &self.grad_g;
        let b = self.f_y - self.g_y - self.t - w.dot(&self.y);
        Hyperplane::new(w, b).ok()
    }

    /// Projection candidates in tie-break order: the `f` step, the `g~` step,
    /// and the `f` step projected onto `Z ∩ H` when that set is nonempty.
    pub fn candidates(&self, set: &Ball) -> Vec<Vector> {
        let z_f = &self.y - &self.grad_f / self.l;
        let z_g = &self.y - &self.grad_g / self.l;
        let mut out = vec![project_ball(&z_f, set), project_ball(&z_g, set)];
        if let Some(plane) = self.hyperplane() {
            if let Ok(x3) = project_ball_hyperplane(&z_f, set, &plane) {
                out.push(x3);
            }
        }
        out
    }

    /// Exact minimizer of `psi_bar` over the ball.
    pub fn minimize(&self, set: &Ball) -> Vector {
        let mut best: Option<(f64, Vector)> = None;
        for x in self.candidates(set) {
            let v = self.value(&x);
            match &best {
                Some((bv, _)) if *bv <= v => {}
                _ => best = Some((v, x)),
            }
        }
        best.map(|(_, x)| x).expect("at least two candidates")
    }
}

/// One gradient-mapping step: `argmin_{x in Z} psi_bar(t, x; y)`.
pub fn gradient_mapping_step(p: &MinimaxProblem, y: &Vector) -> Vector {
    QuadraticModels::at(p, y).minimize(&p.set)
}

/// Generalized accelerated gradient method for the minimax problem with the
/// constant-step momentum schedule started at `alpha_0 = 1/2`; returns `x_K`.
pub fn agm_minimax(p: &MinimaxProblem, x0: &Vector, k: u64) -> Result<SubroutineResult> {
    agm_minimax_with(p, x0, k, None, |_, _| {})
}

/// [`agm_minimax`] that returns the current iterate as soon as its `psi`
/// value is at most `stop_below` (the start point included). `observe` sees
/// every new `x_k`.
pub fn agm_minimax_with(
    p: &MinimaxProblem,
    x0: &Vector,
    k: u64,
    stop_below: Option<f64>,
    mut observe: impl FnMut(u64, &Vector),
) -> Result<SubroutineResult> {
    check_start(&p.set, x0, k)?;
    let calls_before = p.first_order_calls();
    let finish = |x: Vector, psi: f64, iters: u64, early: bool| SubroutineResult {
        x_hat: x,
        psi_hat: psi,
        inner_iterations: iters,
        oracle_calls: p.first_order_calls() - calls_before,
        early_exit: early,
    };
    if let Some(threshold) = stop_below {
        let psi = psi_value(p, x0);
        if psi <= threshold {
            return Ok(finish(x0.clone(), psi, 0, true));
        }
    }
    let mut x = x0.clone();
    let mut y = x0.clone();
    let mut alpha = 0.5;
    for i in 0..k {
        let x_next = gradient_mapping_step(p, &y);
        let alpha_next = next_alpha(alpha);
        let beta = momentum(alpha, alpha_next);
        y = &x_next + (&x_next - &x) * beta;
        x = x_next;
        alpha = alpha_next;
        observe(i + 1, &x);
        if let Some(threshold) = stop_below {
            if i + 1 < k {
                let psi = psi_value(p, &x);
                if psi <= threshold {
                    return Ok(finish(x, psi, i + 1, true));
                }
            }
        }
    }
    let psi = psi_value(p, &x);
    Ok(finish(x, psi, k, false))
}

/// Projected accelerated gradient method on a single `smoothness`-smooth
/// objective, using the same momentum schedule.
pub fn single_level_agm(h: &Oracle, set: &Ball, smoothness: f64, x0: &Vector, k: u64) -> Result<SingleLevelResult> {
    single_level_agm_with(h, set, smoothness, x0, k, None, |_, _| {})
}

pub fn single_level_agm_with(
    h: &Oracle,
    set: &Ball,
    smoothness: f64,
    x0: &Vector,
    k: u64,
    stop_below: Option<f64>,
    mut observe: impl FnMut(u64, &Vector),
) -> Result<SingleLevelResult> {
    check_start(set, x0, k)?;
    if let Some(threshold) = stop_below {
        let value = h.value(x0);
        if value <= threshold {
            return Ok(SingleLevelResult { x: x0.clone(), value, iterations: 0, early_exit: true });
        }
    }
    let mut x = x0.clone();
    let mut y = x0.clone();
    let mut alpha = 0.5;
    for i in 0..k {
        let grad = h.first_order(&y);
        let x_next = project_ball(&(&y - grad / smoothness), set);
        let alpha_next = next_alpha(alpha);
        let beta = momentum(alpha, alpha_next);
        y = &x_next + (&x_next - &x) * beta;
        x = x_next;
        alpha = alpha_next;
        observe(i + 1, &x);
        if let Some(threshold) = stop_below {
            if i + 1 < k {
                let value = h.value(&x);
                if value <= threshold {
                    return Ok(SingleLevelResult { x, value, iterations: i + 1, early_exit: true });
                }
            }
        }
    }
    let value = h.value(&x);
    Ok(SingleLevelResult { x, value, iterations: k, early_exit: false })
}

#[cfg(test)]
mod tests {
    use super::super::{agm_iterations, FEASIBILITY_TOL};
    use super::*;
    use crate::oracle::FnObjective;
    use crate::problem::Setting;

    #[test]
    fn alpha_first_step() {
        let a1 = next_alpha(0.5);
        assert!((a1 - (-0.25 + (0.0625f64 + 1.0).sqrt()) / 2.0).abs() < 1e-16);
        assert!((a1 - 0.39039).abs() < 1e-5);
    }

    #[test]
    fn alpha_recursion_identity() {
        let mut a = 0.5;
        for _ in 0..100_000 {
            let b = next_alpha(a);
            assert!((b * b - (1.0 - b) * a * a).abs() <= 1e-14);
            assert!(b > 0.0 && b < a);
            a = b;
        }
    }

    fn sq_problem(dim: usize, radius: f64) -> MinimaxProblem {
        let f = Oracle::new("sq", FnObjective::new(dim, |x: &Vector| 0.5 * x.norm_squared(), |x: &Vector| x.clone()));
        let g = Oracle::new("sq2", FnObjective::new(dim, |x: &Vector| 0.5 * x.norm_squared() - 1.0, |x: &Vector| x.clone()));
        MinimaxProblem::new(f, g, 1.0, Ball::centered(dim, radius).unwrap(), 1.0, Setting::Smooth).unwrap()
    }

    #[test]
    fn coinciding_branches() {
        // f - t and g~ coincide exactly: x1 = x2 and the step returns it
        let p = sq_problem(2, 1.0);
        let y = Vector::from_vec(vec![0.3, -0.4]);
        let m = QuadraticModels::at(&p, &y);
        assert!(m.hyperplane().is_none());
        let c = m.candidates(&p.set);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0], c[1]);
        assert_eq!(gradient_mapping_step(&p, &y), c[0]);
    }

    #[test]
    fn model_closed_form() {
        let f = Oracle::new(
            "q",
            FnObjective::new(2, |x: &Vector| x[0] * x[0] + 0.5 * x[1] * x[1] + x[0], |x: &Vector| {
                Vector::from_vec(vec![2.0 * x[0] + 1.0, x[1]])
            }),
        );
        let g = Oracle::new("l", FnObjective::new(2, |x: &Vector| x[1] - 0.2, |_x: &Vector| Vector::from_vec(vec![0.0, 1.0])));
        let p = MinimaxProblem::new(f, g, 0.3, Ball::centered(2, 1.0).unwrap(), 2.0, Setting::Smooth).unwrap();
        let y = Vector::from_vec(vec![0.4, 0.1]);
        let m = QuadraticModels::at(&p, &y);
        let x1 = &m.candidates(&p.set)[0];
        let l = p.constant;
        let shifted = x1 - &y + &m.grad_f / l;
        let closed = m.f_y - p.t - m.grad_f.norm_squared() / (2.0 * l) + 0.5 * l * shifted.norm_squared();
        assert!((m.f_model(x1) - closed).abs() < 1e-14);
    }

    #[test]
    fn fixed_point_start() {
        let p = sq_problem(3, 1.0);
        let x0 = Vector::zeros(3);
        let r = agm_minimax(&p, &x0, 20).unwrap();
        assert_eq!(r.x_hat, x0);
        assert_eq!(r.psi_hat, -1.0);
        assert_eq!(r.oracle_calls, 40);
    }

    #[test]
    fn early_exit_at_start() {
        let p = sq_problem(3, 1.0);
        let r = agm_minimax_with(&p, &Vector::zeros(3), 20, Some(0.0), |_, _| {}).unwrap();
        assert!(r.early_exit);
        assert_eq!(r.inner_iterations, 0);
        assert_eq!(r.oracle_calls, 0);
    }

    #[test]
    fn single_level_quadratic() {
        let h = Oracle::new("sq", FnObjective::new(2, |x: &Vector| 0.5 * x.norm_squared(), |x: &Vector| x.clone()));
        let set = Ball::centered(2, 1.0).unwrap();
        let k = 10;
        let mut values = Vec::new();
        let r = single_level_agm_with(&h, &set, 1.0, &Vector::from_vec(vec![1.0, 0.0]), k, None, |_, x| {
            values.push(h.peek(x))
        })
        .unwrap();
        assert!(values.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.value <= 6.0 * 1.0 * 4.0 / (k * k) as f64);
        let r = single_level_agm(&h, &set, 1.0, &Vector::zeros(2), k).unwrap();
        assert_eq!(r.x, Vector::zeros(2));
    }

    #[test]
    fn single_level_strongly_convex_gradient_vanishes() {
        let h = Oracle::new(
            "ell",
            FnObjective::new(2, |x: &Vector| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2), |x: &Vector| {
                Vector::from_vec(vec![2.0 * (x[0] - 0.3), 4.0 * (x[1] + 0.2)])
            }),
        );
        let set = Ball::centered(2, 1.0).unwrap();
        let k = agm_iterations(2.0, 4.0, 1e-10);
        let r = single_level_agm(&h, &set, 4.0, &Vector::from_vec(vec![-0.9, 0.1]), k).unwrap();
        assert!(h.function().first_order(&r.x).norm() < 1e-4);
        assert!(set.contains(&r.x, FEASIBILITY_TOL));
    }
}
