//! Seeded random minimax instances for subroutine checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::oracle::{Objective, Oracle};
use crate::problem::{Ball, Setting};
use crate::subroutines::MinimaxProblem;
use crate::Vector;

/// `1/2 (x - a)^T Q (x - a) + c`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub q: DMatrix<f64>,
    pub a: Vector,
    pub c: f64,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        let d = x - &self.a;
        0.5 * d.dot(&(&self.q * &d)) + self.c
    }
    fn first_order(&self, x: &Vector) -> Vector {
        &self.q * (x - &self.a)
    }
}

/// `max_i (a_i^T x + b_i)`, subgradient from the first maximizing piece.
#[derive(Debug, Clone)]
pub struct MaxAffine {
    pub slopes: Vec<Vector>,
    pub offsets: Vec<f64>,
}

impl MaxAffine {
    fn active(&self, x: &Vector) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, (a, b)) in self.slopes.iter().zip(&self.offsets).enumerate() {
            let v = a.dot(x) + b;
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn lipschitz(&self) -> f64 {
        self.slopes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

impl Objective for MaxAffine {
    fn dim(&self) -> usize {
        self.slopes[0].len()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.active(x).1
    }
    fn first_order(&self, x: &Vector) -> Vector {
        self.slopes[self.active(x).0].clone()
    }
}

/// `w |x - a|_1 - c`.
#[derive(Debug, Clone)]
pub struct WeightedL1 {
    pub a: Vector,
    pub w: f64,
    pub c: f64,
}

impl Objective for WeightedL1 {
    fn dim(&self) -> usize {
        self.a.len()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.w * (x - &self.a).lp_norm(1) - self.c
    }
    fn first_order(&self, x: &Vector) -> Vector {
        (x - &self.a).map(|d| {
            if d > 0.0 {
                self.w
            } else if d < 0.0 {
                -self.w
            } else {
                0.0
            }
        })
    }
}

fn normal_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vector {
    Vector::from_fn(n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = m.transpose() * m / n as f64 + DMatrix::identity(n, n) * 0.05;
    let top = q.clone().symmetric_eigenvalues().max();
    q * (rng.random_range(0.5..3.0) / top)
}

fn random_ball(rng: &mut ChaCha8Rng, n: usize) -> Ball {
    Ball::new(normal_vector(rng, n, 0.3), rng.random_range(0.5..1.5)).expect("positive radius")
}

/// Two random convex quadratics on a random ball; the level `t` is drawn so
/// that both branches are active somewhere near the minimizer.
pub fn random_smooth_minimax(seed: u64, n: usize) -> MinimaxProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qf = random_psd(&mut rng, n);
    let qg = random_psd(&mut rng, n);
    let l = qf.clone().symmetric_eigenvalues().max().max(qg.clone().symmetric_eigenvalues().max());
    let f = Quadratic { q: qf, a: normal_vector(&mut rng, n, 1.0), c: 0.0 };
    let g = Quadratic { q: qg, a: normal_vector(&mut rng, n, 1.0), c: -rng.random_range(0.0..0.5) };
    let set = random_ball(&mut rng, n);
    let t = rng.random_range(-0.5..1.5);
    MinimaxProblem::new(Oracle::new("quad_f", f), Oracle::new("quad_g", g), t, set, l, Setting::Smooth)
        .expect("valid random instance")
}

/// A max-affine upper level and a weighted l1 lower level on a random ball.
pub fn random_lipschitz_minimax(seed: u64, n: usize) -> MinimaxProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pieces = rng.random_range(2..5);
    let f = MaxAffine {
        slopes: (0..pieces).map(|_| normal_vector(&mut rng, n, 1.0 / (n as f64).sqrt())).collect(),
        offsets: (0..pieces).map(|_| rng.random_range(-0.3..0.3)).collect(),
    };
    let w = rng.random_range(0.3..1.0) / (n as f64).sqrt();
    let g = WeightedL1 { a: normal_vector(&mut rng, n, 0.5), w, c: rng.random_range(0.0..0.3) };
    let c = f.lipschitz().max(w * (n as f64).sqrt());
    let set = random_ball(&mut rng, n);
    let t = rng.random_range(-0.5..0.5);
    MinimaxProblem::new(Oracle::new("max_affine", f), Oracle::new("weighted_l1", g), t, set, c, Setting::Lipschitz)
        .expect("valid random instance")
}
