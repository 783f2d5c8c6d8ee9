//! The two experiment problems: minimum-norm least squares and
//! validation-over-training logistic regression.

use nalgebra::DMatrix;

use crate::data::DesignMatrix;
use crate::error::{Error, Result};
use crate::oracle::{Objective, Oracle};
use crate::problem::{Ball, BilevelProblem, Regularity};
use crate::Vector;

/// Largest eigenvalue of `A^T A` by power iteration on the smaller Gram matrix.
///
/// Starts from the normalized all-ones vector and stops after 1000 iterations
/// or when the Rayleigh quotient changes by less than `1e-10` relative.
pub fn lambda_max(a: &DMatrix<f64>) -> f64 {
    let gram = if a.nrows() <= a.ncols() {
        a * a.transpose()
    } else {
        a.transpose() * a
    };
    let k = gram.nrows();
    let ones = Vector::from_element(k, 1.0 / (k as f64).sqrt());
    let estimate = power_iteration(&gram, ones);
    let scale = gram.diagonal().max();
    if estimate <= 1e-12 * scale {
        // all-ones start orthogonal to the top eigenspace; restart on the
        // heaviest diagonal direction
        let i = gram.diagonal().imax();
        let mut e = Vector::zeros(k);
        e[i] = 1.0;
        return power_iteration(&gram, e).max(estimate);
    }
    estimate
}

fn power_iteration(gram: &DMatrix<f64>, mut v: Vector) -> f64 {
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w = gram * &v;
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        let done = (next - lambda).abs() <= 1e-10 * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda
}

/// `1/2 |x|^2`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSquaredNorm(pub usize);

impl Objective for HalfSquaredNorm {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * x.norm_squared()
    }
    fn first_order(&self, x: &Vector) -> Vector {
        x.clone()
    }
}

/// `1/2 |Ax - b|^2`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: Vector,
}

impl LeastSquares {
    pub fn new(a: DMatrix<f64>, b: Vector) -> Self {
        LeastSquares { a, b }
    }
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }
    fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }
    fn first_order(&self, x: &Vector) -> Vector {
        self.a.tr_mul(&(&self.a * x - &self.b))
    }
    fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        let r = &self.a * x - &self.b;
        (0.5 * r.norm_squared(), self.a.tr_mul(&r))
    }
}

/// `log(1 + exp(-z))` without overflow.
pub fn log1p_exp_neg(z: f64) -> f64 {
    if z > 0.0 {
        (-z).exp().ln_1p()
    } else {
        -z + z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(z))` without overflow.
fn sigmoid_neg(z: f64) -> f64 {
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Mean logistic loss `1/m sum log(1 + exp(-b_i a_i^T x))`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    a: DMatrix<f64>,
    labels: Vector,
}

impl LogisticLoss {
    pub fn new(data: &DesignMatrix) -> Result<Self> {
        data.validate_labels()?;
        Ok(LogisticLoss { a: data.a.clone(), labels: data.b.clone() })
    }

    fn margins(&self, x: &Vector) -> Vector {
        (&self.a * x).component_mul(&self.labels)
    }
}

impl Objective for LogisticLoss {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        let m = self.a.nrows() as f64;
        self.margins(x).iter().map(|&z| log1p_exp_neg(z)).sum::<f64>() / m
    }

    fn first_order(&self, x: &Vector) -> Vector {
        self.evaluate(x).1
    }

    fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        let m = self.a.nrows() as f64;
        let z = self.margins(x);
        let value = z.iter().map(|&zi| log1p_exp_neg(zi)).sum::<f64>() / m;
        let weights = Vector::from_fn(z.len(), |i, _| -self.labels[i] * sigmoid_neg(z[i]) / m);
        (value, self.a.tr_mul(&weights))
    }
}

const SMOOTHNESS_FLOOR: f64 = 1e-12;

/// `min 1/2 |x|^2  s.t.  x in argmin_{B(0, radius)} 1/2 |Ax - b|^2`.
///
/// Smoothness constants are `L_f = 1` and `L_g = lambda_max(A^T A)`. The
/// lower-level objective is nonnegative, so zero is recorded as a lower bound
/// on `g*`.
pub fn make_min_norm_problem(data: &DesignMatrix, radius: f64) -> Result<BilevelProblem> {
    let n = data.cols();
    let mut warnings = Vec::new();
    let mut l_g = lambda_max(&data.a);
    if l_g < SMOOTHNESS_FLOOR {
        warnings.push(format!("lambda_max(A^T A) = {l_g:e}; smoothness constant floored at {SMOOTHNESS_FLOOR:e}"));
        l_g = SMOOTHNESS_FLOOR;
    }
    let f = Oracle::new("half_sq_norm", HalfSquaredNorm(n));
    let g = Oracle::new("least_squares", LeastSquares::new(data.a.clone(), data.b.clone()));
    let mut problem = BilevelProblem::new(f, g, Ball::centered(n, radius)?, Regularity::Smooth { l_f: 1.0, l_g })?
        .with_g_lower_bound(0.0);
    problem.warnings = warnings;
    Ok(problem)
}

/// `min` validation loss over the minimizers of training loss on `B(0, radius)`.
///
/// Smoothness constants `lambda_max(A^T A) / (4 m)` per level; both losses are
/// nonnegative.
pub fn make_logistic_problem(train: &DesignMatrix, val: &DesignMatrix, radius: f64) -> Result<BilevelProblem> {
    if train.cols() != val.cols() {
        return Err(Error::InvalidData(format!(
            "feature dimensions differ: train {}, validation {}",
            train.cols(),
            val.cols()
        )));
    }
    let smoothness = |d: &DesignMatrix| (lambda_max(&d.a) / (4.0 * d.rows() as f64)).max(SMOOTHNESS_FLOOR);
    let regularity = Regularity::Smooth { l_f: smoothness(val), l_g: smoothness(train) };
    let f = Oracle::new("val_logistic", LogisticLoss::new(val)?);
    let g = Oracle::new("train_logistic", LogisticLoss::new(train)?);
    Ok(BilevelProblem::new(f, g, Ball::centered(train.cols(), radius)?, regularity)?.with_g_lower_bound(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic_logistic, synthetic_min_norm};

    #[test]
    fn power_iteration_matches_eigensolver() {
        for seed in 0..5 {
            let d = synthetic_min_norm(12, 20, seed).unwrap();
            let exact = (d.a.transpose() * &d.a).symmetric_eigenvalues().max();
            let est = lambda_max(&d.a);
            assert!((est - exact).abs() <= 1e-8 * exact, "{est} vs {exact}");
        }
    }

    #[test]
    fn power_iteration_orthogonal_start() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert!((lambda_max(&a) - 2.0).abs() < 1e-12);
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -3.0]);
        assert!((lambda_max(&a) - 9.0).abs() < 1e-9);
    }

    #[test]
    fn min_norm_tiny_example() {
        let d = DesignMatrix::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), Vector::from_vec(vec![1.0])).unwrap();
        let p = make_min_norm_problem(&d, 2.0).unwrap();
        let zero = Vector::zeros(2);
        assert_eq!(p.f.peek(&zero), 0.0);
        assert_eq!(p.g.peek(&zero), 0.5);
        let xs = Vector::from_vec(vec![0.5, 0.5]);
        assert_eq!(p.g.function().first_order(&xs), Vector::zeros(2));
        assert!((p.regularity.lower() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_floors_constant() {
        let d = DesignMatrix::new(DMatrix::zeros(2, 3), Vector::zeros(2)).unwrap();
        let p = make_min_norm_problem(&d, 1.0).unwrap();
        assert_eq!(p.regularity.lower(), SMOOTHNESS_FLOOR);
        assert_eq!(p.warnings.len(), 1);
    }

    #[test]
    fn logistic_at_origin_is_log2() {
        let (tr, va) = synthetic_logistic(30, 4, 3).unwrap();
        let p = make_logistic_problem(&tr, &va, 10.0).unwrap();
        let zero = Vector::zeros(4);
        assert_eq!(p.f.peek(&zero), std::f64::consts::LN_2);
        assert_eq!(p.g.peek(&zero), std::f64::consts::LN_2);
    }

    #[test]
    fn logistic_single_sample() {
        let d = DesignMatrix::new(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), Vector::from_vec(vec![1.0])).unwrap();
        let loss = LogisticLoss::new(&d).unwrap();
        for t in [-30.0, -2.0, 0.0, 0.7, 40.0] {
            let x = Vector::from_vec(vec![t, 0.0]);
            let expected = (-t).exp().ln_1p();
            assert!((loss.value(&x) - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-300);
            let g = loss.first_order(&x);
            assert!((g[0] + 1.0 / (1.0 + t.exp())).abs() < 1e-15);
            assert_eq!(g[1], 0.0);
        }
    }

    #[test]
    fn logistic_rejects_bad_labels() {
        let d = DesignMatrix::new(DMatrix::from_row_slice(1, 1, &[1.0]), Vector::from_vec(vec![0.5])).unwrap();
        assert!(matches!(LogisticLoss::new(&d), Err(Error::InvalidData(_))));
        let (tr, _) = synthetic_logistic(10, 3, 0).unwrap();
        let (_, va) = synthetic_logistic(10, 4, 0).unwrap();
        assert!(make_logistic_problem(&tr, &va, 1.0).is_err());
    }

    #[test]
    fn stable_softplus_extremes() {
        assert_eq!(log1p_exp_neg(1000.0), 0.0);
        assert!((log1p_exp_neg(-1000.0) - 1000.0).abs() < 1e-12);
        assert_eq!(log1p_exp_neg(0.0), std::f64::consts::LN_2);
    }
}
