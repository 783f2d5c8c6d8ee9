use nalgebra::DMatrix;

use crate::data::DesignMatrix;
use crate::error::{Error, Result};
use crate::Vector;

const MAX_CONDITION: f64 = 1e14;

/// Minimum-norm interpolant `x* = A^T (A A^T)^{-1} b` and `f* = |x*|^2 / 2`.
pub fn min_norm_ground_truth(data: &DesignMatrix) -> Result<(Vector, f64)> {
    let a = &data.a;
    let b = &data.b;
    let gram: DMatrix<f64> = a * a.transpose();
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SingularSystem { condition });
    }
    let lu = gram.clone().lu();
    let mut nu = lu.solve(b).ok_or(Error::SingularSystem { condition })?;
    // one step of iterative refinement
    let r = b - &gram * &nu;
    if let Some(d) = lu.solve(&r) {
        nu += d;
    }
    let x = a.transpose() * nu;
    let residual = (a * &x - b).norm();
    if residual > 1e-8 * (1.0 + b.norm()) {
        return Err(Error::InvalidData(format!("system A x = b is inconsistent (residual {residual:e})")));
    }
    let f_star = 0.5 * x.norm_squared();
    Ok((x, f_star))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_min_norm;

    #[test]
    fn tiny_closed_form() {
        let d = DesignMatrix::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), Vector::from_vec(vec![1.0])).unwrap();
        let (x, f) = min_norm_ground_truth(&d).unwrap();
        assert!((x - Vector::from_vec(vec![0.5, 0.5])).norm() < 1e-15);
        assert!((f - 0.25).abs() < 1e-15);
    }

    #[test]
    fn identity_and_zero_rhs() {
        let b = Vector::from_vec(vec![0.3, -1.2, 2.0]);
        let d = DesignMatrix::new(DMatrix::identity(3, 3), b.clone()).unwrap();
        assert!((min_norm_ground_truth(&d).unwrap().0 - b).norm() < 1e-15);
        let d = synthetic_min_norm(5, 9, 1).unwrap();
        let z = DesignMatrix::new(d.a.clone(), Vector::zeros(5)).unwrap();
        let (x, f) = min_norm_ground_truth(&z).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn random_instance_consistency() {
        let d = synthetic_min_norm(40, 80, 7).unwrap();
        let (x, f) = min_norm_ground_truth(&d).unwrap();
        assert_eq!(f, 0.5 * x.norm_squared());
        let g = 0.5 * (&d.a * &x - &d.b).norm_squared();
        assert!(g <= 1e-14 * (1.0 + d.b.norm_squared()));
        // orthogonal to the null space: x lies in the row space
        let proj = d.a.transpose() * (&d.a * d.a.transpose()).lu().solve(&(&d.a * &x)).unwrap();
        assert!((proj - &x).norm() < 1e-10);
    }

    #[test]
    fn singular_rejected() {
        let d = DesignMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]), Vector::from_vec(vec![1.0, 1.0]))
            .unwrap();
        assert!(matches!(min_norm_ground_truth(&d), Err(Error::SingularSystem { .. })));
    }
}
