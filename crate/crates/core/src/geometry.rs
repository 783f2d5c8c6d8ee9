//! Closed-form Euclidean projections onto a ball and onto the intersection of
//! a ball with a hyperplane.

use crate::error::{invalid, Error, Result};
use crate::problem::Ball;
use crate::Vector;

/// The hyperplane `{x : <w, x> + b = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    normal_sq: f64,
}

impl Hyperplane {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let normal_sq = normal.norm_squared();
        if !(normal_sq > 0.0) || !normal_sq.is_finite() || !offset.is_finite() {
            return Err(invalid("hyperplane needs a finite nonzero normal and finite offset"));
        }
        Ok(Hyperplane { normal, offset, normal_sq })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `<w, x> + b`.
    pub fn residual(&self, x: &Vector) -> f64 {
        self.normal.dot(x) + self.offset
    }

    /// Orthogonal projection onto the hyperplane.
    pub fn project(&self, z: &Vector) -> Vector {
        z - &self.normal * (self.residual(z) / self.normal_sq)
    }

    /// Euclidean distance from `z` to the hyperplane.
    pub fn distance(&self, z: &Vector) -> f64 {
        self.residual(z).abs() / self.normal_sq.sqrt()
    }
}

/// Projection onto a Euclidean ball: identity inside, radial scaling outside.
pub fn project_ball(z: &Vector, ball: &Ball) -> Vector {
    let offset = z - ball.center();
    let dist = offset.norm();
    if dist <= ball.radius() {
        z.clone()
    } else {
        ball.center() + offset * (ball.radius() / dist)
    }
}

/// Projection onto `ball ∩ hyperplane`.
///
/// Project onto the hyperplane first; if that point is outside the ball, pull
/// it back along the hyperplane toward the center's shadow `c_H` onto the
/// circle of radius `sqrt(R^2 - |c - c_H|^2)`. Fails with
/// [`Error::InfeasibleSubproblem`] when the intersection is empty.
pub fn project_ball_hyperplane(z: &Vector, ball: &Ball, plane: &Hyperplane) -> Result<Vector> {
    let radius = ball.radius();
    let center_shadow = plane.project(ball.center());
    let center_dist = (ball.center() - &center_shadow).norm();
    if center_dist > radius + 1e-10 * (1.0 + radius) {
        return Err(Error::InfeasibleSubproblem {
            distance: center_dist,
            radius,
        });
    }
    let z_h = plane.project(z);
    if (&z_h - ball.center()).norm() <= radius {
        return Ok(z_h);
    }
    let circle_radius = (radius * radius - center_dist * center_dist).max(0.0).sqrt();
    let mut direction = &z_h - &center_shadow;
    let mut len = direction.norm();
    if len == 0.0 {
        // z_H sits on c_H but c_H is outside the ball only up to tolerance;
        // pick the first basis vector with a nonzero component inside H.
        for i in 0..z.len() {
            let mut e = Vector::zeros(z.len());
            e[i] = 1.0;
            let d = &e - plane.normal() * (plane.normal()[i] / plane.normal_sq);
            let l = d.norm();
            if l > 1e-12 {
                direction = d;
                len = l;
                break;
            }
        }
        if len == 0.0 {
            return Ok(center_shadow);
        }
    }
    Ok(center_shadow + direction * (circle_radius / len))
}
