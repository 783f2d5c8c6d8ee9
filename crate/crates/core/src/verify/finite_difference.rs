use crate::oracle::Objective;
use crate::Vector;

/// Central differences with per-coordinate step `step * (1 + |x_i|)`.
pub fn finite_difference_gradient(h: &dyn Objective, x: &Vector, step: f64) -> Vector {
    let mut probe = x.clone();
    Vector::from_fn(x.len(), |i, _| {
        let hi = step * (1.0 + x[i].abs());
        probe[i] = x[i] + hi;
        let up = h.value(&probe);
        probe[i] = x[i] - hi;
        let down = h.value(&probe);
        probe[i] = x[i];
        (up - down) / (2.0 * hi)
    })
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: &Vector, b: &Vector, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}
