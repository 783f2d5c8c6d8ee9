use crate::subroutines::{MinimaxProblem, QuadraticModels};
use crate::Vector;

/// Rounds of local refinement after the coarse grid. Each round halves the
/// spacing; this many rounds drive the spacing well below `1e-9 R`.
pub const REFINEMENT_ROUNDS: usize = 40;

/// Uncounted quadratic models at `y`.
pub fn models_at(p: &MinimaxProblem, y: &Vector) -> QuadraticModels {
    let (f_y, grad_f) = p.f.function().evaluate(y);
    let (g_y, grad_g) = p.g_tilde.function().evaluate(y);
    QuadraticModels { y: y.clone(), f_y, grad_f, g_y, grad_g, t: p.t, l: p.constant }
}

/// Orthonormal basis of the span of the given vectors (modified Gram-Schmidt).
fn orthonormal_basis(vectors: &[&Vector]) -> Vec<Vector> {
    let scale = vectors.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut basis: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut w = (*v).clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
        }
        let n = w.norm();
        if n > 1e-12 * scale.max(1e-300) {
            basis.push(w / n);
        }
    }
    basis
}

struct Reduced {
    k: usize,
    center: [f64; 3],
    radius: f64,
    lin_f: [f64; 3],
    lin_g: [f64; 3],
    off_f: f64,
    off_g: f64,
    l: f64,
}

impl Reduced {
    fn value(&self, s: &[f64; 3]) -> f64 {
        let mut sq = 0.0;
        let mut df = 0.0;
        let mut dg = 0.0;
        for i in 0..self.k {
            sq += s[i] * s[i];
            df += self.lin_f[i] * s[i];
            dg += self.lin_g[i] * s[i];
        }
        let q = 0.5 * self.l * sq;
        (self.off_f + df + q).max(self.off_g + dg + q)
    }

    fn inside(&self, s: &[f64; 3]) -> bool {
        let mut d = 0.0;
        for i in 0..self.k {
            d += (s[i] - self.center[i]).powi(2);
        }
        d <= self.radius * self.radius
    }

    /// Sphere point at polar angle `a[0]` from the first axis and azimuth `a[1]`.
    fn on_sphere(&self, a: &[f64; 3]) -> [f64; 3] {
        let mut s = self.center;
        let r = self.radius;
        match self.k {
            1 => s[0] += r * a[0].cos().signum(),
            2 => {
                s[0] += r * a[0].cos();
                s[1] += r * a[0].sin();
            }
            _ => {
                s[0] += r * a[0].cos();
                s[1] += r * a[0].sin() * a[1].cos();
                s[2] += r * a[0].sin() * a[1].sin();
            }
        }
        s
    }

    /// Grid search over `dims` parameters mapped to points by `map`, then
    /// local refinement with halving spacing. Unmapped parameters are skipped.
    fn search(
        &self,
        dims: usize,
        mid: [f64; 3],
        mut h: [f64; 3],
        grid: usize,
        map: impl Fn(&[f64; 3]) -> Option<[f64; 3]>,
    ) -> Option<([f64; 3], f64)> {
        let mut best: Option<([f64; 3], [f64; 3], f64)> = None;
        let scan = |mid: &[f64; 3], h: &[f64; 3], points: usize, best: &mut Option<([f64; 3], [f64; 3], f64)>| {
            let half = (points as f64 - 1.0) / 2.0;
            let mut idx = [0usize; 3];
            loop {
                let mut a = *mid;
                for i in 0..dims {
                    a[i] = mid[i] + (idx[i] as f64 - half) * h[i];
                }
                if let Some(s) = map(&a) {
                    let v = self.value(&s);
                    if best.as_ref().is_none_or(|b| v < b.2) {
                        *best = Some((a, s, v));
                    }
                }
                let mut axis = 0;
                loop {
                    if axis == dims {
                        return;
                    }
                    idx[axis] += 1;
                    if idx[axis] < points {
                        break;
                    }
                    idx[axis] = 0;
                    axis += 1;
                }
            }
        };
        scan(&mid, &h, grid, &mut best);
        for _ in 0..REFINEMENT_ROUNDS {
            let Some((a, _, _)) = best else { break };
            scan(&a, &h, 11, &mut best);
            for v in h.iter_mut() {
                *v *= 0.5;
            }
        }
        best.map(|(_, s, v)| (s, v))
    }
}

/// Minimizes the max of the two quadratic models at `y` over the ball by
/// dense grid search on the affine subspace through `y` spanned by the ball
/// center and both gradients, followed by local grid refinement. The ball
/// interior and its boundary sphere (in polar coordinates) are searched
/// separately. The first axis, and the polar axis, point along the gradient
/// difference, so the set where both models agree is axis-aligned.
///
/// Requires `grid >= 100`; the search subspace has dimension at most three.
pub fn gradient_mapping_bruteforce(p: &MinimaxProblem, y: &Vector, grid: usize) -> (Vector, f64) {
    let m = models_at(p, y);
    let to_center = p.set.center() - y;
    // first axis across the kink f = g~; the model difference is affine, so
    // moves along the remaining axes keep it fixed
    let across = &m.grad_f - &m.grad_g;
    let basis = orthonormal_basis(&[&across, &to_center, &m.grad_f]);
    let k = basis.len();
    if k == 0 {
        return (y.clone(), m.value(y));
    }
    let project = |v: &Vector| {
        let mut out = [0.0; 3];
        for (i, b) in basis.iter().enumerate() {
            out[i] = b.dot(v);
        }
        out
    };
    let reduced = Reduced {
        k,
        center: project(&to_center),
        radius: p.set.radius(),
        lin_f: project(&m.grad_f),
        lin_g: project(&m.grad_g),
        off_f: m.f_y - m.t,
        off_g: m.g_y,
        l: m.l,
    };
    let grid = grid.max(100);
    let r = p.set.radius();
    let step = 2.0 * r / (grid as f64 - 1.0);
    let interior = reduced.search(k, reduced.center, [step; 3], grid, |s| reduced.inside(s).then_some(*s));
    let pi = std::f64::consts::PI;
    let (mid, h) = match k {
        1 => ([pi / 2.0, 0.0, 0.0], [pi / (grid as f64 - 1.0), 0.0, 0.0]),
        2 => ([pi, 0.0, 0.0], [2.0 * pi / (grid as f64 - 1.0), 0.0, 0.0]),
        _ => ([pi / 2.0, pi, 0.0], [pi / (grid as f64 - 1.0), 2.0 * pi / (grid as f64 - 1.0), 0.0]),
    };
    let sphere = reduced.search(k.saturating_sub(1).max(1), mid, h, grid, |a| Some(reduced.on_sphere(a)));
    let best = [interior, sphere]
        .into_iter()
        .flatten()
        .fold(([0.0; 3], reduced.value(&[0.0; 3])), |b, c| if c.1 < b.1 { c } else { b });
    let mut x = y.clone();
    for (i, b) in basis.iter().enumerate() {
        x += b * best.0[i];
    }
    let v = m.value(&x);
    (x, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project_ball;
    use crate::oracle::{FnObjective, Oracle};
    use crate::problem::{Ball, Setting};

    fn pair(grad_f: Vec<f64>, grad_g: Vec<f64>, t: f64) -> MinimaxProblem {
        let n = grad_f.len();
        let (a, b) = (Vector::from_vec(grad_f), Vector::from_vec(grad_g));
        let (a2, b2) = (a.clone(), b.clone());
        let f = Oracle::new("lf", FnObjective::new(n, move |x: &Vector| a.dot(x), move |_x: &Vector| a2.clone()));
        let g = Oracle::new("lg", FnObjective::new(n, move |x: &Vector| b.dot(x) - 5.0, move |_x: &Vector| b2.clone()));
        MinimaxProblem::new(f, g, t, Ball::centered(n, 1.0).unwrap(), 2.0, Setting::Smooth).unwrap()
    }

    #[test]
    fn zero_gradients_return_y() {
        let p = pair(vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0], 0.0);
        let y = Vector::zeros(3);
        let (x, _) = gradient_mapping_bruteforce(&p, &y, 100);
        assert_eq!(x, y);
    }

    #[test]
    fn f_branch_dominates() {
        // g~ is far below f - t everywhere on the ball
        let p = pair(vec![1.0, -2.0, 0.5], vec![0.0, 0.3, 0.0], -3.0);
        let y = Vector::from_vec(vec![0.2, 0.1, -0.3]);
        let (x, v) = gradient_mapping_bruteforce(&p, &y, 100);
        let expected = project_ball(&(&y - Vector::from_vec(vec![1.0, -2.0, 0.5]) / 2.0), &p.set);
        let exact = models_at(&p, &y).value(&expected);
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}, {x} vs {expected}");
        assert!((x - expected).norm() < 1e-4);
    }

    #[test]
    fn basis_is_orthonormal() {
        let a = Vector::from_vec(vec![1.0, 1.0, 0.0]);
        let b = Vector::from_vec(vec![2.0, 2.0, 0.0]);
        let c = Vector::from_vec(vec![0.0, 1.0, 1.0]);
        let basis = orthonormal_basis(&[&a, &b, &c]);
        assert_eq!(basis.len(), 2);
        assert!(basis[0].dot(&basis[1]).abs() < 1e-15);
    }
}
