//! First-order oracles with call accounting.
//!
//! An [`Objective`] is a plain convex function with a (sub)gradient rule. An
//! [`Oracle`] wraps it with shared atomic counters so that every solver query
//! is accounted for. Derived oracles (shifted, scaled) share the counters of
//! the oracle they were built from.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::Vector;

/// A convex function together with a deterministic (sub)gradient selection.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    /// The gradient for smooth functions, a fixed subgradient otherwise.
    fn first_order(&self, x: &Vector) -> Vector;

    fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        (self.value(x), self.first_order(x))
    }
}

/// Call counters. First-order and value-only calls are tracked separately.
#[derive(Debug, Default)]
pub struct CallCounter {
    first_order: AtomicU64,
    value: AtomicU64,
}

impl CallCounter {
    pub fn first_order_calls(&self) -> u64 {
        self.first_order.load(Ordering::Relaxed)
    }

    pub fn value_calls(&self) -> u64 {
        self.value.load(Ordering::Relaxed)
    }

    fn bump_first_order(&self) {
        self.first_order.fetch_add(1, Ordering::Relaxed);
    }

    fn bump_value(&self) {
        self.value.fetch_add(1, Ordering::Relaxed);
    }
}

/// Snapshot of a counter pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CallCounts {
    pub first_order: u64,
    pub value: u64,
}

/// A counted first-order black box.
#[derive(Clone)]
pub struct Oracle {
    function: Arc<dyn Objective>,
    counter: Arc<CallCounter>,
    label: Arc<str>,
}

impl fmt::Debug for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Oracle")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("counts", &self.counts())
            .finish()
    }
}

impl Oracle {
    pub fn new(label: impl Into<String>, function: impl Objective + 'static) -> Self {
        Self::from_arc(label, Arc::new(function))
    }

    pub fn from_arc(label: impl Into<String>, function: Arc<dyn Objective>) -> Self {
        Oracle {
            function,
            counter: Arc::new(CallCounter::default()),
            label: Arc::from(label.into()),
        }
    }

    /// Same counter, different function. Used by derived oracles and monitors.
    pub fn with_function(&self, label: impl Into<String>, function: Arc<dyn Objective>) -> Self {
        Oracle {
            function,
            counter: Arc::clone(&self.counter),
            label: Arc::from(label.into()),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.function.dim()
    }

    pub fn function(&self) -> &Arc<dyn Objective> {
        &self.function
    }

    /// Value-only query; counted as a value call.
    pub fn value(&self, x: &Vector) -> f64 {
        self.counter.bump_value();
        self.function.value(x)
    }

    /// (Sub)gradient query; counted as one first-order call.
    pub fn first_order(&self, x: &Vector) -> Vector {
        self.counter.bump_first_order();
        self.function.first_order(x)
    }

    /// Value and (sub)gradient from one first-order call.
    pub fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        self.counter.bump_first_order();
        self.function.evaluate(x)
    }

    /// Uncounted evaluation for reporting and tracing.
    pub fn peek(&self, x: &Vector) -> f64 {
        self.function.value(x)
    }

    pub fn counts(&self) -> CallCounts {
        CallCounts {
            first_order: self.counter.first_order_calls(),
            value: self.counter.value_calls(),
        }
    }

    pub fn shares_counter_with(&self, other: &Oracle) -> bool {
        Arc::ptr_eq(&self.counter, &other.counter)
    }
}

struct Shifted {
    inner: Arc<dyn Objective>,
    shift: f64,
}

impl Objective for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.inner.value(x) - self.shift
    }
    fn first_order(&self, x: &Vector) -> Vector {
        self.inner.first_order(x)
    }
    fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        let (v, s) = self.inner.evaluate(x);
        (v - self.shift, s)
    }
}

struct Scaled {
    inner: Arc<dyn Objective>,
    factor: f64,
}

impl Objective for Scaled {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.factor * self.inner.value(x)
    }
    fn first_order(&self, x: &Vector) -> Vector {
        self.inner.first_order(x) * self.factor
    }
    fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        let (v, s) = self.inner.evaluate(x);
        (self.factor * v, s * self.factor)
    }
}

/// `g(x) - g_hat_star`, sharing the call counter of `g`.
pub fn relaxed_constraint(g: &Oracle, g_hat_star: f64) -> Result<Oracle> {
    if !g_hat_star.is_finite() {
        return Err(invalid("relaxed constraint shift must be finite"));
    }
    let function = Arc::new(Shifted {
        inner: Arc::clone(g.function()),
        shift: g_hat_star,
    });
    Ok(g.with_function(format!("{}~", g.label()), function))
}

/// `c * h(x)`, sharing the call counter of `h`. A factor of exactly one
/// returns `h` unchanged.
pub fn scale_oracle(h: &Oracle, c: f64) -> Result<Oracle> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid(format!("scale factor must be positive and finite, got {c}")));
    }
    if c == 1.0 {
        return Ok(h.clone());
    }
    let function = Arc::new(Scaled {
        inner: Arc::clone(h.function()),
        factor: c,
    });
    Ok(h.with_function(format!("{c}*{}", h.label()), function))
}

/// Closure-backed objective, mostly for tests and ad-hoc instances.
pub struct FnObjective<V, G> {
    dim: usize,
    value: V,
    grad: G,
}

impl<V, G> FnObjective<V, G>
where
    V: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(dim: usize, value: V, grad: G) -> Self {
        FnObjective { dim, value, grad }
    }
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }
    fn first_order(&self, x: &Vector) -> Vector {
        (self.grad)(x)
    }
}

/// The zero function on `R^n`.
#[derive(Debug, Clone, Copy)]
pub struct Zero(pub usize);

impl Objective for Zero {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }
    fn first_order(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.0)
    }
}
