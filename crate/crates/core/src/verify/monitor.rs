use std::collections::BTreeSet;
use std::sync::{Arc, Mutex, MutexGuard};

use crate::oracle::{Objective, Oracle};
use crate::problem::BilevelProblem;
use crate::Vector;

/// Points stored per ledger by default; supports are always recorded.
pub const DEFAULT_POINT_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Value,
    FirstOrder,
}

/// Indices with a nonzero coordinate.
pub fn support(x: &Vector) -> Vec<usize> {
    x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone)]
pub struct Query {
    pub side: Side,
    pub kind: QueryKind,
    /// First-order responses of the upper / lower oracle before this query.
    pub upper_calls_before: u64,
    pub lower_calls_before: u64,
    pub support: Vec<usize>,
    /// The queried point, while under the point cap.
    pub point: Option<Vector>,
    /// Support of the returned (sub)gradient for first-order queries.
    pub response_support: Option<Vec<usize>>,
}

impl Query {
    pub fn calls_before(&self) -> u64 {
        self.upper_calls_before + self.lower_calls_before
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Position of the offending query in the ledger.
    pub index: usize,
    /// Coordinates outside the allowed support.
    pub coordinates: Vec<usize>,
}

#[derive(Debug, Default)]
struct LedgerState {
    queries: Vec<Query>,
    upper_calls: u64,
    lower_calls: u64,
    stored_points: usize,
}

/// Support ledger shared by the monitored oracles of one problem.
#[derive(Debug, Clone)]
pub struct SupportLedger {
    state: Arc<Mutex<LedgerState>>,
    start_support: Vec<usize>,
    point_cap: usize,
}

impl SupportLedger {
    fn lock(&self) -> MutexGuard<'_, LedgerState> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn record(&self, side: Side, kind: QueryKind, x: &Vector, response: Option<&Vector>) {
        let mut s = self.lock();
        let point = if s.stored_points < self.point_cap {
            s.stored_points += 1;
            Some(x.clone())
        } else {
            None
        };
        let q = Query {
            side,
            kind,
            upper_calls_before: s.upper_calls,
            lower_calls_before: s.lower_calls,
            support: support(x),
            point,
            response_support: response.map(support),
        };
        if kind == QueryKind::FirstOrder {
            match side {
                Side::Upper => s.upper_calls += 1,
                Side::Lower => s.lower_calls += 1,
            }
        }
        s.queries.push(q);
    }

    pub fn queries(&self) -> Vec<Query> {
        self.lock().queries.clone()
    }

    pub fn len(&self) -> usize {
        self.lock().queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks that each query lies in the span of the start point and all
    /// earlier first-order responses, coordinate-wise.
    pub fn violations(&self) -> Vec<Violation> {
        let queries = self.queries();
        let mut allowed: BTreeSet<usize> = self.start_support.iter().copied().collect();
        let mut out = Vec::new();
        for (index, q) in queries.iter().enumerate() {
            let coordinates: Vec<usize> = q.support.iter().copied().filter(|i| !allowed.contains(i)).collect();
            if !coordinates.is_empty() {
                out.push(Violation { index, coordinates });
            }
            if let Some(r) = &q.response_support {
                allowed.extend(r.iter().copied());
            }
        }
        out
    }

    /// Stored points queried before the given number of combined first-order
    /// responses.
    pub fn points_before(&self, calls: u64) -> Vec<Vector> {
        self.lock()
            .queries
            .iter()
            .filter(|q| q.calls_before() < calls)
            .filter_map(|q| q.point.clone())
            .collect()
    }

    /// Stored points queried before the given number of responses from one side.
    pub fn points_before_side(&self, side: Side, calls: u64) -> Vec<Vector> {
        self.lock()
            .queries
            .iter()
            .filter(|q| match side {
                Side::Upper => q.upper_calls_before < calls,
                Side::Lower => q.lower_calls_before < calls,
            })
            .filter_map(|q| q.point.clone())
            .collect()
    }

    /// Whether every query before the cutoff had its point stored.
    pub fn complete_before(&self, calls: u64) -> bool {
        self.lock().queries.iter().filter(|q| q.calls_before() < calls).all(|q| q.point.is_some())
    }
}

struct Monitored {
    inner: Arc<dyn Objective>,
    side: Side,
    ledger: SupportLedger,
}

impl Objective for Monitored {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &Vector) -> f64 {
        self.ledger.record(self.side, QueryKind::Value, x, None);
        self.inner.value(x)
    }
    fn first_order(&self, x: &Vector) -> Vector {
        let s = self.inner.first_order(x);
        self.ledger.record(self.side, QueryKind::FirstOrder, x, Some(&s));
        s
    }
    fn evaluate(&self, x: &Vector) -> (f64, Vector) {
        let (v, s) = self.inner.evaluate(x);
        self.ledger.record(self.side, QueryKind::FirstOrder, x, Some(&s));
        (v, s)
    }
}

/// Wraps both oracles of `problem` so that every query's support is logged.
pub fn monitor_zero_respecting(problem: &BilevelProblem) -> (BilevelProblem, SupportLedger) {
    monitor_with_cap(problem, DEFAULT_POINT_CAP)
}

pub fn monitor_with_cap(problem: &BilevelProblem, point_cap: usize) -> (BilevelProblem, SupportLedger) {
    let ledger = SupportLedger {
        state: Arc::new(Mutex::new(LedgerState::default())),
        start_support: support(&problem.start),
        point_cap,
    };
    let wrap = |o: &Oracle, side: Side| {
        let m = Monitored { inner: Arc::clone(o.function()), side, ledger: ledger.clone() };
        o.with_function(o.label().to_string(), Arc::new(m))
    };
    let mut monitored = problem.clone();
    monitored.f = wrap(&problem.f, Side::Upper);
    monitored.g = wrap(&problem.g, Side::Lower);
    (monitored, ledger)
}
