//! Problem instances: zero-chains, worst-case constructions and the
//! experiment problems.

mod chain;
mod experiments;
mod hard;

use crate::oracle::Oracle;

pub use chain::{ChainSpec, LipschitzChain, SmoothChain};
pub use experiments::{
    lambda_max, log1p_exp_neg, make_logistic_problem, make_min_norm_problem, HalfSquaredNorm, LeastSquares,
    LogisticLoss,
};
pub use hard::{
    make_lipschitz_hard_instance, make_lower_bound_instance, make_smooth_hard_instance, Level, TailQuadratic,
};

/// `h_{q,L,R}` as a counted oracle.
pub fn make_smooth_chain(spec: ChainSpec) -> Oracle {
    Oracle::new("h_chain", SmoothChain::new(spec))
}

/// `r_{q,C,R}` as a counted oracle.
pub fn make_lipschitz_chain(spec: ChainSpec) -> Oracle {
    Oracle::new("r_chain", LipschitzChain::new(spec))
}
