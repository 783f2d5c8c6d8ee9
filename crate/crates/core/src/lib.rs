//! First-order methods for simple bilevel optimization on a Euclidean ball:
//! minimize an upper-level objective over the solution set of a lower-level
//! one, by bisecting on the optimal value and solving a discrete minimax
//! problem at each level.

pub mod data;
pub mod driver;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod problem;
pub mod problems;
pub mod subroutines;
pub mod verify;

pub type Vector = nalgebra::DVector<f64>;

pub use error::{Error, Result};
pub use oracle::{relaxed_constraint, scale_oracle, CallCounts, FnObjective, Objective, Oracle, Zero};
pub use problem::{Ball, BilevelProblem, GroundTruth, Instance, Regularity, Setting, Tolerances};
