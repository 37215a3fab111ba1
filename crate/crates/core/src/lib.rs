//! Global minimization of functions with Lipschitz gradients over a box.
//!
//! The search domain is split by one-point trisection into boxes whose trial
//! points sit at vertices, so neighbouring boxes share evaluations. Boxes are
//! ranked by a gradient-based lower bound that is valid for a whole range of
//! Lipschitz-constant estimates at once, and the search alternates between a
//! global exploration phase and a local record-improvement phase.

pub mod baselines;
pub mod bounding;
pub mod geometry;
pub mod optimizer;
pub mod problems;
pub mod selection;
pub mod stopping;
pub mod trace;
