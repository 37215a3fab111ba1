//! Termination rules shared by every method.

use serde::{Deserialize, Serialize};

/// Known global minimizer and the accuracy coefficient `delta` in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopTarget {
    pub x_star: Vec<f64>,
    pub delta: f64,
}

impl StopTarget {
    pub fn new(x_star: Vec<f64>, delta: f64) -> Self {
        assert!(delta > 0.0 && delta <= 1.0, "accuracy coefficient must lie in (0, 1]");
        StopTarget { x_star, delta }
    }
}

/// Stop conditions checked after every subdivision, besides the trial budget.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub target: Option<StopTarget>,
    /// Stop once every box diagonal is at most this fraction of the initial one.
    pub diagonal: Option<f64>,
}

impl StopRule {
    pub fn budget() -> Self {
        StopRule::default()
    }

    pub fn target(x_star: Vec<f64>, delta: f64) -> Self {
        StopRule { target: Some(StopTarget::new(x_star, delta)), diagonal: None }
    }

    pub fn diagonal(fraction: f64) -> Self {
        StopRule { target: None, diagonal: Some(fraction) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Budget,
    TargetFound,
    Diagonal,
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StopReason::Budget => "budget",
            StopReason::TargetFound => "target_found",
            StopReason::Diagonal => "diagonal",
        })
    }
}

/// `|x_i - x*_i| <= delta^(1/N) (b_i - a_i)` on every axis.
pub fn target_reached(x: &[f64], target: &StopTarget, lower: &[f64], upper: &[f64]) -> bool {
    let tol = target.delta.powf(1.0 / x.len() as f64);
    x.iter()
        .zip(&target.x_star)
        .zip(lower.iter().zip(upper))
        .all(|((xi, si), (lo, hi))| (xi - si).abs() <= tol * (hi - lo))
}

/// Trial-point checker shared by the optimizer and the baselines.
#[derive(Clone, Debug)]
pub(crate) struct StopCheck<'a> {
    pub rule: &'a StopRule,
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub initial_diag_sq: f64,
}

impl StopCheck<'_> {
    pub fn hits_target(&self, x: &[f64]) -> bool {
        self.rule.target.as_ref().is_some_and(|t| target_reached(x, t, self.lower, self.upper))
    }

    pub fn diagonal_small(&self, max_diag_sq: f64) -> bool {
        self.rule.diagonal.is_some_and(|frac| max_diag_sq <= frac * frac * self.initial_diag_sq)
    }
}
