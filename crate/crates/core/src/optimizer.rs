//! The two-phase search.
//!
//! An exploration phase subdivides nondominated boxes among the larger groups
//! until the record improves by at least one percent; a record phase then
//! trisects the box around the best point up to `N` times. Every subdivision
//! is followed by a check of the stop rule.

use serde::{Deserialize, Serialize};

use crate::geometry::{GridVertex, Partition, TrisectError};
use crate::problems::{EvalError, Problem};
use crate::selection::{group_representatives, improvement_filter, nondominated, xi_value};
use crate::stopping::{StopCheck, StopReason, StopRule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartVertex {
    #[default]
    A,
    B,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub epsilon: f64,
    pub max_trials: usize,
    pub start: StartVertex,
    pub stop: StopRule,
    /// Keep one [`TrialEvent`] per trial in the report.
    pub trace: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            epsilon: 1e-4,
            max_trials: 100_000,
            start: StartVertex::A,
            stop: StopRule::budget(),
            trace: false,
        }
    }
}

impl std::str::FromStr for StartVertex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" | "A" => Ok(StartVertex::A),
            "b" | "B" => Ok(StartVertex::B),
            _ => Err(format!("start vertex must be a or b, got {s:?}")),
        }
    }
}

impl OptConfig {
    /// Reads `key = value` lines over the defaults. Keys: `epsilon`,
    /// `max_trials`, `start`, `diagonal`, `trace`; `#` starts a comment.
    pub fn from_key_values(text: &str) -> Result<Self, String> {
        let mut cfg = OptConfig::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| format!("line {}: expected key = value", k + 1))?;
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {key}: {e}", k + 1);
            match key {
                "epsilon" => cfg.epsilon = value.parse().map_err(|e| bad(&e))?,
                "max_trials" => cfg.max_trials = value.parse().map_err(|e| bad(&e))?,
                "start" => cfg.start = value.parse().map_err(|e| bad(&e))?,
                "diagonal" => cfg.stop.diagonal = Some(value.parse().map_err(|e| bad(&e))?),
                "trace" => cfg.trace = value.parse().map_err(|e| bad(&e))?,
                _ => return Err(format!("line {}: unknown key {key:?}", k + 1)),
            }
        }
        if cfg.epsilon < 0.0 || cfg.max_trials == 0 {
            return Err("epsilon must be nonnegative and max_trials positive".into());
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Init,
    Explore,
    Record,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Init => "init",
            Phase::Explore => "explore",
            Phase::Record => "record",
        })
    }
}

/// One new trial point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialEvent {
    pub trial_index: usize,
    pub x: Vec<f64>,
    pub f: f64,
    pub f_min: f64,
    pub phase: Phase,
    pub iteration: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub trials: usize,
    pub f_min: f64,
    pub max_diag_sq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub problem: String,
    pub trials: usize,
    pub boxes: usize,
    pub f_min: f64,
    pub x_min: Vec<f64>,
    pub history: Vec<HistoryPoint>,
    pub stop_reason: StopReason,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<TrialEvent>,
}

impl RunReport {
    pub fn solved(&self) -> bool {
        self.stop_reason == StopReason::TargetFound
    }
}

/// Outcome of an exploration phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseSwitch {
    Local,
    Explore,
}

/// One-percent improvement of the record over the value memorized at the
/// start of the exploration phase.
pub fn improved_enough(f_min: f64, f_prec: f64) -> bool {
    f_min < f_prec && f_min <= f_prec - 0.01 * f_prec.abs()
}

/// True when the gradient at `a` does not decrease along any side of `[a, b]`.
pub fn record_stationary(grad: &[f64], a: &[f64], b: &[f64]) -> bool {
    grad.iter().zip(a.iter().zip(b)).all(|(g, (aj, bj))| g * (bj - aj) >= 0.0)
}

/// Record box among `(id, F, d)` candidates: smallest `F`, then larger `d`, then smaller id.
pub fn choose_record_box(candidates: &[(usize, f64, f64)]) -> Option<usize> {
    candidates
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(y.2.total_cmp(&x.2)).then(x.0.cmp(&y.0)))
        .map(|c| c.0)
}

pub struct OptState<'p> {
    problem: &'p Problem,
    config: OptConfig,
    partition: Partition,
    f_min: f64,
    x_min: GridVertex,
    record_box: usize,
    f_prec: f64,
    iteration: usize,
    phase: Phase,
    initial_diag_sq: f64,
    stop: Option<StopReason>,
    history: Vec<HistoryPoint>,
    events: Vec<TrialEvent>,
    record_trisections: Vec<usize>,
}

impl<'p> OptState<'p> {
    /// Step 0: a single box with one trial at its starting vertex.
    pub fn initialize(problem: &'p Problem, config: OptConfig) -> Result<Self, EvalError> {
        assert!(config.epsilon >= 0.0 && config.max_trials >= 1);
        let partition = Partition::new(problem, config.start == StartVertex::B)?;
        let x_min = GridVertex::origin(problem.dim());
        let f_min = partition.record(&x_min).expect("origin evaluated").f;
        let initial_diag_sq = partition.diagonal_sq(0);
        let mut state = OptState {
            problem,
            config,
            partition,
            f_min,
            x_min,
            record_box: 0,
            f_prec: f_min,
            iteration: 1,
            phase: Phase::Init,
            initial_diag_sq,
            stop: None,
            history: Vec::new(),
            events: Vec::new(),
            record_trisections: Vec::new(),
        };
        if state.config.trace {
            state.events.push(TrialEvent {
                trial_index: 1,
                x: state.partition.to_real(&state.x_min),
                f: f_min,
                f_min,
                phase: Phase::Init,
                iteration: 0,
            });
        }
        let x0 = state.partition.to_real(&state.x_min);
        state.check_stop(Some(&x0));
        state.push_history();
        Ok(state)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn f_min(&self) -> f64 {
        self.f_min
    }

    pub fn x_min(&self) -> Vec<f64> {
        self.partition.to_real(&self.x_min)
    }

    pub fn record_box(&self) -> usize {
        self.record_box
    }

    /// Group index of the record box.
    pub fn p(&self) -> u32 {
        self.partition.boxes()[self.record_box].s
    }

    pub fn stopped(&self) -> Option<StopReason> {
        self.stop
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Number of record-box trisections made by each record phase so far.
    pub fn record_trisections(&self) -> &[usize] {
        &self.record_trisections
    }

    fn check_stop(&mut self, new_point: Option<&[f64]>) {
        if self.stop.is_some() {
            return;
        }
        let check = StopCheck {
            rule: &self.config.stop,
            lower: self.problem.lower(),
            upper: self.problem.upper(),
            initial_diag_sq: self.initial_diag_sq,
        };
        if new_point.is_some_and(|x| check.hits_target(x)) {
            self.stop = Some(StopReason::TargetFound);
        } else if self.partition.eval_counter() >= self.config.max_trials {
            self.stop = Some(StopReason::Budget);
        } else if check.diagonal_small(self.partition.max_diagonal_sq()) {
            self.stop = Some(StopReason::Diagonal);
        }
    }

    fn push_history(&mut self) {
        let trials = self.partition.eval_counter();
        if self.history.last().is_some_and(|h| h.trials >= trials) {
            return;
        }
        self.history.push(HistoryPoint {
            trials,
            f_min: self.f_min,
            max_diag_sq: self.partition.max_diagonal_sq(),
        });
    }

    /// Trisects one box, folds any new trial into the record and checks the
    /// stop rule. Returns false when the box is too deep to be split.
    fn subdivide(&mut self, id: usize) -> Result<bool, EvalError> {
        let t = match self.partition.trisect(id, self.problem) {
            Ok(t) => t,
            Err(TrisectError::Eval(e)) => return Err(e),
            Err(TrisectError::Geometry(e)) => {
                log::debug!("box {id} not subdivided: {e}");
                return Ok(false);
            }
        };
        let mut x_new = None;
        if let Some(rec) = &t.new_trial {
            let u = self.partition.boxes()[t.middle].a.clone();
            let x = self.partition.to_real(&u);
            self.update_record(&u, rec.f);
            if self.config.trace {
                self.events.push(TrialEvent {
                    trial_index: rec.trial_index,
                    x: x.clone(),
                    f: rec.f,
                    f_min: self.f_min,
                    phase: self.phase,
                    iteration: self.iteration,
                });
            }
            x_new = Some(x);
        }
        self.resolve_record_box();
        self.check_stop(x_new.as_deref());
        Ok(true)
    }

    /// Strictly better values move the record point.
    pub fn update_record(&mut self, vertex: &GridVertex, f: f64) {
        if f < self.f_min {
            self.f_min = f;
            self.x_min = vertex.clone();
        }
    }

    fn resolve_record_box(&mut self) {
        let boxes = self.partition.boxes();
        let candidates: Vec<(usize, f64, f64)> = self
            .partition
            .boxes_at(&self.x_min)
            .iter()
            .map(|&id| (id, boxes[id].ch.f_lin, boxes[id].ch.d))
            .collect();
        self.record_box = choose_record_box(&candidates).expect("record point is a trial vertex");
    }

    /// Subdivides the improving nondominated boxes of groups `q_inf..=g_hi`.
    pub fn exploration_iteration(&mut self, g_hi: u32) -> Result<(), EvalError> {
        let dots = group_representatives(&self.partition, self.partition.q_inf(), g_hi);
        let hull = nondominated(&dots);
        let chosen = improvement_filter(&hull, self.f_min, xi_value(self.f_min, self.config.epsilon));
        for dot in chosen {
            if self.stop.is_some() {
                break;
            }
            self.subdivide(dot.id)?;
        }
        self.iteration += 1;
        Ok(())
    }

    /// Step 1: up to `N` iterations over the large groups, then one over all
    /// groups up to the record's.
    pub fn exploration_phase(&mut self) -> Result<PhaseSwitch, EvalError> {
        self.phase = Phase::Explore;
        self.f_prec = self.f_min;
        for _ in 0..self.problem.dim() {
            let g_hi = (self.partition.q_inf() + self.p()).div_ceil(2);
            self.exploration_iteration(g_hi)?;
            if self.stop.is_some() || improved_enough(self.f_min, self.f_prec) {
                return Ok(PhaseSwitch::Local);
            }
        }
        self.exploration_iteration(self.p())?;
        if self.p() < self.partition.q_0() {
            Ok(PhaseSwitch::Local)
        } else {
            Ok(PhaseSwitch::Explore)
        }
    }

    /// Step 2: up to `N` trisections of the record box, stopping early once
    /// the gradient at the record point is nonnegative along every side.
    pub fn record_phase(&mut self) -> Result<(), EvalError> {
        self.phase = Phase::Record;
        self.iteration += 1;
        let mut done = 0;
        while done < self.problem.dim() && self.stop.is_none() {
            let bx = &self.partition.boxes()[self.record_box];
            let grad = &self.partition.record(&bx.a).expect("trial vertex stored").grad;
            let a = self.partition.to_real(&bx.a);
            let b = self.partition.to_real(&bx.b);
            if record_stationary(grad, &a, &b) || !self.subdivide(self.record_box)? {
                break;
            }
            done += 1;
        }
        self.record_trisections.push(done);
        Ok(())
    }

    /// Alternates the two phases until the stop rule fires.
    pub fn run(mut self) -> Result<RunReport, EvalError> {
        self.run_in_place()?;
        Ok(self.report())
    }

    /// [`OptState::run`] keeping the state, so the final partition stays readable.
    pub fn run_in_place(&mut self) -> Result<(), EvalError> {
        while self.stop.is_none() {
            let boxes = self.partition.len();
            let switch = self.exploration_phase()?;
            self.push_history();
            if self.stop.is_some() {
                break;
            }
            if switch == PhaseSwitch::Local {
                self.record_phase()?;
                self.push_history();
            }
            if self.stop.is_none() && self.partition.len() == boxes {
                log::warn!("{}: no box can be subdivided further", self.problem.name);
                self.stop = Some(StopReason::Budget);
            }
        }
        self.push_history();
        Ok(())
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            method: "new".into(),
            problem: self.problem.name.clone(),
            trials: self.partition.eval_counter(),
            boxes: self.partition.len(),
            f_min: self.f_min,
            x_min: self.x_min(),
            history: self.history.clone(),
            stop_reason: self.stop.unwrap_or(StopReason::Budget),
            iterations: self.iteration,
            events: self.events.clone(),
        }
    }
}

/// Runs the method to completion.
pub fn run(problem: &Problem, config: &OptConfig) -> Result<RunReport, EvalError> {
    OptState::initialize(problem, config.clone())?.run()
}
