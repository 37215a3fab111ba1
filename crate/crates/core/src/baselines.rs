//! Center-sampling reference methods: DIRECT and its locally biased variant.
//!
//! Both work on the domain rescaled to the unit cube. A box is stored as its
//! center and a level per axis (side `3^-level`). Each iteration picks the
//! potentially optimal boxes with the same hull and improvement code as the
//! main method and trisects them along all of their longest sides, the side
//! with the best neighbouring sample first. Gradients are never requested.

use std::collections::{BTreeMap, BTreeSet};

use ordered_float::OrderedFloat;

use crate::optimizer::{HistoryPoint, OptConfig, Phase, RunReport, TrialEvent};
use crate::problems::{EvalError, Problem};
use crate::selection::{improvement_filter, nondominated, xi_value, Dot};
use crate::stopping::{StopCheck, StopReason};

/// Boxes at this level on some axis are no longer divided: their centers
/// would be closer than `f64` can resolve.
const MAX_LEVEL: u32 = 33;

#[derive(Clone, Debug, PartialEq)]
pub struct CenterBox {
    /// Center in unit-cube coordinates.
    pub center: Vec<f64>,
    pub levels: Vec<u32>,
    pub f: f64,
}

impl CenterBox {
    fn min_level(&self) -> u32 {
        *self.levels.iter().min().expect("nonempty")
    }

    /// Squared diagonal in unit-cube coordinates.
    fn diag_sq_unit(&self) -> f64 {
        self.levels.iter().map(|&l| 3f64.powi(-2 * l as i32)).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// All boxes of minimal value in each size class, sized by half diagonal.
    Direct,
    /// One box per size class, sized by half the longest side.
    DirectL,
}

impl Variant {
    fn name(self) -> &'static str {
        match self {
            Variant::Direct => "direct",
            Variant::DirectL => "directl",
        }
    }

    fn key(self, b: &CenterBox) -> u32 {
        match self {
            Variant::Direct => b.levels.iter().sum(),
            Variant::DirectL => b.min_level(),
        }
    }

    fn measure(self, b: &CenterBox) -> f64 {
        match self {
            Variant::Direct => 0.5 * b.diag_sq_unit().sqrt(),
            Variant::DirectL => 0.5 * 3f64.powi(-(b.min_level() as i32)),
        }
    }
}

struct Direct<'p> {
    problem: &'p Problem,
    variant: Variant,
    config: &'p OptConfig,
    boxes: Vec<CenterBox>,
    groups: BTreeMap<u32, BTreeSet<(OrderedFloat<f64>, usize)>>,
    shapes: BTreeMap<Vec<u32>, usize>,
    trials: usize,
    f_min: f64,
    x_min: Vec<f64>,
    initial_diag_sq: f64,
    iteration: usize,
    stop: Option<StopReason>,
    history: Vec<HistoryPoint>,
    events: Vec<TrialEvent>,
}

impl<'p> Direct<'p> {
    fn new(problem: &'p Problem, variant: Variant, config: &'p OptConfig) -> Self {
        let initial_diag_sq = problem.lower().iter().zip(problem.upper()).map(|(lo, hi)| (hi - lo).powi(2)).sum();
        Direct {
            problem,
            variant,
            config,
            boxes: Vec::new(),
            groups: BTreeMap::new(),
            shapes: BTreeMap::new(),
            trials: 0,
            f_min: f64::INFINITY,
            x_min: Vec::new(),
            initial_diag_sq,
            iteration: 0,
            stop: None,
            history: Vec::new(),
            events: Vec::new(),
        }
    }

    fn to_real(&self, c: &[f64]) -> Vec<f64> {
        c.iter()
            .enumerate()
            .map(|(j, &t)| self.problem.lower()[j] + t * (self.problem.upper()[j] - self.problem.lower()[j]))
            .collect()
    }

    fn check(&self) -> StopCheck<'_> {
        StopCheck {
            rule: &self.config.stop,
            lower: self.problem.lower(),
            upper: self.problem.upper(),
            initial_diag_sq: self.initial_diag_sq,
        }
    }

    /// One trial; `None` once the stop rule has fired.
    fn sample(&mut self, c: &[f64]) -> Result<Option<f64>, EvalError> {
        if self.stop.is_some() {
            return Ok(None);
        }
        let x = self.to_real(c);
        let f = self.problem.value(&x)?;
        self.trials += 1;
        if f < self.f_min {
            self.f_min = f;
            self.x_min = x.clone();
        }
        let hit = self.check().hits_target(&x);
        if self.config.trace {
            self.events.push(TrialEvent {
                trial_index: self.trials,
                x,
                f,
                f_min: self.f_min,
                phase: if self.trials == 1 { Phase::Init } else { Phase::Explore },
                iteration: self.iteration,
            });
        }
        if hit {
            self.stop = Some(StopReason::TargetFound);
        } else if self.trials >= self.config.max_trials {
            self.stop = Some(StopReason::Budget);
        }
        Ok(Some(f))
    }

    fn max_diag_sq(&self) -> f64 {
        self.shapes
            .keys()
            .map(|levels| {
                levels
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| ((self.problem.upper()[j] - self.problem.lower()[j]) * 3f64.powi(-(l as i32))).powi(2))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    fn add(&mut self, b: CenterBox, id: usize) {
        self.groups.entry(self.variant.key(&b)).or_default().insert((OrderedFloat(b.f), id));
        *self.shapes.entry(b.levels.clone()).or_default() += 1;
        if id == self.boxes.len() {
            self.boxes.push(b);
        } else {
            self.boxes[id] = b;
        }
    }

    fn take(&mut self, id: usize) -> CenterBox {
        let b = self.boxes[id].clone();
        let key = self.variant.key(&b);
        let g = self.groups.get_mut(&key).expect("grouped");
        g.remove(&(OrderedFloat(b.f), id));
        if g.is_empty() {
            self.groups.remove(&key);
        }
        let n = self.shapes.get_mut(&b.levels).expect("shape counted");
        *n -= 1;
        if *n == 0 {
            self.shapes.remove(&b.levels);
        }
        b
    }

    fn push_history(&mut self) {
        if self.history.last().is_some_and(|h| h.trials >= self.trials) {
            return;
        }
        self.history.push(HistoryPoint { trials: self.trials, f_min: self.f_min, max_diag_sq: self.max_diag_sq() });
    }

    fn candidates(&self) -> Vec<Dot> {
        let mut dots = Vec::new();
        for (&s, members) in &self.groups {
            let mut best = None;
            for &(f, id) in members {
                let b = &self.boxes[id];
                if b.min_level() >= MAX_LEVEL {
                    continue;
                }
                match best {
                    Some(v) if f.0 > v => break,
                    _ => best = Some(f.0),
                }
                dots.push(Dot { id, d: self.variant.measure(b), f: f.0, s });
                if self.variant == Variant::DirectL {
                    break;
                }
            }
        }
        dots
    }

    fn divide(&mut self, id: usize) -> Result<(), EvalError> {
        let parent = self.boxes[id].clone();
        let lmin = parent.min_level();
        let delta = 3f64.powi(-(lmin as i32 + 1));
        let axes: Vec<usize> = (0..parent.levels.len()).filter(|&j| parent.levels[j] == lmin).collect();
        let mut samples = Vec::with_capacity(axes.len());
        for &j in &axes {
            let mut plus = parent.center.clone();
            plus[j] += delta;
            let mut minus = parent.center.clone();
            minus[j] -= delta;
            let Some(fp) = self.sample(&plus)? else { return Ok(()) };
            let Some(fm) = self.sample(&minus)? else { return Ok(()) };
            samples.push((fp.min(fm), j, plus, fp, minus, fm));
        }
        samples.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let mut center = self.take(id);
        for (_, j, plus, fp, minus, fm) in samples {
            center.levels[j] += 1;
            let levels = center.levels.clone();
            let next = self.boxes.len();
            self.add(CenterBox { center: plus, levels: levels.clone(), f: fp }, next);
            self.add(CenterBox { center: minus, levels, f: fm }, next + 1);
        }
        self.add(center, id);
        if self.stop.is_none() && self.check().diagonal_small(self.max_diag_sq()) {
            self.stop = Some(StopReason::Diagonal);
        }
        Ok(())
    }

    fn run(mut self) -> Result<RunReport, EvalError> {
        let n = self.problem.dim();
        let c = vec![0.5; n];
        let f = self.sample(&c)?.expect("first sample always runs");
        self.add(CenterBox { center: c, levels: vec![0; n], f }, 0);
        self.push_history();
        while self.stop.is_none() {
            self.iteration += 1;
            let hull = nondominated(&self.candidates());
            let chosen = improvement_filter(&hull, self.f_min, xi_value(self.f_min, self.config.epsilon));
            if chosen.is_empty() {
                log::warn!("{}: no box can be divided further", self.problem.name);
                self.stop = Some(StopReason::Budget);
            }
            for dot in chosen {
                if self.stop.is_some() {
                    break;
                }
                self.divide(dot.id)?;
            }
            self.push_history();
        }
        Ok(RunReport {
            method: self.variant.name().into(),
            problem: self.problem.name.clone(),
            trials: self.trials,
            boxes: self.boxes.len(),
            f_min: self.f_min,
            x_min: self.x_min,
            history: self.history,
            stop_reason: self.stop.expect("loop exits on stop"),
            iterations: self.iteration,
            events: self.events,
        })
    }
}

/// DIRECT with the `epsilon |f_min|` improvement rule. `config.start` is ignored.
pub fn direct_run(problem: &Problem, config: &OptConfig) -> Result<RunReport, EvalError> {
    Direct::new(problem, Variant::Direct, config).run()
}

/// Locally biased DIRECT: boxes sized by their longest side, one per size.
pub fn directl_run(problem: &Problem, config: &OptConfig) -> Result<RunReport, EvalError> {
    Direct::new(problem, Variant::DirectL, config).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{analytic_suite, Quadratic};
    use crate::stopping::StopRule;

    fn sphere2() -> Problem {
        Quadratic::sphere(vec![0.3, 0.7]).into_problem("sphere2", vec![0.0; 2], vec![1.0; 2])
    }

    #[test]
    fn both_variants_find_a_convex_quadratic_without_gradients() {
        for run in [direct_run, directl_run] {
            let (p, audit) = sphere2().audited();
            let cfg = OptConfig { max_trials: 10_000, stop: StopRule::target(vec![0.3, 0.7], 1e-6), ..OptConfig::default() };
            let r = run(&p, &cfg).unwrap();
            assert_eq!(r.stop_reason, StopReason::TargetFound, "{}", r.method);
            assert_eq!(audit.gradient_calls(), 0);
            assert_eq!(audit.value_calls(), r.trials);
        }
    }

    #[test]
    fn first_iteration_divides_the_whole_cube() {
        for run in [direct_run, directl_run] {
            let cfg = OptConfig { max_trials: 5, ..OptConfig::default() };
            let r = run(&sphere2(), &cfg).unwrap();
            assert_eq!((r.trials, r.boxes, r.iterations), (5, 5, 1));
        }
    }

    #[test]
    fn one_box_per_group_in_the_local_variant() {
        // on a constant function every box of a size class ties
        let q = Quadratic::new(nalgebra::DMatrix::zeros(2, 2), vec![0.0, 0.0], 1.0);
        let p = q.into_problem("flat", vec![0.0; 2], vec![1.0; 2]);
        let cfg = OptConfig { max_trials: 9, trace: true, ..OptConfig::default() };
        let local = directl_run(&p, &cfg).unwrap();
        let full = direct_run(&p, &cfg).unwrap();
        // after the first split the two level-(1,0) boxes tie: DIRECT divides
        // both, DIRECT-l only one of them per iteration
        let second = |r: &RunReport| r.events.iter().filter(|e| e.iteration == 2).count();
        assert_eq!((full.iterations, second(&full)), (2, 4));
        assert_eq!((local.iterations, second(&local)), (3, 2));
    }

    #[test]
    fn huge_epsilon_refines_largest_boxes_only() {
        let wide = OptConfig { epsilon: 1e9, max_trials: 2_000, ..OptConfig::default() };
        let narrow = OptConfig { max_trials: 2_000, ..OptConfig::default() };
        let w = direct_run(&sphere2(), &wide).unwrap();
        let n = direct_run(&sphere2(), &narrow).unwrap();
        let last = |r: &RunReport| r.history.last().unwrap().max_diag_sq;
        assert!(last(&w) < last(&n));
        assert!(w.f_min >= n.f_min);
    }

    #[test]
    fn suite_one_dimensional_sphere() {
        let p = analytic_suite().into_iter().find(|p| p.name == "sphere1").unwrap();
        for run in [direct_run, directl_run] {
            let cfg = OptConfig { stop: StopRule::target(vec![0.0], 1e-6), ..OptConfig::default() };
            assert_eq!(run(&p, &cfg).unwrap().stop_reason, StopReason::TargetFound);
        }
    }
}
