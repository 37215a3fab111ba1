//! Runs every method on every problem of a class under one stop rule.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use trisect_core::baselines::{direct_run, directl_run};
use trisect_core::optimizer::{run, OptConfig, RunReport};
use trisect_core::problems::{generate, EvalError, Problem, ProblemClass};
use trisect_core::stopping::StopRule;

use crate::criteria::{criterion_c1, criterion_c2, criterion_c3, criterion_c4, improvement, percentile, Estimate, WorstCase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    New,
    Direct,
    DirectL,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::New, Method::Direct, Method::DirectL];

    pub fn name(self) -> &'static str {
        match self {
            Method::New => "new",
            Method::Direct => "direct",
            Method::DirectL => "directl",
        }
    }

    pub fn run(self, problem: &Problem, config: &OptConfig) -> Result<RunReport, EvalError> {
        match self {
            Method::New => run(problem, config),
            Method::Direct => direct_run(problem, config),
            Method::DirectL => directl_run(problem, config),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "new" => Ok(Method::New),
            "direct" => Ok(Method::Direct),
            "directl" | "direct-l" => Ok(Method::DirectL),
            _ => Err(format!("unknown method {s:?}; expected new, direct or directl")),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no methods given")]
    NoMethods,
    #[error("{method} on problem {index}: {source}")]
    Eval {
        method: Method,
        index: usize,
        #[source]
        source: EvalError,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRun {
    pub index: usize,
    pub trials: usize,
    pub boxes: usize,
    pub solved: bool,
    pub f_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub runs: Vec<ProblemRun>,
    /// Trials sufficient for half of the problems.
    pub half: Option<usize>,
    pub c1: WorstCase,
    pub c2: Option<usize>,
    pub c3: Estimate,
}

impl MethodSummary {
    fn new(method: Method, runs: Vec<ProblemRun>, p_max: usize) -> Self {
        let (p, solved) = counts(&runs, p_max);
        let m: Vec<usize> = runs.iter().map(|r| r.boxes).collect();
        let c1 = criterion_c1(&p, &solved, p_max);
        MethodSummary {
            method,
            half: percentile(&p, &solved, 0.5),
            c2: criterion_c2(&m, &c1),
            c3: criterion_c3(&p, &solved, p_max),
            c1,
            runs,
        }
    }

    pub fn unsolved(&self) -> usize {
        self.c1.unsolved
    }
}

/// The new method against one competitor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub competitor: Method,
    pub p: usize,
    pub q: usize,
    /// Competitor worst case over ours.
    pub c1_ratio: Estimate,
    /// Competitor average over ours.
    pub c3_ratio: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvalidProblem {
    pub index: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: ProblemClass,
    pub delta: f64,
    pub p_max: usize,
    pub epsilon: f64,
    pub invalid: Vec<InvalidProblem>,
    pub methods: Vec<MethodSummary>,
    pub comparisons: Vec<Comparison>,
}

impl ClassReport {
    pub fn method(&self, m: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    pub fn comparison(&self, competitor: Method) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.competitor == competitor)
    }
}

/// Trial counts with `P_max` standing in for unsolved problems.
fn counts(runs: &[ProblemRun], p_max: usize) -> (Vec<usize>, Vec<bool>) {
    runs.iter().map(|r| (if r.solved { r.trials } else { p_max }, r.solved)).unzip()
}

fn compare(new: &MethodSummary, other: &MethodSummary, p_max: usize) -> Comparison {
    let (p_new, _) = counts(&new.runs, p_max);
    let (p_other, _) = counts(&other.runs, p_max);
    let (p, q) = criterion_c4(&p_new, &p_other);
    let flagged = other.unsolved() > 0;
    Comparison {
        competitor: other.method,
        p,
        q,
        c1_ratio: improvement(other.c1.effective() as f64, flagged, new.c1.effective() as f64),
        c3_ratio: improvement(other.c3.value, flagged, new.c3.value),
    }
}

fn dedup(methods: &[Method]) -> Vec<Method> {
    let mut out: Vec<Method> = Vec::new();
    for &m in methods {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

/// Runs `methods` on the problems of `class` with the default `epsilon`.
pub fn run_class(
    methods: &[Method],
    class: &ProblemClass,
    delta: f64,
    p_max: usize,
    workers: usize,
) -> Result<ClassReport, BenchError> {
    run_class_with(methods, class, delta, p_max, workers, OptConfig::default().epsilon)
}

pub fn run_class_with(
    methods: &[Method],
    class: &ProblemClass,
    delta: f64,
    p_max: usize,
    workers: usize,
    epsilon: f64,
) -> Result<ClassReport, BenchError> {
    let methods = dedup(methods);
    if methods.is_empty() {
        return Err(BenchError::NoMethods);
    }
    let mut problems = Vec::new();
    let mut invalid = Vec::new();
    for index in 1..=class.count {
        match generate(class, index) {
            Ok(p) if p.known_opt.is_some() => problems.push((index, p)),
            Ok(_) => invalid.push(InvalidProblem { index, error: "no known minimizer".into() }),
            Err(e) => {
                log::warn!("problem {index} excluded: {e}");
                invalid.push(InvalidProblem { index, error: e.to_string() });
            }
        }
    }

    let jobs: Vec<(Method, usize)> =
        methods.iter().flat_map(|&m| (0..problems.len()).map(move |k| (m, k))).collect();
    let one = |&(method, k): &(Method, usize)| -> Result<ProblemRun, BenchError> {
        let (index, problem) = &problems[k];
        let x_star = problem.known_opt.as_ref().expect("filtered above").x.clone();
        let cfg = OptConfig {
            epsilon,
            max_trials: p_max,
            stop: StopRule::target(x_star, delta),
            ..OptConfig::default()
        };
        let r = method.run(problem, &cfg).map_err(|source| BenchError::Eval { method, index: *index, source })?;
        log::debug!("{method} #{index}: {} trials, {}", r.trials, r.stop_reason);
        Ok(ProblemRun { index: *index, trials: r.trials, boxes: r.boxes, solved: r.solved(), f_min: r.f_min })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let results: Vec<ProblemRun> = pool.install(|| jobs.par_iter().map(one).collect::<Result<_, _>>())?;

    let per = problems.len();
    let summaries: Vec<MethodSummary> = methods
        .iter()
        .zip(results.chunks(per.max(1)).chain(std::iter::repeat(&[][..])))
        .map(|(&m, runs)| MethodSummary::new(m, runs.to_vec(), p_max))
        .collect();
    let comparisons = match summaries.iter().find(|s| s.method == Method::New) {
        Some(new) => summaries
            .iter()
            .filter(|s| s.method != Method::New)
            .map(|s| compare(new, s, p_max))
            .collect(),
        None => Vec::new(),
    };
    Ok(ClassReport {
        class: class.clone(),
        delta,
        p_max,
        epsilon,
        invalid,
        methods: summaries,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use trisect_core::problems::Difficulty;

    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("DIRECT-l".parse::<Method>().unwrap(), Method::DirectL);
        assert!("nelder".parse::<Method>().is_err());
    }

    #[test]
    fn single_method_has_no_comparisons() {
        let class = ProblemClass::new(2, Difficulty::Simple, 3, 4);
        let r = run_class(&[Method::New], &class, 1e-4, 2000, 2).unwrap();
        assert!(r.comparisons.is_empty());
        assert_eq!(r.methods.len(), 1);
        assert_eq!(r.methods[0].runs.len(), 3);
    }

    #[test]
    fn budget_of_one_leaves_everything_unsolved() {
        let class = ProblemClass::new(2, Difficulty::Hard, 20, 8);
        let r = run_class(&Method::ALL, &class, 1e-4, 1, 2).unwrap();
        for s in &r.methods {
            assert_eq!(s.c1.to_string(), "> 1 (20)");
            assert!(s.c3.lower_bound);
            assert_eq!(s.half, None);
        }
        assert_eq!(r.comparisons.len(), 2);
    }

    #[test]
    fn criteria_are_consistent() {
        let class = ProblemClass::new(2, Difficulty::Simple, 6, 2);
        let r = run_class(&Method::ALL, &class, 1e-4, 5000, 3).unwrap();
        for s in &r.methods {
            if let Some(h) = s.half {
                assert!(s.c1.effective() >= h);
            }
            for run in &s.runs {
                if run.solved {
                    assert!(run.trials <= s.c1.value);
                }
            }
        }
        for c in &r.comparisons {
            assert!(c.p + c.q <= 6);
        }
    }

    #[test]
    fn empty_method_list_is_rejected() {
        let class = ProblemClass::new(2, Difficulty::Simple, 2, 1);
        assert!(matches!(run_class(&[], &class, 1e-4, 10, 1), Err(BenchError::NoMethods)));
    }
}
