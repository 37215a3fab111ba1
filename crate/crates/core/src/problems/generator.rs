//! Seeded generator of C^1 multiextremal test functions with a known global
//! minimizer.
//!
//! Each function starts from a paraboloid `||x - T||^2 + t` over `[lo, hi]^n`
//! and is deformed inside disjoint balls by a cubic in the distance to the
//! ball center. Inside ball `i` (center `M`, radius `rho`, minimum `f_i`):
//!
//! ```text
//! C(x) = (2/rho^2 <y,w>/r - 2A/rho^3) r^3 + (1 - 4<y,w>/(r rho) + 3A/rho^2) r^2 + f_i
//! y = x - M,  r = |y|,  w = T - M,  A = |w|^2 + t - f_i
//! ```
//!
//! `C` and its gradient agree with the paraboloid on the sphere `r = rho`, so
//! the function is continuously differentiable. Along any ray from `M`,
//! `C - f_i = r^2 (a r + b)` with `b > 0` and `a rho + b > 0` whenever `T`
//! lies outside the ball and `f_i` is below the paraboloid's minimum on the
//! sphere, which the construction enforces. Hence `M` is the unique minimizer
//! inside its ball, and the ball carrying the lowest `f_i` holds the global
//! minimizer.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Objective, Problem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Simple,
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Simple => "simple",
            Difficulty::Hard => "hard",
        })
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple" => Ok(Difficulty::Simple),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty '{other}' (expected simple|hard)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub domain_lo: f64,
    pub domain_hi: f64,
    /// Value at the paraboloid vertex.
    pub paraboloid_min: f64,
    /// Value at the global minimizer.
    pub global_value: f64,
    /// Distance between the paraboloid vertex and the global minimizer.
    pub global_distance: f64,
    /// Radius of the global minimizer's ball.
    pub global_radius: f64,
    /// Number of local (non-global) minimizers.
    pub num_local_minima: usize,
    /// Every local minimum lies at least this far above the global value.
    pub value_gap: f64,
    pub min_local_radius: f64,
    pub max_retries: usize,
}

impl GeneratorParams {
    /// Defaults per difficulty: "hard" halves the global basin radius and
    /// narrows the gap between the global and the best local value.
    pub fn for_class(dim: usize, difficulty: Difficulty) -> Self {
        let global_distance = if dim <= 2 { 0.9 } else { 0.66 };
        let (global_radius, value_gap) = match difficulty {
            Difficulty::Simple => (0.2, 0.3),
            Difficulty::Hard => (0.1, 0.05),
        };
        GeneratorParams {
            domain_lo: -1.0,
            domain_hi: 1.0,
            paraboloid_min: 0.0,
            global_value: -1.0,
            global_distance,
            global_radius,
            num_local_minima: 9,
            value_gap,
            min_local_radius: 0.02,
            max_retries: 10_000,
        }
    }
}

/// A reproducible family of generated problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemClass {
    pub seed: u64,
    pub dim: usize,
    pub count: usize,
    pub difficulty: Difficulty,
    pub params: GeneratorParams,
}

impl ProblemClass {
    pub fn new(dim: usize, difficulty: Difficulty, count: usize, seed: u64) -> Self {
        ProblemClass { seed, dim, count, difficulty, params: GeneratorParams::for_class(dim, difficulty) }
    }

    pub fn manifest(&self) -> ClassManifest {
        let problems = (1..=self.count)
            .map(|index| match generate(self, index) {
                Ok(p) => {
                    let opt = p.known_opt.expect("generated problems carry optima");
                    ManifestEntry { index, x_star: Some(opt.x), f_star: Some(opt.f), error: None }
                }
                Err(e) => ManifestEntry { index, x_star: None, f_star: None, error: Some(e.to_string()) },
            })
            .collect();
        ClassManifest { class: self.clone(), problems }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Auditable description of a class: generator inputs plus every problem's optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassManifest {
    pub class: ProblemClass,
    pub problems: Vec<ManifestEntry>,
}

impl ClassManifest {
    /// Regenerates the class and checks every recorded optimum bit for bit.
    pub fn verify(&self) -> Result<(), GenerateError> {
        let fresh = self.class.manifest();
        if fresh.problems.len() != self.problems.len() {
            return Err(GenerateError::ManifestMismatch { index: fresh.problems.len().min(self.problems.len()) + 1 });
        }
        for (a, b) in fresh.problems.iter().zip(&self.problems) {
            if a != b {
                return Err(GenerateError::ManifestMismatch { index: b.index });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("problem index {index} outside 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("could not place {what} after {retries} attempts")]
    Infeasible { what: &'static str, retries: usize },
    #[error("manifest entry {index} does not match the regenerated problem")]
    ManifestMismatch { index: usize },
}

#[derive(Clone, Debug)]
struct Basin {
    center: Vec<f64>,
    radius: f64,
    value: f64,
}

/// A paraboloid deformed by cubic basins; see the module docs.
#[derive(Clone, Debug)]
pub struct BasinFunction {
    vertex: Vec<f64>,
    vertex_value: f64,
    /// Global basin first.
    basins: Vec<Basin>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl BasinFunction {
    fn basin_at(&self, x: &[f64]) -> Option<&Basin> {
        self.basins.iter().find(|b| dist(x, &b.center) < b.radius)
    }

    pub fn global_minimizer(&self) -> (&[f64], f64) {
        (&self.basins[0].center, self.basins[0].value)
    }

    /// `(center, radius)` of every basin, global first.
    pub fn basins(&self) -> Vec<(Vec<f64>, f64)> {
        self.basins.iter().map(|b| (b.center.clone(), b.radius)).collect()
    }

    fn cubic_terms(&self, b: &Basin, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64, f64, f64) {
        let y: Vec<f64> = x.iter().zip(&b.center).map(|(p, m)| p - m).collect();
        let w: Vec<f64> = self.vertex.iter().zip(&b.center).map(|(t, m)| t - m).collect();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scal: f64 = y.iter().zip(&w).map(|(a, c)| a * c).sum();
        let a = w.iter().map(|v| v * v).sum::<f64>() + self.vertex_value - b.value;
        (y, w, r, scal, a)
    }
}

impl Objective for BasinFunction {
    fn dim(&self) -> usize {
        self.vertex.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let Some(b) = self.basin_at(x) else {
            let d = dist(x, &self.vertex);
            return d * d + self.vertex_value;
        };
        let (_, _, r, scal, a) = self.cubic_terms(b, x);
        if r == 0.0 {
            return b.value;
        }
        let rho = b.radius;
        (2.0 / (rho * rho) * scal / r - 2.0 * a / rho.powi(3)) * r.powi(3)
            + (1.0 - 4.0 * scal / (r * rho) + 3.0 * a / (rho * rho)) * r * r
            + b.value
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let Some(b) = self.basin_at(x) else {
            return x.iter().zip(&self.vertex).map(|(p, t)| 2.0 * (p - t)).collect();
        };
        let (y, w, r, scal, a) = self.cubic_terms(b, x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let rho = b.radius;
        let rho2 = rho * rho;
        let rho3 = rho2 * rho;
        // grad(scal r^2) = w r^2 + 2 scal y,  grad(scal r) = w r + scal y / r
        y.iter()
            .zip(&w)
            .map(|(&yj, &wj)| {
                2.0 / rho2 * (wj * r * r + 2.0 * scal * yj) - 6.0 * a / rho3 * r * yj + 2.0 * yj
                    - 4.0 / rho * (wj * r + scal * yj / r)
                    + 6.0 * a / rho2 * yj
            })
            .collect()
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn problem_seed(class: &ProblemClass, index: usize) -> u64 {
    let diff = match class.difficulty {
        Difficulty::Simple => 1,
        Difficulty::Hard => 2,
    };
    [class.dim as u64, diff, index as u64]
        .iter()
        .fold(splitmix(class.seed), |h, &v| splitmix(h ^ v))
}

fn check_params(class: &ProblemClass) -> Result<(), GenerateError> {
    let p = &class.params;
    let bad = |m: &str| Err(GenerateError::InvalidParams(m.to_string()));
    if class.dim == 0 {
        return bad("dimension must be positive");
    }
    if p.domain_lo >= p.domain_hi {
        return bad("empty domain");
    }
    if p.global_value >= p.paraboloid_min {
        return bad("global value must lie below the paraboloid minimum");
    }
    if !(p.global_radius > 0.0 && p.global_radius < p.global_distance) {
        return bad("global radius must be positive and smaller than the global distance");
    }
    if p.global_distance >= p.domain_hi - p.domain_lo {
        return bad("global distance does not fit in the domain");
    }
    if p.value_gap < 0.0 || p.min_local_radius <= 0.0 {
        return bad("value gap and minimal local radius must be non-negative/positive");
    }
    Ok(())
}

/// Problem number `index` (1-based) of `class`.
pub fn generate(class: &ProblemClass, index: usize) -> Result<Problem, GenerateError> {
    let f = basin_function(class, index)?;
    let (x_star, f_star) = {
        let (x, v) = f.global_minimizer();
        (x.to_vec(), v)
    };
    let n = class.dim;
    let (lo, hi) = (class.params.domain_lo, class.params.domain_hi);
    let name = format!("{}d-{}-s{}-{}", n, class.difficulty, class.seed, index);
    Ok(Problem::new(name, vec![lo; n], vec![hi; n], Arc::new(f)).with_optimum(x_star, f_star))
}

/// The raw objective behind [`generate`], for tests that need basin geometry.
pub fn basin_function(class: &ProblemClass, index: usize) -> Result<BasinFunction, GenerateError> {
    if index == 0 || index > class.count {
        return Err(GenerateError::IndexOutOfRange { index, count: class.count });
    }
    check_params(class)?;
    let p = &class.params;
    let n = class.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(problem_seed(class, index));
    let (lo, hi) = (p.domain_lo, p.domain_hi);
    let inside = |x: &[f64]| x.iter().all(|&v| lo < v && v < hi);
    let uniform = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.random_range(lo..hi)).collect() };

    let vertex = uniform(&mut rng);

    let mut global = None;
    for _ in 0..p.max_retries {
        let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        let cand: Vec<f64> = vertex.iter().zip(&dir).map(|(t, d)| t + p.global_distance * d / norm).collect();
        if inside(&cand) {
            global = Some(cand);
            break;
        }
    }
    let global = global.ok_or(GenerateError::Infeasible { what: "the global minimizer", retries: p.max_retries })?;

    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(p.num_local_minima);
    for _ in 0..p.num_local_minima {
        let mut placed = false;
        for _ in 0..p.max_retries {
            let cand = uniform(&mut rng);
            let clear_global = dist(&cand, &global) > p.global_radius + 2.0 * p.min_local_radius;
            let clear_vertex = dist(&cand, &vertex) > 2.0 * p.min_local_radius;
            let clear_locals = centers.iter().all(|c| dist(&cand, c) > 4.0 * p.min_local_radius);
            if clear_global && clear_vertex && clear_locals {
                centers.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(GenerateError::Infeasible { what: "a local minimizer", retries: p.max_retries });
        }
    }

    let mut basins = vec![Basin { center: global, radius: p.global_radius, value: p.global_value }];
    for (i, c) in centers.iter().enumerate() {
        let to_vertex = dist(c, &vertex);
        let to_global = dist(c, &basins[0].center) - p.global_radius;
        let to_locals = centers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, o)| 0.5 * dist(c, o))
            .fold(f64::INFINITY, f64::min);
        let radius = 0.99 * to_vertex.min(to_global).min(to_locals);
        // paraboloid minimum over the basin's boundary sphere
        let rim = (to_vertex - radius).powi(2) + p.paraboloid_min;
        let floor = p.global_value + p.value_gap;
        let u: f64 = rng.random();
        let value = if rim - floor > 1e-9 {
            let spread = if i == 0 { 0.1 } else { 0.95 };
            floor + u * spread * (rim - floor)
        } else {
            p.global_value + (0.5 + 0.4 * u) * (rim - p.global_value)
        };
        basins.push(Basin { center: c.clone(), radius, value });
    }

    Ok(BasinFunction { vertex, vertex_value: p.paraboloid_min, basins })
}
