//! Class-level comparison criteria over per-problem trial counts.
//!
//! Unsolved problems follow the lower-estimate convention: they count as
//! `P_max` trials, and every figure touched by them is printed with a `>`.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest trial count over the solved problems of a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCase {
    pub value: usize,
    /// 1-based index of the problem attaining `value`; first on ties.
    pub argmax: Option<usize>,
    pub unsolved: usize,
    pub p_max: usize,
}

impl WorstCase {
    /// Value used in ratios: `P_max` once anything is unsolved.
    pub fn effective(&self) -> usize {
        if self.unsolved > 0 {
            self.p_max
        } else {
            self.value
        }
    }
}

impl fmt::Display for WorstCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.unsolved > 0 {
            write!(f, "> {} ({})", self.p_max, self.unsolved)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// A real-valued criterion that may only be a lower estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub lower_bound: bool,
}

impl fmt::Display for Estimate {
    /// `{}` prints the shortest round-trip form, `{:.2}` a fixed precision.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lower_bound {
            f.write_str("> ")?;
        }
        match f.precision() {
            Some(p) => write!(f, "{:.*}", p, self.value),
            None => write!(f, "{:?}", self.value),
        }
    }
}

fn check_lengths(p: &[usize], solved: &[bool]) {
    assert_eq!(p.len(), solved.len(), "trial counts and solved flags differ in length");
}

pub fn criterion_c1(p: &[usize], solved: &[bool], p_max: usize) -> WorstCase {
    check_lengths(p, solved);
    let mut best: Option<(usize, usize)> = None;
    for (s, (&count, &ok)) in p.iter().zip(solved).enumerate() {
        if ok && best.is_none_or(|(v, _)| count > v) {
            best = Some((count, s + 1));
        }
    }
    WorstCase {
        value: best.map_or(0, |b| b.0),
        argmax: best.map(|b| b.1),
        unsolved: solved.iter().filter(|&&ok| !ok).count(),
        p_max,
    }
}

/// Box count of the problem selected by [`criterion_c1`].
pub fn criterion_c2(m: &[usize], worst: &WorstCase) -> Option<usize> {
    worst.argmax.map(|s| m[s - 1])
}

pub fn criterion_c3(p: &[usize], solved: &[bool], p_max: usize) -> Estimate {
    check_lengths(p, solved);
    if p.is_empty() {
        return Estimate { value: 0.0, lower_bound: false };
    }
    let total: f64 = p.iter().zip(solved).map(|(&v, &ok)| if ok { v } else { p_max } as f64).sum();
    Estimate { value: total / p.len() as f64, lower_bound: solved.iter().any(|&ok| !ok) }
}

/// `(p, q)`: problems where the other method needed fewer trials, and
/// problems where the new one did. Ties count in neither.
pub fn criterion_c4(p_new: &[usize], p_other: &[usize]) -> (usize, usize) {
    assert_eq!(p_new.len(), p_other.len(), "trial lists differ in length");
    let p = p_new.iter().zip(p_other).filter(|(n, o)| o < n).count();
    let q = p_new.iter().zip(p_other).filter(|(n, o)| n < o).count();
    (p, q)
}

/// Smallest `T` with at least `fraction` of all problems solved within `T`
/// trials, or `None` when too few are solved.
pub fn percentile(p: &[usize], solved: &[bool], fraction: f64) -> Option<usize> {
    check_lengths(p, solved);
    let need = (fraction * p.len() as f64).ceil() as usize;
    let mut counts: Vec<usize> = p.iter().zip(solved).filter(|(_, &ok)| ok).map(|(&v, _)| v).collect();
    counts.sort_unstable();
    match need {
        0 => Some(0),
        k => counts.get(k - 1).copied(),
    }
}

/// `competitor / new`, flagged when the competitor left problems unsolved.
pub fn improvement(competitor: f64, competitor_unsolved: bool, new: f64) -> Estimate {
    Estimate { value: competitor / new, lower_bound: competitor_unsolved }
}
