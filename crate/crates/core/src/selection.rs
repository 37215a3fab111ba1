//! Choice of boxes to subdivide from the `(d, F)` diagram.
//!
//! A box is nondominated when some estimate `K > 0` makes its bound
//! `F - K d` the smallest of all. Those boxes are exactly the dots on the
//! lower-right convex hull of the diagram, from the lowest dot rightward.

use crate::geometry::Partition;

/// One box on the diagram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dot {
    pub id: usize,
    pub d: f64,
    pub f: f64,
    pub s: u32,
}

/// Nondominated dots by increasing `d`, each with the range `[k_lo, k_hi]`
/// of estimates for which it attains the smallest bound.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HullResult {
    pub selected: Vec<Dot>,
    pub slopes: Vec<(f64, f64)>,
}

impl HullResult {
    pub fn ids(&self) -> Vec<usize> {
        self.selected.iter().map(|d| d.id).collect()
    }
}

/// Minimal-`F` dots (all ties) of every nonempty group in `s_lo..=s_hi`.
pub fn group_representatives(partition: &Partition, s_lo: u32, s_hi: u32) -> Vec<Dot> {
    let mut out = Vec::new();
    for (s, members) in partition.groups() {
        if s < s_lo || s > s_hi {
            continue;
        }
        let mut best = None;
        for (f, id) in members {
            match best {
                Some(b) if f > b => break,
                _ => best = Some(f),
            }
            let d = partition.boxes()[id].ch.d;
            out.push(Dot { id, d, f, s });
        }
    }
    out
}

/// Lower-right convex hull of the diagram, collinear and coincident dots included.
pub fn nondominated(dots: &[Dot]) -> HullResult {
    if dots.is_empty() {
        return HullResult::default();
    }
    let mut sorted = dots.to_vec();
    sorted.sort_by(|x, y| x.d.total_cmp(&y.d).then(x.f.total_cmp(&y.f)).then(x.id.cmp(&y.id)));

    let f_min = sorted.iter().map(|p| p.f).fold(f64::INFINITY, f64::min);
    let start_d = sorted.iter().filter(|p| p.f == f_min).map(|p| p.d).fold(f64::NEG_INFINITY, f64::max);

    // one point per distinct d at or right of the start, at that d's minimal F
    let mut columns: Vec<(f64, f64)> = Vec::new();
    for p in sorted.iter().filter(|p| p.d >= start_d) {
        if columns.last().is_none_or(|&(d, _)| d != p.d) {
            columns.push((p.d, p.f));
        }
    }

    let mut chain: Vec<(f64, f64)> = Vec::new();
    for &c in &columns {
        while chain.len() >= 2 {
            let (o, a) = (chain[chain.len() - 2], chain[chain.len() - 1]);
            let cross = (a.0 - o.0) * (c.1 - o.1) - (a.1 - o.1) * (c.0 - o.0);
            if cross < 0.0 {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(c);
    }

    let slope = |p: (f64, f64), q: (f64, f64)| (q.1 - p.1) / (q.0 - p.0);
    let mut result = HullResult::default();
    for (k, &(d, f)) in chain.iter().enumerate() {
        let lo = if k == 0 { 0.0 } else { slope(chain[k - 1], (d, f)) };
        let hi = if k + 1 == chain.len() { f64::INFINITY } else { slope((d, f), chain[k + 1]) };
        for p in sorted.iter().filter(|p| p.d == d && p.f == f) {
            result.selected.push(*p);
            result.slopes.push((lo, hi));
        }
    }
    result
}

/// Hull dots that can improve on `f_min` by at least `xi` for some estimate
/// in their range; the largest estimate of the range is the most favourable.
pub fn improvement_filter(hull: &HullResult, f_min: f64, xi: f64) -> Vec<Dot> {
    hull.selected
        .iter()
        .zip(&hull.slopes)
        .filter(|(p, &(_, hi))| hi == f64::INFINITY || p.f - hi * p.d <= f_min - xi)
        .map(|(p, _)| *p)
        .collect()
}

/// Required improvement `epsilon * |f_min|`.
pub fn xi_value(f_min: f64, epsilon: f64) -> f64 {
    epsilon * f_min.abs()
}
