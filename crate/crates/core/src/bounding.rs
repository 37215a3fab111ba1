//! Gradient-based lower bounds over a box.
//!
//! With `K` a Lipschitz constant of the gradient, the function
//! `Q(x) = f(a) + <g, x - a> - K/2 ||x - a||^2` underestimates `f` on the box.
//! Bounding its linear part from below at the best vertex `z` and its quadratic
//! part by the full diagonal gives `R = F - K d` with `d = ||b - a||^2 / 2`.

use thiserror::Error;

use crate::geometry::{Domain, GridVertex, VertexRecord};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundingError {
    #[error("point {x:?} lies outside the box")]
    OutsideBox { x: Vec<f64> },
}

/// Whether the linearization is minimized at `b(j)` rather than `a(j)`.
/// A zero partial keeps `a(j)` when the side runs upward.
#[inline]
fn takes_b(increasing: bool, g: f64) -> bool {
    !((increasing && g >= 0.0) || (!increasing && g < 0.0))
}

/// Vertex of `[a, b]` minimizing `<grad, x - a>`, in real coordinates.
pub fn linearization_vertex(a: &[f64], b: &[f64], grad: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .zip(grad)
        .map(|((&aj, &bj), &g)| if takes_b(bj > aj, g) { bj } else { aj })
        .collect()
}

/// `F = f(a) + <grad, z - a>`: the minimum of the linearization over the box.
pub fn linearization_min(a: &[f64], b: &[f64], f: f64, grad: &[f64]) -> f64 {
    let z = linearization_vertex(a, b, grad);
    f + grad.iter().zip(z.iter().zip(a)).map(|(g, (zj, aj))| g * (zj - aj)).sum::<f64>()
}

/// `R = F - k d`.
#[inline]
pub fn lower_bound(f_lin: f64, d: f64, k: f64) -> f64 {
    f_lin - k * d
}

/// `Q(x) = f(a) + <grad, x - a> - k/2 ||x - a||^2` for `x` in the box.
pub fn minorant(a: &[f64], b: &[f64], f: f64, grad: &[f64], k: f64, x: &[f64]) -> Result<f64, BoundingError> {
    let inside = x
        .iter()
        .zip(a.iter().zip(b))
        .all(|(&xj, (&aj, &bj))| aj.min(bj) <= xj && xj <= aj.max(bj));
    if x.len() != a.len() || !inside {
        return Err(BoundingError::OutsideBox { x: x.to_vec() });
    }
    let mut lin = 0.0;
    let mut sq = 0.0;
    for j in 0..a.len() {
        let h = x[j] - a[j];
        lin += grad[j] * h;
        sq += h * h;
    }
    Ok(f + lin - 0.5 * k * sq)
}

/// The `(d, F)` dot of a box together with the vertex `z` attaining `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    pub z: GridVertex,
    pub f_lin: f64,
    pub d: f64,
}

impl Characteristic {
    /// Characteristic of the grid box `[a, b]` whose trial vertex `a` carries `rec`.
    pub fn new(a: &GridVertex, b: &GridVertex, domain: &Domain, rec: &VertexRecord) -> Self {
        let mut z = Vec::with_capacity(a.dim());
        let mut f_lin = rec.f;
        let mut diag_sq = 0.0;
        for j in 0..a.dim() {
            let (aj, bj) = (a.0[j], b.0[j]);
            let up = domain.increasing(aj, bj);
            let side = domain.side(j, aj, bj);
            diag_sq += side * side;
            if takes_b(up, rec.grad[j]) {
                z.push(bj);
                f_lin += rec.grad[j] * if up { side } else { -side };
            } else {
                z.push(aj);
            }
        }
        Characteristic { z: GridVertex(z), f_lin, d: 0.5 * diag_sq }
    }

    pub fn lower_bound(&self, k: f64) -> f64 {
        lower_bound(self.f_lin, self.d, k)
    }
}
