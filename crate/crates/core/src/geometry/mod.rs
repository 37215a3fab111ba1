//! Exact partitions of a search box into hyperintervals by one-point trisection.

use thiserror::Error;

use crate::problems::EvalError;

mod grid;
mod partition;

pub use grid::{GridFraction, GridVertex, MAX_DEPTH};
pub use partition::{Hyperinterval, Partition, Trisection, VertexDb, VertexRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("grid depth {depth} exceeds the supported maximum")]
    DepthExceeded { depth: u8 },
    #[error("grid fraction outside [0, 1]")]
    OutsideUnitInterval,
    #[error("cannot parse grid coordinate {0:?}")]
    Parse(String),
    #[error("no box with id {0}")]
    UnknownBox(usize),
    #[error("vertex has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// Failure of a subdivision: either the grid ran out of depth or the
/// objective could not be evaluated at the new vertex.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrisectError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// The search box and the map from grid coordinates to real space.
///
/// Grid coordinate `c` on axis `j` sits at `lower[j] + c * (upper[j] - lower[j])`,
/// or at `upper[j] - c * (...)` when the domain is reflected. Reflection is how
/// a run that starts from the far corner is expressed with the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    reflect: bool,
}

impl Domain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, reflect: bool) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(lo, hi)| lo < hi), "empty domain side");
        Domain { lower, upper, reflect }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn reflected(&self) -> bool {
        self.reflect
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn coordinate(&self, j: usize, c: GridFraction) -> f64 {
        let w = self.width(j);
        if self.reflect {
            self.upper[j] - c.to_f64() * w
        } else {
            self.lower[j] + c.to_f64() * w
        }
    }

    pub fn to_real(&self, v: &GridVertex) -> Vec<f64> {
        v.coords().iter().enumerate().map(|(j, &c)| self.coordinate(j, c)).collect()
    }

    /// Whether real coordinate `b` exceeds real coordinate `a`, decided on the grid.
    pub fn increasing(&self, a: GridFraction, b: GridFraction) -> bool {
        (b > a) != self.reflect
    }

    /// Real length of the side between two grid coordinates on axis `j`.
    pub fn side(&self, j: usize, a: GridFraction, b: GridFraction) -> f64 {
        a.abs_diff(&b).to_f64() * self.width(j)
    }
}
