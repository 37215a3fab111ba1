//! Exact base-3 grid coordinates.
//!
//! Trisection only ever produces coordinates of the form `k / 3^m` along each
//! axis (relative to the search domain), so every vertex of every box can be
//! stored exactly and compared without tolerance.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::GeometryError;

/// Deepest representable grid level per axis. `3^-80` is ~6.7e-39, far below
/// the resolution of `f64` on any bounded domain.
pub const MAX_DEPTH: u8 = 80;

const fn pow3_table() -> [u128; MAX_DEPTH as usize + 1] {
    let mut t = [1u128; MAX_DEPTH as usize + 1];
    let mut k = 1;
    while k <= MAX_DEPTH as usize {
        t[k] = t[k - 1] * 3;
        k += 1;
    }
    t
}

static POW3: [u128; MAX_DEPTH as usize + 1] = pow3_table();

#[inline]
pub(crate) fn pow3(k: u8) -> u128 {
    POW3[k as usize]
}

/// `numerator / 3^depth` in `[0, 1]`, always stored normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GridFraction {
    numerator: u128,
    depth: u8,
}

impl GridFraction {
    pub const ZERO: GridFraction = GridFraction { numerator: 0, depth: 0 };
    pub const ONE: GridFraction = GridFraction { numerator: 1, depth: 0 };

    pub fn new(numerator: u128, depth: u8) -> Result<Self, GeometryError> {
        if depth > MAX_DEPTH {
            return Err(GeometryError::DepthExceeded { depth });
        }
        if numerator > pow3(depth) {
            return Err(GeometryError::OutsideUnitInterval);
        }
        Ok(Self::normalized(numerator, depth))
    }

    fn normalized(mut numerator: u128, mut depth: u8) -> Self {
        if numerator == 0 {
            return Self::ZERO;
        }
        while depth > 0 && numerator.is_multiple_of(3) {
            numerator /= 3;
            depth -= 1;
        }
        GridFraction { numerator, depth }
    }

    pub fn numerator(&self) -> u128 {
        self.numerator
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    /// Numerator rescaled to denominator `3^depth` (`depth >= self.depth`).
    #[inline]
    fn scaled(&self, depth: u8) -> u128 {
        self.numerator * pow3(depth - self.depth)
    }

    /// `(wa * a + wb * b) / 3` with `wa + wb = 3`; this is the only way new
    /// coordinates are ever created.
    pub fn third_combination(a: Self, wa: u128, b: Self, wb: u128) -> Result<Self, GeometryError> {
        debug_assert_eq!(wa + wb, 3);
        let depth = a.depth.max(b.depth);
        if depth >= MAX_DEPTH {
            return Err(GeometryError::DepthExceeded { depth: depth + 1 });
        }
        let num = wa * a.scaled(depth) + wb * b.scaled(depth);
        Ok(Self::normalized(num, depth + 1))
    }

    /// `|self - other|`, exact.
    pub fn abs_diff(&self, other: &Self) -> Self {
        let depth = self.depth.max(other.depth);
        let (x, y) = (self.scaled(depth), other.scaled(depth));
        Self::normalized(x.abs_diff(y), depth)
    }

    pub fn to_f64(&self) -> f64 {
        if self.depth == 0 {
            return self.numerator as f64;
        }
        self.numerator as f64 / pow3(self.depth) as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numerator), BigInt::from(pow3(self.depth)))
    }

    /// `1 - self`.
    pub fn complement(&self) -> Self {
        Self::normalized(pow3(self.depth) - self.numerator, self.depth)
    }
}

impl Ord for GridFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let depth = self.depth.max(other.depth);
        self.scaled(depth).cmp(&other.scaled(depth))
    }
}

impl PartialOrd for GridFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GridFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.depth == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, pow3(self.depth))
        }
    }
}

impl FromStr for GridFraction {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GeometryError::Parse(s.to_string());
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: u128 = num.parse().map_err(|_| bad())?;
        let den: u128 = den.parse().map_err(|_| bad())?;
        let depth = (0..=MAX_DEPTH).find(|&k| pow3(k) == den).ok_or_else(bad)?;
        Self::new(num, depth)
    }
}

/// Exact coordinates of a point of the domain, one fraction per axis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridVertex(pub Vec<GridFraction>);

impl GridVertex {
    pub fn origin(dim: usize) -> Self {
        GridVertex(vec![GridFraction::ZERO; dim])
    }

    pub fn far_corner(dim: usize) -> Self {
        GridVertex(vec![GridFraction::ONE; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[GridFraction] {
        &self.0
    }

    pub fn max_depth(&self) -> u8 {
        self.0.iter().map(GridFraction::depth).max().unwrap_or(0)
    }
}

impl fmt::Display for GridVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, c) in self.0.iter().enumerate() {
            if j > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for GridVertex {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(GridVertex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(n: u128, d: u8) -> GridFraction {
        GridFraction::new(n, d).unwrap()
    }

    #[test]
    fn normalization_is_unique() {
        assert_eq!(frac(3, 1), GridFraction::ONE);
        assert_eq!(frac(6, 2), frac(2, 1));
        assert_eq!(frac(0, 5), GridFraction::ZERO);
        assert_eq!(frac(9, 3).depth(), 1);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(GridFraction::new(4, 1).is_err());
        assert!(GridFraction::new(1, MAX_DEPTH + 1).is_err());
    }

    #[test]
    fn third_combination_matches_trisection_points() {
        // u = a + 2/3 (b - a) = (a + 2b) / 3 on [0, 1]
        let u = GridFraction::third_combination(GridFraction::ZERO, 1, GridFraction::ONE, 2).unwrap();
        assert_eq!(u, frac(2, 1));
        let v = GridFraction::third_combination(GridFraction::ZERO, 2, GridFraction::ONE, 1).unwrap();
        assert_eq!(v, frac(1, 1));
        // reversed orientation [1, 0]
        let u = GridFraction::third_combination(GridFraction::ONE, 1, GridFraction::ZERO, 2).unwrap();
        assert_eq!(u, frac(1, 1));
    }

    #[test]
    fn depth_limit_is_reported() {
        let deep = frac(1, MAX_DEPTH);
        let err = GridFraction::third_combination(deep, 1, GridFraction::ZERO, 2);
        assert!(matches!(err, Err(GeometryError::DepthExceeded { .. })));
    }

    #[test]
    fn ordering_and_difference() {
        assert!(frac(1, 1) < frac(4, 2));
        assert_eq!(frac(2, 1).abs_diff(&frac(1, 2)), frac(5, 2));
        assert_eq!(GridFraction::ONE.abs_diff(&GridFraction::ZERO), GridFraction::ONE);
        assert_eq!(frac(1, 1).complement(), frac(2, 1));
    }

    #[test]
    fn text_round_trip() {
        let v = GridVertex(vec![frac(2, 1), GridFraction::ZERO, frac(5, 3)]);
        let s = v.to_string();
        assert_eq!(s, "2/3,0,5/27");
        assert_eq!(s.parse::<GridVertex>().unwrap(), v);
        assert!("1/2".parse::<GridFraction>().is_err());
    }

    #[test]
    fn f64_image_is_exact_for_shallow_levels() {
        assert_eq!(frac(1, 1).to_f64(), 1.0 / 3.0);
        assert_eq!(frac(2, 2).to_f64(), 2.0 / 9.0);
    }
}
