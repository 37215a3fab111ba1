//! Closed-form problems with known minimizers and gradient Lipschitz constants.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

use super::{Objective, Problem};

/// `f(x) = (x - c)^T A (x - c) + offset` with symmetric `A`.
#[derive(Clone, Debug)]
pub struct Quadratic {
    matrix: DMatrix<f64>,
    center: Vec<f64>,
    offset: f64,
}

impl Quadratic {
    /// Panics when `matrix` is not square, not symmetric or does not match `center`.
    pub fn new(matrix: DMatrix<f64>, center: Vec<f64>, offset: f64) -> Self {
        assert!(matrix.is_square() && matrix.nrows() == center.len());
        assert!(
            (&matrix - matrix.transpose()).amax() <= 1e-12 * matrix.amax().max(1.0),
            "quadratic form must be symmetric"
        );
        Quadratic { matrix, center, offset }
    }

    /// `||x - c||^2`.
    pub fn sphere(center: Vec<f64>) -> Self {
        let n = center.len();
        Self::new(DMatrix::identity(n, n), center, 0.0)
    }

    /// Random symmetric (possibly indefinite) form with eigenvalues in
    /// `[-scale, scale]` and a random center in `[lo, hi]^n`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64, lo: f64, hi: f64) -> Self {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sym = (&raw + raw.transpose()) * 0.5;
        let rho = spectral_radius(&sym).max(1e-12);
        let matrix = sym * (rng.random_range(0.1..1.0) * scale / rho);
        let center = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        Self::new(matrix, center, rng.random_range(-1.0..1.0))
    }

    /// Lipschitz constant of the gradient `2 A (x - c)`: twice the spectral radius.
    pub fn gradient_lipschitz(&self) -> f64 {
        2.0 * spectral_radius(&self.matrix)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    fn is_positive_semidefinite(&self) -> bool {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().all(|&l| l >= 0.0)
    }

    /// Wraps the form as a problem on `[lower, upper]`. The known optimum is
    /// attached when the form is positive semidefinite and its center is
    /// inside the domain.
    pub fn into_problem(self, name: &str, lower: Vec<f64>, upper: Vec<f64>) -> Problem {
        let k = self.gradient_lipschitz();
        let inside = self.center.iter().zip(lower.iter().zip(&upper)).all(|(c, (lo, hi))| lo <= c && c <= hi);
        let opt = (inside && self.is_positive_semidefinite()).then(|| (self.center.clone(), self.offset));
        let mut p = Problem::new(name, lower, upper, Arc::new(self)).with_gradient_lipschitz(k);
        if let Some((x, f)) = opt {
            p = p.with_optimum(x, f);
        }
        p
    }
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.amax()
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.center.len();
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.matrix[(i, j)] * y[j];
            }
            acc += y[i] * row;
        }
        acc + self.offset
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.center.len();
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        (0..n)
            .map(|i| 2.0 * (0..n).map(|j| self.matrix[(i, j)] * y[j]).sum::<f64>())
            .collect()
    }
}

/// `f(x) = sum_j x_j^2 + sin(5 pi x_j) / 10`, separable and multiextremal on `[0, 1]^n`.
#[derive(Clone, Copy, Debug)]
pub struct TrigSum {
    dim: usize,
}

impl TrigSum {
    pub const FREQ: f64 = 5.0 * PI;

    pub fn new(dim: usize) -> Self {
        TrigSum { dim }
    }

    pub fn axis_value(t: f64) -> f64 {
        t * t + (Self::FREQ * t).sin() / 10.0
    }

    pub fn axis_derivative(t: f64) -> f64 {
        2.0 * t + Self::FREQ / 10.0 * (Self::FREQ * t).cos()
    }

    /// Sup of `|h''|` over the line: `2 + (5 pi)^2 / 10`.
    pub fn gradient_lipschitz() -> f64 {
        2.0 + Self::FREQ * Self::FREQ / 10.0
    }

    /// Global minimizer of the one-axis term on `[0, 1]`: dense scan, then
    /// bisection on the derivative inside the winning cell.
    pub fn axis_minimizer() -> f64 {
        const CELLS: usize = 10_000;
        let h = 1.0 / CELLS as f64;
        let best = (0..=CELLS)
            .min_by(|&i, &j| Self::axis_value(i as f64 * h).total_cmp(&Self::axis_value(j as f64 * h)))
            .unwrap();
        let (mut lo, mut hi) = ((best.saturating_sub(1)) as f64 * h, ((best + 1).min(CELLS)) as f64 * h);
        if Self::axis_derivative(lo) >= 0.0 || Self::axis_derivative(hi) <= 0.0 {
            return best as f64 * h;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if Self::axis_derivative(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if Self::axis_value(lo) <= Self::axis_value(hi) { lo } else { hi }
    }

    pub fn into_problem(self, name: &str) -> Problem {
        let t = Self::axis_minimizer();
        let x_star = vec![t; self.dim];
        let f_star = self.value(&x_star);
        Problem::new(name, vec![0.0; self.dim], vec![1.0; self.dim], Arc::new(self))
            .with_optimum(x_star, f_star)
            .with_gradient_lipschitz(Self::gradient_lipschitz())
    }
}

impl Objective for TrigSum {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        x.iter().map(|&t| Self::axis_value(t)).sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&t| Self::axis_derivative(t)).collect()
    }
}

/// The fixed analytic problems, by name.
pub fn analytic_suite() -> Vec<Problem> {
    let rotated = {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 2.0, -0.3, 0.5, -0.3, 1.0]);
        Quadratic::new(m, vec![0.2, -0.4, 0.1], -1.0)
    };
    vec![
        Quadratic::sphere(vec![0.0]).into_problem("sphere1", vec![-1.0], vec![1.0]),
        Quadratic::sphere(vec![0.3, 0.7]).into_problem("sphere2", vec![0.0; 2], vec![1.0; 2]),
        rotated.into_problem("quad3", vec![-1.0; 3], vec![1.0; 3]),
        TrigSum::new(1).into_problem("trig1"),
        TrigSum::new(2).into_problem("trig2"),
        TrigSum::new(3).into_problem("trig3"),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_has_k_two_and_known_center() {
        let p = Quadratic::sphere(vec![0.3, 0.7]).into_problem("s", vec![0.0; 2], vec![1.0; 2]);
        assert_eq!(p.known_k, Some(2.0));
        let opt = p.known_opt.as_ref().unwrap();
        assert_eq!(opt.x, vec![0.3, 0.7]);
        assert_eq!(p.value(&opt.x).unwrap(), 0.0);
    }

    #[test]
    fn indefinite_quadratic_has_no_known_optimum() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let p = Quadratic::new(m, vec![0.0, 0.0], 0.0).into_problem("saddle", vec![-1.0; 2], vec![1.0; 2]);
        assert!(p.known_opt.is_none());
        assert_eq!(p.known_k, Some(2.0));
    }

    #[test]
    fn trig_axis_minimum_beats_brute_force() {
        let t = TrigSum::axis_minimizer();
        let best = TrigSum::axis_value(t);
        let n = 1_000_000;
        for i in 0..=n {
            let s = i as f64 / n as f64;
            assert!(TrigSum::axis_value(s) >= best - 1e-12, "t={s}");
        }
        assert!(TrigSum::axis_derivative(t).abs() < 1e-9);
    }

    #[test]
    fn suite_optima_are_consistent() {
        for p in analytic_suite() {
            let opt = p.known_opt.as_ref().expect("suite problems carry optima");
            assert!(p.contains(&opt.x), "{}", p.name);
            assert!((p.value(&opt.x).unwrap() - opt.f).abs() <= 1e-12, "{}", p.name);
            assert!(p.known_k.unwrap() > 0.0);
        }
    }

    #[test]
    fn rotated_quadratic_lipschitz_from_eigenvalues() {
        let p = analytic_suite().into_iter().find(|p| p.name == "quad3").unwrap();
        let k = p.known_k.unwrap();
        // gradient difference along the top eigenvector scales by exactly k
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 2.0, -0.3, 0.5, -0.3, 1.0]);
        let eig = SymmetricEigen::new(m);
        let top = eig.eigenvalues.iamax();
        let v: Vec<f64> = eig.eigenvectors.column(top).iter().map(|c| c * 0.1).collect();
        let g0 = p.value_and_gradient(&[0.0; 3]).unwrap().1;
        let g1 = p.value_and_gradient(&v).unwrap().1;
        let dg = g0.iter().zip(&g1).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!((dg / 0.1 - k).abs() < 1e-9);
    }
}
