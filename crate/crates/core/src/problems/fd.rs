use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvalError, Problem};

const FD_SEED: u64 = 0x6664_5f63_6865_636b;

/// Worst relative disagreement between the analytic gradient and central
/// differences over `samples` seeded interior points.
///
/// The step along axis `j` is `step * (b_j - a_j)`. The error at a point is
/// `max_j |g_j - fd_j| / max(1, max_j |g_j|)`, so a constant function scores 0.
pub fn fd_check(problem: &Problem, samples: usize, step: f64) -> Result<f64, EvalError> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(FD_SEED);
    let n = problem.dim();
    let margin = (2.0 * step).min(0.25);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x: Vec<f64> = (0..n)
            .map(|j| {
                let (lo, hi) = (problem.lower()[j], problem.upper()[j]);
                lo + rng.random_range(margin..1.0 - margin) * (hi - lo)
            })
            .collect();
        let (_, grad) = problem.value_and_gradient(&x)?;
        let scale = grad.iter().fold(1.0_f64, |m, g| m.max(g.abs()));
        let mut err = 0.0_f64;
        for j in 0..n {
            let h = step * (problem.upper()[j] - problem.lower()[j]);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let fd = (problem.value(&xp)? - problem.value(&xm)?) / (xp[j] - xm[j]);
            err = err.max((grad[j] - fd).abs());
        }
        worst = worst.max(err / scale);
    }
    Ok(worst)
}
