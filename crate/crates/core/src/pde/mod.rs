//! Heat and Poisson model problems, their reference solutions and a
//! finite-difference baseline.

pub mod exact;
pub mod heat;
pub mod poisson;
pub mod sparse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::points::{linspace, refine_midpoints};

pub use exact::{exact_heat, l1_error, InitialCondition};
pub use heat::{solve_heat_bdf2, HeatProblem, HeatSolution, SpatialScheme};
pub use poisson::{solve_poisson_2d, PoissonProblem2D, PoissonSolution};

/// Outcome class of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Ok,
    Blowup,
    Singular,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Ok => "ok",
            SolveStatus::Blowup => "blowup",
            SolveStatus::Singular => "singular",
        }
    }
}

/// Node layout on `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Layout {
    Equidistant,
    /// Interior nodes of the uniform grid moved by `U(−0.3h, 0.3h)`.
    Jittered { seed: u64 },
}

/// Relative jitter of interior nodes in [`Layout::Jittered`].
pub const JITTER: f64 = 0.3;

/// `n` nodes on `[0, 1]` including both ends.
pub fn base_nodes(layout: Layout, n: usize) -> Vec<f64> {
    let mut x = linspace(0.0, 1.0, n);
    if let Layout::Jittered { seed } = layout {
        let h = 1.0 / (n - 1) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in x.iter_mut().take(n - 1).skip(1) {
            *v += rng.gen_range(-JITTER * h..JITTER * h);
        }
    }
    x
}

/// `rungs` node sets: the base set followed by repeated midpoint refinement
/// (`N → 2N − 1`).
pub fn refinement_ladder(layout: Layout, base: usize, rungs: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(rungs);
    let mut x = base_nodes(layout, base);
    for _ in 0..rungs {
        let next = refine_midpoints(&x);
        out.push(std::mem::replace(&mut x, next));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_sizes() {
        let l = refinement_ladder(Layout::Equidistant, 10, 5);
        let sizes: Vec<usize> = l.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![10, 19, 37, 73, 145]);
    }

    #[test]
    fn jitter_is_bounded_and_seeded() {
        let a = base_nodes(Layout::Jittered { seed: 3 }, 10);
        let b = base_nodes(Layout::Jittered { seed: 3 }, 10);
        assert_eq!(a, b);
        assert_eq!((a[0], a[9]), (0.0, 1.0));
        let u = linspace(0.0, 1.0, 10);
        for (p, q) in a.iter().zip(&u) {
            assert!((p - q).abs() <= JITTER / 9.0);
        }
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_ne!(a, base_nodes(Layout::Jittered { seed: 4 }, 10));
    }
}
