//! Sparse direct solves through faer's LU.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;

/// A factored square sparse matrix.
pub struct SparseLu {
    n: usize,
    lu: Lu<usize, f64>,
}

impl SparseLu {
    /// Factors the `n × n` matrix given by `(row, col, value)` triplets
    /// (duplicates summed). `None` when the pattern is structurally singular.
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Option<Self> {
        let t: Vec<Triplet<usize, usize, f64>> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t).ok()?;
        let lu = mat.sp_lu().ok()?;
        Some(SparseLu { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A x = b`. Numerically singular factors show up as
    /// non-finite entries, which callers check.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "right-hand side length");
        let rhs = Col::from_fn(self.n, |i| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal() {
        let n = 50;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.5));
            }
        }
        let lu = SparseLu::factor(n, &t).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let mut b = vec![0.0; n];
        for &(r, c, v) in &t {
            b[r] += v * x_true[c];
        }
        let x = lu.solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-13);
        }
    }

    #[test]
    fn empty_column_is_rejected_or_nonfinite() {
        let t = vec![(0, 0, 1.0), (1, 0, 1.0)];
        match SparseLu::factor(2, &t) {
            None => {}
            Some(lu) => assert!(lu.solve(&[1.0, 1.0]).iter().any(|v| !v.is_finite())),
        }
    }
}
