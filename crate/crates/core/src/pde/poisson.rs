//! Steady 2D Poisson solves on the unit square with collocated RBF-FD.

use crate::error::{Error, Result};
use crate::fd::{assemble_global_operator, FdConfig, FdMode, StencilMap, StencilRule};
use crate::pde::exact::{l1_error, poisson_exact, poisson_forcing};
use crate::pde::sparse::SparseLu;
use crate::pde::SolveStatus;
use crate::points::PointSet;

/// `Δu = f` in `[0,1]²`, `u = g` on the boundary, with a known solution.
#[derive(Clone, Copy, Debug)]
pub struct PoissonProblem2D {
    pub exact: fn(f64, f64) -> f64,
    pub forcing: fn(f64, f64) -> f64,
}

impl Default for PoissonProblem2D {
    /// `u = sin(2πxy)`.
    fn default() -> Self {
        PoissonProblem2D {
            exact: poisson_exact,
            forcing: poisson_forcing,
        }
    }
}

impl PoissonProblem2D {
    /// Compares `forcing` with a sixth-order difference Laplacian of
    /// `exact` on a few interior points.
    pub fn check_forcing(&self) -> Result<()> {
        const W: [f64; 7] = [1.0 / 90.0, -3.0 / 20.0, 1.5, -49.0 / 18.0, 1.5, -3.0 / 20.0, 1.0 / 90.0];
        let h = 2e-3;
        for i in 1..5 {
            for j in 1..5 {
                let (x, y) = (i as f64 / 5.0 - 0.03, j as f64 / 5.0 + 0.01);
                let mut lap = 0.0;
                for (k, w) in W.iter().enumerate() {
                    let s = (k as f64 - 3.0) * h;
                    lap += w * ((self.exact)(x + s, y) + (self.exact)(x, y + s));
                }
                lap /= h * h;
                let f = (self.forcing)(x, y);
                if (lap - f).abs() > 1e-8 * (1.0 + f.abs()) {
                    return Err(Error::InvalidArgument(format!(
                        "forcing is not the Laplacian of the solution at ({x}, {y})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub u: Vec<f64>,
    pub l1_error: f64,
    pub status: SolveStatus,
    pub stencils: StencilMap,
}

fn on_boundary(i: usize, nx: usize, ny: usize) -> bool {
    let (ix, iy) = (i % nx, i / nx);
    ix == 0 || iy == 0 || ix == nx - 1 || iy == ny - 1
}

/// Solves on the `n × n` grid: interior rows are the RBF-FD Laplacian,
/// boundary rows are identity rows carrying the boundary data. The result is
/// flagged [`SolveStatus::Blowup`] when the error is non-finite or exceeds
/// ten times `max |u_exact|`.
pub fn solve_poisson_2d(problem: &PoissonProblem2D, n: usize, cfg: &FdConfig) -> Result<PoissonSolution> {
    if cfg.mode != FdMode::Collocated {
        return Err(Error::InvalidArgument("Poisson solves use collocated operators".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("grid must be at least 3×3".into()));
    }
    problem.check_forcing()?;
    let grid = PointSet::grid_2d(n, n);
    let mut cfg = cfg.clone();
    if cfg.rule == StencilRule::Nearest && cfg.stencil_size == 9 {
        cfg = cfg.grid_blocks(n, n);
    }
    let (op, map) = assemble_global_operator(&grid, &grid, &cfg)?;
    let exact: Vec<f64> = grid.coords().iter().map(|p| (problem.exact)(p[0], p[1])).collect();
    let mut triplets = Vec::with_capacity(op.nnz());
    let mut rhs = vec![0.0; grid.len()];
    for (i, p) in grid.coords().iter().enumerate() {
        if on_boundary(i, n, n) {
            triplets.push((i, i, 1.0));
            rhs[i] = exact[i];
        } else {
            let (cols, vals) = op.row(i);
            triplets.extend(cols.iter().zip(vals).map(|(&j, &v)| (i, j, v)));
            rhs[i] = (problem.forcing)(p[0], p[1]);
        }
    }
    let lu = SparseLu::factor(grid.len(), &triplets).ok_or(Error::SingularGlobalSystem)?;
    let u = lu.solve(&rhs);
    let err = l1_error(&exact, &u)?;
    let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let status = if err.is_finite() && err <= 10.0 * scale.max(f64::MIN_POSITIVE) {
        SolveStatus::Ok
    } else {
        SolveStatus::Blowup
    };
    Ok(PoissonSolution {
        u,
        l1_error: err,
        status,
        stencils: map,
    })
}
