//! Method-of-lines heat solves: BDF2 in time with an implicit-Euler start,
//! boundary values injected after every step.

use crate::error::{Error, Result};
use crate::fd::{assemble_global_operator, FdConfig, FdMode, StencilMap};
use crate::pde::exact::{exact_heat_profile, l1_error, InitialCondition};
use crate::pde::sparse::SparseLu;
use crate::pde::SolveStatus;
use crate::points::PointSet;

/// `u_t = u_xx` on `[0, 1]`, `u = 0` on the boundary, `u(x, 0)` given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeatProblem {
    pub ic: InitialCondition,
    pub dt: f64,
    pub t_final: f64,
}

impl HeatProblem {
    pub fn new(ic: InitialCondition) -> Self {
        HeatProblem {
            ic,
            dt: 1e-3,
            t_final: 1.0,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    /// Number of steps; `dt` must divide `t_final`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0 && self.dt.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidArgument(format!("bad time step {}", self.dt)));
        }
        let k = (self.t_final / self.dt).round();
        if k < 1.0 || (k * self.dt - self.t_final).abs() > 1e-9 * self.t_final {
            return Err(Error::InvalidArgument(format!(
                "time step {} does not divide {}",
                self.dt, self.t_final
            )));
        }
        Ok(k as usize)
    }
}

/// Spatial discretization of `∂²/∂x²`.
#[derive(Clone, Debug)]
pub enum SpatialScheme {
    /// Classical three-point differences (non-uniform spacing allowed).
    Fdm,
    RbfFd(FdConfig),
}

#[derive(Clone, Debug)]
pub struct HeatSolution {
    /// State at the last accepted step.
    pub u: Vec<f64>,
    /// Spatial L1 error averaged over every time level `t_0, …, T`.
    pub l1_error: f64,
    /// Spatial L1 error at `T`.
    pub final_error: f64,
    pub status: SolveStatus,
    pub steps_taken: usize,
    pub stencils: Option<StencilMap>,
}

/// Interior rows of the three-point Laplacian on sorted nodes.
pub fn fdm_laplacian(xs: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(3 * xs.len());
    for i in 1..xs.len().saturating_sub(1) {
        let (hl, hr) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        let s = 2.0 / (hl + hr);
        t.push((i, i - 1, s / hl));
        t.push((i, i, -s * (1.0 / hl + 1.0 / hr)));
        t.push((i, i + 1, s / hr));
    }
    t
}

/// `α I − β L` as triplets.
fn shifted(n: usize, alpha: f64, beta: f64, l: &[(usize, usize, f64)]) -> Vec<(usize, usize, f64)> {
    let mut t: Vec<_> = (0..n).map(|i| (i, i, alpha)).collect();
    t.extend(l.iter().map(|&(i, j, v)| (i, j, -beta * v)));
    t
}

fn check_nodes(points: &PointSet) -> Result<Vec<f64>> {
    if points.dim() != 1 || points.len() < 3 {
        return Err(Error::InvalidArgument("heat solves need at least 3 nodes in 1D".into()));
    }
    let xs = points.xs();
    if xs[0].abs() > 1e-12 || (xs[xs.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("nodes must include both ends of [0, 1]".into()));
    }
    Ok(xs)
}

/// Solves the heat problem on `points` (which must contain 0 and 1).
/// Boundary rows of the spatial operator are dropped; the boundary values
/// are re-imposed after each step. Divergence (non-finite state, or
/// `max |u|` beyond ten times its initial value) stops the run with
/// [`SolveStatus::Blowup`].
pub fn solve_heat_bdf2(problem: &HeatProblem, points: &PointSet, scheme: &SpatialScheme) -> Result<HeatSolution> {
    let steps = problem.steps()?;
    let xs = check_nodes(points)?;
    let n = xs.len();
    let (lap, stencils) = match scheme {
        SpatialScheme::Fdm => (fdm_laplacian(&xs), None),
        SpatialScheme::RbfFd(cfg) => {
            if cfg.mode != FdMode::Collocated {
                return Err(Error::InvalidArgument("heat solves use collocated operators".into()));
            }
            let (mut op, map) = assemble_global_operator(points, points, cfg)?;
            op.zero_rows(&[0, n - 1]);
            (op.triplets(), Some(map))
        }
    };
    let dt = problem.dt;
    let euler = SparseLu::factor(n, &shifted(n, 1.0, dt, &lap)).ok_or(Error::SingularTimeStepSystem)?;
    let bdf2 = SparseLu::factor(n, &shifted(n, 3.0, 2.0 * dt, &lap)).ok_or(Error::SingularTimeStepSystem)?;

    let ic = problem.ic;
    let mut prev = xs.iter().map(|&x| ic.eval(x)).collect::<Vec<_>>();
    prev[0] = 0.0;
    prev[n - 1] = 0.0;
    let limit = 10.0 * prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut err_sum = l1_error(&exact_heat_profile(ic, &xs, 0.0), &prev)?;
    let mut cur = prev.clone();
    let mut last_err = err_sum;
    for k in 1..=steps {
        let mut next = if k == 1 {
            euler.solve(&prev)
        } else {
            let rhs: Vec<f64> = cur.iter().zip(&prev).map(|(c, p)| 4.0 * c - p).collect();
            bdf2.solve(&rhs)
        };
        next[0] = 0.0;
        next[n - 1] = 0.0;
        let diverged = next.iter().any(|v| !v.is_finite() || v.abs() > limit);
        if diverged {
            return Ok(HeatSolution {
                u: next,
                l1_error: f64::NAN,
                final_error: f64::NAN,
                status: SolveStatus::Blowup,
                steps_taken: k,
                stencils,
            });
        }
        last_err = l1_error(&exact_heat_profile(ic, &xs, k as f64 * dt), &next)?;
        err_sum += last_err;
        if k == 1 {
            cur = next;
        } else {
            prev = std::mem::replace(&mut cur, next);
        }
    }
    Ok(HeatSolution {
        u: cur,
        l1_error: err_sum / (steps + 1) as f64,
        final_error: last_err,
        status: SolveStatus::Ok,
        steps_taken: steps,
        stencils,
    })
}
