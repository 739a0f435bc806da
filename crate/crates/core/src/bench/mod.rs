//! Benchmark ladders for interpolation, heat and Poisson problems.

pub mod cases;
pub mod report;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fd::{cluster_interpolate_1d, rbf_fd_interpolate, FdConfig};
use crate::kernel::KernelFamily;
use crate::pde::heat::{solve_heat_bdf2, HeatProblem, SpatialScheme};
use crate::pde::poisson::{solve_poisson_2d, PoissonProblem2D};
use crate::pde::{l1_error, refinement_ladder, SolveStatus};
use crate::points::{linspace, PointSet};
use crate::shape::ShapeStrategy;

pub use cases::{BenchCase, CaseKind, Func1d, Func2d};
pub use report::{gnuplot_stub, parse_csv, to_csv, BenchRow, Summary, CSV_HEADER};

/// Stencil size of 1D runs.
pub const STENCIL_1D: usize = 10;
/// Evaluation points per center in 1D interpolation.
pub const OVERSAMPLING: usize = 4;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub kernel: KernelFamily,
    pub strategy: ShapeStrategy,
    pub ladder: Vec<usize>,
    pub dt: f64,
    pub parallel: bool,
    /// Heat cases: also emit the three-point baseline rows.
    pub with_fdm: bool,
}

impl BenchConfig {
    pub fn new(case: &BenchCase, kernel: KernelFamily, strategy: ShapeStrategy) -> Self {
        BenchConfig {
            kernel,
            strategy,
            ladder: case.default_ladder(),
            dt: 1e-3,
            parallel: false,
            with_fdm: true,
        }
    }
}

/// Rows of one case plus the wall time of each rung.
#[derive(Clone, Debug)]
pub struct BenchReport {
    pub case: String,
    pub rows: Vec<BenchRow>,
    pub wall_seconds: Vec<f64>,
}

impl BenchReport {
    pub fn csv(&self) -> String {
        to_csv(&self.rows)
    }
}

struct Rung {
    m: usize,
    err: f64,
    status: SolveStatus,
    cond: Vec<f64>,
    eps: Vec<f64>,
}

impl Rung {
    fn failed(m: usize) -> Self {
        Rung {
            m,
            err: f64::NAN,
            status: SolveStatus::Singular,
            cond: Vec::new(),
            eps: Vec::new(),
        }
    }
}

/// Blow-up when the error is non-finite or exceeds ten times the data scale.
fn classify(err: f64, scale: f64) -> SolveStatus {
    if err.is_finite() && err <= 10.0 * scale.max(f64::MIN_POSITIVE) {
        SolveStatus::Ok
    } else {
        SolveStatus::Blowup
    }
}

/// Numerical failures become `singular` rows; anything else is an error.
fn numeric_or(m: usize, r: Result<Rung>) -> Result<Rung> {
    match r {
        Err(e) if e.is_numerical() => Ok(Rung::failed(m)),
        other => other,
    }
}

fn nodes_1d(case: &BenchCase, n: usize) -> Result<Vec<f64>> {
    let layout = match case.kind {
        CaseKind::Interp1d { layout, .. } | CaseKind::Heat { layout, .. } => layout,
        _ => unreachable!("1D cases only"),
    };
    let rungs = cases::midpoint_ladder(10, 20).iter().position(|&k| k == n).ok_or_else(|| {
        Error::InvalidArgument(format!("1D rung {n} is not a midpoint refinement of 10 nodes"))
    })?;
    Ok(refinement_ladder(layout, 10, rungs + 1).pop().expect("non-empty ladder"))
}

fn interp_1d(func: Func1d, xs: &[f64], cfg: &BenchConfig) -> Result<Rung> {
    let nodes = PointSet::new_1d(xs)?;
    let values: Vec<f64> = xs.iter().map(|&x| func.eval(x)).collect();
    let eval = linspace(0.0, 1.0, OVERSAMPLING * xs.len());
    let m = eval.len();
    numeric_or(m, (|| {
        let fit = cluster_interpolate_1d(&nodes, &values, &eval, STENCIL_1D, &cfg.strategy, cfg.kernel, true)?;
        let exact: Vec<f64> = eval.iter().map(|&x| func.eval(x)).collect();
        let err = l1_error(&exact, &fit.values)?;
        let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Rung {
            m,
            err,
            status: classify(err, scale),
            cond: fit.cond,
            eps: fit.eps,
        })
    })())
}

fn interp_2d(func: Func2d, side: usize, cfg: &BenchConfig) -> Result<Rung> {
    let grid = PointSet::grid_2d(side, side);
    let eval = PointSet::grid_2d(2 * side, 2 * side);
    let m = eval.len();
    let values: Vec<f64> = grid.coords().iter().map(|p| func.eval(p[0], p[1])).collect();
    let mut fd = FdConfig::new(9, cfg.strategy.clone(), cfg.kernel).grid_blocks(side, side);
    fd.parallel = cfg.parallel;
    numeric_or(m, (|| {
        let (approx, map) = rbf_fd_interpolate(&grid, &values, &eval, &fd)?;
        let exact: Vec<f64> = eval.coords().iter().map(|p| func.eval(p[0], p[1])).collect();
        let err = l1_error(&exact, &approx)?;
        let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Rung {
            m,
            err,
            status: classify(err, scale),
            cond: map.cond,
            eps: map.eps,
        })
    })())
}

fn heat(problem: &HeatProblem, xs: &[f64], scheme: &SpatialScheme) -> Result<Rung> {
    let nodes = PointSet::new_1d(xs)?;
    numeric_or(xs.len(), (|| {
        let s = solve_heat_bdf2(problem, &nodes, scheme)?;
        let (cond, eps) = s.stencils.map(|m| (m.cond, m.eps)).unwrap_or_default();
        Ok(Rung {
            m: xs.len(),
            err: s.l1_error,
            status: s.status,
            cond,
            eps,
        })
    })())
}

fn poisson(side: usize, cfg: &BenchConfig) -> Result<Rung> {
    let mut fd = FdConfig::new(9, cfg.strategy.clone(), cfg.kernel).grid_blocks(side, side);
    fd.parallel = cfg.parallel;
    let m = side * side;
    numeric_or(m, (|| {
        let s = solve_poisson_2d(&PoissonProblem2D::default(), side, &fd)?;
        Ok(Rung {
            m,
            err: s.l1_error,
            status: s.status,
            cond: s.stencils.cond,
            eps: s.stencils.eps,
        })
    })())
}

fn row(case: &BenchCase, kernel: &str, strategy: &str, n: usize, dt: Option<f64>, r: Rung) -> BenchRow {
    BenchRow {
        case: case.id.clone(),
        kernel: kernel.into(),
        strategy: strategy.into(),
        n,
        m: r.m,
        dt,
        l1_error: r.err,
        cond: Summary::of(&r.cond),
        eps: Summary::of(&r.eps),
        status: r.status.name().into(),
    }
}

/// Runs every rung of `case`. Rows come out in ladder order; heat cases add
/// the three-point baseline row after each RBF-FD row when requested.
pub fn run_case(case: &BenchCase, cfg: &BenchConfig) -> Result<BenchReport> {
    cases::validate_ladder(case, &cfg.ladder)?;
    let kernel = cfg.kernel.name();
    let strategy = cfg.strategy.label();
    let mut rows = Vec::new();
    let mut wall = Vec::new();
    for &n in &cfg.ladder {
        let t = Instant::now();
        match case.kind {
            CaseKind::Interp1d { func, .. } => {
                let xs = nodes_1d(case, n)?;
                rows.push(row(case, kernel, &strategy, n, None, interp_1d(func, &xs, cfg)?));
            }
            CaseKind::Interp2d(func) => {
                rows.push(row(case, kernel, &strategy, n * n, None, interp_2d(func, n, cfg)?));
            }
            CaseKind::Heat { ic, .. } => {
                let xs = nodes_1d(case, n)?;
                let problem = HeatProblem::new(ic).with_dt(cfg.dt);
                let mut fd = FdConfig::new(STENCIL_1D, cfg.strategy.clone(), cfg.kernel);
                fd.parallel = cfg.parallel;
                let r = heat(&problem, &xs, &SpatialScheme::RbfFd(fd))?;
                rows.push(row(case, kernel, &strategy, n, Some(cfg.dt), r));
                if cfg.with_fdm {
                    let r = heat(&problem, &xs, &SpatialScheme::Fdm)?;
                    rows.push(row(case, "none", "fdm", n, Some(cfg.dt), r));
                }
            }
            CaseKind::Poisson => {
                rows.push(row(case, kernel, &strategy, n * n, None, poisson(n, cfg)?));
            }
        }
        wall.push(t.elapsed().as_secs_f64());
    }
    Ok(BenchReport {
        case: case.id.clone(),
        rows,
        wall_seconds: wall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(id: &str, strategy: ShapeStrategy, ladder: Vec<usize>) -> BenchReport {
        let case = BenchCase::parse(id, cases::DEFAULT_LAYOUT_SEED).unwrap();
        let mut cfg = BenchConfig::new(&case, KernelFamily::Imq, strategy);
        cfg.ladder = ladder;
        run_case(&case, &cfg).unwrap()
    }

    #[test]
    fn constant_function_is_exact() {
        for s in [ShapeStrategy::Hardy, ShapeStrategy::Franke, ShapeStrategy::Constant(10.0)] {
            let r = run("one-equi", s, vec![10, 19, 37, 73]);
            for row in &r.rows {
                assert_eq!(row.status, "ok");
                assert!(row.l1_error < 1e-9, "{row:?}");
            }
        }
    }

    #[test]
    fn heat_rows_include_baseline() {
        let r = run("heat-quad", ShapeStrategy::Constant(10.0), vec![10, 19]);
        assert_eq!(r.rows.len(), 4);
        assert_eq!(r.rows[1].strategy, "fdm");
        assert_eq!(format!("{:.4e}", r.rows[1].l1_error), "1.5283e-4");
        assert_eq!(r.rows[0].dt, Some(1e-3));
        assert_eq!(r.wall_seconds.len(), 2);
        parse_csv(&r.csv()).unwrap();
    }

    #[test]
    fn franke_function_coarse_rung() {
        let r = run("interp2d-f3", ShapeStrategy::Constant(10.0), vec![10]);
        let e = r.rows[0].l1_error;
        assert_eq!((r.rows[0].n, r.rows[0].m), (100, 400));
        assert!(e > 4.5244e-3 / 3.0 && e < 4.5244e-3 * 3.0, "{e}");
    }

    #[test]
    fn singular_rungs_are_rows_not_errors() {
        let r = run("heat-quad", ShapeStrategy::Constant(1.0), vec![10, 19, 37]);
        assert_eq!(r.rows[0].status, "ok");
        assert_ne!(r.rows[4].status, "ok");
    }

    #[test]
    fn bad_ladders_are_rejected() {
        let case = BenchCase::parse("f1-equi", 0).unwrap();
        let mut cfg = BenchConfig::new(&case, KernelFamily::Imq, ShapeStrategy::Hardy);
        cfg.ladder = vec![10, 20];
        assert!(run_case(&case, &cfg).is_err());
    }
}
