//! Local interpolation: per-stencil interpolants evaluated at assigned
//! points, and 1D chains of clusters that share endpoints.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fd::operator::{build_stencils, FdConfig, StencilMap};
use crate::fd::neighbors::assign_evaluation_points;
use crate::kernel::{KernelFamily, KernelSpec};
use crate::points::PointSet;
use crate::poly::PolyBasis;
use crate::shape::ShapeStrategy;
use crate::system::AugmentedSystem;

fn singular_to_stencil(e: Error, stencil: usize) -> Error {
    match e {
        Error::SingularSystem { pivot } => Error::SingularStencil { stencil, pivot },
        other => other,
    }
}

/// Groups evaluation indices by the owning stencil.
fn group_by_owner(owner: &[usize], owners: usize) -> Vec<Vec<usize>> {
    let mut g = vec![Vec::new(); owners];
    for (j, &c) in owner.iter().enumerate() {
        g[c].push(j);
    }
    g
}

/// Interpolates `values` (given at `centers`) at `eval`: each evaluation
/// point uses the local interpolant of stencil `ν(y)`.
pub fn rbf_fd_interpolate(
    centers: &PointSet,
    values: &[f64],
    eval: &PointSet,
    cfg: &FdConfig,
) -> Result<(Vec<f64>, StencilMap)> {
    if values.len() != centers.len() {
        return Err(Error::LengthMismatch(values.len(), centers.len()));
    }
    let (neighbors, eps, cond) = build_stencils(centers, cfg)?;
    let assignment = assign_evaluation_points(eval, centers);
    let groups = group_by_owner(&assignment, centers.len());
    let dim = centers.dim();
    let local = |c: usize| -> Result<Vec<(usize, f64)>> {
        if groups[c].is_empty() {
            return Ok(Vec::new());
        }
        let stencil = centers.subset(&neighbors[c]);
        let kernel = KernelSpec::new(cfg.kernel_family, eps[c])?;
        let sys = AugmentedSystem::build_without_condition(&stencil, kernel, PolyBasis::constant(dim))
            .map_err(|e| singular_to_stencil(e, c))?;
        let f: Vec<f64> = neighbors[c].iter().map(|&k| values[k]).collect();
        let coef = sys.solve_interpolant(&f)?;
        Ok(groups[c].iter().map(|&j| (j, sys.evaluate(&coef, eval.get(j)))).collect())
    };
    let parts: Vec<Vec<(usize, f64)>> = if cfg.parallel {
        (0..centers.len()).into_par_iter().map(local).collect::<Result<_>>()?
    } else {
        (0..centers.len()).map(local).collect::<Result<_>>()?
    };
    let mut out = vec![0.0; eval.len()];
    for (j, v) in parts.into_iter().flatten() {
        out[j] = v;
    }
    Ok((
        out,
        StencilMap {
            neighbors,
            eps,
            cond,
            assignment,
        },
    ))
}

/// Consecutive windows of `n` nodes where each window starts at the last
/// node of the previous one. If the nodes do not split evenly the final
/// window is the last `n` nodes.
pub fn cluster_windows(len: usize, n: usize) -> Result<Vec<(usize, usize)>> {
    if n < 2 || len < n {
        return Err(Error::InvalidArgument(format!(
            "cannot split {len} nodes into clusters of {n}"
        )));
    }
    let mut out = Vec::new();
    let mut start = 0;
    loop {
        if start + n >= len {
            out.push((len - n, len));
            break;
        }
        out.push((start, start + n));
        start += n - 1;
    }
    Ok(out)
}

/// Result of a cluster interpolation.
#[derive(Clone, Debug)]
pub struct ClusterFit {
    pub values: Vec<f64>,
    pub eps: Vec<f64>,
    pub cond: Vec<f64>,
    pub windows: Vec<(usize, usize)>,
}

/// 1D interpolation by independent clusters of `n` sorted nodes sharing
/// endpoints. A point is handled by the first cluster whose interval
/// contains it; points outside `[x_1, x_N]` go to the nearest end cluster.
pub fn cluster_interpolate_1d(
    nodes: &PointSet,
    values: &[f64],
    eval: &[f64],
    n: usize,
    strategy: &ShapeStrategy,
    family: KernelFamily,
    record_cond: bool,
) -> Result<ClusterFit> {
    if nodes.dim() != 1 {
        return Err(Error::InvalidArgument("cluster interpolation is 1D only".into()));
    }
    if values.len() != nodes.len() {
        return Err(Error::LengthMismatch(values.len(), nodes.len()));
    }
    let xs = nodes.xs();
    let windows = cluster_windows(xs.len(), n)?;
    // right end of each cluster, for assignment
    let ends: Vec<f64> = windows.iter().map(|&(_, b)| xs[b - 1]).collect();
    let owner: Vec<usize> = eval
        .iter()
        .map(|&y| ends.partition_point(|&e| e < y).min(windows.len() - 1))
        .collect();
    let groups = group_by_owner(&owner, windows.len());
    let mut out = vec![0.0; eval.len()];
    let mut eps = Vec::with_capacity(windows.len());
    let mut cond = Vec::with_capacity(windows.len());
    for (k, &(a, b)) in windows.iter().enumerate() {
        let idx: Vec<usize> = (a..b).collect();
        let stencil = nodes.subset(&idx);
        let e = strategy.epsilon_for_stencil(&stencil)?.epsilon;
        let kernel = KernelSpec::new(family, e)?;
        let sys = if record_cond {
            AugmentedSystem::build(&stencil, kernel, PolyBasis::constant(1))
        } else {
            AugmentedSystem::build_without_condition(&stencil, kernel, PolyBasis::constant(1))
        }
        .map_err(|err| singular_to_stencil(err, k))?;
        let coef = sys.solve_interpolant(&values[a..b])?;
        for &j in &groups[k] {
            out[j] = sys.evaluate(&coef, &[eval[j], 0.0]);
        }
        eps.push(e);
        cond.push(sys.cond());
    }
    Ok(ClusterFit {
        values: out,
        eps,
        cond,
        windows,
    })
}
