//! Local Laplacian weights and the assembled sparse operator.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fd::neighbors::{assign_evaluation_points, NeighborIndex};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::neural::features::STRUCTURED_2D_SIZE;
use crate::points::{Point, PointSet};
use crate::poly::PolyBasis;
use crate::shape::ShapeStrategy;
use crate::system::AugmentedSystem;

/// `[Δq(y) B⁻¹]_{1..n}` for one stencil.
pub fn local_laplacian_weights(
    stencil: &PointSet,
    eval_point: &Point,
    kernel: KernelSpec,
    poly: PolyBasis,
) -> Result<Vec<f64>> {
    let sys = AugmentedSystem::build_without_condition(stencil, kernel, poly)?;
    Ok(sys.laplacian_weights(eval_point))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FdMode {
    Collocated,
    Oversampled,
}

/// How stencils are chosen around each center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilRule {
    /// The `n` nearest nodes.
    Nearest,
    /// For an `nx × ny` tensor grid (x fastest): the 3×3 block around the
    /// center, shifted inward on the boundary.
    GridBlock { nx: usize, ny: usize },
}

#[derive(Clone, Debug)]
pub struct FdConfig {
    pub stencil_size: usize,
    pub oversampling: usize,
    pub mode: FdMode,
    pub strategy: ShapeStrategy,
    pub kernel_family: KernelFamily,
    pub rule: StencilRule,
    /// Also compute `cond(B)` per stencil (one extra inverse each).
    pub record_cond: bool,
    pub parallel: bool,
}

impl FdConfig {
    pub fn new(stencil_size: usize, strategy: ShapeStrategy, kernel_family: KernelFamily) -> Self {
        FdConfig {
            stencil_size,
            oversampling: 4,
            mode: FdMode::Collocated,
            strategy,
            kernel_family,
            rule: StencilRule::Nearest,
            record_cond: true,
            parallel: false,
        }
    }

    pub fn grid_blocks(mut self, nx: usize, ny: usize) -> Self {
        self.rule = StencilRule::GridBlock { nx, ny };
        self.stencil_size = STRUCTURED_2D_SIZE;
        self
    }
}

/// Stencil data for every center.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilMap {
    /// Global indices of each stencil, ascending.
    pub neighbors: Vec<Vec<usize>>,
    pub eps: Vec<f64>,
    /// NaN when not recorded.
    pub cond: Vec<f64>,
    /// `ν`: evaluation index → center index.
    pub assignment: Vec<usize>,
}

/// Sparse `M × N` matrix in compressed rows with ascending columns.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl GlobalOperator {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut t = triplets.to_vec();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &t {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of range");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        GlobalOperator {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[a..b], &self.values[a..b])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "operator applied to a vector of the wrong length");
        (0..self.rows)
            .map(|i| {
                let (c, v) = self.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j]).sum()
            })
            .collect()
    }

    /// Zeroes the given rows (keeping the sparsity pattern).
    pub fn zero_rows(&mut self, rows: &[usize]) {
        for &r in rows {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            self.values[a..b].iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            out.extend(c.iter().zip(v).map(|(&j, &a)| (i, j, a)));
        }
        out
    }

    /// `row col value` per line, sorted by row then column.
    pub fn to_triplet_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.triplets() {
            writeln!(s, "{i} {j} {v:?}").unwrap();
        }
        s
    }

    pub fn max_row_nnz(&self) -> usize {
        (0..self.rows).map(|i| self.row_ptr[i + 1] - self.row_ptr[i]).max().unwrap_or(0)
    }
}

/// The 3×3 grid block used for center `i` of an `nx × ny` grid.
pub fn grid_block(i: usize, nx: usize, ny: usize) -> Vec<usize> {
    let (ix, iy) = (i % nx, i / nx);
    let cx = ix.clamp(1, nx.saturating_sub(2).max(1));
    let cy = iy.clamp(1, ny.saturating_sub(2).max(1));
    let mut out = Vec::with_capacity(9);
    for y in cy - 1..=cy + 1 {
        for x in cx - 1..=cx + 1 {
            out.push(y * nx + x);
        }
    }
    out
}

/// Stencils, `ε` and (optionally) `cond` per center.
pub fn build_stencils(centers: &PointSet, cfg: &FdConfig) -> Result<(Vec<Vec<usize>>, Vec<f64>, Vec<f64>)> {
    let n = cfg.stencil_size;
    if n > centers.len() {
        return Err(Error::InvalidArgument(format!(
            "stencil size {n} exceeds the {} available nodes",
            centers.len()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("stencils need at least 2 nodes".into()));
    }
    let neighbors: Vec<Vec<usize>> = match cfg.rule {
        StencilRule::Nearest => {
            let index = NeighborIndex::new(centers);
            (0..centers.len())
                .map(|i| {
                    let mut s = index.query(centers.get(i), n);
                    s.sort_unstable();
                    s
                })
                .collect()
        }
        StencilRule::GridBlock { nx, ny } => {
            if nx < 3 || ny < 3 || nx * ny != centers.len() || centers.dim() != 2 {
                return Err(Error::InvalidArgument("grid blocks need a 2D grid of at least 3×3".into()));
            }
            (0..centers.len()).map(|i| grid_block(i, nx, ny)).collect()
        }
    };
    let per = |i: usize| -> Result<(f64, f64)> {
        let stencil = centers.subset(&neighbors[i]);
        let e = cfg.strategy.epsilon_for_stencil(&stencil)?.epsilon;
        let cond = if cfg.record_cond {
            crate::system::condition_number(
                &stencil,
                &KernelSpec::new(cfg.kernel_family, e)?,
                &PolyBasis::constant(centers.dim()),
            )
        } else {
            f64::NAN
        };
        Ok((e, cond))
    };
    let pairs: Vec<(f64, f64)> = if cfg.parallel {
        (0..centers.len()).into_par_iter().map(per).collect::<Result<_>>()?
    } else {
        (0..centers.len()).map(per).collect::<Result<_>>()?
    };
    let (eps, cond) = pairs.into_iter().unzip();
    Ok((neighbors, eps, cond))
}

/// Evaluation points for a given mode: the centers themselves, or `r·N`
/// equidistant points (1D) / a `√r`-times finer grid (2D grids).
pub fn evaluation_points(centers: &PointSet, cfg: &FdConfig) -> PointSet {
    match cfg.mode {
        FdMode::Collocated => centers.clone(),
        FdMode::Oversampled => {
            let r = cfg.oversampling.max(1);
            if centers.dim() == 1 {
                let xs = centers.xs();
                PointSet::linspace(xs[0], *xs.last().unwrap(), r * centers.len())
            } else {
                let (nx, ny) = match cfg.rule {
                    StencilRule::GridBlock { nx, ny } => (nx, ny),
                    StencilRule::Nearest => {
                        let s = (centers.len() as f64).sqrt().round() as usize;
                        (s, s)
                    }
                };
                let f = (r as f64).sqrt();
                PointSet::grid_2d((nx as f64 * f).round() as usize, (ny as f64 * f).round() as usize)
            }
        }
    }
}

/// Row `j` holds the Laplacian weights of stencil `ν(y_j)` evaluated at `y_j`.
pub fn assemble_global_operator(
    centers: &PointSet,
    eval: &PointSet,
    cfg: &FdConfig,
) -> Result<(GlobalOperator, StencilMap)> {
    let (neighbors, eps, cond) = build_stencils(centers, cfg)?;
    let assignment = match cfg.mode {
        FdMode::Collocated if eval == centers => (0..centers.len()).collect(),
        _ => assign_evaluation_points(eval, centers),
    };
    let dim = centers.dim();
    let row = |j: usize| -> Result<Vec<(usize, usize, f64)>> {
        let c = assignment[j];
        let stencil = centers.subset(&neighbors[c]);
        let kernel = KernelSpec::new(cfg.kernel_family, eps[c])?;
        let w = local_laplacian_weights(&stencil, eval.get(j), kernel, PolyBasis::constant(dim)).map_err(|e| {
            match e {
                Error::SingularSystem { pivot } => Error::SingularStencil { stencil: c, pivot },
                other => other,
            }
        })?;
        // `subset` keeps ascending index order, which is also coordinate order in 1D
        Ok(neighbors[c].iter().zip(w).map(|(&col, v)| (j, col, v)).collect())
    };
    let rows: Vec<Vec<(usize, usize, f64)>> = if cfg.parallel {
        (0..eval.len()).into_par_iter().map(row).collect::<Result<_>>()?
    } else {
        (0..eval.len()).map(row).collect::<Result<_>>()?
    };
    let triplets: Vec<_> = rows.into_iter().flatten().collect();
    let op = GlobalOperator::from_triplets(eval.len(), centers.len(), &triplets);
    Ok((
        op,
        StencilMap {
            neighbors,
            eps,
            cond,
            assignment,
        },
    ))
}
