//! k-nearest-neighbour queries with ties broken by lowest index.

use std::cmp::Ordering;

use crate::points::{distance, Point, PointSet};

fn by_dist_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Search structure over a fixed point set: sorted-window scans in 1D,
/// uniform grid buckets in 2D.
#[derive(Clone, Debug)]
pub struct NeighborIndex<'a> {
    points: &'a PointSet,
    buckets: Option<Buckets>,
}

#[derive(Clone, Debug)]
struct Buckets {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(points: &PointSet) -> Self {
        let c = points.coords();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in c {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let w = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        // about two points per cell
        let per_side = ((c.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let cell = w / per_side as f64;
        let nx = (((hi[0] - lo[0]) / cell) as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell) as usize + 1).max(1);
        let mut b = Buckets {
            origin: lo,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for (i, p) in c.iter().enumerate() {
            let (cx, cy) = b.cell_of(p);
            b.cells[cy * nx + cx].push(i);
        }
        b
    }

    fn cell_of(&self, p: &Point) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (f(p[0], self.origin[0], self.nx), f(p[1], self.origin[1], self.ny))
    }
}

impl<'a> NeighborIndex<'a> {
    pub fn new(points: &'a PointSet) -> Self {
        let buckets = (points.dim() == 2 && !points.is_empty()).then(|| Buckets::new(points));
        NeighborIndex { points, buckets }
    }

    /// The `n` points closest to `y` ordered by (distance, index).
    pub fn query(&self, y: &Point, n: usize) -> Vec<usize> {
        let n = n.min(self.points.len());
        if n == 0 {
            return Vec::new();
        }
        match &self.buckets {
            None => self.query_1d(y, n),
            Some(b) => self.query_2d(b, y, n),
        }
    }

    fn query_1d(&self, y: &Point, n: usize) -> Vec<usize> {
        let c = self.points.coords();
        let d = |i: usize| (c[i][0] - y[0]).abs();
        // first index with x >= y
        let split = c.partition_point(|p| p[0] < y[0]);
        let mut left = split; // candidates left..split-1 walk downwards
        let mut right = split;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let l = (left > 0).then(|| (d(left - 1), left - 1));
            let r = (right < c.len()).then(|| (d(right), right));
            let take_left = match (l, r) {
                (Some(a), Some(b)) => by_dist_then_index(&a, &b) != Ordering::Greater,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                left -= 1;
                out.push(left);
            } else {
                out.push(right);
                right += 1;
            }
        }
        out
    }

    fn query_2d(&self, b: &Buckets, y: &Point, n: usize) -> Vec<usize> {
        let c = self.points.coords();
        let (cx, cy) = b.cell_of(y);
        let mut cand: Vec<(f64, usize)> = Vec::new();
        let max_ring = b.nx.max(b.ny);
        for ring in 0..=max_ring {
            let (x0, x1) = (cx as isize - ring as isize, cx as isize + ring as isize);
            let (y0, y1) = (cy as isize - ring as isize, cy as isize + ring as isize);
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    let on_ring = gx == x0 || gx == x1 || gy == y0 || gy == y1;
                    if !on_ring || gx < 0 || gy < 0 || gx >= b.nx as isize || gy >= b.ny as isize {
                        continue;
                    }
                    for &i in &b.cells[gy as usize * b.nx + gx as usize] {
                        cand.push((distance(y, &c[i]), i));
                    }
                }
            }
            if cand.len() >= n {
                cand.sort_by(by_dist_then_index);
                cand.truncate(n.max(1));
                // anything outside the searched block is at least `ring·cell` away
                if cand[n - 1].0 < ring as f64 * b.cell {
                    break;
                }
            }
        }
        cand.sort_by(by_dist_then_index);
        cand.truncate(n);
        cand.into_iter().map(|(_, i)| i).collect()
    }
}

/// The `n` nearest points to `points[i]`, including `i`, ordered by
/// (distance, index).
pub fn nearest_neighbors(points: &PointSet, i: usize, n: usize) -> Vec<usize> {
    NeighborIndex::new(points).query(points.get(i), n)
}

/// `ν(y) = argmin_i ‖y − x_i‖`, lowest index on ties.
pub fn assign_evaluation_points(eval: &PointSet, centers: &PointSet) -> Vec<usize> {
    let index = NeighborIndex::new(centers);
    eval.coords().iter().map(|y| index.query(y, 1)[0]).collect()
}

/// Exhaustive reference for the queries above.
pub fn brute_force_neighbors(points: &PointSet, y: &Point, n: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = points
        .coords()
        .iter()
        .enumerate()
        .map(|(i, p)| (distance(y, p), i))
        .collect();
    all.sort_by(by_dist_then_index);
    all.into_iter().take(n).map(|(_, i)| i).collect()
}
