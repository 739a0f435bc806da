use crate::error::{Error, Result};

/// A point in the plane; 1D points keep `y = 0`.
pub type Point = [f64; 2];

#[inline]
pub fn distance(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// An ordered set of distinct points in 1 or 2 dimensions.
///
/// 1D sets are kept sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<Point>,
}

impl PointSet {
    /// 1D point set; sorts the input.
    pub fn new_1d(xs: &[f64]) -> Result<Self> {
        let mut v: Vec<f64> = xs.to_vec();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegeneratePointSet("non-finite coordinate".into()));
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Some(w) = v.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::DegeneratePointSet(format!(
                "duplicate point {} in 1D set",
                v[w]
            )));
        }
        Ok(PointSet {
            dim: 1,
            coords: v.into_iter().map(|x| [x, 0.0]).collect(),
        })
    }

    /// 2D point set; keeps the input order.
    pub fn new_2d(pts: Vec<Point>) -> Result<Self> {
        if pts.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::DegeneratePointSet("non-finite coordinate".into()));
        }
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DegeneratePointSet(format!(
                "duplicate point {:?} in 2D set",
                w[0]
            )));
        }
        Ok(PointSet { dim: 2, coords: pts })
    }

    /// Subset by index, keeping the given order (re-sorted in 1D).
    pub fn subset(&self, idx: &[usize]) -> PointSet {
        let coords: Vec<Point> = idx.iter().map(|&i| self.coords[i]).collect();
        if self.dim == 1 {
            let mut c = coords;
            c.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap());
            PointSet { dim: 1, coords: c }
        } else {
            PointSet { dim: 2, coords }
        }
    }

    /// `n` equidistant points on `[a, b]`, endpoints included.
    pub fn linspace(a: f64, b: f64, n: usize) -> PointSet {
        let xs = linspace(a, b, n);
        PointSet::new_1d(&xs).expect("linspace yields distinct points")
    }

    /// Tensor grid of `nx × ny` points on `[0,1]²`, x-index fastest.
    pub fn grid_2d(nx: usize, ny: usize) -> PointSet {
        let xs = linspace(0.0, 1.0, nx);
        let ys = linspace(0.0, 1.0, ny);
        let mut pts = Vec::with_capacity(nx * ny);
        for &y in &ys {
            for &x in &xs {
                pts.push([x, y]);
            }
        }
        PointSet { dim: 2, coords: pts }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.coords[i]
    }

    /// x-coordinates (the full data of a 1D set).
    pub fn xs(&self) -> Vec<f64> {
        self.coords.iter().map(|p| p[0]).collect()
    }

    pub fn translated(&self, shift: Point) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self
                .coords
                .iter()
                .map(|p| [p[0] + shift[0], p[1] + if self.dim == 2 { shift[1] } else { 0.0 }])
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.iter().map(|p| [p[0] * s, p[1] * s]).collect(),
        }
    }

    /// Distance from each point to its nearest other point (brute force).
    pub fn nearest_neighbor_distances(&self) -> Vec<f64> {
        let n = self.len();
        if self.dim == 1 {
            return (0..n)
                .map(|i| {
                    let left = if i > 0 { self.coords[i][0] - self.coords[i - 1][0] } else { f64::INFINITY };
                    let right = if i + 1 < n { self.coords[i + 1][0] - self.coords[i][0] } else { f64::INFINITY };
                    left.min(right)
                })
                .collect();
        }
        (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| j != i)
                    .map(|j| distance(&self.coords[i], &self.coords[j]))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
                .collect()
        }
    }
}

/// One midpoint-refinement step: inserts `(x_i + x_{i+1})/2` between
/// consecutive sorted points, taking `N` to `2N − 1`.
pub fn refine_midpoints(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * xs.len());
    for w in xs.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = xs.last() {
        out.push(last);
    }
    out
}
