//! Network inputs built from a stencil.
//!
//! Distance-based inputs are functions of node spacings only and therefore
//! shift invariant. Each raw feature is standardized as `(v − mean) / var`
//! with statistics frozen from the training split.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::points::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureMode {
    DistanceBased,
    CoordinateBased,
}

/// How a raw distance `d` becomes a feature before standardization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceTransform {
    /// `1/d`
    Inverse,
    /// `ln(1/d)`
    LogInverse,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::DistanceBased => "distance",
            FeatureMode::CoordinateBased => "coordinate",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(FeatureMode::DistanceBased),
            "coordinate" => Ok(FeatureMode::CoordinateBased),
            _ => Err(Error::InvalidArgument(format!("unknown feature mode `{s}`"))),
        }
    }
}

impl DistanceTransform {
    pub fn name(self) -> &'static str {
        match self {
            DistanceTransform::Inverse => "inverse",
            DistanceTransform::LogInverse => "log_inverse",
        }
    }

    #[inline]
    fn apply(self, d: f64) -> f64 {
        match self {
            DistanceTransform::Inverse => 1.0 / d,
            DistanceTransform::LogInverse => -d.ln(),
        }
    }
}

impl FromStr for DistanceTransform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inverse" => Ok(DistanceTransform::Inverse),
            "log_inverse" => Ok(DistanceTransform::LogInverse),
            _ => Err(Error::InvalidArgument(format!("unknown distance transform `{s}`"))),
        }
    }
}

/// Structured 3×3 stencil size in 2D.
pub const STRUCTURED_2D_SIZE: usize = 9;
const STRUCTURED_2D_FEATURES: usize = 8;
const PATTERN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSpec {
    pub dim: usize,
    pub mode: FeatureMode,
    pub transform: DistanceTransform,
    pub stencil_size: usize,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl FeatureSpec {
    /// A spec with identity statistics (mean 0, variance 1).
    pub fn new(dim: usize, mode: FeatureMode, transform: DistanceTransform, stencil_size: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if stencil_size < 2 {
            return Err(Error::InvalidArgument("stencil needs at least 2 nodes".into()));
        }
        if dim == 2 && mode == FeatureMode::DistanceBased && stencil_size != STRUCTURED_2D_SIZE {
            return Err(Error::InvalidArgument(
                "2D distance features need the structured 9-node stencil".into(),
            ));
        }
        let d0 = input_dim(dim, mode, stencil_size);
        Ok(FeatureSpec {
            dim,
            mode,
            transform,
            stencil_size,
            mean: vec![0.0; d0],
            var: vec![1.0; d0],
        })
    }

    pub fn input_dim(&self) -> usize {
        input_dim(self.dim, self.mode, self.stencil_size)
    }

    pub fn with_stats(mut self, mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        let d0 = self.input_dim();
        if mean.len() != d0 || var.len() != d0 {
            return Err(Error::ShapeMismatch {
                expected: d0,
                got: mean.len().max(var.len()),
            });
        }
        if var.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("feature variances must be positive".into()));
        }
        self.mean = mean;
        self.var = var;
        Ok(self)
    }

    /// Fits per-feature mean and (population) variance on raw features.
    pub fn fit(self, raw: &[Vec<f64>]) -> Result<Self> {
        let d0 = self.input_dim();
        if raw.is_empty() {
            return Err(Error::InvalidArgument("cannot fit statistics on no samples".into()));
        }
        let count = raw.len() as f64;
        let mut mean = vec![0.0; d0];
        for r in raw {
            if r.len() != d0 {
                return Err(Error::ShapeMismatch { expected: d0, got: r.len() });
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= count);
        let mut var = vec![0.0; d0];
        for r in raw {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        var.iter_mut().for_each(|s| {
            *s /= count;
            if !(*s > 0.0) {
                *s = 1.0;
            }
        });
        self.with_stats(mean, var)
    }

    /// Raw (unstandardized) features of a stencil.
    pub fn raw_features(&self, stencil: &PointSet) -> Result<Vec<f64>> {
        if stencil.len() != self.stencil_size || stencil.dim() != self.dim {
            return Err(Error::ModelMismatch(format!(
                "model expects {} points in {}D, stencil has {} points in {}D",
                self.stencil_size,
                self.dim,
                stencil.len(),
                stencil.dim()
            )));
        }
        match (self.dim, self.mode) {
            (1, FeatureMode::DistanceBased) => raw_gaps_1d(stencil, self.transform),
            (1, FeatureMode::CoordinateBased) => Ok(stencil.xs()),
            (2, FeatureMode::DistanceBased) => {
                let (dx, dy) = structured_spacing(stencil)?;
                raw_structured_2d(dx, dy, self.transform)
            }
            _ => Ok(raw_coordinates_2d(stencil)),
        }
    }

    pub fn standardize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.mean)
            .zip(&self.var)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn features(&self, stencil: &PointSet) -> Result<Vec<f64>> {
        Ok(self.standardize(&self.raw_features(stencil)?))
    }
}

fn input_dim(dim: usize, mode: FeatureMode, n: usize) -> usize {
    match (dim, mode) {
        (1, FeatureMode::DistanceBased) => n - 1,
        (1, FeatureMode::CoordinateBased) => n,
        (_, FeatureMode::DistanceBased) => STRUCTURED_2D_FEATURES,
        (_, FeatureMode::CoordinateBased) => 2 * n,
    }
}

fn raw_gaps_1d(stencil: &PointSet, transform: DistanceTransform) -> Result<Vec<f64>> {
    gap_features(&stencil.xs(), transform)
}

/// Transformed consecutive gaps of sorted coordinates.
pub fn gap_features(xs: &[f64], transform: DistanceTransform) -> Result<Vec<f64>> {
    xs.windows(2)
        .enumerate()
        .map(|(i, w)| {
            let gap = w[1] - w[0];
            if gap <= 0.0 {
                Err(Error::ZeroGap(i, i + 1))
            } else {
                Ok(transform.apply(gap))
            }
        })
        .collect()
}

/// The eight distances of a structured 3×3 stencil with spacings `dx`, `dy`.
pub fn structured_distances(dx: f64, dy: f64) -> [f64; 8] {
    [
        dy,
        2.0 * dy,
        dx,
        (dx * dx + dy * dy).sqrt(),
        (dx * dx + 4.0 * dy * dy).sqrt(),
        2.0 * dx,
        (4.0 * dx * dx + dy * dy).sqrt(),
        2.0 * (dx * dx + dy * dy).sqrt(),
    ]
}

fn raw_structured_2d(dx: f64, dy: f64, transform: DistanceTransform) -> Result<Vec<f64>> {
    if !(dx > 0.0) {
        return Err(Error::ZeroGap(0, 1));
    }
    if !(dy > 0.0) {
        return Err(Error::ZeroGap(0, 3));
    }
    Ok(structured_distances(dx, dy).iter().map(|&d| transform.apply(d)).collect())
}

/// Coordinates relative to the stencil centroid, x-block then y-block, in
/// row-major (y, then x) order.
fn raw_coordinates_2d(stencil: &PointSet) -> Vec<f64> {
    let mut pts = stencil.coords().to_vec();
    pts.sort_by(|a, b| (a[1], a[0]).partial_cmp(&(b[1], b[0])).unwrap());
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    pts.iter()
        .map(|p| p[0] - xm)
        .chain(pts.iter().map(|p| p[1] - ym))
        .collect()
}

/// Recovers `(Δx, Δy)` from a 9-node stencil, checking that it is an
/// axis-aligned 3×3 grid.
pub fn structured_spacing(stencil: &PointSet) -> Result<(f64, f64)> {
    if stencil.len() != STRUCTURED_2D_SIZE || stencil.dim() != 2 {
        return Err(Error::ModelMismatch("structured stencil must have 9 points in 2D".into()));
    }
    let mut xs: Vec<f64> = stencil.coords().iter().map(|p| p[0]).collect();
    let mut ys: Vec<f64> = stencil.coords().iter().map(|p| p[1]).collect();
    let levels = |v: &mut Vec<f64>| -> Option<[f64; 3]> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = v[8].abs().max(v[0].abs()).max(1.0);
        let tol = PATTERN_TOL * scale;
        let l = [v[0], v[3], v[6]];
        for (k, chunk) in v.chunks(3).enumerate() {
            if chunk.iter().any(|c| (c - l[k]).abs() > tol) {
                return None;
            }
        }
        let h1 = l[1] - l[0];
        let h2 = l[2] - l[1];
        if (h1 - h2).abs() > tol || h1 <= tol {
            return None;
        }
        Some(l)
    };
    let lx = levels(&mut xs);
    let ly = levels(&mut ys);
    match (lx, ly) {
        (Some(lx), Some(ly)) => {
            // every (level_x, level_y) pair must be present exactly once
            for &x in &lx {
                for &y in &ly {
                    let hits = stencil
                        .coords()
                        .iter()
                        .filter(|p| (p[0] - x).abs() <= PATTERN_TOL.max(PATTERN_TOL * x.abs())
                            && (p[1] - y).abs() <= PATTERN_TOL.max(PATTERN_TOL * y.abs()))
                        .count();
                    if hits != 1 {
                        return Err(Error::ModelMismatch("stencil is not a 3x3 grid".into()));
                    }
                }
            }
            Ok(((lx[2] - lx[0]) / 2.0, (ly[2] - ly[0]) / 2.0))
        }
        _ => Err(Error::ModelMismatch("stencil is not a 3x3 grid".into())),
    }
}

/// The 3×3 stencil with spacings `dx`, `dy` anchored at the origin.
pub fn structured_stencil(dx: f64, dy: f64) -> PointSet {
    let mut pts = Vec::with_capacity(9);
    for j in 0..3 {
        for i in 0..3 {
            pts.push([i as f64 * dx, j as f64 * dy]);
        }
    }
    PointSet::new_2d(pts).expect("distinct grid nodes")
}

/// Standardized 1D distance features of a sorted stencil.
pub fn features_1d_distance(stencil: &PointSet, spec: &FeatureSpec) -> Result<Vec<f64>> {
    let raw = raw_gaps_1d(stencil, spec.transform)?;
    if raw.len() != spec.mean.len() {
        return Err(Error::ShapeMismatch { expected: spec.mean.len(), got: raw.len() });
    }
    Ok(spec.standardize(&raw))
}

/// Standardized 1D coordinate features.
pub fn features_1d_coordinate(stencil: &PointSet, spec: &FeatureSpec) -> Result<Vec<f64>> {
    let raw = stencil.xs();
    if raw.len() != spec.mean.len() {
        return Err(Error::ShapeMismatch { expected: spec.mean.len(), got: raw.len() });
    }
    Ok(spec.standardize(&raw))
}

/// Standardized structured 2D distance features.
pub fn features_2d_structured(dx: f64, dy: f64, spec: &FeatureSpec) -> Result<Vec<f64>> {
    let raw = raw_structured_2d(dx, dy, spec.transform)?;
    if raw.len() != spec.mean.len() {
        return Err(Error::ShapeMismatch { expected: spec.mean.len(), got: raw.len() });
    }
    Ok(spec.standardize(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_1d(n: usize) -> FeatureSpec {
        FeatureSpec::new(1, FeatureMode::DistanceBased, DistanceTransform::Inverse, n).unwrap()
    }

    #[test]
    fn inverse_gaps() {
        let p = PointSet::new_1d(&[0.0, 0.1, 0.2, 0.3]).unwrap();
        let f = features_1d_distance(&p, &spec_1d(4)).unwrap();
        for v in f {
            assert!((v - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_invariant_gaps() {
        let p = PointSet::new_1d(&[0.0, 0.125, 0.25, 0.5]).unwrap();
        let spec = spec_1d(4);
        let a = features_1d_distance(&p, &spec).unwrap();
        let b = features_1d_distance(&p.translated([0.25, 0.0]), &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variance_division() {
        let spec = spec_1d(2).with_stats(vec![10.0], vec![4.0]).unwrap();
        let p = PointSet::new_1d(&[0.0, 1.0 / 12.0]).unwrap();
        let f = features_1d_distance(&p, &spec).unwrap();
        assert!((f[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coordinate_features() {
        let spec = FeatureSpec::new(1, FeatureMode::CoordinateBased, DistanceTransform::Inverse, 3)
            .unwrap()
            .with_stats(vec![0.5; 3], vec![1.0; 3])
            .unwrap();
        let p = PointSet::new_1d(&[0.0, 0.5, 1.0]).unwrap();
        let f = features_1d_coordinate(&p, &spec).unwrap();
        assert_eq!(f, vec![-0.5, 0.0, 0.5]);
        let g = features_1d_coordinate(&p.translated([0.1, 0.0]), &spec).unwrap();
        assert_ne!(f, g);
        let id = FeatureSpec::new(1, FeatureMode::CoordinateBased, DistanceTransform::Inverse, 3).unwrap();
        assert_eq!(features_1d_coordinate(&p, &id).unwrap(), p.xs());
    }

    #[test]
    fn structured_raw_distances() {
        let d = structured_distances(0.5, 0.5);
        let expect = [
            0.5,
            1.0,
            0.5,
            0.5f64.sqrt(),
            1.25f64.sqrt(),
            1.0,
            1.25f64.sqrt(),
            2.0 * 0.5f64.sqrt(),
        ];
        for (a, b) in d.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
        // square stencil symmetry
        assert_eq!(d[0], d[2]);
        assert_eq!(d[4], d[6]);
    }

    #[test]
    fn structured_homogeneity() {
        let spec = FeatureSpec::new(2, FeatureMode::DistanceBased, DistanceTransform::Inverse, 9).unwrap();
        let a = features_2d_structured(0.2, 0.3, &spec).unwrap();
        let b = features_2d_structured(0.4, 0.6, &spec).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x / 2.0 - y).abs() < 1e-12);
        }
        assert!(matches!(features_2d_structured(0.0, 0.3, &spec), Err(Error::ZeroGap(..))));
    }

    #[test]
    fn spacing_recovery_and_rejection() {
        let s = structured_stencil(0.2, 0.05).translated([0.3, 0.7]);
        let (dx, dy) = structured_spacing(&s).unwrap();
        assert!((dx - 0.2).abs() < 1e-12 && (dy - 0.05).abs() < 1e-12);

        let mut pts = structured_stencil(0.2, 0.2).coords().to_vec();
        pts[4][0] += 0.01;
        let bad = PointSet::new_2d(pts).unwrap();
        assert!(structured_spacing(&bad).is_err());

        let uneven = PointSet::new_2d(
            [0.0, 0.1, 0.3]
                .iter()
                .flat_map(|&y| [0.0, 0.1, 0.2].map(|x| [x, y]))
                .collect(),
        )
        .unwrap();
        assert!(structured_spacing(&uneven).is_err());
    }

    #[test]
    fn zero_gap_is_reported() {
        // PointSet rejects duplicates, so exercise the slice path.
        let r = gap_features(&[0.0, 0.5, 0.5, 1.0], DistanceTransform::Inverse);
        assert!(matches!(r, Err(Error::ZeroGap(1, 2))));
    }

    #[test]
    fn fit_centers_exactly() {
        let spec = spec_1d(3);
        let raw = vec![vec![1.0, 5.0], vec![3.0, 9.0], vec![2.0, 1.0]];
        let spec = spec.fit(&raw).unwrap();
        let mut sums = [0.0; 2];
        for r in &raw {
            let f = spec.standardize(r);
            sums[0] += f[0];
            sums[1] += f[1];
        }
        assert!(sums.iter().all(|s| s.abs() < 1e-12));
        assert!((spec.var[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mismatch_is_reported() {
        let spec = spec_1d(10);
        let p = PointSet::linspace(0.0, 1.0, 9);
        assert!(matches!(spec.raw_features(&p), Err(Error::ModelMismatch(_))));
    }
}
