//! Shape parameter strategies.
//!
//! Every strategy maps a stencil to one `ε`, which is then clamped to
//! `[EPS_MIN, EPS_MAX]`. The clamp matters mostly for the neural strategy,
//! whose last layer is unbounded.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::neural::MlpModel;
use crate::points::{distance, Point, PointSet};

pub const EPS_MIN: f64 = 1e-3;
pub const EPS_MAX: f64 = 1e6;

const HARDY_FACTOR: f64 = 0.815;
const FRANKE_FACTOR: f64 = 0.8;
pub const MODIFIED_FRANKE_EXPONENT: f64 = 0.25;

#[derive(Clone, Debug)]
pub enum ShapeStrategy {
    Constant(f64),
    Hardy,
    Franke,
    ModifiedFranke { exponent: f64 },
    Neural(Arc<MlpModel>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsReport {
    pub epsilon: f64,
    pub clamped: bool,
    pub cond_estimate: Option<f64>,
}

impl EpsReport {
    fn raw(epsilon: f64) -> Self {
        EpsReport {
            epsilon,
            clamped: false,
            cond_estimate: None,
        }
    }

    /// Clamps into `[EPS_MIN, EPS_MAX]`; NaN maps to `EPS_MIN`.
    pub fn clamp(self) -> Self {
        let e = self.epsilon;
        let c = if e.is_nan() { EPS_MIN } else { e.clamp(EPS_MIN, EPS_MAX) };
        EpsReport {
            epsilon: c,
            clamped: self.clamped || c != e,
            cond_estimate: self.cond_estimate,
        }
    }
}

fn require_two(points: &PointSet) -> Result<()> {
    if points.len() < 2 {
        return Err(Error::DegeneratePointSet(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    Ok(())
}

/// `ε = 1/(0.815·d)` with `d` the mean nearest-neighbour distance.
pub fn hardy_eps(points: &PointSet) -> Result<EpsReport> {
    require_two(points)?;
    let nn = points.nearest_neighbor_distances();
    if nn.iter().any(|&d| d <= 0.0) {
        return Err(Error::DegeneratePointSet("zero nearest-neighbour distance".into()));
    }
    let d = nn.iter().sum::<f64>() / nn.len() as f64;
    Ok(EpsReport::raw(1.0 / (HARDY_FACTOR * d)))
}

/// `ε = 0.8·√N / D`, `D` the diameter of the smallest enclosing circle.
pub fn franke_eps(points: &PointSet) -> Result<EpsReport> {
    franke_with_exponent(points, 0.5)
}

/// `ε = 0.8·N^exponent / D`.
pub fn modified_franke_eps(points: &PointSet, exponent: f64) -> Result<EpsReport> {
    franke_with_exponent(points, exponent)
}

fn franke_with_exponent(points: &PointSet, exponent: f64) -> Result<EpsReport> {
    require_two(points)?;
    let d = enclosing_diameter(points);
    if d <= 0.0 {
        return Err(Error::DegeneratePointSet("zero diameter".into()));
    }
    let n = points.len() as f64;
    Ok(EpsReport::raw(FRANKE_FACTOR * n.powf(exponent) / d))
}

/// Diameter of the minimal enclosing circle (interval length in 1D).
pub fn enclosing_diameter(points: &PointSet) -> f64 {
    if points.dim() == 1 {
        let xs = points.xs();
        return xs.last().unwrap() - xs.first().unwrap();
    }
    2.0 * min_enclosing_circle(points.coords()).1
}

/// Incremental minimal enclosing circle. Returns `(center, radius)`.
///
/// Processes points in the given order; the expected-linear bound needs a
/// random order, but stencils here are ten points at most.
pub fn min_enclosing_circle(pts: &[Point]) -> (Point, f64) {
    const SLACK: f64 = 1e-12;
    let inside = |c: &(Point, f64), p: &Point| distance(&c.0, p) <= c.1 * (1.0 + SLACK) + SLACK;
    let mut c: (Point, f64) = (pts[0], 0.0);
    for i in 1..pts.len() {
        if inside(&c, &pts[i]) {
            continue;
        }
        c = (pts[i], 0.0);
        for j in 0..i {
            if inside(&c, &pts[j]) {
                continue;
            }
            c = circle_two(&pts[i], &pts[j]);
            for k in 0..j {
                if !inside(&c, &pts[k]) {
                    c = circle_three(&pts[i], &pts[j], &pts[k]);
                }
            }
        }
    }
    c
}

fn circle_two(a: &Point, b: &Point) -> (Point, f64) {
    let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    (c, distance(a, b) / 2.0)
}

fn circle_three(a: &Point, b: &Point, c: &Point) -> (Point, f64) {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    if d.abs() < 1e-300 {
        // Collinear: the circle on the farthest pair.
        let pairs = [circle_two(a, b), circle_two(a, c), circle_two(b, c)];
        return pairs
            .into_iter()
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
    }
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    let center = [a[0] + ux, a[1] + uy];
    (center, (ux * ux + uy * uy).sqrt())
}

impl ShapeStrategy {
    /// Parses `const:<float>`, `hardy`, `franke`, `mfranke[:exp=<float>]`
    /// or `nn:<model-path>` (the model file is loaded).
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidStrategy(s.to_string());
        let s = s.trim();
        if let Some(v) = s.strip_prefix("const:") {
            let e: f64 = v.parse().map_err(|_| bad())?;
            if !(e > 0.0 && e.is_finite()) {
                return Err(bad());
            }
            return Ok(ShapeStrategy::Constant(e));
        }
        if let Some(path) = s.strip_prefix("nn:") {
            if path.is_empty() {
                return Err(bad());
            }
            let model = crate::neural::load_model(Path::new(path))?;
            return Ok(ShapeStrategy::Neural(Arc::new(model)));
        }
        match s {
            "hardy" => Ok(ShapeStrategy::Hardy),
            "franke" => Ok(ShapeStrategy::Franke),
            "mfranke" => Ok(ShapeStrategy::ModifiedFranke {
                exponent: MODIFIED_FRANKE_EXPONENT,
            }),
            _ => {
                let rest = s.strip_prefix("mfranke:exp=").ok_or_else(bad)?;
                let exponent: f64 = rest.parse().map_err(|_| bad())?;
                if !exponent.is_finite() {
                    return Err(bad());
                }
                Ok(ShapeStrategy::ModifiedFranke { exponent })
            }
        }
    }

    /// Short label used in reports (`nn` for the neural strategy).
    pub fn label(&self) -> String {
        match self {
            ShapeStrategy::Constant(e) => format!("const:{e}"),
            ShapeStrategy::Hardy => "hardy".into(),
            ShapeStrategy::Franke => "franke".into(),
            ShapeStrategy::ModifiedFranke { exponent } => {
                if *exponent == MODIFIED_FRANKE_EXPONENT {
                    "mfranke".into()
                } else {
                    format!("mfranke:exp={exponent}")
                }
            }
            ShapeStrategy::Neural(_) => "nn".into(),
        }
    }

    pub fn is_neural(&self) -> bool {
        matches!(self, ShapeStrategy::Neural(_))
    }

    /// The clamped shape parameter for one stencil.
    pub fn epsilon_for_stencil(&self, stencil: &PointSet) -> Result<EpsReport> {
        let report = match self {
            ShapeStrategy::Constant(e) => EpsReport::raw(*e),
            ShapeStrategy::Hardy => hardy_eps(stencil)?,
            ShapeStrategy::Franke => franke_eps(stencil)?,
            ShapeStrategy::ModifiedFranke { exponent } => modified_franke_eps(stencil, *exponent)?,
            ShapeStrategy::Neural(model) => EpsReport::raw(model.predict(stencil)?),
        };
        Ok(report.clamp())
    }
}

impl fmt::Display for ShapeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_examples() {
        let p = PointSet::linspace(0.0, 1.0, 11);
        let e = hardy_eps(&p).unwrap().epsilon;
        assert!((e - 1.0 / 0.0815).abs() < 1e-9, "{e}");
        assert!((e - 12.269938).abs() < 1e-6);
        let two = PointSet::new_1d(&[0.0, 1.0]).unwrap();
        assert!((hardy_eps(&two).unwrap().epsilon - 1.226994).abs() < 1e-6);
        let scaled = hardy_eps(&p.scaled(2.0)).unwrap().epsilon;
        assert!((scaled - e / 2.0).abs() < 1e-9);
    }

    #[test]
    fn franke_examples() {
        let p = PointSet::linspace(0.0, 1.0, 11);
        let e = franke_eps(&p).unwrap().epsilon;
        assert!((e - 0.8 * 11f64.sqrt()).abs() < 1e-12);
        assert!((e - 2.653300).abs() < 1e-6);

        // 4 points on a circle of diameter 1
        let c = PointSet::new_2d(vec![[0.5, 0.0], [0.0, 0.5], [-0.5, 0.0], [0.0, -0.5]]).unwrap();
        assert!((franke_eps(&c).unwrap().epsilon - 1.6).abs() < 1e-12);
    }

    #[test]
    fn franke_doubling_n() {
        let a = franke_eps(&PointSet::linspace(0.0, 1.0, 8)).unwrap().epsilon;
        let b = franke_eps(&PointSet::linspace(0.0, 1.0, 16)).unwrap().epsilon;
        assert!((b / a - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn modified_franke_examples() {
        let p = PointSet::linspace(0.0, 1.0, 16);
        assert!((modified_franke_eps(&p, 0.25).unwrap().epsilon - 1.6).abs() < 1e-12);
        assert_eq!(
            modified_franke_eps(&p, 0.5).unwrap().epsilon,
            franke_eps(&p).unwrap().epsilon
        );
        let wide = modified_franke_eps(&p.scaled(2.0), 0.25).unwrap().epsilon;
        assert!((wide - 0.8).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sets() {
        let one = PointSet::new_1d(&[0.3]).unwrap();
        assert!(matches!(hardy_eps(&one), Err(Error::DegeneratePointSet(_))));
        assert!(matches!(franke_eps(&one), Err(Error::DegeneratePointSet(_))));
    }

    #[test]
    fn enclosing_circle_of_grid_stencil() {
        let mut pts = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                pts.push([i as f64 * 0.5, j as f64 * 0.25]);
            }
        }
        let (c, r) = min_enclosing_circle(&pts);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 0.25).abs() < 1e-12);
        assert!((r - (0.5f64.powi(2) + 0.25f64.powi(2)).sqrt()).abs() < 1e-12);
        // Acute triangle: circumcircle
        let (_, r) = min_enclosing_circle(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.8]]);
        // R = abc / (4K)
        let side = (0.25f64 + 0.64).sqrt();
        let expect = side * side / (4.0 * 0.4);
        assert!((r - expect).abs() < 1e-12, "{r} vs {expect}");
    }

    #[test]
    fn clamp_reports() {
        let r = EpsReport::raw(-3.0).clamp();
        assert_eq!(r.epsilon, EPS_MIN);
        assert!(r.clamped);
        let again = r.clamp();
        assert_eq!(again, r);
        let ok = EpsReport::raw(10.0).clamp();
        assert!(!ok.clamped);
        assert_eq!(EpsReport::raw(1e9).clamp().epsilon, EPS_MAX);
    }

    #[test]
    fn constant_passthrough() {
        let p = PointSet::linspace(0.0, 1.0, 5);
        let r = ShapeStrategy::Constant(10.0).epsilon_for_stencil(&p).unwrap();
        assert_eq!(r.epsilon, 10.0);
        assert!(!r.clamped);
        let h = ShapeStrategy::Hardy.epsilon_for_stencil(&PointSet::linspace(0.0, 1.0, 11)).unwrap();
        assert!((h.epsilon - 12.269938).abs() < 1e-6);
    }

    #[test]
    fn parse_grammar() {
        assert!(matches!(ShapeStrategy::parse("const:10").unwrap(), ShapeStrategy::Constant(e) if e == 10.0));
        assert!(matches!(ShapeStrategy::parse("hardy").unwrap(), ShapeStrategy::Hardy));
        assert!(matches!(ShapeStrategy::parse("franke").unwrap(), ShapeStrategy::Franke));
        assert!(matches!(
            ShapeStrategy::parse("mfranke").unwrap(),
            ShapeStrategy::ModifiedFranke { exponent } if exponent == 0.25
        ));
        assert!(matches!(
            ShapeStrategy::parse("mfranke:exp=0.5").unwrap(),
            ShapeStrategy::ModifiedFranke { exponent } if exponent == 0.5
        ));
        for bad in ["const:", "const:-1", "const:abc", "mfranke:0.5", "nn:", "spline"] {
            assert!(ShapeStrategy::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(ShapeStrategy::parse("mfranke:exp=0.5").unwrap().label(), "mfranke:exp=0.5");
    }

    #[test]
    fn translation_invariance_of_formulas() {
        let p = PointSet::new_1d(&[0.0, 0.13, 0.4, 0.41, 0.9]).unwrap();
        let q = p.translated([3.7, 0.0]);
        for f in [hardy_eps, franke_eps] {
            let a = f(&p).unwrap().epsilon;
            let b = f(&q).unwrap().epsilon;
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
