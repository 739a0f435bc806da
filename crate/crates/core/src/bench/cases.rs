//! Registered experiments and their test functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::pde::{InitialCondition, Layout};

/// Seed of the jittered point sets unless overridden.
pub const DEFAULT_LAYOUT_SEED: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func1d {
    /// `exp(sin πx)`
    F1,
    /// `1 / (1 + 16x²)`
    F2,
    /// constant 1, a sanity case
    One,
}

impl Func1d {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Func1d::F1 => (PI * x).sin().exp(),
            Func1d::F2 => 1.0 / (1.0 + 16.0 * x * x),
            Func1d::One => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func2d {
    /// Franke's function.
    F3,
    /// Boundary-layer product with width `α`.
    F4 { alpha: f64 },
}

impl Func2d {
    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            Func2d::F3 => franke(x, y),
            Func2d::F4 { alpha } => layer(x, alpha) * layer(y, alpha),
        }
    }
}

pub fn franke(x: f64, y: f64) -> f64 {
    let (a, b) = (9.0 * x, 9.0 * y);
    0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0).powi(2) / 10.0).exp()
        + 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2)).exp()
}

fn layer(t: f64, alpha: f64) -> f64 {
    1.0 + (-1.0 / alpha).exp() - (-t / alpha).exp() - ((t - 1.0) / alpha).exp()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CaseKind {
    Interp1d { func: Func1d, layout: Layout },
    Interp2d(Func2d),
    Heat { ic: InitialCondition, layout: Layout },
    Poisson,
}

/// A registered experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchCase {
    pub id: String,
    pub kind: CaseKind,
}

fn layout_suffix(s: &str, seed: u64) -> Option<Layout> {
    match s {
        "equi" => Some(Layout::Equidistant),
        "nonequi" => Some(Layout::Jittered { seed }),
        _ => None,
    }
}

impl BenchCase {
    /// Ids: `f1-equi`, `f2-nonequi`, `one-equi`, `heat-quad[-nonequi]`,
    /// `heat-sine[-nonequi]`, `interp2d-f3`, `interp2d-f4-alpha<α>`,
    /// `poisson2d`. `seed` fixes jittered layouts.
    pub fn parse(id: &str, seed: u64) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown bench case `{id}`"));
        let kind = match id {
            "poisson2d" => CaseKind::Poisson,
            "interp2d-f3" => CaseKind::Interp2d(Func2d::F3),
            _ if id.starts_with("interp2d-f4-alpha") => {
                let alpha: f64 = id["interp2d-f4-alpha".len()..].parse().map_err(|_| bad())?;
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(bad());
                }
                CaseKind::Interp2d(Func2d::F4 { alpha })
            }
            _ if id.starts_with("heat-") => {
                let mut parts = id["heat-".len()..].splitn(2, '-');
                let ic = match parts.next() {
                    Some("quad") => InitialCondition::Quadratic,
                    Some("sine") => InitialCondition::Sine,
                    _ => return Err(bad()),
                };
                let layout = layout_suffix(parts.next().unwrap_or("equi"), seed).ok_or_else(bad)?;
                CaseKind::Heat { ic, layout }
            }
            _ => {
                let (f, l) = id.split_once('-').ok_or_else(bad)?;
                let func = match f {
                    "f1" => Func1d::F1,
                    "f2" => Func1d::F2,
                    "one" => Func1d::One,
                    _ => return Err(bad()),
                };
                CaseKind::Interp1d {
                    func,
                    layout: layout_suffix(l, seed).ok_or_else(bad)?,
                }
            }
        };
        Ok(BenchCase { id: id.to_string(), kind })
    }

    /// Default ladder: node counts in 1D (midpoint refinements of 10 nodes),
    /// grid sides in 2D.
    pub fn default_ladder(&self) -> Vec<usize> {
        match self.kind {
            CaseKind::Interp1d { .. } => midpoint_ladder(10, 11),
            CaseKind::Heat { .. } => midpoint_ladder(10, 5),
            CaseKind::Interp2d(_) | CaseKind::Poisson => vec![10, 20, 40, 80, 160, 320],
        }
    }

    pub fn is_1d(&self) -> bool {
        matches!(self.kind, CaseKind::Interp1d { .. } | CaseKind::Heat { .. })
    }
}

/// `base, 2·base − 1, …` (`rungs` entries).
pub fn midpoint_ladder(base: usize, rungs: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(rungs);
    let mut n = base;
    for _ in 0..rungs {
        out.push(n);
        n = 2 * n - 1;
    }
    out
}

/// Checks a ladder: strictly increasing, and in 1D reachable from 10 nodes
/// by midpoint refinement.
pub fn validate_ladder(case: &BenchCase, ladder: &[usize]) -> Result<()> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("ladder must be non-empty and strictly increasing".into()));
    }
    if case.is_1d() {
        let ok = midpoint_ladder(10, 20);
        if let Some(bad) = ladder.iter().find(|n| !ok.contains(n)) {
            return Err(Error::InvalidArgument(format!(
                "1D rung {bad} is not a midpoint refinement of 10 nodes"
            )));
        }
    } else if ladder[0] < 3 {
        return Err(Error::InvalidArgument("2D grids need at least 3×3 nodes".into()));
    }
    Ok(())
}
