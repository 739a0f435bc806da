//! The piecewise condition-number cost.

use crate::kernel::{KernelFamily, KernelSpec};
use crate::linalg::frobenius_condition;
use crate::points::PointSet;
use crate::poly::PolyBasis;
use crate::shape::{EPS_MAX, EPS_MIN};
use crate::system::assemble;

/// Stand-in for `cond = +∞` (singular `B`).
pub const COND_SATURATION: f64 = 1e16;

/// Knots of the cost: zero on `(lower, upper]`, steep above `upper`, log
/// growth above `cap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CondBand {
    pub lower: f64,
    pub upper: f64,
    pub cap: f64,
}

impl Default for CondBand {
    fn default() -> Self {
        CondBand {
            lower: 1e10,
            upper: 1e12,
            cap: 1e13,
        }
    }
}

impl CondBand {
    pub fn is_valid(&self) -> bool {
        0.0 < self.lower && self.lower < self.upper && self.upper < self.cap
    }

    /// Cost of one condition number.
    pub fn cost(&self, cond: f64, kappa: f64) -> f64 {
        let c = if cond.is_finite() { cond } else { COND_SATURATION };
        let branch = if c <= self.lower {
            0
        } else if c <= self.upper {
            1
        } else if c <= self.cap {
            2
        } else {
            3
        };
        self.branch(branch, c, kappa)
    }

    /// Formula of branch `k` (0 to 3, in increasing `cond` order),
    /// evaluated regardless of where `cond` lies.
    pub fn branch(&self, k: usize, c: f64, kappa: f64) -> f64 {
        match k {
            0 => 0.1 * (self.lower - c + kappa).ln(),
            1 => 0.0,
            // (10/9)(c − 10¹²) for the default knots
            2 => (self.cap / (self.cap - self.upper) * (c - self.upper) + kappa).ln(),
            _ => (c + kappa).ln(),
        }
    }
}

/// Cost with the default knots `10¹⁰, 10¹², 10¹³`.
pub fn cost_single(cond: f64, kappa: f64) -> f64 {
    CondBand::default().cost(cond, kappa)
}

/// Frobenius condition number of the constant-augmented system of a stencil;
/// `+∞` when `B` is singular. `ε` is clamped like every strategy output.
pub fn stencil_cond(stencil: &PointSet, family: KernelFamily, eps: f64) -> f64 {
    let e = if eps.is_nan() { EPS_MIN } else { eps.clamp(EPS_MIN, EPS_MAX) };
    let kernel = KernelSpec::new(family, e).expect("clamped epsilon is valid");
    let b = assemble(stencil, &kernel, &PolyBasis::constant(stencil.dim()));
    frobenius_condition(&b)
}
