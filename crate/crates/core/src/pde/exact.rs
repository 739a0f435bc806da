//! Reference solutions and the L1 error measure.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Initial condition of the 1D heat problem on `[0, 1]` with zero
/// Dirichlet data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialCondition {
    /// `−x² + x`
    Quadratic,
    /// `6 sin(πx)`
    Sine,
}

impl InitialCondition {
    pub fn name(self) -> &'static str {
        match self {
            InitialCondition::Quadratic => "quad",
            InitialCondition::Sine => "sine",
        }
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            InitialCondition::Quadratic => -x * x + x,
            InitialCondition::Sine => 6.0 * (PI * x).sin(),
        }
    }
}

/// Number of odd Fourier modes needed so that the first omitted term of the
/// quadratic-IC series is below `1e-16` at time `t`.
pub fn quadratic_series_terms(t: f64) -> usize {
    let bound = |n: f64| 8.0 / (n * PI).powi(3) * (-(n * PI).powi(2) * t).exp();
    let mut k = 0usize;
    // terms are n = 2k+1; stop at the first n whose bound is already tiny
    while bound((2 * k + 1) as f64) >= 1e-16 {
        k += 1;
    }
    k
}

/// `u(x, t)` for the heat problem.
pub fn exact_heat(ic: InitialCondition, x: f64, t: f64) -> f64 {
    match ic {
        InitialCondition::Sine => 6.0 * (PI * x).sin() * (-PI * PI * t).exp(),
        InitialCondition::Quadratic => exact_quadratic(x, t, quadratic_series_terms(t)),
    }
}

fn exact_quadratic(x: f64, t: f64, terms: usize) -> f64 {
    // even modes vanish; sum from the smallest term up
    (0..terms)
        .rev()
        .map(|k| {
            let n = (2 * k + 1) as f64;
            8.0 / (n * PI).powi(3) * (n * PI * x).sin() * (-(n * PI).powi(2) * t).exp()
        })
        .sum()
}

/// `u(·, t)` at every node, sharing the truncation across nodes.
pub fn exact_heat_profile(ic: InitialCondition, xs: &[f64], t: f64) -> Vec<f64> {
    match ic {
        InitialCondition::Sine => xs.iter().map(|&x| exact_heat(ic, x, t)).collect(),
        InitialCondition::Quadratic => {
            let terms = quadratic_series_terms(t);
            xs.iter().map(|&x| exact_quadratic(x, t, terms)).collect()
        }
    }
}

/// `1/N Σ |u_e(x_i) − u_a(x_i)|`.
pub fn l1_error(exact: &[f64], approx: &[f64]) -> Result<f64> {
    if exact.len() != approx.len() {
        return Err(Error::LengthMismatch(exact.len(), approx.len()));
    }
    if exact.is_empty() {
        return Ok(0.0);
    }
    let s: f64 = exact.iter().zip(approx).map(|(a, b)| (a - b).abs()).sum();
    Ok(s / exact.len() as f64)
}

/// Exact solution of the 2D Poisson test problem, `sin(2πxy)`.
pub fn poisson_exact(x: f64, y: f64) -> f64 {
    (2.0 * PI * x * y).sin()
}

/// Its Laplacian, `−4π² sin(2πxy)(x² + y²)`.
pub fn poisson_forcing(x: f64, y: f64) -> f64 {
    -4.0 * PI * PI * (2.0 * PI * x * y).sin() * (x * x + y * y)
}
