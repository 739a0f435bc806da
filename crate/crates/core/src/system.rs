//! Augmented RBF interpolation systems
//! `B = [[A, P], [Pᵀ, 0]]` with `A_ij = φ(‖x_i − x_j‖)` and `P_ik = p_k(x_i)`.

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{Lu, Matrix};
use crate::points::{distance, Point, PointSet};
use crate::poly::PolyBasis;

/// Relative residual accepted for dense interpolation solves.
pub const TOL_SOLVE: f64 = 1e-9;

/// Assembles `B` without factoring it.
pub fn assemble(points: &PointSet, kernel: &KernelSpec, poly: &PolyBasis) -> Matrix {
    let n = points.len();
    let m = poly.len();
    let mut b = Matrix::zeros(n + m, n + m);
    let pts = points.coords();
    for i in 0..n {
        b[(i, i)] = kernel.eval(0.0);
        for j in 0..i {
            let v = kernel.eval(distance(&pts[i], &pts[j]));
            b[(i, j)] = v;
            b[(j, i)] = v;
        }
    }
    let mut row = vec![0.0; m];
    for (i, p) in pts.iter().enumerate() {
        poly.eval_into(p, &mut row);
        for (k, &v) in row.iter().enumerate() {
            b[(i, n + k)] = v;
            b[(n + k, i)] = v;
        }
    }
    b
}

/// Frobenius condition number of the augmented matrix; `+∞` if singular.
pub fn condition_number(points: &PointSet, kernel: &KernelSpec, poly: &PolyBasis) -> f64 {
    crate::linalg::frobenius_condition(&assemble(points, kernel, poly))
}

/// A factored augmented system. Immutable once built.
#[derive(Clone, Debug)]
pub struct AugmentedSystem {
    points: PointSet,
    kernel: KernelSpec,
    poly: PolyBasis,
    matrix: Matrix,
    lu: Lu,
    cond: f64,
}

/// `λ` (one per node) and `γ` (one per monomial).
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolantCoefficients {
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl AugmentedSystem {
    pub fn build(points: &PointSet, kernel: KernelSpec, poly: PolyBasis) -> Result<Self> {
        Self::build_inner(points, kernel, poly, true)
    }

    /// Same as [`AugmentedSystem::build`] but skips the explicit inverse
    /// used for the condition number; `cond()` then returns NaN.
    pub fn build_without_condition(points: &PointSet, kernel: KernelSpec, poly: PolyBasis) -> Result<Self> {
        Self::build_inner(points, kernel, poly, false)
    }

    fn build_inner(points: &PointSet, kernel: KernelSpec, poly: PolyBasis, with_cond: bool) -> Result<Self> {
        if points.len() < poly.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points cannot carry {} polynomial terms",
                points.len(),
                poly.len()
            )));
        }
        if points.dim() != poly.dim() {
            return Err(Error::InvalidArgument("point/polynomial dimension mismatch".into()));
        }
        let matrix = assemble(points, &kernel, &poly);
        let lu = Lu::factor(&matrix)?;
        let cond = if with_cond {
            matrix.frobenius_norm() * lu.inverse().frobenius_norm()
        } else {
            f64::NAN
        };
        Ok(AugmentedSystem {
            points: points.clone(),
            kernel,
            poly,
            matrix,
            lu,
            cond,
        })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn poly(&self) -> &PolyBasis {
        &self.poly
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `‖B‖_F · ‖B⁻¹‖_F`.
    pub fn cond(&self) -> f64 {
        self.cond
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    /// `q(y) = (φ(‖y − x_1‖), …, φ(‖y − x_N‖), p_1(y), …, p_m(y))`.
    pub fn basis_row(&self, y: &Point) -> Vec<f64> {
        let n = self.points.len();
        let mut q = vec![0.0; self.size()];
        for (qi, x) in q.iter_mut().zip(self.points.coords()) {
            *qi = self.kernel.eval(distance(y, x));
        }
        self.poly.eval_into(y, &mut q[n..]);
        q
    }

    /// `Δq(y)`: kernel Laplacians, then polynomial Laplacians.
    pub fn laplacian_row(&self, y: &Point) -> Vec<f64> {
        let n = self.points.len();
        let dim = self.points.dim();
        let mut q = vec![0.0; self.size()];
        for (qi, x) in q.iter_mut().zip(self.points.coords()) {
            *qi = self.kernel.laplacian(distance(y, x), dim);
        }
        self.poly.laplacian_into(y, &mut q[n..]);
        q
    }

    pub fn solve_interpolant(&self, values: &[f64]) -> Result<InterpolantCoefficients> {
        let n = self.points.len();
        if values.len() != n {
            return Err(Error::LengthMismatch(values.len(), n));
        }
        let mut rhs = values.to_vec();
        rhs.resize(self.size(), 0.0);
        let mut sol = self.lu.solve(&rhs);
        let gamma = sol.split_off(n);
        Ok(InterpolantCoefficients { lambda: sol, gamma })
    }

    pub fn evaluate(&self, coeffs: &InterpolantCoefficients, y: &Point) -> f64 {
        let q = self.basis_row(y);
        let n = self.points.len();
        q[..n].iter().zip(&coeffs.lambda).map(|(a, b)| a * b).sum::<f64>()
            + q[n..].iter().zip(&coeffs.gamma).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Cardinal weights `Ψ_i(y) = [q(y) B⁻¹]_i`, `i ≤ N`, via one solve
    /// against `Bᵀ`.
    pub fn cardinal_row(&self, y: &Point) -> Vec<f64> {
        self.adjoint_weights(&self.basis_row(y))
    }

    /// Laplacian weights `[Δq(y) B⁻¹]_i`, `i ≤ N`.
    pub fn laplacian_weights(&self, y: &Point) -> Vec<f64> {
        self.adjoint_weights(&self.laplacian_row(y))
    }

    fn adjoint_weights(&self, q: &[f64]) -> Vec<f64> {
        let mut z = self.lu.solve_transpose(q);
        z.truncate(self.points.len());
        z
    }

    /// `‖B·[λ;γ] − [f;0]‖∞`.
    pub fn residual_inf(&self, coeffs: &InterpolantCoefficients, values: &[f64]) -> f64 {
        let mut x = coeffs.lambda.clone();
        x.extend_from_slice(&coeffs.gamma);
        let bx = self.matrix.mul_vec(&x);
        bx.iter()
            .enumerate()
            .map(|(i, v)| (v - values.get(i).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}
