use crate::points::Point;

/// Monomials `x^a y^b` with `a + b ≤ degree`; degree −1 disables the block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyBasis {
    degree: i32,
    dim: usize,
    exponents: Vec<(u32, u32)>,
}

impl PolyBasis {
    pub fn new(degree: i32, dim: usize) -> Self {
        assert!(degree >= -1, "polynomial degree must be >= -1");
        assert!(dim == 1 || dim == 2, "dimension must be 1 or 2");
        let mut exponents = Vec::new();
        for total in 0..=degree.max(-1) {
            let total = total as u32;
            if dim == 1 {
                exponents.push((total, 0));
            } else {
                for b in 0..=total {
                    exponents.push((total - b, b));
                }
            }
        }
        PolyBasis { degree, dim, exponents }
    }

    /// Constants only.
    pub fn constant(dim: usize) -> Self {
        PolyBasis::new(0, dim)
    }

    pub fn none(dim: usize) -> Self {
        PolyBasis::new(-1, dim)
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of monomials `m`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn eval_into(&self, p: &Point, out: &mut [f64]) {
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *o = p[0].powi(a as i32) * p[1].powi(b as i32);
        }
    }

    pub fn laplacian_into(&self, p: &Point, out: &mut [f64]) {
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            let (a, b) = (a as i32, b as i32);
            let mut v = 0.0;
            if a >= 2 {
                v += (a * (a - 1)) as f64 * p[0].powi(a - 2) * p[1].powi(b);
            }
            if b >= 2 {
                v += (b * (b - 1)) as f64 * p[0].powi(a) * p[1].powi(b - 2);
            }
            *o = v;
        }
    }
}
