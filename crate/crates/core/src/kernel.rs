use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Radial kernel family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    /// Inverse multiquadric, `1/√(1+(εr)²)`.
    Imq,
    /// Gaussian, `exp(−(εr)²)`.
    Gaussian,
}

impl KernelFamily {
    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Imq => "imq",
            KernelFamily::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "imq" => Ok(KernelFamily::Imq),
            "gaussian" | "ga" | "gauss" => Ok(KernelFamily::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown kernel `{other}`"))),
        }
    }
}

/// A kernel family paired with its shape parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    epsilon: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "shape parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(KernelSpec { family, epsilon })
    }

    pub fn imq(epsilon: f64) -> Self {
        KernelSpec::new(KernelFamily::Imq, epsilon).expect("invalid epsilon")
    }

    pub fn gaussian(epsilon: f64) -> Self {
        KernelSpec::new(KernelFamily::Gaussian, epsilon).expect("invalid epsilon")
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        KernelSpec::new(self.family, epsilon)
    }

    /// `φ(r)`.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let s = (self.epsilon * r).powi(2);
        match self.family {
            KernelFamily::Imq => 1.0 / (1.0 + s).sqrt(),
            KernelFamily::Gaussian => (-s).exp(),
        }
    }

    /// Laplacian of `x ↦ φ(‖x‖)` at radius `r` in `dim` dimensions.
    ///
    /// Written as `φ'' + (dim−1)·φ'/r` with `φ'/r` simplified in closed
    /// form, so `r = 0` needs no special case and yields `dim·φ''(0)`.
    #[inline]
    pub fn laplacian(&self, r: f64, dim: usize) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        let s = e2 * r * r;
        let d = dim as f64;
        match self.family {
            KernelFamily::Imq => {
                let w = 1.0 + s;
                let w32 = w * w.sqrt();
                -d * e2 / w32 + 3.0 * e2 * s / (w32 * w)
            }
            KernelFamily::Gaussian => (4.0 * e2 * s - 2.0 * d * e2) * (-s).exp(),
        }
    }
}
