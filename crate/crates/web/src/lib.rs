//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! The plain functions in [`demo`] do the work and are what native tests
//! call; the exported wrappers only convert errors for JavaScript.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: rbfshapenet::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[ε₀, cond₀, ε₁, cond₁, …]` for `n` equispaced nodes on `[0, 1]`,
/// `samples` values of `ε` log-spaced over `[eps_lo, eps_hi]`.
#[wasm_bindgen]
pub fn cond_curve(kernel: &str, n: usize, eps_lo: f64, eps_hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    demo::cond_curve(kernel, n, eps_lo, eps_hi, samples)
        .map(|pts| pts.into_iter().flat_map(|(e, c)| [e, c]).collect())
        .map_err(js)
}

#[wasm_bindgen]
pub struct Interpolation {
    inner: demo::Interp1d,
}

#[wasm_bindgen]
impl Interpolation {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn exact(&self) -> Vec<f64> {
        self.inner.exact.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn approx(&self) -> Vec<f64> {
        self.inner.approx.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> Vec<f64> {
        self.inner.nodes.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn l1_error(&self) -> f64 {
        self.inner.l1_error
    }
    #[wasm_bindgen(getter)]
    pub fn eps(&self) -> Vec<f64> {
        self.inner.eps.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn cond(&self) -> Vec<f64> {
        self.inner.cond.clone()
    }
}

/// Cluster interpolation of `f1`, `f2` or `one` on `n` nodes.
#[wasm_bindgen]
pub fn interpolate(func: &str, strategy: &str, kernel: &str, n: usize, jitter_seed: Option<u32>) -> Result<Interpolation, JsError> {
    demo::interpolate(func, strategy, kernel, n, jitter_seed.map(u64::from))
        .map(|inner| Interpolation { inner })
        .map_err(js)
}

/// `[ε, cond]` predicted by the embedded 1D IMQ network for 10 nodes.
#[wasm_bindgen]
pub fn predict(xs: Vec<f64>) -> Result<Vec<f64>, JsError> {
    demo::predict(&xs).map(|(e, c)| vec![e, c]).map_err(js)
}
