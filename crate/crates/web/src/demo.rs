use std::sync::{Arc, OnceLock};

use rbfshapenet::bench::{Func1d, OVERSAMPLING, STENCIL_1D};
use rbfshapenet::fd::cluster_interpolate_1d;
use rbfshapenet::neural::{model_from_str, stencil_cond, MlpModel};
use rbfshapenet::pde::{base_nodes, l1_error, Layout};
use rbfshapenet::points::linspace;
use rbfshapenet::{Error, KernelFamily, PointSet, Result, ShapeStrategy};

const MODEL_1D: &str = include_str!("../../core/models/imq_1d_n10.txt");

/// The embedded 1D IMQ network, parsed once.
pub fn model_1d() -> Arc<MlpModel> {
    static M: OnceLock<Arc<MlpModel>> = OnceLock::new();
    M.get_or_init(|| Arc::new(model_from_str(MODEL_1D).expect("embedded model parses")))
        .clone()
}

pub fn cond_curve(kernel: &str, n: usize, eps_lo: f64, eps_hi: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    let family: KernelFamily = kernel.parse()?;
    if n < 2 || samples < 2 || !(eps_lo > 0.0 && eps_lo < eps_hi && eps_hi.is_finite()) {
        return Err(Error::InvalidArgument("need n ≥ 2, samples ≥ 2 and 0 < eps_lo < eps_hi".into()));
    }
    let stencil = PointSet::linspace(0.0, 1.0, n);
    let (a, b) = (eps_lo.ln(), eps_hi.ln());
    Ok((0..samples)
        .map(|k| {
            let e = (a + (b - a) * k as f64 / (samples - 1) as f64).exp();
            (e, stencil_cond(&stencil, family, e))
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct Interp1d {
    pub nodes: Vec<f64>,
    pub x: Vec<f64>,
    pub exact: Vec<f64>,
    pub approx: Vec<f64>,
    pub l1_error: f64,
    pub eps: Vec<f64>,
    pub cond: Vec<f64>,
}

/// `nn` selects the embedded network; anything else uses the strategy grammar.
fn strategy(spec: &str) -> Result<ShapeStrategy> {
    match spec {
        "nn" => Ok(ShapeStrategy::Neural(model_1d())),
        s if s.starts_with("nn:") => Err(Error::InvalidStrategy(format!("{s} (no file access in the demo)"))),
        s => ShapeStrategy::parse(s),
    }
}

pub fn interpolate(func: &str, strategy_spec: &str, kernel: &str, n: usize, jitter_seed: Option<u64>) -> Result<Interp1d> {
    let f = match func {
        "f1" => Func1d::F1,
        "f2" => Func1d::F2,
        "one" => Func1d::One,
        other => return Err(Error::InvalidArgument(format!("unknown function `{other}`"))),
    };
    if !(STENCIL_1D..=20_000).contains(&n) {
        return Err(Error::InvalidArgument(format!("node count must be in {STENCIL_1D}..=20000")));
    }
    let family: KernelFamily = kernel.parse()?;
    let strategy = strategy(strategy_spec)?;
    let layout = jitter_seed.map_or(Layout::Equidistant, |seed| Layout::Jittered { seed });
    let nodes = base_nodes(layout, n);
    let values: Vec<f64> = nodes.iter().map(|&x| f.eval(x)).collect();
    let x = linspace(0.0, 1.0, OVERSAMPLING * n);
    let fit = cluster_interpolate_1d(&PointSet::new_1d(&nodes)?, &values, &x, STENCIL_1D, &strategy, family, true)?;
    let exact: Vec<f64> = x.iter().map(|&t| f.eval(t)).collect();
    let l1 = l1_error(&exact, &fit.values)?;
    Ok(Interp1d {
        nodes,
        x,
        exact,
        approx: fit.values,
        l1_error: l1,
        eps: fit.eps,
        cond: fit.cond,
    })
}

/// Predicted `ε` and the resulting condition number.
pub fn predict(xs: &[f64]) -> Result<(f64, f64)> {
    let model = model_1d();
    let stencil = PointSet::new_1d(xs)?;
    let eps = model.predict(&stencil)?;
    Ok((eps, stencil_cond(&stencil, model.kernel_family, eps)))
}
