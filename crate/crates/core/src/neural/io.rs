//! Text model files.
//!
//! ```text
//! schema_version = 1
//! dim = 1
//! feature_mode = distance
//! layer_dims = 9 14 8 3 1
//! weights[0] = …        (row-major)
//! ```
//!
//! Reals use the shortest representation that parses back to the same bits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::linalg::Matrix;
use crate::neural::features::{DistanceTransform, FeatureMode, FeatureSpec};
use crate::neural::mlp::{Activation, Layer, MlpModel, OutputMap};

pub const SCHEMA_VERSION: u32 = 1;
const PROVENANCE_PREFIX: &str = "provenance.";

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

pub fn model_to_string(model: &MlpModel) -> String {
    let mut s = String::new();
    let spec = &model.feature_spec;
    let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
    kv("schema_version", SCHEMA_VERSION.to_string());
    kv("dim", spec.dim.to_string());
    kv("feature_mode", spec.mode.name().into());
    kv("feature_transform", spec.transform.name().into());
    kv("output_map", model.output_map.name().into());
    kv("stencil_size", spec.stencil_size.to_string());
    kv("kernel_family", model.kernel_family.name().into());
    let dims = model.layer_dims();
    kv(
        "layer_dims",
        dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "),
    );
    kv(
        "activations",
        model.layers.iter().map(|l| l.activation.name()).collect::<Vec<_>>().join(" "),
    );
    for (i, l) in model.layers.iter().enumerate() {
        kv(&format!("weights[{i}]"), join_f64(l.weights.as_slice()));
        kv(&format!("biases[{i}]"), join_f64(&l.bias));
    }
    kv("norm_mean", join_f64(&spec.mean));
    kv("norm_var", join_f64(&spec.var));
    for (k, v) in &model.provenance {
        kv(&format!("{PROVENANCE_PREFIX}{k}"), v.clone());
    }
    s
}

fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptModel(msg.into())
}

fn parse_list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>> {
    v.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| corrupt(format!("bad value `{t}` in `{key}`"))))
        .collect()
}

pub fn model_from_str(text: &str) -> Result<MlpModel> {
    let mut map: HashMap<String, String> = HashMap::new();
    let mut provenance = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| corrupt(format!("line {} is not `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if let Some(p) = k.strip_prefix(PROVENANCE_PREFIX) {
            provenance.push((p.to_string(), v.to_string()));
        } else if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(corrupt(format!("duplicate key `{k}`")));
        }
    }
    let get = |k: &str| map.get(k).map(String::as_str).ok_or_else(|| corrupt(format!("missing `{k}`")));

    let version: u32 = get("schema_version")?
        .parse()
        .map_err(|_| corrupt("bad schema_version"))?;
    if version != SCHEMA_VERSION {
        return Err(Error::SchemaVersionMismatch(format!(
            "file has schema {version}, expected {SCHEMA_VERSION}"
        )));
    }
    let dims: Vec<usize> = parse_list(get("layer_dims")?, "layer_dims")?;
    if dims.len() < 2 {
        return Err(corrupt("need at least one layer"));
    }
    if *dims.last().unwrap() != 1 {
        return Err(Error::SchemaVersionMismatch(format!(
            "output dimension must be 1, got {}",
            dims.last().unwrap()
        )));
    }
    let dim: usize = get("dim")?.parse().map_err(|_| corrupt("bad dim"))?;
    let mode: FeatureMode = get("feature_mode")?.parse().map_err(|_| corrupt("bad feature_mode"))?;
    let transform = match map.get("feature_transform") {
        Some(t) => t.parse::<DistanceTransform>().map_err(|_| corrupt("bad feature_transform"))?,
        None => DistanceTransform::Inverse,
    };
    let output_map = match map.get("output_map") {
        Some(t) => t.parse::<OutputMap>()?,
        None => OutputMap::Identity,
    };
    let n: usize = get("stencil_size")?.parse().map_err(|_| corrupt("bad stencil_size"))?;
    let family: KernelFamily = get("kernel_family")?
        .parse()
        .map_err(|_| corrupt("bad kernel_family"))?;
    let acts: Vec<Activation> = match map.get("activations") {
        Some(a) => a.split_whitespace().map(str::parse).collect::<Result<_>>()?,
        None => (1..dims.len())
            .map(|k| if k + 1 == dims.len() { Activation::Linear } else { Activation::Relu })
            .collect(),
    };
    if acts.len() != dims.len() - 1 {
        return Err(corrupt("activation count does not match layer count"));
    }

    let spec = FeatureSpec::new(dim, mode, transform, n).map_err(|e| corrupt(e.to_string()))?;
    if spec.input_dim() != dims[0] {
        return Err(corrupt(format!(
            "input dimension {} does not match the feature spec ({})",
            dims[0],
            spec.input_dim()
        )));
    }
    let mean: Vec<f64> = parse_list(get("norm_mean")?, "norm_mean")?;
    let var: Vec<f64> = parse_list(get("norm_var")?, "norm_var")?;
    let spec = spec.with_stats(mean, var).map_err(|e| corrupt(e.to_string()))?;

    let mut layers = Vec::with_capacity(dims.len() - 1);
    for (i, act) in acts.into_iter().enumerate() {
        let (din, dout) = (dims[i], dims[i + 1]);
        let wkey = format!("weights[{i}]");
        let bkey = format!("biases[{i}]");
        let w: Vec<f64> = parse_list(get(&wkey)?, &wkey)?;
        let b: Vec<f64> = parse_list(get(&bkey)?, &bkey)?;
        if w.len() != din * dout || b.len() != dout {
            return Err(corrupt(format!("layer {i} has the wrong number of entries")));
        }
        if w.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(corrupt(format!("layer {i} has non-finite entries")));
        }
        layers.push(Layer {
            weights: Matrix::from_rows(dout, din, w),
            bias: b,
            activation: act,
        });
    }
    let mut model = MlpModel::from_layers(layers, output_map, spec, family)?;
    model.provenance = provenance;
    Ok(model)
}

/// Feature-spec sidecar: dimension, mode, transform, stencil size and the
/// fitted statistics, in the model file's `key = value` syntax.
pub fn spec_to_string(spec: &FeatureSpec) -> String {
    let mut s = String::new();
    let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
    kv("schema_version", SCHEMA_VERSION.to_string());
    kv("dim", spec.dim.to_string());
    kv("feature_mode", spec.mode.name().into());
    kv("feature_transform", spec.transform.name().into());
    kv("stencil_size", spec.stencil_size.to_string());
    kv("norm_mean", join_f64(&spec.mean));
    kv("norm_var", join_f64(&spec.var));
    s
}

pub fn spec_from_str(text: &str) -> Result<FeatureSpec> {
    let mut map: HashMap<&str, &str> = HashMap::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (k, v) = line.split_once('=').ok_or_else(|| corrupt(format!("bad line `{line}`")))?;
        map.insert(k.trim(), v.trim());
    }
    let get = |k: &str| map.get(k).copied().ok_or_else(|| corrupt(format!("missing `{k}`")));
    if get("schema_version")? != SCHEMA_VERSION.to_string() {
        return Err(Error::SchemaVersionMismatch(format!(
            "stats file has schema {}",
            get("schema_version")?
        )));
    }
    let dim: usize = get("dim")?.parse().map_err(|_| corrupt("bad dim"))?;
    let mode: FeatureMode = get("feature_mode")?.parse().map_err(|_| corrupt("bad feature_mode"))?;
    let transform: DistanceTransform = get("feature_transform")?
        .parse()
        .map_err(|_| corrupt("bad feature_transform"))?;
    let n: usize = get("stencil_size")?.parse().map_err(|_| corrupt("bad stencil_size"))?;
    let mean = parse_list(get("norm_mean")?, "norm_mean")?;
    let var = parse_list(get("norm_var")?, "norm_var")?;
    FeatureSpec::new(dim, mode, transform, n)
        .and_then(|s| s.with_stats(mean, var))
        .map_err(|e| corrupt(e.to_string()))
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    model_from_str(&fs::read_to_string(path)?)
}
