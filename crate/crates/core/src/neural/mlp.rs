//! A small fully connected network `H(x) = σ_p(A_p(… σ_1(A_1 x + b_1)) + b_p)`
//! with ReLU hidden layers and a linear last layer.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::kernel::KernelFamily;
use crate::linalg::Matrix;
use crate::neural::features::FeatureSpec;
use crate::points::PointSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Linear => "linear",
        }
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "linear" => Ok(Activation::Linear),
            _ => Err(Error::CorruptModel(format!("unknown activation `{s}`"))),
        }
    }
}

/// Map from the network output `H` to the shape parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputMap {
    /// `ε = H`
    Identity,
    /// `ε = exp(H)`
    Exp,
}

impl OutputMap {
    pub fn name(self) -> &'static str {
        match self {
            OutputMap::Identity => "identity",
            OutputMap::Exp => "exp",
        }
    }

    #[inline]
    pub fn apply(self, h: f64) -> f64 {
        match self {
            OutputMap::Identity => h,
            OutputMap::Exp => h.exp(),
        }
    }

    /// `dε/dH` at `h`.
    #[inline]
    pub fn derivative(self, h: f64) -> f64 {
        match self {
            OutputMap::Identity => 1.0,
            OutputMap::Exp => h.exp(),
        }
    }

    /// `H` that produces `eps`.
    pub fn inverse(self, eps: f64) -> f64 {
        match self {
            OutputMap::Identity => eps,
            OutputMap::Exp => eps.ln(),
        }
    }
}

impl FromStr for OutputMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(OutputMap::Identity),
            "exp" => Ok(OutputMap::Exp),
            _ => Err(Error::CorruptModel(format!("unknown output map `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// `d_out × d_in`
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    fn num_params(&self) -> usize {
        self.weights.rows() * self.weights.cols() + self.bias.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub output_map: OutputMap,
    pub feature_spec: FeatureSpec,
    pub kernel_family: KernelFamily,
    /// Free-form key/value metadata (training hyperparameters and such).
    pub provenance: Vec<(String, String)>,
}

/// Hidden widths of the shipped networks.
pub const HIDDEN_1D: [usize; 3] = [14, 8, 3];
pub const HIDDEN_2D: [usize; 3] = [16, 8, 3];

impl MlpModel {
    /// Checks that layer shapes chain and end in one linear output.
    pub fn from_layers(
        layers: Vec<Layer>,
        output_map: OutputMap,
        feature_spec: FeatureSpec,
        kernel_family: KernelFamily,
    ) -> Result<Self> {
        let model = MlpModel {
            layers,
            output_map,
            feature_spec,
            kernel_family,
            provenance: Vec::new(),
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let last = self
            .layers
            .last()
            .ok_or_else(|| Error::CorruptModel("model has no layers".into()))?;
        if last.output_dim() != 1 {
            return Err(Error::SchemaVersionMismatch(format!(
                "output dimension must be 1, got {}",
                last.output_dim()
            )));
        }
        if last.activation != Activation::Linear {
            return Err(Error::CorruptModel("last layer must be linear".into()));
        }
        let mut d = self.feature_spec.input_dim();
        for (i, l) in self.layers.iter().enumerate() {
            if l.input_dim() != d || l.bias.len() != l.output_dim() {
                return Err(Error::CorruptModel(format!("layer {i} has inconsistent shape")));
            }
            d = l.output_dim();
        }
        Ok(())
    }

    /// He-uniform hidden layers, `±1e−2` uniform output layer, zero biases
    /// except the output bias, which starts at `output_map.inverse(init_eps)`.
    pub fn init<R: Rng>(
        feature_spec: FeatureSpec,
        hidden: &[usize],
        kernel_family: KernelFamily,
        output_map: OutputMap,
        init_eps: f64,
        rng: &mut R,
    ) -> Self {
        let mut dims = vec![feature_spec.input_dim()];
        dims.extend_from_slice(hidden);
        dims.push(1);
        let p = dims.len() - 1;
        let layers = (0..p)
            .map(|k| {
                let (din, dout) = (dims[k], dims[k + 1]);
                let last = k == p - 1;
                let bound = if last { 1e-2 } else { (6.0 / din as f64).sqrt() };
                let w: Vec<f64> = (0..din * dout).map(|_| rng.gen_range(-bound..=bound)).collect();
                let mut bias = vec![0.0; dout];
                if last {
                    bias[0] = output_map.inverse(init_eps);
                }
                Layer {
                    weights: Matrix::from_rows(dout, din, w),
                    bias,
                    activation: if last { Activation::Linear } else { Activation::Relu },
                }
            })
            .collect();
        MlpModel {
            layers,
            output_map,
            feature_spec,
            kernel_family,
            provenance: Vec::new(),
        }
    }

    /// `[d_0, d_1, …, d_p]`.
    pub fn layer_dims(&self) -> Vec<usize> {
        let mut d = vec![self.feature_spec.input_dim()];
        d.extend(self.layers.iter().map(|l| l.output_dim()));
        d
    }

    pub fn dim(&self) -> usize {
        self.feature_spec.dim
    }

    pub fn stencil_size(&self) -> usize {
        self.feature_spec.stencil_size
    }

    /// `H(x)`.
    pub fn forward(&self, features: &[f64]) -> Result<f64> {
        let d0 = self.feature_spec.input_dim();
        if features.len() != d0 {
            return Err(Error::ShapeMismatch { expected: d0, got: features.len() });
        }
        let mut a = features.to_vec();
        for l in &self.layers {
            a = affine(l, &a);
            if l.activation == Activation::Relu {
                a.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        Ok(a[0])
    }

    /// `ε` for already standardized features.
    pub fn epsilon_from_features(&self, features: &[f64]) -> Result<f64> {
        Ok(self.output_map.apply(self.forward(features)?))
    }

    /// `ε` for a stencil (unclamped).
    pub fn predict(&self, stencil: &PointSet) -> Result<f64> {
        let f = self.feature_spec.features(stencil)?;
        self.epsilon_from_features(&f)
    }

    /// `H(x)` together with `∂H/∂W` in the flat parameter layout of
    /// [`MlpModel::params`].
    pub fn forward_with_grad(&self, features: &[f64]) -> Result<(f64, Vec<f64>)> {
        let d0 = self.feature_spec.input_dim();
        if features.len() != d0 {
            return Err(Error::ShapeMismatch { expected: d0, got: features.len() });
        }
        let mut acts: Vec<Vec<f64>> = vec![features.to_vec()];
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let z = affine(l, acts.last().unwrap());
            let a = match l.activation {
                Activation::Relu => z.iter().map(|v| v.max(0.0)).collect(),
                Activation::Linear => z.clone(),
            };
            pre.push(z);
            acts.push(a);
        }
        let h = acts.last().unwrap()[0];

        let mut grad = vec![0.0; self.num_params()];
        let offsets = self.param_offsets();
        // δ = ∂H/∂z for the current layer
        let mut delta = vec![1.0];
        for k in (0..self.layers.len()).rev() {
            let l = &self.layers[k];
            if l.activation == Activation::Relu {
                for (d, z) in delta.iter_mut().zip(&pre[k]) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &acts[k];
            let (din, dout) = (l.input_dim(), l.output_dim());
            let off = offsets[k];
            for i in 0..dout {
                for j in 0..din {
                    grad[off + i * din + j] = delta[i] * input[j];
                }
                grad[off + din * dout + i] = delta[i];
            }
            if k > 0 {
                let mut next = vec![0.0; din];
                for i in 0..dout {
                    if delta[i] == 0.0 {
                        continue;
                    }
                    for (j, n) in next.iter_mut().enumerate() {
                        *n += l.weights[(i, j)] * delta[i];
                    }
                }
                delta = next;
            }
        }
        Ok((h, grad))
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(Layer::num_params).sum()
    }

    fn param_offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.layers.len());
        let mut acc = 0;
        for l in &self.layers {
            off.push(acc);
            acc += l.num_params();
        }
        off
    }

    /// All parameters, layer by layer: weights row-major, then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            p.extend_from_slice(l.weights.as_slice());
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.num_params(), "parameter vector has wrong length");
        let mut at = 0;
        for l in &mut self.layers {
            let (r, c) = (l.weights.rows(), l.weights.cols());
            l.weights = Matrix::from_rows(r, c, p[at..at + r * c].to_vec());
            at += r * c;
            let nb = l.bias.len();
            l.bias.copy_from_slice(&p[at..at + nb]);
            at += nb;
        }
    }

    /// `‖W‖²`: squared sum of every weight and bias.
    pub fn squared_norm(&self) -> f64 {
        self.params().iter().map(|v| v * v).sum()
    }

    pub fn set_provenance(&mut self, key: &str, value: impl fmt::Display) {
        let value = value.to_string();
        match self.provenance.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.provenance.push((key.to_string(), value)),
        }
    }

    pub fn provenance(&self, key: &str) -> Option<&str> {
        self.provenance
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn affine(l: &Layer, x: &[f64]) -> Vec<f64> {
    let mut z = l.weights.mul_vec(x);
    for (zi, b) in z.iter_mut().zip(&l.bias) {
        *zi += b;
    }
    z
}
