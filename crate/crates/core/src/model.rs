//! Differentiable scoring functions with outputs in `[0, 1]`.
//!
//! Parameters are stored as one flat vector so the trainer can treat every
//! architecture uniformly. Layouts:
//!
//! * linear: `[w_1 .. w_d, b]`
//! * one-hidden-layer MLP of width `h`: `[W (h x d, row-major), c (h), v (h), b]`

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arch {
    /// `sigmoid(w.x + b)`
    LinearSigmoid,
    /// `sigmoid(v . tanh(W x + c) + b)`
    Mlp1TanhSigmoid { hidden: usize },
    /// `clamp(w.x + b, 0, 1)`; only used to express analytic test cases.
    LinearIdentityClamped,
}

impl Arch {
    pub fn param_len(self, input_dim: usize) -> usize {
        match self {
            Arch::LinearSigmoid | Arch::LinearIdentityClamped => input_dim + 1,
            Arch::Mlp1TanhSigmoid { hidden } => hidden * input_dim + 2 * hidden + 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arch::LinearSigmoid => "linear-sigmoid",
            Arch::Mlp1TanhSigmoid { .. } => "mlp1-tanh-sigmoid",
            Arch::LinearIdentityClamped => "linear-identity-clamped",
        }
    }

    fn validate(self, input_dim: usize) -> Result<()> {
        if input_dim == 0 {
            return Err(Error::Config("input_dim must be at least 1".into()));
        }
        if let Arch::Mlp1TanhSigmoid { hidden: 0 } = self {
            return Err(Error::Config("hidden width must be at least 1".into()));
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn sigmoid(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + libm::exp(-s))
    } else {
        let e = libm::exp(s);
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoringModel {
    arch: Arch,
    input_dim: usize,
    params: Vec<f64>,
}

impl ScoringModel {
    /// Weights uniform on `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
    pub fn init(arch: Arch, input_dim: usize, seed: u64) -> Result<Self> {
        arch.validate(input_dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; arch.param_len(input_dim)];
        let mut fill = |slice: &mut [f64], fan_in: usize| {
            let s = 1.0 / libm::sqrt(fan_in as f64);
            for p in slice {
                *p = rng.random_range(-s..=s);
            }
        };
        match arch {
            Arch::LinearSigmoid | Arch::LinearIdentityClamped => {
                fill(&mut params[..input_dim], input_dim);
            }
            Arch::Mlp1TanhSigmoid { hidden } => {
                let w_len = hidden * input_dim;
                fill(&mut params[..w_len], input_dim);
                let v_start = w_len + hidden;
                fill(&mut params[v_start..v_start + hidden], hidden);
            }
        }
        Ok(Self {
            arch,
            input_dim,
            params,
        })
    }

    pub fn from_params(arch: Arch, input_dim: usize, params: Vec<f64>) -> Result<Self> {
        arch.validate(input_dim)?;
        let expected = arch.param_len(input_dim);
        if params.len() != expected {
            return Err(Error::ParamLength {
                expected,
                got: params.len(),
            });
        }
        Ok(Self {
            arch,
            input_dim,
            params,
        })
    }

    pub fn arch(&self) -> Arch {
        self.arch
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.score_unchecked(x))
    }

    pub fn score_grad_params(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.params.len()];
        self.accumulate_grad_params(x, 1.0, &mut out);
        Ok(out)
    }

    pub fn score_grad_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut out = vec![0.0; self.input_dim];
        self.grad_input_into(x, &mut out);
        Ok(out)
    }

    fn linear_pre(&self, x: &[f64]) -> f64 {
        let d = self.input_dim;
        let mut s = self.params[d];
        for (w, xi) in self.params[..d].iter().zip(x) {
            s += w * xi;
        }
        s
    }

    /// Hidden activations `tanh(W x + c)` written into `hidden_out`; returns the output pre-activation.
    fn mlp_forward(&self, x: &[f64], hidden: usize, hidden_out: &mut [f64]) -> f64 {
        let d = self.input_dim;
        let (w, rest) = self.params.split_at(hidden * d);
        let (c, rest) = rest.split_at(hidden);
        let (v, b) = rest.split_at(hidden);
        let mut s = b[0];
        for j in 0..hidden {
            let mut z = c[j];
            for (wjk, xk) in w[j * d..(j + 1) * d].iter().zip(x) {
                z += wjk * xk;
            }
            let h = libm::tanh(z);
            hidden_out[j] = h;
            s += v[j] * h;
        }
        s
    }

    pub(crate) fn score_unchecked(&self, x: &[f64]) -> f64 {
        match self.arch {
            Arch::LinearSigmoid => sigmoid(self.linear_pre(x)),
            Arch::LinearIdentityClamped => self.linear_pre(x).clamp(0.0, 1.0),
            Arch::Mlp1TanhSigmoid { hidden } => {
                let mut h = vec![0.0; hidden];
                sigmoid(self.mlp_forward(x, hidden, &mut h))
            }
        }
    }

    /// `out += scale * df/dtheta`; returns the score.
    pub(crate) fn accumulate_grad_params(&self, x: &[f64], scale: f64, out: &mut [f64]) -> f64 {
        let d = self.input_dim;
        match self.arch {
            Arch::LinearSigmoid => {
                let f = sigmoid(self.linear_pre(x));
                let g = scale * f * (1.0 - f);
                for (o, xi) in out[..d].iter_mut().zip(x) {
                    *o += g * xi;
                }
                out[d] += g;
                f
            }
            Arch::LinearIdentityClamped => {
                let s = self.linear_pre(x);
                if (0.0..=1.0).contains(&s) {
                    for (o, xi) in out[..d].iter_mut().zip(x) {
                        *o += scale * xi;
                    }
                    out[d] += scale;
                }
                s.clamp(0.0, 1.0)
            }
            Arch::Mlp1TanhSigmoid { hidden } => {
                let mut h = vec![0.0; hidden];
                let f = sigmoid(self.mlp_forward(x, hidden, &mut h));
                let g = scale * f * (1.0 - f);
                let w_len = hidden * d;
                let v = &self.params[w_len + hidden..w_len + 2 * hidden];
                for j in 0..hidden {
                    let back = g * v[j] * (1.0 - h[j] * h[j]);
                    for (o, xk) in out[j * d..(j + 1) * d].iter_mut().zip(x) {
                        *o += back * xk;
                    }
                    out[w_len + j] += back;
                    out[w_len + hidden + j] += g * h[j];
                }
                out[w_len + 2 * hidden] += g;
                f
            }
        }
    }

    /// Writes `df/dx` into `out`; returns the score.
    pub(crate) fn grad_input_into(&self, x: &[f64], out: &mut [f64]) -> f64 {
        let d = self.input_dim;
        match self.arch {
            Arch::LinearSigmoid => {
                let f = sigmoid(self.linear_pre(x));
                let g = f * (1.0 - f);
                for (o, w) in out.iter_mut().zip(&self.params[..d]) {
                    *o = g * w;
                }
                f
            }
            Arch::LinearIdentityClamped => {
                let s = self.linear_pre(x);
                let active = (0.0..=1.0).contains(&s);
                for (o, w) in out.iter_mut().zip(&self.params[..d]) {
                    *o = if active { *w } else { 0.0 };
                }
                s.clamp(0.0, 1.0)
            }
            Arch::Mlp1TanhSigmoid { hidden } => {
                let mut h = vec![0.0; hidden];
                let f = sigmoid(self.mlp_forward(x, hidden, &mut h));
                let g = f * (1.0 - f);
                let w_len = hidden * d;
                let v = &self.params[w_len + hidden..w_len + 2 * hidden];
                out.iter_mut().for_each(|o| *o = 0.0);
                for j in 0..hidden {
                    let back = g * v[j] * (1.0 - h[j] * h[j]);
                    for (o, wjk) in out.iter_mut().zip(&self.params[j * d..(j + 1) * d]) {
                        *o += back * wjk;
                    }
                }
                f
            }
        }
    }
}
