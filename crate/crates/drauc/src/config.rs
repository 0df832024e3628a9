//! Resolved run settings. Values come from defaults, then the `DRAUC_SEED`
//! environment variable, then a `key=value` config file, then flags; later
//! sources override earlier ones.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use drauc_core::{Arch, TrainConfig};

use crate::checkpoint::{config_entries, parse_variant};
use crate::error::{Error, Result};
use crate::fmt_f64;

pub const SEED_ENV: &str = "DRAUC_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub train: TrainConfig,
    pub arch: Arch,
    /// Synthetic dataset size and dimension used when no CSV is given.
    pub n: usize,
    pub dim: usize,
    /// Target positive fraction after long-tailing; `None` keeps the data as is.
    pub ratio: Option<f64>,
    pub sigmas: Vec<f64>,
    pub robust_eps: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            arch: Arch::Mlp1TanhSigmoid { hidden: 8 },
            n: 2000,
            dim: 2,
            ratio: None,
            sigmas: vec![0.1, 0.2],
            robust_eps: vec![0.05, 0.1],
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("invalid value {raw:?} for `{key}`")))
}

fn list(key: &str, raw: &str) -> Result<Vec<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',').map(|v| value(key, v)).collect()
}

fn join(vs: &[f64]) -> String {
    vs.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

impl Settings {
    /// Sets one field by its flag name (without the leading dashes).
    pub fn apply(&mut self, key: &str, raw: &str) -> Result<()> {
        let t = &mut self.train;
        match key {
            "variant" => {
                t.variant = parse_variant(raw.trim())
                    .ok_or_else(|| Error::Usage(format!("unknown variant {raw:?} (expected df, da or aucm)")))?
            }
            "eps" => t.eps = value(key, raw)?,
            "k" => t.k_split = value(key, raw)?,
            "eta-z" => t.eta_z = value(key, raw)?,
            "eta-lambda" => t.eta_lambda = value(key, raw)?,
            "eta-w" => t.eta_w = value(key, raw)?,
            "eta-alpha" => t.eta_alpha = value(key, raw)?,
            "steps-K" => t.steps_k = value(key, raw)?,
            "iters-T" => t.iterations = value(key, raw)?,
            "batch" => t.batch_size = value(key, raw)?,
            "seed" => t.seed = value(key, raw)?,
            "lambda0" => t.lambda0 = value(key, raw)?,
            "lambda-max" => t.lambda_max = value(key, raw)?,
            "step-decay" => t.step_decay = value(key, raw)?,
            "restarts" => t.attack_restarts = value(key, raw)?,
            "ratio" => {
                self.ratio = match raw.trim() {
                    "" | "none" => None,
                    v => Some(value(key, v)?),
                }
            }
            "arch" => {
                self.arch = match raw.trim() {
                    "linear" | "linear-sigmoid" => Arch::LinearSigmoid,
                    "mlp" | "mlp1-tanh-sigmoid" => Arch::Mlp1TanhSigmoid {
                        hidden: self.hidden().unwrap_or(8),
                    },
                    other => return Err(Error::Usage(format!("unknown arch {other:?} (expected linear or mlp)"))),
                }
            }
            "hidden" => {
                let hidden = value(key, raw)?;
                if let Arch::Mlp1TanhSigmoid { .. } = self.arch {
                    self.arch = Arch::Mlp1TanhSigmoid { hidden };
                } else {
                    return Err(Error::Usage("`hidden` only applies to the mlp architecture".into()));
                }
            }
            "n" => self.n = value(key, raw)?,
            "dim" => self.dim = value(key, raw)?,
            "sigmas" => self.sigmas = list(key, raw)?,
            "robust-eps" => self.robust_eps = list(key, raw)?,
            other => return Err(Error::Usage(format!("unknown setting `{other}`"))),
        }
        Ok(())
    }

    fn hidden(&self) -> Option<usize> {
        match self.arch {
            Arch::Mlp1TanhSigmoid { hidden } => Some(hidden),
            _ => None,
        }
    }

    /// Applies a config file body. Blank lines and lines starting with `#` are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("config line {}: expected key=value", i + 1)))?;
            self.apply(k.trim(), v).map_err(|e| Error::Usage(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Defaults, then `env_seed`, then the file, then `flags`.
    pub fn resolve(env_seed: Option<&str>, config_file: Option<&Path>, flags: &[(&str, String)]) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(seed) = env_seed {
            s.apply("seed", seed)
                .map_err(|_| Error::Usage(format!("{SEED_ENV}={seed:?} is not an unsigned integer")))?;
        }
        if let Some(path) = config_file {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            s.apply_file_text(&text)?;
        }
        // arch before hidden, whatever order the flags came in
        let mut ordered: Vec<&(&str, String)> = flags.iter().collect();
        ordered.sort_by_key(|(k, _)| *k == "hidden");
        for (k, v) in ordered {
            s.apply(k, v)?;
        }
        s.train.validate()?;
        if let Some(r) = s.ratio {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Usage(format!("ratio must lie in (0, 1), got {r}")));
            }
        }
        Ok(s)
    }

    /// Every resolved setting as `(key, value)`, in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = config_entries(&self.train)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        out.push(("arch".into(), self.arch.name().into()));
        if let Some(h) = self.hidden() {
            out.push(("hidden".into(), h.to_string()));
        }
        out.push(("n".into(), self.n.to_string()));
        out.push(("dim".into(), self.dim.to_string()));
        out.push(("ratio".into(), self.ratio.map_or("none".into(), fmt_f64)));
        out.push(("sigmas".into(), join(&self.sigmas)));
        out.push(("robust-eps".into(), join(&self.robust_eps)));
        out
    }
}
