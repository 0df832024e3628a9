//! Plain-text model checkpoints, one `key=value` per line.
//!
//! Floats are written with 17 significant digits so a load of a saved
//! checkpoint reproduces every field bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use drauc_core::data::Scaler;
use drauc_core::robust::Multipliers;
use drauc_core::{Arch, AuxParams, DualState, ScoringModel, TrainConfig, TrainState, Variant};

use crate::error::{Error, Result};
use crate::fmt_f64;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: String, expected: u32 },
    #[error("checkpoint is missing field `{0}`")]
    Missing(String),
    #[error("checkpoint field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("checkpoint line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: ScoringModel,
    pub aux: AuxParams,
    pub dual: DualState,
    pub scaler: Vec<Scaler>,
    pub cfg: TrainConfig,
    pub iteration: usize,
}

impl Checkpoint {
    pub fn from_state(state: &TrainState, cfg: &TrainConfig, scaler: Vec<Scaler>) -> Self {
        Self {
            model: state.model.clone(),
            aux: state.aux,
            dual: state.dual,
            scaler,
            cfg: *cfg,
            iteration: state.iteration,
        }
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    pub fn to_text(&self) -> String {
        let mut lines: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| lines.push((k.to_string(), v));
        let floats = |vs: &mut dyn Iterator<Item = f64>| vs.map(fmt_f64).collect::<Vec<_>>().join(",");

        put("format_version", FORMAT_VERSION.to_string());
        put("arch", self.model.arch().name().to_string());
        if let Arch::Mlp1TanhSigmoid { hidden } = self.model.arch() {
            put("hidden", hidden.to_string());
        }
        put("input_dim", self.model.input_dim().to_string());
        put("theta", floats(&mut self.model.params().iter().copied()));
        put("aux.a", fmt_f64(self.aux.a));
        put("aux.b", fmt_f64(self.aux.b));
        put("aux.alpha", fmt_f64(self.aux.alpha));
        match self.dual.multipliers {
            Multipliers::Single { lambda, eps } => {
                put("dual", "single".into());
                put("dual.lambda", fmt_f64(lambda));
                put("dual.eps", fmt_f64(eps));
            }
            Multipliers::PerClass {
                lambda_pos,
                lambda_neg,
                eps_pos,
                eps_neg,
            } => {
                put("dual", "per-class".into());
                put("dual.lambda_pos", fmt_f64(lambda_pos));
                put("dual.lambda_neg", fmt_f64(lambda_neg));
                put("dual.eps_pos", fmt_f64(eps_pos));
                put("dual.eps_neg", fmt_f64(eps_neg));
            }
        }
        put("dual.lambda_max", fmt_f64(self.dual.lambda_max));
        put("scaler.min", floats(&mut self.scaler.iter().map(|s| s.min)));
        put("scaler.max", floats(&mut self.scaler.iter().map(|s| s.max)));
        put("seed", self.cfg.seed.to_string());
        put("iteration", self.iteration.to_string());
        for (k, v) in config_entries(&self.cfg) {
            put(&format!("cfg.{k}"), v);
        }
        let mut out = String::new();
        for (k, v) in lines {
            out.push_str(&k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> std::result::Result<Self, CheckpointError> {
        let mut fields = Fields::split(text)?;
        let version = fields.take("format_version")?;
        if version != FORMAT_VERSION.to_string() {
            return Err(CheckpointError::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let arch = match fields.take("arch")?.as_str() {
            "linear-sigmoid" => Arch::LinearSigmoid,
            "linear-identity-clamped" => Arch::LinearIdentityClamped,
            "mlp1-tanh-sigmoid" => Arch::Mlp1TanhSigmoid {
                hidden: fields.parse("hidden")?,
            },
            other => return Err(field_err("arch", format!("unknown architecture {other:?}"))),
        };
        let input_dim: usize = fields.parse("input_dim")?;
        let theta = fields.floats("theta")?;
        let expected = arch.param_len(input_dim);
        if theta.len() != expected {
            return Err(field_err(
                "theta",
                format!("{} values, architecture needs {expected}", theta.len()),
            ));
        }
        let model = ScoringModel::from_params(arch, input_dim, theta).map_err(|e| field_err("theta", e.to_string()))?;
        let aux = AuxParams {
            a: fields.float("aux.a")?,
            b: fields.float("aux.b")?,
            alpha: fields.float("aux.alpha")?,
        };
        aux.validate().map_err(|e| field_err("aux", e.to_string()))?;
        let multipliers = match fields.take("dual")?.as_str() {
            "single" => Multipliers::Single {
                lambda: fields.float("dual.lambda")?,
                eps: fields.float("dual.eps")?,
            },
            "per-class" => Multipliers::PerClass {
                lambda_pos: fields.float("dual.lambda_pos")?,
                lambda_neg: fields.float("dual.lambda_neg")?,
                eps_pos: fields.float("dual.eps_pos")?,
                eps_neg: fields.float("dual.eps_neg")?,
            },
            other => return Err(field_err("dual", format!("unknown kind {other:?}"))),
        };
        let dual = DualState {
            multipliers,
            lambda_max: fields.float("dual.lambda_max")?,
        };
        dual.validate().map_err(|e| field_err("dual", e.to_string()))?;
        let mins = fields.floats("scaler.min")?;
        let maxs = fields.floats("scaler.max")?;
        if mins.len() != input_dim || maxs.len() != input_dim {
            return Err(field_err("scaler", format!("expected {input_dim} entries")));
        }
        let scaler = mins.into_iter().zip(maxs).map(|(min, max)| Scaler { min, max }).collect();
        let seed: u64 = fields.parse("seed")?;
        let iteration = fields.parse("iteration")?;
        let cfg = TrainConfig {
            variant: parse_variant(&fields.take("cfg.variant")?).ok_or_else(|| field_err("cfg.variant", "unknown variant".into()))?,
            iterations: fields.parse("cfg.iters-T")?,
            batch_size: fields.parse("cfg.batch")?,
            eta_z: fields.float("cfg.eta-z")?,
            eta_lambda: fields.float("cfg.eta-lambda")?,
            eta_w: fields.float("cfg.eta-w")?,
            eta_alpha: fields.float("cfg.eta-alpha")?,
            steps_k: fields.parse("cfg.steps-K")?,
            eps: fields.float("cfg.eps")?,
            k_split: fields.float("cfg.k")?,
            lambda0: fields.float("cfg.lambda0")?,
            lambda_max: fields.float("cfg.lambda-max")?,
            seed: fields.parse("cfg.seed")?,
            step_decay: fields.parse("cfg.step-decay")?,
            attack_restarts: fields.parse("cfg.restarts")?,
        };
        if cfg.seed != seed {
            return Err(field_err("seed", "does not match cfg.seed".into()));
        }
        fields.finish()?;
        Ok(Self {
            model,
            aux,
            dual,
            scaler,
            cfg,
            iteration,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_text(&text)?)
    }
}

pub fn parse_variant(s: &str) -> Option<Variant> {
    match s {
        "df" => Some(Variant::Df),
        "da" => Some(Variant::Da),
        "aucm" | "aucm-baseline" => Some(Variant::AucmBaseline),
        _ => None,
    }
}

/// Resolved training configuration as `(flag name, value)` pairs.
pub fn config_entries(cfg: &TrainConfig) -> Vec<(&'static str, String)> {
    vec![
        ("variant", cfg.variant.name().to_string()),
        ("iters-T", cfg.iterations.to_string()),
        ("batch", cfg.batch_size.to_string()),
        ("eta-z", fmt_f64(cfg.eta_z)),
        ("eta-lambda", fmt_f64(cfg.eta_lambda)),
        ("eta-w", fmt_f64(cfg.eta_w)),
        ("eta-alpha", fmt_f64(cfg.eta_alpha)),
        ("steps-K", cfg.steps_k.to_string()),
        ("eps", fmt_f64(cfg.eps)),
        ("k", fmt_f64(cfg.k_split)),
        ("lambda0", fmt_f64(cfg.lambda0)),
        ("lambda-max", fmt_f64(cfg.lambda_max)),
        ("seed", cfg.seed.to_string()),
        ("step-decay", cfg.step_decay.to_string()),
        ("restarts", cfg.attack_restarts.to_string()),
    ]
}

fn field_err(field: &str, reason: String) -> CheckpointError {
    CheckpointError::Field {
        field: field.to_string(),
        reason,
    }
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn split(text: &str) -> std::result::Result<Self, CheckpointError> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CheckpointError::Syntax {
                line: i + 1,
                reason: "expected key=value".into(),
            })?;
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(CheckpointError::Syntax {
                    line: i + 1,
                    reason: format!("duplicate key `{k}`"),
                });
            }
        }
        Ok(Self(map))
    }

    fn take(&mut self, key: &str) -> std::result::Result<String, CheckpointError> {
        self.0.remove(key).ok_or_else(|| CheckpointError::Missing(key.to_string()))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> std::result::Result<T, CheckpointError> {
        let raw = self.take(key)?;
        raw.parse().map_err(|_| field_err(key, format!("cannot parse {raw:?}")))
    }

    fn float(&mut self, key: &str) -> std::result::Result<f64, CheckpointError> {
        self.parse(key)
    }

    fn floats(&mut self, key: &str) -> std::result::Result<Vec<f64>, CheckpointError> {
        let raw = self.take(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|s| s.parse().map_err(|_| field_err(key, format!("cannot parse {s:?}"))))
            .collect()
    }

    fn finish(self) -> std::result::Result<(), CheckpointError> {
        match self.0.into_keys().next() {
            Some(k) => Err(field_err(&k, "unknown field".into())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        let model = ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 3 }, 2, 4).unwrap();
        Checkpoint {
            model,
            aux: AuxParams {
                a: 0.1 + 0.2,
                b: 1.0 / 3.0,
                alpha: -0.0,
            },
            dual: DualState::per_class(1.0, 0.5, 0.25, 1e3).unwrap(),
            scaler: vec![Scaler { min: -1.5, max: 2.0 / 7.0 }, Scaler::IDENTITY],
            cfg: TrainConfig {
                variant: Variant::Da,
                eps: 0.5,
                seed: 7,
                ..TrainConfig::default()
            },
            iteration: 42,
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let ck = sample();
        let back = Checkpoint::from_text(&ck.to_text()).unwrap();
        assert_eq!(back, ck);
        assert!(back.aux.alpha.is_sign_negative());
        assert_eq!(back.to_text(), ck.to_text());
    }

    #[test]
    fn version_mismatch() {
        let text = sample().to_text().replacen("format_version=1", "format_version=0", 1);
        assert!(matches!(
            Checkpoint::from_text(&text),
            Err(CheckpointError::VersionMismatch { .. })
        ));
    }

    #[test]
    fn tampered_theta_names_the_field() {
        let text = sample().to_text();
        let tampered: String = text
            .lines()
            .map(|l| {
                if let Some(rest) = l.strip_prefix("theta=") {
                    let mut vs: Vec<&str> = rest.split(',').collect();
                    vs.pop();
                    format!("theta={}\n", vs.join(","))
                } else {
                    format!("{l}\n")
                }
            })
            .collect();
        match Checkpoint::from_text(&tampered) {
            Err(CheckpointError::Field { field, .. }) => assert_eq!(field, "theta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_and_unknown_fields() {
        let text = sample().to_text().replace("aux.b=", "aux.bee=");
        assert_eq!(
            Checkpoint::from_text(&text),
            Err(CheckpointError::Missing("aux.b".into()))
        );
        let text = format!("{}extra=1\n", sample().to_text());
        assert!(matches!(Checkpoint::from_text(&text), Err(CheckpointError::Field { .. })));
    }
}
