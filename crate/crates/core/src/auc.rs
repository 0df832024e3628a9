//! The instance-wise minimax square-loss AUC surrogate and AUC metrics.
//!
//! For a score `f` and label `y` the surrogate is
//!
//! ```text
//! g = (1-p)(f-a)^2 [y=1] + p(f-b)^2 [y=0]
//!   + 2(1+alpha)(p f [y=0] - (1-p) f [y=1]) - p(1-p) alpha^2
//! ```
//!
//! With the scorer fixed, the empirical mean of `g` is minimized over `(a, b)`
//! and maximized over `alpha` at the class means `a* = mean(f+)`, `b* = mean(f-)`,
//! `alpha* = b* - a*`, where it equals `p(1-p) (pairwise square risk - 1)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::Label;

/// Auxiliary saddle variables. `a, b` live in `[0, 1]`, `alpha` in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AuxParams {
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
}

impl AuxParams {
    pub fn new(a: f64, b: f64, alpha: f64) -> Result<Self> {
        let aux = Self { a, b, alpha };
        aux.validate()?;
        Ok(aux)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::AuxDomain { name: "a", value: self.a });
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::AuxDomain { name: "b", value: self.b });
        }
        if !(-1.0..=1.0).contains(&self.alpha) {
            return Err(Error::AuxDomain {
                name: "alpha",
                value: self.alpha,
            });
        }
        Ok(())
    }

    /// Euclidean projection onto the box domains.
    pub fn project(&mut self) {
        self.a = self.a.clamp(0.0, 1.0);
        self.b = self.b.clamp(0.0, 1.0);
        self.alpha = self.alpha.clamp(-1.0, 1.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledScore {
    pub f: f64,
    pub y: Label,
}

/// Partial derivatives of the surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SurrogateGrads {
    pub df: f64,
    pub da: f64,
    pub db: f64,
    pub dalpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// A tied pair counts one half.
    #[default]
    Half,
    /// A tied pair counts zero.
    Strict,
}

fn check_p_hat(p_hat: f64) -> Result<()> {
    if p_hat > 0.0 && p_hat < 1.0 {
        Ok(())
    } else {
        Err(Error::ImbalanceRatio(p_hat))
    }
}

pub fn g_loss(aux: &AuxParams, p_hat: f64, f: f64, y: Label) -> Result<f64> {
    check_p_hat(p_hat)?;
    aux.validate()?;
    Ok(surrogate(aux, p_hat, f, y))
}

pub fn g_grads(aux: &AuxParams, p_hat: f64, f: f64, y: Label) -> Result<SurrogateGrads> {
    check_p_hat(p_hat)?;
    aux.validate()?;
    Ok(surrogate_grads(aux, p_hat, f, y))
}

#[inline]
pub(crate) fn surrogate(aux: &AuxParams, p: f64, f: f64, y: Label) -> f64 {
    let class_term = match y {
        Label::Positive => {
            let d = f - aux.a;
            (1.0 - p) * d * d - 2.0 * (1.0 + aux.alpha) * (1.0 - p) * f
        }
        Label::Negative => {
            let d = f - aux.b;
            p * d * d + 2.0 * (1.0 + aux.alpha) * p * f
        }
    };
    class_term - p * (1.0 - p) * aux.alpha * aux.alpha
}

#[inline]
pub(crate) fn surrogate_grads(aux: &AuxParams, p: f64, f: f64, y: Label) -> SurrogateGrads {
    let penalty = -2.0 * p * (1.0 - p) * aux.alpha;
    match y {
        Label::Positive => SurrogateGrads {
            df: 2.0 * (1.0 - p) * (f - aux.a) - 2.0 * (1.0 + aux.alpha) * (1.0 - p),
            da: -2.0 * (1.0 - p) * (f - aux.a),
            db: 0.0,
            dalpha: -2.0 * (1.0 - p) * f + penalty,
        },
        Label::Negative => SurrogateGrads {
            df: 2.0 * p * (f - aux.b) + 2.0 * (1.0 + aux.alpha) * p,
            da: 0.0,
            db: -2.0 * p * (f - aux.b),
            dalpha: 2.0 * p * f + penalty,
        },
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn non_empty(pos: &[f64], neg: &[f64]) -> Result<()> {
    if pos.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass("negative"));
    }
    Ok(())
}

/// Saddle point of the empirical surrogate for fixed scores.
pub fn closed_form_aux(pos_scores: &[f64], neg_scores: &[f64]) -> Result<AuxParams> {
    non_empty(pos_scores, neg_scores)?;
    let a = mean(pos_scores);
    let b = mean(neg_scores);
    Ok(AuxParams { a, b, alpha: b - a })
}

/// Mean of `(1 - (f+ - f-))^2` over all positive/negative pairs.
pub fn pairwise_sq_risk(pos_scores: &[f64], neg_scores: &[f64]) -> Result<f64> {
    non_empty(pos_scores, neg_scores)?;
    let mut total = 0.0;
    for &fp in pos_scores {
        for &fn_ in neg_scores {
            let m = 1.0 - (fp - fn_);
            total += m * m;
        }
    }
    Ok(total / (pos_scores.len() * neg_scores.len()) as f64)
}

pub(crate) fn split_scores(scores: &[LabeledScore]) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for s in scores {
        match s.y {
            Label::Positive => pos.push(s.f),
            Label::Negative => neg.push(s.f),
        }
    }
    (pos, neg)
}

/// Empirical mean of the surrogate at the closed-form saddle point, with the
/// imbalance ratio taken from the labels.
pub fn saddle_value(scores: &[LabeledScore]) -> Result<f64> {
    let (pos, neg) = split_scores(scores);
    let aux = closed_form_aux(&pos, &neg)?;
    let p_hat = pos.len() as f64 / scores.len() as f64;
    let total: f64 = scores.iter().map(|s| surrogate(&aux, p_hat, s.f, s.y)).sum();
    Ok(total / scores.len() as f64)
}

/// Wilcoxon-Mann-Whitney AUC in `O((n+ + n-) log n-)`.
pub fn auc_mann_whitney(pos_scores: &[f64], neg_scores: &[f64], tie: TiePolicy) -> Result<f64> {
    non_empty(pos_scores, neg_scores)?;
    let mut neg: Vec<f64> = neg_scores.to_vec();
    neg.sort_by(f64::total_cmp);
    // twice the count of wins plus ties, kept integral
    let mut doubled: u128 = 0;
    for &fp in pos_scores {
        let below = neg.partition_point(|&v| v < fp);
        let not_above = neg.partition_point(|&v| v <= fp);
        doubled += 2 * below as u128;
        if tie == TiePolicy::Half {
            doubled += (not_above - below) as u128;
        }
    }
    let pairs = (pos_scores.len() as u128) * (neg_scores.len() as u128);
    Ok(doubled as f64 / (2 * pairs) as f64)
}
