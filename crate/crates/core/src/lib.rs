//! Distributionally robust AUC optimization.
//!
//! The crate is `no_std` and only needs an allocator. It contains the scoring
//! models with hand-written gradients, the instance-wise minimax AUC surrogate,
//! the Wasserstein-Lagrangian inner attacks together with exact brute-force
//! oracles for tiny instances, the distribution-free and distribution-aware
//! training loops, and the dataset transformations used to build desk-scale
//! experiments. File formats and the command line live in the `drauc` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod auc;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod robust;
pub mod trainer;

pub use auc::{AuxParams, LabeledScore, TiePolicy};
pub use data::Dataset;
pub use error::{Error, Result};
pub use model::{Arch, ScoringModel};
pub use robust::{AttackConfig, DualState};
pub use trainer::{TrainConfig, TrainState, Variant};

/// Binary label. Positives are the minority (tail) class in long-tailed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn from_bit(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

/// Clamp into the unit interval.
#[inline]
pub(crate) fn unit_clip(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}
