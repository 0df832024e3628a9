//! Training loops for robust AUC optimization.
//!
//! Every iteration samples a batch, perturbs it with a K-step projected
//! gradient ascent on the penalized surrogate, then takes one projected step on
//! `alpha` (ascent), on the multipliers (descent on `lambda * eps + phi`), and on
//! `w = (theta, a, b)` (descent). All gradients are taken at the pre-update state.
//!
//! The imbalance ratio inside the surrogate is the batch ratio. With that ratio
//! the class-weighted means of the distribution-aware update,
//! `p * mean_pos + (1 - p) * mean_neg`, are exactly the batch mean, so all three
//! variants share one reduction and differ only in how examples are attacked
//! and which multipliers move.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auc::{auc_mann_whitney, surrogate, surrogate_grads, AuxParams, TiePolicy};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ScoringModel;
use crate::robust::{AttackConfig, DualState, InnerObjective, Multipliers, DEFAULT_LAMBDA_MAX};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// One multiplier and one radius shared by all examples.
    Df,
    /// Separate multipliers and radii for positives and negatives.
    Da,
    /// Minimax AUC surrogate without any perturbation.
    AucmBaseline,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Df => "df",
            Variant::Da => "da",
            Variant::AucmBaseline => "aucm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub variant: Variant,
    pub iterations: usize,
    pub batch_size: usize,
    pub eta_z: f64,
    pub eta_lambda: f64,
    pub eta_w: f64,
    pub eta_alpha: f64,
    pub steps_k: usize,
    /// Overall radius. `Da` splits it with [`split_epsilon`] using `k_split`.
    pub eps: f64,
    pub k_split: f64,
    pub lambda0: f64,
    pub lambda_max: f64,
    pub seed: u64,
    /// Multiply the outer learning rates by 0.1 at 50% and again at 75% of the run.
    pub step_decay: bool,
    pub attack_restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Df,
            iterations: 1000,
            batch_size: 128,
            eta_z: 15.0 / 255.0,
            eta_lambda: 0.1,
            eta_w: 0.1,
            eta_alpha: 0.1,
            steps_k: 10,
            eps: 0.1,
            k_split: 1.0,
            lambda0: 1.0,
            lambda_max: DEFAULT_LAMBDA_MAX,
            seed: 0,
            step_decay: false,
            attack_restarts: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta_lambda", self.eta_lambda),
            ("eta_w", self.eta_w),
            ("eta_alpha", self.eta_alpha),
            ("lambda_max", self.lambda_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        // a zero attack step is allowed: it switches the perturbation off
        if !(self.eta_z >= 0.0 && self.eta_z.is_finite()) {
            return Err(Error::Config(format!("eta_z must be non-negative, got {}", self.eta_z)));
        }
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch size must be at least 2".into()));
        }
        if self.steps_k == 0 {
            return Err(Error::Config("attack steps must be at least 1".into()));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::Config(format!("eps must be non-negative, got {}", self.eps)));
        }
        if !(0.0..=self.lambda_max).contains(&self.lambda0) {
            return Err(Error::Config(format!("lambda0 must lie in [0, {}]", self.lambda_max)));
        }
        Ok(())
    }

    fn attack(&self) -> AttackConfig {
        AttackConfig {
            steps: self.steps_k,
            step_size: self.eta_z,
            restarts: self.attack_restarts,
            restart_seed: self.seed,
        }
    }

    fn rate_scale(&self, t: usize) -> f64 {
        if !self.step_decay {
            return 1.0;
        }
        let t4 = 4 * t;
        if t4 >= 3 * self.iterations {
            0.01
        } else if 2 * t >= self.iterations {
            0.1
        } else {
            1.0
        }
    }
}

/// Splits an overall radius into per-class radii: `eps_pos = k eps` and
/// `eps_neg = (1 - k p) eps / (1 - p)`, so that `p eps_pos + (1 - p) eps_neg = eps`.
pub fn split_epsilon(eps: f64, p_hat: f64, k: f64) -> Result<(f64, f64)> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("eps must be non-negative, got {eps}")));
    }
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::ImbalanceRatio(p_hat));
    }
    if !(0.5..=1.5).contains(&k) {
        return Err(Error::Config(format!("split factor k={k} outside [0.5, 1.5]")));
    }
    if k * p_hat >= 1.0 {
        return Err(Error::Config(format!("k * p_hat = {} must be below 1", k * p_hat)));
    }
    Ok((k * eps, (1.0 - k * p_hat) * eps / (1.0 - p_hat)))
}

/// Uniform sample without replacement; a batch without positives has one
/// uniformly chosen slot replaced by a uniformly chosen positive.
pub fn sample_batch<R: Rng + ?Sized>(dataset: &Dataset, batch_size: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = dataset.len();
    if batch_size > n {
        return Err(Error::Config(format!("batch size {batch_size} exceeds dataset size {n}")));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let positives = dataset.positive_indices();
    if positives.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    let mut batch = index::sample(rng, n, batch_size).into_vec();
    if !batch.iter().any(|&i| dataset.label(i).is_positive()) {
        let slot = rng.random_range(0..batch_size);
        batch[slot] = positives[rng.random_range(0..positives.len())];
    }
    Ok(batch)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Dual objective `sum(lambda * eps) + mean(g(z') - lambda_y c(z, z'))` on the batch.
    pub objective: f64,
    /// `(lambda_pos, lambda_neg)` after the update.
    pub lambdas: [f64; 2],
    pub alpha: f64,
    /// Half-tie AUC of the clean batch, when both classes are present.
    pub batch_auc: Option<f64>,
    /// Mean transport cost of the batch perturbation.
    pub mean_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub model: ScoringModel,
    pub aux: AuxParams,
    pub dual: DualState,
    pub iteration: usize,
    pub history: Vec<IterationRecord>,
}

pub fn train_df(dataset: &Dataset, cfg: &TrainConfig, initial_model: ScoringModel) -> Result<TrainState> {
    expect_variant(cfg, Variant::Df)?;
    run(dataset, cfg, initial_model)
}

pub fn train_da(dataset: &Dataset, cfg: &TrainConfig, initial_model: ScoringModel) -> Result<TrainState> {
    expect_variant(cfg, Variant::Da)?;
    run(dataset, cfg, initial_model)
}

pub fn train_aucm_baseline(dataset: &Dataset, cfg: &TrainConfig, initial_model: ScoringModel) -> Result<TrainState> {
    expect_variant(cfg, Variant::AucmBaseline)?;
    run(dataset, cfg, initial_model)
}

/// Dispatches on `cfg.variant`.
pub fn train(dataset: &Dataset, cfg: &TrainConfig, initial_model: ScoringModel) -> Result<TrainState> {
    run(dataset, cfg, initial_model)
}

fn expect_variant(cfg: &TrainConfig, v: Variant) -> Result<()> {
    if cfg.variant != v {
        return Err(Error::Config(format!(
            "trainer for variant {} called with variant {}",
            v.name(),
            cfg.variant.name()
        )));
    }
    Ok(())
}

/// Initial dual state for a config and training set.
pub fn initial_dual(cfg: &TrainConfig, dataset: &Dataset) -> Result<DualState> {
    match cfg.variant {
        Variant::Df => DualState::single(cfg.lambda0, cfg.eps, cfg.lambda_max),
        Variant::AucmBaseline => DualState::single(cfg.lambda0, 0.0, cfg.lambda_max),
        Variant::Da => {
            let (eps_pos, eps_neg) = split_epsilon(cfg.eps, dataset.p_hat(), cfg.k_split)?;
            DualState::per_class(cfg.lambda0, eps_pos, eps_neg, cfg.lambda_max)
        }
    }
}

fn run(dataset: &Dataset, cfg: &TrainConfig, model: ScoringModel) -> Result<TrainState> {
    cfg.validate()?;
    if !dataset.has_both_classes() {
        return Err(Error::EmptyClass(if dataset.n_pos() == 0 { "positive" } else { "negative" }));
    }
    if dataset.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: dataset.dim(),
        });
    }
    let dual = initial_dual(cfg, dataset)?;
    let mut state = TrainState {
        model,
        aux: AuxParams::default(),
        dual,
        iteration: 0,
        history: Vec::with_capacity(cfg.iterations),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let attack = cfg.attack();
    let attacks = cfg.variant != Variant::AucmBaseline;
    let d = dataset.dim();
    let mut theta_grad = vec![0.0; state.model.params().len()];
    let mut x_adv = vec![0.0; d];
    let mut clean_pos = Vec::with_capacity(cfg.batch_size);
    let mut clean_neg = Vec::with_capacity(cfg.batch_size);

    for t in 0..cfg.iterations {
        let batch = sample_batch(dataset, cfg.batch_size, &mut rng)?;
        let b = batch.len() as f64;
        let n_pos_b = batch.iter().filter(|&&i| dataset.label(i).is_positive()).count();
        let p_b = n_pos_b as f64 / b;

        theta_grad.iter_mut().for_each(|g| *g = 0.0);
        let (mut sum_dalpha, mut sum_da, mut sum_db) = (0.0, 0.0, 0.0);
        let mut sum_phi = 0.0;
        let mut cost_sum = [0.0f64; 2];
        let mut class_count = [0usize; 2];
        clean_pos.clear();
        clean_neg.clear();

        let obj = InnerObjective {
            model: &state.model,
            aux: state.aux,
            p_hat: p_b,
        };
        for &i in &batch {
            let (x, y) = (dataset.row(i), dataset.label(i));
            let clean = state.model.score_unchecked(x);
            match y {
                Label::Positive => clean_pos.push(clean),
                Label::Negative => clean_neg.push(clean),
            }
            let lambda = state.dual.lambda_for(y);
            let cost = if attacks {
                let out = obj.pga(x, y, lambda, &attack);
                x_adv.copy_from_slice(&out.x_adv);
                out.cost
            } else {
                x_adv.copy_from_slice(x);
                0.0
            };
            let slot = class_slot(y);
            cost_sum[slot] += cost;
            class_count[slot] += 1;

            let f = state.model.score_unchecked(&x_adv);
            sum_phi += surrogate(&state.aux, p_b, f, y) - lambda * cost;
            let gr = surrogate_grads(&state.aux, p_b, f, y);
            sum_dalpha += gr.dalpha;
            sum_da += gr.da;
            sum_db += gr.db;
            state.model.accumulate_grad_params(&x_adv, gr.df, &mut theta_grad);
        }

        let dual_term = match state.dual.multipliers {
            Multipliers::Single { lambda, eps } => lambda * eps,
            Multipliers::PerClass {
                lambda_pos,
                lambda_neg,
                eps_pos,
                eps_neg,
            } => lambda_pos * eps_pos + lambda_neg * eps_neg,
        };
        let objective = dual_term + sum_phi / b;
        let batch_auc = if clean_pos.is_empty() || clean_neg.is_empty() {
            None
        } else {
            Some(auc_mann_whitney(&clean_pos, &clean_neg, TiePolicy::Half)?)
        };

        let scale = cfg.rate_scale(t);
        let (eta_w, eta_alpha, eta_lambda) = (cfg.eta_w * scale, cfg.eta_alpha * scale, cfg.eta_lambda * scale);

        state.aux.alpha += eta_alpha * (sum_dalpha / b);
        state.aux.a -= eta_w * (sum_da / b);
        state.aux.b -= eta_w * (sum_db / b);
        state.aux.project();
        for (p, g) in state.model.params_mut().iter_mut().zip(&theta_grad) {
            *p -= eta_w * (g / b);
        }

        match &mut state.dual.multipliers {
            Multipliers::Single { lambda, eps } if cfg.variant == Variant::Df => {
                let mean_cost = (cost_sum[0] + cost_sum[1]) / b;
                *lambda -= eta_lambda * (*eps - mean_cost);
            }
            Multipliers::PerClass {
                lambda_pos,
                lambda_neg,
                eps_pos,
                eps_neg,
            } => {
                // a class missing from the batch keeps its multiplier
                if class_count[0] > 0 {
                    *lambda_pos -= eta_lambda * (*eps_pos - cost_sum[0] / class_count[0] as f64);
                }
                if class_count[1] > 0 {
                    *lambda_neg -= eta_lambda * (*eps_neg - cost_sum[1] / class_count[1] as f64);
                }
            }
            Multipliers::Single { .. } => {}
        }
        state.dual.project();

        state.iteration = t + 1;
        state.history.push(IterationRecord {
            iteration: t + 1,
            objective,
            lambdas: state.dual.lambdas(),
            alpha: state.aux.alpha,
            batch_auc,
            mean_cost: (cost_sum[0] + cost_sum[1]) / b,
        });
    }
    Ok(state)
}

fn class_slot(y: Label) -> usize {
    match y {
        Label::Positive => 0,
        Label::Negative => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_synthetic, BlobSpec, Scaler};
    use crate::model::Arch;

    fn separable(n: usize) -> Dataset {
        let features = (0..n).map(|i| if i % 2 == 0 { 0.9 } else { 0.1 }).collect();
        let labels = (0..n)
            .map(|i| if i % 2 == 0 { Label::Positive } else { Label::Negative })
            .collect();
        Dataset::new(features, labels, 1, vec![Scaler::IDENTITY]).unwrap()
    }

    fn training_auc(state: &TrainState, ds: &Dataset) -> f64 {
        let mut pos = vec![];
        let mut neg = vec![];
        for i in 0..ds.len() {
            let s = state.model.score(ds.row(i)).unwrap();
            if ds.label(i).is_positive() {
                pos.push(s)
            } else {
                neg.push(s)
            }
        }
        auc_mann_whitney(&pos, &neg, TiePolicy::Half).unwrap()
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_epsilon(0.5, 0.2, 1.0).unwrap(), (0.5, 0.5));
        let (p, n) = split_epsilon(0.5, 0.2, 0.5).unwrap();
        assert_eq!(p, 0.25);
        assert!((n - 0.5625).abs() < 1e-15);
        assert!((0.2 * p + 0.8 * n - 0.5).abs() < 1e-15);
        assert_eq!(split_epsilon(0.0, 0.3, 1.2).unwrap(), (0.0, 0.0));
        assert!(split_epsilon(0.5, 0.8, 1.5).is_err());
        assert!(split_epsilon(0.5, 0.2, 2.0).is_err());
    }

    #[test]
    fn sampler_forces_a_positive() {
        let mut labels = vec![Label::Negative; 50];
        labels[17] = Label::Positive;
        let ds = Dataset::new(vec![0.5; 50], labels, 1, vec![Scaler::IDENTITY]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let b = sample_batch(&ds, 4, &mut rng).unwrap();
            assert!(b.contains(&17));
            let mut sorted = b.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), 4);
        }
        let mut whole = sample_batch(&ds, 50, &mut rng).unwrap();
        whole.sort_unstable();
        assert_eq!(whole, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn sampler_guards() {
        let ds = Dataset::new(vec![0.5; 5], vec![Label::Negative; 5], 1, vec![Scaler::IDENTITY]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_batch(&ds, 2, &mut rng), Err(Error::EmptyClass("positive")));
        let ds = separable(6);
        assert!(sample_batch(&ds, 7, &mut rng).is_err());
    }

    #[test]
    fn sampler_every_batch_has_a_positive() {
        let mut labels = vec![Label::Negative; 100];
        for l in labels.iter_mut().take(10) {
            *l = Label::Positive;
        }
        let ds = Dataset::new(vec![0.5; 100], labels, 1, vec![Scaler::IDENTITY]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let b = sample_batch(&ds, 8, &mut rng).unwrap();
            assert!(b.iter().any(|&i| ds.label(i).is_positive()));
        }
    }

    fn cfg(variant: Variant) -> TrainConfig {
        TrainConfig {
            variant,
            iterations: 200,
            batch_size: 16,
            eps: 0.05,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn domains_hold_every_iteration() {
        let ds = make_lt();
        for variant in [Variant::Df, Variant::Da] {
            let c = TrainConfig { eta_lambda: 5.0, eta_alpha: 2.0, eta_w: 2.0, ..cfg(variant) };
            let m = ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 4 }, 2, 3).unwrap();
            let st = train(&ds, &c, m).unwrap();
            for r in &st.history {
                assert!((-1.0..=1.0).contains(&r.alpha));
                assert!(r.lambdas.iter().all(|l| (0.0..=c.lambda_max).contains(l)));
                assert!(r.objective.is_finite());
                if let Some(a) = r.batch_auc {
                    assert!((0.0..=1.0).contains(&a));
                }
            }
            assert!((0.0..=1.0).contains(&st.aux.a) && (0.0..=1.0).contains(&st.aux.b));
        }
    }

    fn make_lt() -> Dataset {
        let ds = gen_synthetic(200, 2, BlobSpec::default(), 8).unwrap();
        crate::data::make_long_tailed(&ds, 0.2, 8).unwrap()
    }

    #[test]
    fn deterministic_reruns() {
        let ds = make_lt();
        for variant in [Variant::Df, Variant::Da, Variant::AucmBaseline] {
            let m = ScoringModel::init(Arch::LinearSigmoid, 2, 5).unwrap();
            let a = train(&ds, &cfg(variant), m.clone()).unwrap();
            let b = train(&ds, &cfg(variant), m).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn ablation_equivalence() {
        let ds = make_lt();
        let m = ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 3 }, 2, 5).unwrap();
        let off = |v| TrainConfig { eta_z: 0.0, eps: 0.0, ..cfg(v) };
        let base = train_aucm_baseline(&ds, &off(Variant::AucmBaseline), m.clone()).unwrap();
        let df = train_df(&ds, &off(Variant::Df), m.clone()).unwrap();
        let da = train_da(&ds, &off(Variant::Da), m).unwrap();
        assert_eq!(base.history, df.history);
        assert_eq!(base.history, da.history);
        assert_eq!(base.model, df.model);
        assert_eq!(base.model, da.model);
        assert_eq!(base.aux, da.aux);
    }

    #[test]
    fn variant_mismatch_is_rejected() {
        let ds = make_lt();
        let m = ScoringModel::init(Arch::LinearSigmoid, 2, 5).unwrap();
        assert!(train_df(&ds, &cfg(Variant::Da), m.clone()).is_err());
        assert!(train_da(&ds, &cfg(Variant::AucmBaseline), m.clone()).is_err());
        assert!(train_aucm_baseline(&ds, &cfg(Variant::Df), m).is_err());
    }

    #[test]
    fn lambda_moves_against_the_budget_gap() {
        let ds = make_lt();
        let m = ScoringModel::init(Arch::LinearSigmoid, 2, 5).unwrap();
        let c = TrainConfig { eps: 0.0, eta_z: 0.5, iterations: 1, ..cfg(Variant::Df) };
        let st = train_df(&ds, &c, m.clone()).unwrap();
        // any movement costs more than a zero budget: lambda must grow
        assert!(st.history[0].mean_cost > 0.0);
        assert!(st.history[0].lambdas[0] > c.lambda0);

        let c = TrainConfig { eps: 10.0, iterations: 1, ..c };
        let st = train_df(&ds, &c, m).unwrap();
        assert!(st.history[0].lambdas[0] < 1.0);
    }

    #[test]
    fn separable_line_reaches_perfect_auc() {
        let ds = separable(40);
        for variant in [Variant::AucmBaseline, Variant::Df, Variant::Da] {
            let m = ScoringModel::init(Arch::LinearSigmoid, 1, 1).unwrap();
            let c = TrainConfig { iterations: 500, batch_size: 8, eps: 0.01, ..cfg(variant) };
            let st = train(&ds, &c, m).unwrap();
            assert_eq!(training_auc(&st, &ds), 1.0, "{variant:?}");
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let ds = make_lt();
        let m = ScoringModel::init(Arch::LinearSigmoid, 2, 5).unwrap();
        for bad in [
            TrainConfig { batch_size: 1, ..cfg(Variant::Df) },
            TrainConfig { iterations: 0, ..cfg(Variant::Df) },
            TrainConfig { eta_w: 0.0, ..cfg(Variant::Df) },
            TrainConfig { lambda0: 2e3, ..cfg(Variant::Df) },
        ] {
            assert!(matches!(train(&ds, &bad, m.clone()), Err(Error::Config(_))));
        }
        let wrong_dim = ScoringModel::init(Arch::LinearSigmoid, 3, 5).unwrap();
        assert!(train(&ds, &cfg(Variant::Df), wrong_dim).is_err());
    }

    #[test]
    fn step_decay_schedule() {
        let c = TrainConfig { step_decay: true, iterations: 100, ..TrainConfig::default() };
        assert_eq!(c.rate_scale(0), 1.0);
        assert_eq!(c.rate_scale(49), 1.0);
        assert_eq!(c.rate_scale(50), 0.1);
        assert_eq!(c.rate_scale(75), 0.01);
    }
}
