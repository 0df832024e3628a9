//! Wasserstein-Lagrangian inner maximization and worst-case oracles.
//!
//! The robust surrogate of an example `z = (x, y)` is
//! `phi_lambda(z) = max_{x' in [0,1]^d} g(f(x'), y) - lambda * |x - x'|^2`,
//! and the dual objective is `lambda * eps + mean(phi_lambda)`. Labels never move:
//! transport across labels costs infinity.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auc::{self, auc_mann_whitney, surrogate, surrogate_grads, AuxParams, TiePolicy};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ScoringModel;
use crate::{unit_clip, Label};

/// Default upper end of the multiplier domain `[0, lambda_max]`.
pub const DEFAULT_LAMBDA_MAX: f64 = 1e3;

/// Projected gradient ascent settings for the inner maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    pub steps: usize,
    pub step_size: f64,
    /// Extra runs started from uniform random points of the box. Zero keeps the
    /// attack a deterministic function of its inputs.
    pub restarts: usize,
    pub restart_seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            steps: 10,
            step_size: 15.0 / 255.0,
            restarts: 0,
            restart_seed: 0,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::Config("attack steps must be at least 1".into()));
        }
        if !(self.step_size >= 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config(format!("invalid attack step size {}", self.step_size)));
        }
        Ok(())
    }
}

/// Lagrange multipliers and radii, single or per class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multipliers {
    Single { lambda: f64, eps: f64 },
    PerClass {
        lambda_pos: f64,
        lambda_neg: f64,
        eps_pos: f64,
        eps_neg: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualState {
    pub multipliers: Multipliers,
    pub lambda_max: f64,
}

impl DualState {
    pub fn single(lambda: f64, eps: f64, lambda_max: f64) -> Result<Self> {
        let s = Self {
            multipliers: Multipliers::Single { lambda, eps },
            lambda_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn per_class(lambda0: f64, eps_pos: f64, eps_neg: f64, lambda_max: f64) -> Result<Self> {
        let s = Self {
            multipliers: Multipliers::PerClass {
                lambda_pos: lambda0,
                lambda_neg: lambda0,
                eps_pos,
                eps_neg,
            },
            lambda_max,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_max > 0.0 && self.lambda_max.is_finite()) {
            return Err(Error::Config(format!("lambda_max must be positive, got {}", self.lambda_max)));
        }
        let in_range = |l: f64| (0.0..=self.lambda_max).contains(&l);
        let (lambdas_ok, eps_ok) = match self.multipliers {
            Multipliers::Single { lambda, eps } => (in_range(lambda), eps >= 0.0),
            Multipliers::PerClass {
                lambda_pos,
                lambda_neg,
                eps_pos,
                eps_neg,
            } => (
                in_range(lambda_pos) && in_range(lambda_neg),
                eps_pos >= 0.0 && eps_neg >= 0.0,
            ),
        };
        if !lambdas_ok {
            return Err(Error::Config(format!("multiplier outside [0, {}]", self.lambda_max)));
        }
        if !eps_ok {
            return Err(Error::Config("robustness radius must be non-negative".into()));
        }
        Ok(())
    }

    pub fn lambda_for(&self, y: Label) -> f64 {
        match (self.multipliers, y) {
            (Multipliers::Single { lambda, .. }, _) => lambda,
            (Multipliers::PerClass { lambda_pos, .. }, Label::Positive) => lambda_pos,
            (Multipliers::PerClass { lambda_neg, .. }, Label::Negative) => lambda_neg,
        }
    }

    pub fn eps_for(&self, y: Label) -> f64 {
        match (self.multipliers, y) {
            (Multipliers::Single { eps, .. }, _) => eps,
            (Multipliers::PerClass { eps_pos, .. }, Label::Positive) => eps_pos,
            (Multipliers::PerClass { eps_neg, .. }, Label::Negative) => eps_neg,
        }
    }

    /// `(lambda_pos, lambda_neg)`; both equal the single multiplier when there is one.
    pub fn lambdas(&self) -> [f64; 2] {
        [self.lambda_for(Label::Positive), self.lambda_for(Label::Negative)]
    }

    pub fn project(&mut self) {
        let hi = self.lambda_max;
        match &mut self.multipliers {
            Multipliers::Single { lambda, .. } => *lambda = lambda.clamp(0.0, hi),
            Multipliers::PerClass {
                lambda_pos, lambda_neg, ..
            } => {
                *lambda_pos = lambda_pos.clamp(0.0, hi);
                *lambda_neg = lambda_neg.clamp(0.0, hi);
            }
        }
    }
}

/// Squared Euclidean distance between features; `None` (infinite cost) across labels.
pub fn transport_cost(x: &[f64], y: Label, x_adv: &[f64], y_adv: Label) -> Result<Option<f64>> {
    if x.len() != x_adv.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: x_adv.len(),
        });
    }
    if y != y_adv {
        return Ok(None);
    }
    Ok(Some(sq_dist(x, x_adv)))
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// Result of the inner maximization for one example.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiOutcome {
    pub value: f64,
    pub x_adv: Vec<f64>,
    /// Transport cost `|x - x_adv|^2` of the returned point.
    pub cost: f64,
}

/// The penalized surrogate `x' -> g(f(x'), y) - lambda |x - x'|^2` for a fixed model.
#[derive(Debug, Clone, Copy)]
pub(crate) struct InnerObjective<'a> {
    pub model: &'a ScoringModel,
    pub aux: AuxParams,
    pub p_hat: f64,
}

impl InnerObjective<'_> {
    fn value(&self, x: &[f64], x_adv: &[f64], y: Label, lambda: f64) -> (f64, f64) {
        let f = self.model.score_unchecked(x_adv);
        let cost = sq_dist(x, x_adv);
        (surrogate(&self.aux, self.p_hat, f, y) - lambda * cost, cost)
    }

    fn ascend_from(
        &self,
        x: &[f64],
        y: Label,
        lambda: f64,
        cfg: &AttackConfig,
        start: Vec<f64>,
        best: &mut Option<PhiOutcome>,
    ) {
        let mut cur = start;
        let mut grad = vec![0.0; x.len()];
        let consider = |pt: &[f64], best: &mut Option<PhiOutcome>| {
            let (value, cost) = self.value(x, pt, y, lambda);
            if best.as_ref().is_none_or(|b| value > b.value) {
                *best = Some(PhiOutcome {
                    value,
                    x_adv: pt.to_vec(),
                    cost,
                });
            }
        };
        consider(&cur, best);
        if cfg.step_size == 0.0 {
            return;
        }
        for _ in 0..cfg.steps {
            let f = self.model.grad_input_into(&cur, &mut grad);
            let dg_df = surrogate_grads(&self.aux, self.p_hat, f, y).df;
            for k in 0..cur.len() {
                let ascent = dg_df * grad[k] - 2.0 * lambda * (cur[k] - x[k]);
                cur[k] = unit_clip(cur[k] + cfg.step_size * ascent);
            }
            consider(&cur, best);
        }
    }

    /// K-step projected gradient ascent started at `x`. The best visited
    /// iterate is returned, so the value never drops below the starting one.
    pub(crate) fn pga(&self, x: &[f64], y: Label, lambda: f64, cfg: &AttackConfig) -> PhiOutcome {
        let mut best = None;
        self.ascend_from(x, y, lambda, cfg, x.to_vec(), &mut best);
        if cfg.restarts > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.restart_seed);
            for _ in 0..cfg.restarts {
                let start: Vec<f64> = (0..x.len()).map(|_| rng.random_range(0.0..=1.0)).collect();
                self.ascend_from(x, y, lambda, cfg, start, &mut best);
            }
        }
        best.expect("the starting point is always considered")
    }

    /// Exact maximization over `{x} U {i / (resolution - 1)}` for scalar features.
    pub(crate) fn grid_max(&self, x: f64, y: Label, lambda: f64, resolution: usize) -> PhiOutcome {
        let (mut best_v, mut best_c) = self.value(&[x], &[x], y, lambda);
        let mut best_x = x;
        let step = 1.0 / (resolution - 1) as f64;
        for i in 0..resolution {
            let cand = i as f64 * step;
            let (v, c) = self.value(&[x], &[cand], y, lambda);
            if v > best_v {
                best_v = v;
                best_c = c;
                best_x = cand;
            }
        }
        PhiOutcome {
            value: best_v,
            x_adv: vec![best_x],
            cost: best_c,
        }
    }
}

fn check_inputs(model: &ScoringModel, aux: &AuxParams, p_hat: f64, x: &[f64]) -> Result<()> {
    if !(p_hat > 0.0 && p_hat < 1.0) {
        return Err(Error::ImbalanceRatio(p_hat));
    }
    aux.validate()?;
    if x.len() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: x.len(),
        });
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("multiplier must be finite and non-negative, got {lambda}")))
    }
}

/// Local worst case of one example by projected gradient ascent from `x`.
pub fn phi(
    model: &ScoringModel,
    aux: &AuxParams,
    p_hat: f64,
    lambda: f64,
    x: &[f64],
    y: Label,
    cfg: &AttackConfig,
) -> Result<PhiOutcome> {
    check_inputs(model, aux, p_hat, x)?;
    check_lambda(lambda)?;
    cfg.validate()?;
    let obj = InnerObjective { model, aux: *aux, p_hat };
    Ok(obj.pga(x, y, lambda, cfg))
}

/// Exact inner maximum for one-dimensional features, up to grid resolution.
pub fn phi_grid(
    model: &ScoringModel,
    aux: &AuxParams,
    p_hat: f64,
    lambda: f64,
    x: f64,
    y: Label,
    resolution: usize,
) -> Result<PhiOutcome> {
    check_inputs(model, aux, p_hat, &[x])?;
    check_lambda(lambda)?;
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    let obj = InnerObjective { model, aux: *aux, p_hat };
    Ok(obj.grid_max(x, y, lambda, resolution))
}

/// `lambda * eps + mean(phi_values)`.
pub fn lagrangian_objective(lambda: f64, eps: f64, phi_values: &[f64]) -> Result<f64> {
    if phi_values.is_empty() {
        return Err(Error::Empty("phi values"));
    }
    check_lambda(lambda)?;
    if !(eps >= 0.0) {
        return Err(Error::Config(format!("radius must be non-negative, got {eps}")));
    }
    let mean = phi_values.iter().sum::<f64>() / phi_values.len() as f64;
    Ok(lambda * eps + mean)
}

/// How the inner maximum is computed for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolver {
    Grid { resolution: usize },
    Ascent(AttackConfig),
}

impl InnerSolver {
    /// Exact grid for scalar features, gradient ascent otherwise.
    pub fn for_dim(dim: usize, resolution: usize, attack: AttackConfig) -> Self {
        if dim == 1 {
            InnerSolver::Grid { resolution }
        } else {
            InnerSolver::Ascent(attack)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualCurve {
    pub best_lambda: f64,
    pub best_value: f64,
    /// `(lambda, lambda * eps + mean phi_lambda)` for every grid point.
    pub curve: Vec<(f64, f64)>,
}

/// Evaluates the dual objective on a grid of multipliers and reports the minimizer.
pub fn dual_curve(
    model: &ScoringModel,
    aux: &AuxParams,
    p_hat: f64,
    dataset: &Dataset,
    eps: f64,
    lambda_grid: &[f64],
    solver: InnerSolver,
) -> Result<DualCurve> {
    if lambda_grid.is_empty() {
        return Err(Error::Empty("lambda grid"));
    }
    if lambda_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Config("lambda grid must be sorted ascending".into()));
    }
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if dataset.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: dataset.dim(),
        });
    }
    check_inputs(model, aux, p_hat, dataset.row(0))?;
    let obj = InnerObjective { model, aux: *aux, p_hat };
    let mut curve = Vec::with_capacity(lambda_grid.len());
    let mut phis = vec![0.0; dataset.len()];
    for &lambda in lambda_grid {
        check_lambda(lambda)?;
        for (i, slot) in phis.iter_mut().enumerate() {
            let (x, y) = (dataset.row(i), dataset.label(i));
            *slot = match solver {
                InnerSolver::Grid { resolution } => {
                    if dataset.dim() != 1 {
                        return Err(Error::Config("grid inner oracle needs scalar features".into()));
                    }
                    obj.grid_max(x[0], y, lambda, resolution.max(2)).value
                }
                InnerSolver::Ascent(cfg) => obj.pga(x, y, lambda, &cfg).value,
            };
        }
        curve.push((lambda, lagrangian_objective(lambda, eps, &phis)?));
    }
    let (best_lambda, best_value) = curve
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |acc, (l, v)| if v < acc.1 { (l, v) } else { acc });
    Ok(DualCurve {
        best_lambda,
        best_value,
        curve,
    })
}

/// Largest supported instance for [`brute_force_worst_case`].
pub const BRUTE_FORCE_MAX_POINTS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    /// Maximum of the empirical surrogate mean over feasible perturbations.
    pub sup_value: f64,
    pub positions: Vec<f64>,
    /// Mean transport cost of the maximizer.
    pub mean_cost: f64,
}

#[derive(Debug, Clone, Copy)]
struct Plan {
    cost: f64,
    value: f64,
    // candidate index + 1 per point, 0 where the point is not covered yet
    choice: [u32; BRUTE_FORCE_MAX_POINTS],
}

/// Keeps plans that no cheaper plan matches in value, sorted by cost.
fn pareto(mut plans: Vec<Plan>) -> Vec<Plan> {
    plans.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(b.value.total_cmp(&a.value)));
    let mut out: Vec<Plan> = Vec::new();
    for p in plans {
        if out.last().is_none_or(|last| p.value > last.value) {
            out.push(p);
        }
    }
    out
}

fn combine(a: &[Plan], b: &[Plan], within: impl Fn(f64) -> bool) -> Vec<Plan> {
    let mut out = Vec::new();
    for pa in a {
        for pb in b {
            let cost = pa.cost + pb.cost;
            if !within(cost) {
                // b is sorted by cost
                break;
            }
            let mut choice = pa.choice;
            for (c, extra) in choice.iter_mut().zip(pb.choice) {
                *c += extra;
            }
            out.push(Plan {
                cost,
                value: pa.value + pb.value,
                choice,
            });
        }
    }
    pareto(out)
}

/// Exact supremum of the empirical surrogate mean over all Monge
/// perturbations on the grid `{x_i} U {k / (resolution - 1)}` with mean
/// squared displacement at most `eps`. Labels are never changed.
///
/// Solved as a multiple-choice knapsack: per-point Pareto frontiers of
/// (cost, value) are merged within each half of the points, and the halves
/// are joined through a prefix maximum over the cost-sorted right half.
pub fn brute_force_worst_case(
    model: &ScoringModel,
    aux: &AuxParams,
    p_hat: f64,
    dataset: &Dataset,
    eps: f64,
    resolution: usize,
) -> Result<WorstCase> {
    let n = dataset.len();
    if n == 0 {
        return Err(Error::Empty("dataset"));
    }
    if n > BRUTE_FORCE_MAX_POINTS || dataset.dim() != 1 || model.input_dim() != 1 {
        return Err(Error::TooLarge(format!(
            "exhaustive search supports at most {BRUTE_FORCE_MAX_POINTS} scalar points, got {n} of dimension {}",
            dataset.dim()
        )));
    }
    if resolution < 101 {
        return Err(Error::Config(format!("grid resolution must be at least 101, got {resolution}")));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Config(format!("radius must be non-negative, got {eps}")));
    }
    check_inputs(model, aux, p_hat, dataset.row(0))?;

    let budget = eps * n as f64;
    let slack = 1e-12 * budget.max(1.0);
    let within = |c: f64| c <= budget + slack;

    let step = 1.0 / (resolution - 1) as f64;
    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut frontiers: Vec<Vec<Plan>> = Vec::with_capacity(n);
    for i in 0..n {
        let x = dataset.row(i)[0];
        let y = dataset.label(i);
        let mut cands = Vec::with_capacity(resolution + 1);
        cands.push(x);
        cands.extend((0..resolution).map(|k| k as f64 * step));
        let plans: Vec<Plan> = cands
            .iter()
            .enumerate()
            .filter_map(|(j, &c)| {
                let cost = (x - c) * (x - c);
                if !within(cost) {
                    return None;
                }
                let mut choice = [0u32; BRUTE_FORCE_MAX_POINTS];
                choice[i] = j as u32 + 1;
                let f = model.score_unchecked(&[c]);
                Some(Plan {
                    cost,
                    value: surrogate(aux, p_hat, f, y),
                    choice,
                })
            })
            .collect();
        frontiers.push(pareto(plans));
        candidates.push(cands);
    }

    let merge_all = |fs: &[Vec<Plan>]| -> Vec<Plan> {
        let mut acc = fs[0].clone();
        for f in &fs[1..] {
            acc = combine(&acc, f, within);
        }
        acc
    };
    let left = merge_all(&frontiers[..n.div_ceil(2)]);
    let right = if n > 1 {
        merge_all(&frontiers[n.div_ceil(2)..])
    } else {
        vec![Plan {
            cost: 0.0,
            value: 0.0,
            choice: [0; BRUTE_FORCE_MAX_POINTS],
        }]
    };
    // on a Pareto frontier value increases with cost, so the best partner for
    // a left plan is the most expensive right plan that still fits
    let mut best: Option<Plan> = None;
    for pl in &left {
        let fits = right.partition_point(|pr| within(pl.cost + pr.cost));
        if fits == 0 {
            continue;
        }
        let pr = &right[fits - 1];
        let value = pl.value + pr.value;
        if best.is_none_or(|b| value > b.value) {
            let mut choice = pl.choice;
            for (c, extra) in choice.iter_mut().zip(pr.choice) {
                *c += extra;
            }
            best = Some(Plan {
                cost: pl.cost + pr.cost,
                value,
                choice,
            });
        }
    }
    let best = best.expect("leaving every point in place is always feasible");
    let positions = (0..n)
        .map(|i| candidates[i][best.choice[i] as usize - 1])
        .collect();
    Ok(WorstCase {
        sup_value: best.value / n as f64,
        positions,
        mean_cost: best.cost / n as f64,
    })
}

/// Cheapest perturbation driving the strict AUC of the identity scorer to zero
/// on scalar features. Any such perturbation separates the classes at some
/// threshold `t` (positives at or below, negatives at or above), and for a fixed
/// `t` each point moves just to `t`; the threshold is scanned over a grid.
/// Returns `(mean squared cost, threshold)`.
pub fn min_cost_strict_auc_zero(pos: &[f64], neg: &[f64], resolution: usize) -> Result<(f64, f64)> {
    if pos.is_empty() {
        return Err(Error::EmptyClass("positive"));
    }
    if neg.is_empty() {
        return Err(Error::EmptyClass("negative"));
    }
    if resolution < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    let n = (pos.len() + neg.len()) as f64;
    let lo = pos.iter().chain(neg).copied().fold(f64::INFINITY, f64::min);
    let hi = pos.iter().chain(neg).copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best = (f64::INFINITY, lo);
    for k in 0..resolution {
        let t = lo + (hi - lo) * k as f64 / (resolution - 1) as f64;
        let sq = |v: f64| v * v;
        let pos_cost: f64 = pos.iter().map(|&x| sq((x - t).max(0.0))).sum();
        let neg_cost: f64 = neg.iter().map(|&x| sq((t - x).max(0.0))).sum();
        let cost = (pos_cost + neg_cost) / n;
        if cost < best.0 {
            best = (cost, t);
        }
    }
    Ok(best)
}

/// Collapsed two-cluster attack: both clusters move to their mass-weighted mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycenterAttack {
    pub p_hat: f64,
    pub target: f64,
    /// Mean squared transport cost of moving every point to `target`.
    pub cost: f64,
    /// Closed form `p(1-p)(x+ - x-)^2`.
    pub bound: f64,
}

impl BarycenterAttack {
    /// Strict AUC once every point sits on the target. Always zero.
    pub fn attacked_strict_auc(&self) -> f64 {
        auc_mann_whitney(&[self.target], &[self.target], TiePolicy::Strict)
            .expect("both classes are non-empty")
    }
}

pub fn prop1_barycenter_attack(x_pos: f64, x_neg: f64, n_pos: usize, n_neg: usize) -> Result<BarycenterAttack> {
    if n_pos == 0 {
        return Err(Error::EmptyClass("positive"));
    }
    if n_neg == 0 {
        return Err(Error::EmptyClass("negative"));
    }
    if !(0.0..=1.0).contains(&x_pos) || !(0.0..=1.0).contains(&x_neg) {
        return Err(Error::Config("cluster positions must lie in [0, 1]".into()));
    }
    let p = n_pos as f64 / (n_pos + n_neg) as f64;
    let target = p * x_pos + (1.0 - p) * x_neg;
    let cost = p * (x_pos - target) * (x_pos - target) + (1.0 - p) * (x_neg - target) * (x_neg - target);
    let gap = x_pos - x_neg;
    Ok(BarycenterAttack {
        p_hat: p,
        target,
        cost,
        bound: p * (1.0 - p) * gap * gap,
    })
}

/// Wasserstein radius for [`estimate_drauc`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Single(f64),
    PerClass { pos: f64, neg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub attack: AttackConfig,
    pub lambda_max: f64,
    pub bisection_steps: usize,
    pub tie: TiePolicy,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            attack: AttackConfig::default(),
            lambda_max: DEFAULT_LAMBDA_MAX,
            bisection_steps: 40,
            tie: TiePolicy::Half,
        }
    }
}

/// Attacks `rows` with a multiplier calibrated so that the mean realized cost
/// stays within `radius`; returns attacked scores in row order.
fn calibrated_scores(
    obj: &InnerObjective<'_>,
    dataset: &Dataset,
    rows: &[usize],
    radius: f64,
    cfg: &EstimateConfig,
) -> Vec<f64> {
    let clean = || rows.iter().map(|&i| obj.model.score_unchecked(dataset.row(i))).collect();
    if radius <= 0.0 || rows.is_empty() {
        return clean();
    }
    let run = |lambda: f64| -> (f64, Vec<f64>) {
        let mut total = 0.0;
        let mut scores = Vec::with_capacity(rows.len());
        for &i in rows {
            let out = obj.pga(dataset.row(i), dataset.label(i), lambda, &cfg.attack);
            total += out.cost;
            scores.push(obj.model.score_unchecked(&out.x_adv));
        }
        (total / rows.len() as f64, scores)
    };
    let (cost0, scores0) = run(0.0);
    if cost0 <= radius {
        return scores0;
    }
    let (cost_hi, mut best) = run(cfg.lambda_max);
    if cost_hi > radius {
        return clean();
    }
    let (mut lo, mut hi) = (0.0, cfg.lambda_max);
    for _ in 0..cfg.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let (cost, scores) = run(mid);
        if cost <= radius {
            hi = mid;
            best = scores;
        } else {
            lo = mid;
        }
    }
    best
}

/// Empirical AUC after a budget-calibrated gradient-ascent attack on every example.
pub fn estimate_drauc(
    model: &ScoringModel,
    dataset: &Dataset,
    budget: Budget,
    aux: &AuxParams,
    cfg: &EstimateConfig,
) -> Result<f64> {
    if !dataset.has_both_classes() {
        return Err(Error::EmptyClass(if dataset.n_pos() == 0 { "positive" } else { "negative" }));
    }
    if dataset.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: dataset.dim(),
        });
    }
    aux.validate()?;
    cfg.attack.validate()?;
    let obj = InnerObjective {
        model,
        aux: *aux,
        p_hat: dataset.p_hat(),
    };
    let pos_rows = dataset.positive_indices();
    let neg_rows: Vec<usize> = (0..dataset.len()).filter(|&i| !dataset.label(i).is_positive()).collect();
    let (pos_scores, neg_scores) = match budget {
        Budget::Single(eps) => {
            if !(eps >= 0.0) {
                return Err(Error::Config(format!("radius must be non-negative, got {eps}")));
            }
            let all: Vec<usize> = (0..dataset.len()).collect();
            let scores = calibrated_scores(&obj, dataset, &all, eps, cfg);
            let mut pos = Vec::with_capacity(pos_rows.len());
            let mut neg = Vec::with_capacity(neg_rows.len());
            for (&i, s) in all.iter().zip(scores) {
                if dataset.label(i).is_positive() {
                    pos.push(s);
                } else {
                    neg.push(s);
                }
            }
            (pos, neg)
        }
        Budget::PerClass { pos, neg } => {
            if !(pos >= 0.0 && neg >= 0.0) {
                return Err(Error::Config("radii must be non-negative".into()));
            }
            (
                calibrated_scores(&obj, dataset, &pos_rows, pos, cfg),
                calibrated_scores(&obj, dataset, &neg_rows, neg, cfg),
            )
        }
    };
    auc::auc_mann_whitney(&pos_scores, &neg_scores, cfg.tie)
}
