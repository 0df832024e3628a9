//! Finite-difference validation of the analytic gradients used by the trainers.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auc::{surrogate, surrogate_grads, AuxParams};
use crate::error::{Error, Result};
use crate::model::{Arch, ScoringModel};
use crate::Label;

/// Which variable a gradient entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradVar {
    Theta(usize),
    Input(usize),
    A,
    B,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub trials: usize,
    pub comparisons: usize,
    pub max_rel_err: f64,
    pub worst: Option<GradVar>,
    pub tol: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= self.tol
    }
}

/// `|a - b| / max(1, |a|, |b|)`: relative for large gradients, absolute near zero.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Compares analytic derivatives of `g(f_theta(x))` with respect to `theta`,
/// `x`, `a`, `b` and `alpha` against central differences with step `h` at
/// `trials` random interior configurations.
pub fn grad_check(arch: Arch, trials: usize, h: f64, tol: f64, seed: u64) -> Result<GradCheckReport> {
    if !(h > 0.0) || !(tol > 0.0) {
        return Err(Error::Config("step and tolerance must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradCheckReport {
        trials,
        comparisons: 0,
        max_rel_err: 0.0,
        worst: None,
        tol,
    };
    let record = |var: GradVar, an: f64, fd: f64, report: &mut GradCheckReport| {
        let e = rel_err(an, fd);
        report.comparisons += 1;
        if report.worst.is_none() || e > report.max_rel_err {
            report.max_rel_err = e;
            report.worst = Some(var);
        }
    };

    for trial in 0..trials {
        let d = rng.random_range(1..=4);
        let (model, x) = random_interior_config(arch, d, &mut rng, trial as u64)?;
        let aux = AuxParams {
            a: rng.random_range(0.05..0.95),
            b: rng.random_range(0.05..0.95),
            alpha: rng.random_range(-0.95..0.95),
        };
        let p = rng.random_range(0.05..0.95);
        let y = if rng.random_bool(0.5) { Label::Positive } else { Label::Negative };

        let f = model.score_unchecked(&x);
        let gr = surrogate_grads(&aux, p, f, y);
        let loss = |m: &ScoringModel, x: &[f64], aux: &AuxParams| surrogate(aux, p, m.score_unchecked(x), y);

        let mut dtheta = alloc::vec![0.0; model.params().len()];
        model.accumulate_grad_params(&x, gr.df, &mut dtheta);
        let mut probe = model.clone();
        for (i, &an) in dtheta.iter().enumerate() {
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + h;
            let up = loss(&probe, &x, &aux);
            probe.params_mut()[i] = orig - h;
            let down = loss(&probe, &x, &aux);
            probe.params_mut()[i] = orig;
            record(GradVar::Theta(i), an, (up - down) / (2.0 * h), &mut report);
        }

        let mut dx = alloc::vec![0.0; d];
        model.grad_input_into(&x, &mut dx);
        let mut xp = x.clone();
        for k in 0..d {
            xp[k] = x[k] + h;
            let up = loss(&model, &xp, &aux);
            xp[k] = x[k] - h;
            let down = loss(&model, &xp, &aux);
            xp[k] = x[k];
            record(GradVar::Input(k), gr.df * dx[k], (up - down) / (2.0 * h), &mut report);
        }

        let shifted = |da: f64, db: f64, dal: f64| AuxParams {
            a: aux.a + da,
            b: aux.b + db,
            alpha: aux.alpha + dal,
        };
        let central = |plus: AuxParams, minus: AuxParams| (loss(&model, &x, &plus) - loss(&model, &x, &minus)) / (2.0 * h);
        record(GradVar::A, gr.da, central(shifted(h, 0.0, 0.0), shifted(-h, 0.0, 0.0)), &mut report);
        record(GradVar::B, gr.db, central(shifted(0.0, h, 0.0), shifted(0.0, -h, 0.0)), &mut report);
        record(GradVar::Alpha, gr.dalpha, central(shifted(0.0, 0.0, h), shifted(0.0, 0.0, -h)), &mut report);
    }
    Ok(report)
}

/// Random parameters and an interior input; for the clamped scorer the
/// pre-activation is kept away from the clamp corners.
fn random_interior_config(arch: Arch, d: usize, rng: &mut ChaCha8Rng, seed: u64) -> Result<(ScoringModel, Vec<f64>)> {
    let mut model = ScoringModel::init(arch, d, seed)?;
    loop {
        for p in model.params_mut() {
            *p = rng.random_range(-2.0..2.0);
        }
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..0.95)).collect();
        if arch != Arch::LinearIdentityClamped {
            return Ok((model, x));
        }
        let s: f64 = model.params()[d] + model.params()[..d].iter().zip(&x).map(|(w, v)| w * v).sum::<f64>();
        if (0.05..=0.95).contains(&s) {
            return Ok((model, x));
        }
    }
}
