//! The invariant suite behind `drauc verify`.
//!
//! Every check runs on small seeded instances so the whole suite takes a few
//! seconds. Sizes are smaller than the acceptance tests use.

use drauc_core::auc::{
    auc_mann_whitney, closed_form_aux, g_grads, g_loss, pairwise_sq_risk, saddle_value, LabeledScore, TiePolicy,
};
use drauc_core::data::{corrupt, gen_synthetic, make_long_tailed, BlobSpec, Scaler};
use drauc_core::diagnostics::grad_check;
use drauc_core::robust::{
    brute_force_worst_case, dual_curve, min_cost_strict_auc_zero, phi, phi_grid, prop1_barycenter_attack,
    AttackConfig, InnerSolver,
};
use drauc_core::trainer::{split_epsilon, train, train_aucm_baseline, train_da, train_df};
use drauc_core::{Arch, AuxParams, Dataset, Label, ScoringModel, TrainConfig, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint::Checkpoint;
use crate::csv;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

fn run(name: &'static str, f: impl FnOnce() -> Outcome) -> Check {
    match f() {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core<T>(r: drauc_core::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn run_all() -> Vec<Check> {
    vec![
        run("model.scores_in_unit_interval", scores_in_unit_interval),
        run("model.init_deterministic", init_deterministic),
        run("model.grad_check", grad_checks),
        run("auc.saddle_identity", saddle_identity),
        run("auc.closed_form_saddle", closed_form_saddle),
        run("auc.dalpha_mean_zero", dalpha_mean_zero),
        run("auc.monotone_invariance", auc_monotone_invariance),
        run("auc.complement", auc_complement),
        run("robust.phi_dominance_and_box", phi_dominance_and_box),
        run("robust.phi_monotone_convex_in_lambda", phi_monotone_convex),
        run("robust.weak_and_near_strong_duality", duality),
        run("robust.prop1_cost_identity", prop1_cost_identity),
        run("robust.prop1_brute_force", prop1_brute_force),
        run("trainer.domains", trainer_domains),
        run("trainer.determinism", trainer_determinism),
        run("trainer.ablation_equivalence", ablation_equivalence),
        run("trainer.lambda_direction", lambda_direction),
        run("trainer.separable_line", separable_line),
        run("trainer.budget_identity", budget_identity),
        run("data.p_hat_and_long_tail", data_invariants),
        run("data.normalization_idempotent", normalization_idempotent),
        run("persistence.round_trips", round_trips),
    ]
}

fn label(positive: bool) -> Label {
    if positive {
        Label::Positive
    } else {
        Label::Negative
    }
}

const ARCHS: [Arch; 2] = [Arch::LinearSigmoid, Arch::Mlp1TanhSigmoid { hidden: 8 }];

fn scores_in_unit_interval() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..10_000u64 {
        let arch = ARCHS[(i % 2) as usize];
        let d = rng.random_range(1..=5);
        let mut m = core(ScoringModel::init(arch, d, i))?;
        for p in m.params_mut() {
            *p = rng.random_range(-50.0..50.0);
        }
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=1.0)).collect();
        let f = core(m.score(&x))?;
        ensure((0.0..=1.0).contains(&f), || format!("{arch:?} scored {f}"))?;
    }
    Ok("10000 draws".into())
}

fn init_deterministic() -> Outcome {
    for arch in ARCHS {
        let a = core(ScoringModel::init(arch, 3, 42))?;
        let b = core(ScoringModel::init(arch, 3, 42))?;
        let same = a.params().iter().zip(b.params()).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(same, || format!("{arch:?} init differs"))?;
    }
    Ok(String::new())
}

fn grad_checks() -> Outcome {
    let mut worst: f64 = 0.0;
    for arch in ARCHS {
        let r = core(grad_check(arch, 200, 1e-5, 1e-5, 1))?;
        ensure(r.passed(), || format!("{arch:?}: max rel err {:e} at {:?}", r.max_rel_err, r.worst))?;
        worst = worst.max(r.max_rel_err);
    }
    Ok(format!("max rel err {worst:.2e}"))
}

/// Random labeled scores with both classes present.
fn random_scores(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(2..=max_n);
    let n_pos = rng.random_range(1..n);
    let pos = (0..n_pos).map(|_| rng.random_range(0.0..=1.0)).collect();
    let neg = (0..n - n_pos).map(|_| rng.random_range(0.0..=1.0)).collect();
    (pos, neg)
}

fn labeled(pos: &[f64], neg: &[f64]) -> Vec<LabeledScore> {
    pos.iter()
        .map(|&f| LabeledScore { f, y: Label::Positive })
        .chain(neg.iter().map(|&f| LabeledScore { f, y: Label::Negative }))
        .collect()
}

fn saddle_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (pos, neg) = random_scores(&mut rng, 20);
        let p = pos.len() as f64 / (pos.len() + neg.len()) as f64;
        let lhs = core(saddle_value(&labeled(&pos, &neg)))?;
        let rhs = p * (1.0 - p) * (core(pairwise_sq_risk(&pos, &neg))? - 1.0);
        worst = worst.max((lhs - rhs).abs());
    }
    ensure(worst <= 1e-10, || format!("gap {worst:e}"))?;
    Ok(format!("max gap {worst:.2e}"))
}

fn mean_g(aux: &AuxParams, pos: &[f64], neg: &[f64]) -> f64 {
    let p = pos.len() as f64 / (pos.len() + neg.len()) as f64;
    let total: f64 = labeled(pos, neg)
        .iter()
        .map(|s| g_loss(aux, p, s.f, s.y).expect("aux in domain"))
        .sum();
    total / (pos.len() + neg.len()) as f64
}

/// The closed form is a saddle: no `(a, b)` on a grid lowers the mean surrogate
/// at `alpha*`, and no `alpha` on a grid raises it at `(a*, b*)`.
fn closed_form_saddle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let steps = 200;
    for _ in 0..20 {
        let (pos, neg) = random_scores(&mut rng, 12);
        let star = core(closed_form_aux(&pos, &neg))?;
        let v = mean_g(&star, &pos, &neg);
        for i in 0..=steps {
            let t = i as f64 / steps as f64;
            for j in 0..=steps {
                let aux = AuxParams {
                    a: t,
                    b: j as f64 / steps as f64,
                    alpha: star.alpha,
                };
                ensure(mean_g(&aux, &pos, &neg) >= v - 1e-12, || format!("(a,b)=({}, {}) beats the saddle", aux.a, aux.b))?;
            }
            let aux = AuxParams {
                alpha: 2.0 * t - 1.0,
                ..star
            };
            ensure(mean_g(&aux, &pos, &neg) <= v + 1e-12, || format!("alpha={} beats the saddle", aux.alpha))?;
        }
    }
    Ok("20 datasets".into())
}

fn dalpha_mean_zero() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..100 {
        let (pos, neg) = random_scores(&mut rng, 20);
        let star = core(closed_form_aux(&pos, &neg))?;
        let p = pos.len() as f64 / (pos.len() + neg.len()) as f64;
        let mut total = 0.0;
        for s in labeled(&pos, &neg) {
            total += core(g_grads(&star, p, s.f, s.y))?.dalpha;
        }
        let m = total / (pos.len() + neg.len()) as f64;
        ensure(m.abs() <= 1e-10, || format!("mean dg/dalpha = {m:e}"))?;
    }
    Ok(String::new())
}

fn auc_monotone_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..200 {
        let (pos, neg) = random_scores(&mut rng, 30);
        let warp = |v: &f64| (3.0 * v).exp() + v * v * v;
        let a = core(auc_mann_whitney(&pos, &neg, TiePolicy::Half))?;
        let wp: Vec<f64> = pos.iter().map(warp).collect();
        let wn: Vec<f64> = neg.iter().map(warp).collect();
        let b = core(auc_mann_whitney(&wp, &wn, TiePolicy::Half))?;
        ensure(a == b, || format!("{a} != {b}"))?;
    }
    Ok(String::new())
}

fn auc_complement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..200 {
        let (mut pos, neg) = random_scores(&mut rng, 30);
        // force some ties
        pos[0] = neg[0];
        let a = core(auc_mann_whitney(&pos, &neg, TiePolicy::Half))?;
        let b = core(auc_mann_whitney(&neg, &pos, TiePolicy::Half))?;
        ensure((a + b - 1.0).abs() <= 1e-15, || format!("{a} + {b} != 1"))?;
    }
    Ok(String::new())
}

fn random_aux(rng: &mut ChaCha8Rng) -> AuxParams {
    AuxParams {
        a: rng.random_range(0.0..=1.0),
        b: rng.random_range(0.0..=1.0),
        alpha: rng.random_range(-1.0..=1.0),
    }
}

fn phi_dominance_and_box() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for i in 0..300u64 {
        let arch = ARCHS[(i % 2) as usize];
        let d = rng.random_range(1..=4);
        let model = core(ScoringModel::init(arch, d, i))?;
        let aux = random_aux(&mut rng);
        let p = rng.random_range(0.05..0.95);
        let lambda = rng.random_range(0.0..20.0);
        let y = label(rng.random_bool(0.5));
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..=1.0)).collect();
        let cfg = AttackConfig {
            steps: 10,
            step_size: rng.random_range(0.0..0.5),
            restarts: (i % 3) as usize,
            restart_seed: i,
        };
        let out = core(phi(&model, &aux, p, lambda, &x, y, &cfg))?;
        let clean = core(g_loss(&aux, p, core(model.score(&x))?, y))?;
        ensure(out.value >= clean, || format!("phi {} below g {}", out.value, clean))?;
        ensure(out.x_adv.iter().all(|v| (0.0..=1.0).contains(v)), || "attack left the box".into())?;
        ensure(out.x_adv.len() == d, || "attack changed the dimension".into())?;
    }
    Ok("300 draws".into())
}

fn phi_monotone_convex() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    for i in 0..100u64 {
        let model = core(ScoringModel::init(ARCHS[(i % 2) as usize], 1, i))?;
        let aux = random_aux(&mut rng);
        let p = rng.random_range(0.05..0.95);
        let y = label(rng.random_bool(0.5));
        let x = rng.random_range(0.0..=1.0);
        let mut ls: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..10.0)).collect();
        ls.sort_by(f64::total_cmp);
        let at = |l: f64| phi_grid(&model, &aux, p, l, x, y, 1001).map(|o| o.value);
        let v: Vec<f64> = ls.iter().map(|&l| at(l)).collect::<drauc_core::Result<_>>().map_err(|e| e.to_string())?;
        ensure(v[0] >= v[1] && v[1] >= v[2], || format!("phi not monotone: {v:?} at {ls:?}"))?;
        let mid = core(at(0.5 * (ls[0] + ls[2])))?;
        ensure(mid <= 0.5 * (v[0] + v[2]) + 1e-12, || format!("midpoint convexity fails at {ls:?}"))?;
    }
    Ok(String::new())
}

/// A tiny 1-D instance with both classes.
pub fn tiny_instance(rng: &mut ChaCha8Rng, max_n: usize) -> Dataset {
    let n = rng.random_range(2..=max_n);
    let n_pos = rng.random_range(1..n);
    let features = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let labels = (0..n).map(|i| label(i < n_pos)).collect();
    Dataset::new(features, labels, 1, vec![Scaler::IDENTITY]).expect("features in the unit box")
}

/// Zero, then a log grid from 1e-3 to 1e3.
pub fn lambda_grid(points: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend((0..points - 1).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / (points - 2) as f64)));
    g
}

fn duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    let grid = lambda_grid(100);
    let mut worst_gap: f64 = 0.0;
    for i in 0..10u64 {
        let ds = tiny_instance(&mut rng, 4);
        let model = core(ScoringModel::init(Arch::LinearSigmoid, 1, i))?;
        let aux = random_aux(&mut rng);
        let eps = rng.random_range(0.001..0.05);
        let p = ds.p_hat();
        let sup = core(brute_force_worst_case(&model, &aux, p, &ds, eps, 1001))?.sup_value;
        let curve = core(dual_curve(&model, &aux, p, &ds, eps, &grid, InnerSolver::Grid { resolution: 1001 }))?;
        for &(l, v) in &curve.curve {
            ensure(v >= sup - 1e-12, || format!("instance {i}: dual {v} below sup {sup} at lambda {l}"))?;
        }
        let gap = curve.best_value - sup;
        ensure(gap <= 1e-2f64.max(0.05 * sup.abs()), || format!("instance {i}: gap {gap}"))?;
        worst_gap = worst_gap.max(gap);
    }
    Ok(format!("10 instances, max gap {worst_gap:.2e}"))
}

fn prop1_cost_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let xp = rng.random_range(0.0..=1.0);
        let xn = rng.random_range(0.0..=1.0);
        let np = rng.random_range(1..50);
        let nn = rng.random_range(1..200);
        let a = core(prop1_barycenter_attack(xp, xn, np, nn))?;
        ensure((a.cost - a.bound).abs() <= 1e-12, || format!("cost {} bound {}", a.cost, a.bound))?;
        ensure(a.attacked_strict_auc() == 0.0, || "attacked AUC is not zero".into())?;
    }
    Ok(String::new())
}

fn prop1_brute_force() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let res = 10_001;
    for _ in 0..50 {
        let xn = rng.random_range(0.0..0.5);
        let xp = rng.random_range(0.5..=1.0);
        let np = rng.random_range(1..5);
        let nn = rng.random_range(1..50);
        let bound = core(prop1_barycenter_attack(xp, xn, np, nn))?.bound;
        let (cost, _) = core(min_cost_strict_auc_zero(&vec![xp; np], &vec![xn; nn], res))?;
        let step = (xp - xn) / (res - 1) as f64;
        ensure(cost <= bound + step * step + 1e-15, || format!("search cost {cost} above bound {bound}"))?;
        ensure(cost >= bound - 1e-12, || format!("search found {cost} below the bound {bound}"))?;
    }
    Ok(String::new())
}

fn small_long_tailed() -> std::result::Result<Dataset, String> {
    let ds = core(gen_synthetic(400, 2, BlobSpec::default(), 5))?;
    core(make_long_tailed(&ds, 0.2, 6))
}

fn small_cfg(variant: Variant) -> TrainConfig {
    TrainConfig {
        variant,
        iterations: 60,
        batch_size: 32,
        eps: 0.2,
        seed: 3,
        ..TrainConfig::default()
    }
}

fn trainer_domains() -> Outcome {
    let ds = small_long_tailed()?;
    for variant in [Variant::Df, Variant::Da, Variant::AucmBaseline] {
        let cfg = small_cfg(variant);
        let model = core(ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 4 }, 2, 1))?;
        let st = core(train(&ds, &cfg, model))?;
        ensure(st.aux.validate().is_ok(), || format!("{variant:?}: aux left its domain"))?;
        for h in &st.history {
            ensure((-1.0..=1.0).contains(&h.alpha), || format!("alpha {}", h.alpha))?;
            ensure(h.lambdas.iter().all(|l| (0.0..=cfg.lambda_max).contains(l)), || format!("lambdas {:?}", h.lambdas))?;
        }
    }
    Ok(String::new())
}

fn trainer_determinism() -> Outcome {
    let ds = small_long_tailed()?;
    let cfg = small_cfg(Variant::Da);
    let go = || {
        let model = ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 4 }, 2, 1)?;
        train_da(&ds, &cfg, model)
    };
    let (a, b) = (core(go())?, core(go())?);
    ensure(a == b, || "reruns differ".into())?;
    Ok(String::new())
}

fn ablation_equivalence() -> Outcome {
    let ds = small_long_tailed()?;
    let mk = |variant| TrainConfig {
        eta_z: 0.0,
        eps: 0.0,
        ..small_cfg(variant)
    };
    let model = core(ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 4 }, 2, 1))?;
    let base = core(train_aucm_baseline(&ds, &mk(Variant::AucmBaseline), model.clone()))?;
    let df = core(train_df(&ds, &mk(Variant::Df), model.clone()))?;
    let da = core(train_da(&ds, &mk(Variant::Da), model))?;
    for (name, st) in [("df", &df), ("da", &da)] {
        let same = st.model.params().iter().zip(base.model.params()).all(|(x, y)| x.to_bits() == y.to_bits())
            && st.aux == base.aux
            && st.history.iter().zip(&base.history).all(|(x, y)| x.objective.to_bits() == y.objective.to_bits());
        ensure(same, || format!("{name} trajectory differs from the baseline"))?;
    }
    Ok(String::new())
}

fn lambda_direction() -> Outcome {
    let ds = small_long_tailed()?;
    let cfg = TrainConfig {
        eps: 0.01,
        ..small_cfg(Variant::Df)
    };
    let model = core(ScoringModel::init(Arch::LinearSigmoid, 2, 1))?;
    let st = core(train_df(&ds, &cfg, model))?;
    let mut prev = cfg.lambda0;
    for h in &st.history {
        let l = h.lambdas[0];
        if h.mean_cost > cfg.eps {
            ensure(l >= prev, || format!("iteration {}: cost above budget but lambda fell", h.iteration))?;
        } else if h.mean_cost < cfg.eps {
            ensure(l <= prev, || format!("iteration {}: cost below budget but lambda rose", h.iteration))?;
        }
        prev = l;
    }
    Ok(String::new())
}

fn separable_line() -> Outcome {
    let n = 40;
    let features: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let labels: Vec<Label> = (0..n).map(|i| label(i >= n / 2)).collect();
    let ds = core(Dataset::new(features, labels, 1, vec![Scaler::IDENTITY]))?;
    for variant in [Variant::Df, Variant::Da, Variant::AucmBaseline] {
        let cfg = TrainConfig {
            variant,
            iterations: 500,
            batch_size: 16,
            eps: 0.001,
            seed: 1,
            ..TrainConfig::default()
        };
        let st = core(train(&ds, &cfg, core(ScoringModel::init(Arch::LinearSigmoid, 1, 1))?))?;
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for i in 0..ds.len() {
            let f = core(st.model.score(ds.row(i)))?;
            if ds.label(i).is_positive() {
                pos.push(f)
            } else {
                neg.push(f)
            }
        }
        let auc = core(auc_mann_whitney(&pos, &neg, TiePolicy::Half))?;
        ensure(auc == 1.0, || format!("{variant:?}: training AUC {auc}"))?;
    }
    Ok(String::new())
}

fn budget_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..=20 {
        let eps = i as f64 * 0.05;
        for j in 1..20 {
            let p = j as f64 * 0.05;
            for k in [0.5, 0.75, 1.0, 1.25, 1.5] {
                if k * p >= 1.0 {
                    continue;
                }
                let (ep, en) = core(split_epsilon(eps, p, k))?;
                let err = (p * ep + (1.0 - p) * en - eps).abs();
                worst = worst.max(err);
                ensure(err <= 4.0 * f64::EPSILON * eps.max(1.0), || format!("eps {eps} p {p} k {k}: err {err:e}"))?;
            }
        }
    }
    Ok(format!("max err {worst:.1e}"))
}

fn data_invariants() -> Outcome {
    let ds = core(gen_synthetic(300, 3, BlobSpec::default(), 9))?;
    let check_p = |d: &Dataset| {
        let recomputed = d.n_pos() as f64 / d.len() as f64;
        ensure(d.p_hat() == recomputed, || format!("cached p_hat {} vs {}", d.p_hat(), recomputed))
    };
    check_p(&ds)?;
    let lt = core(make_long_tailed(&ds, 0.1, 2))?;
    check_p(&lt)?;
    let negs = |d: &Dataset| -> Vec<Vec<f64>> {
        (0..d.len()).filter(|&i| !d.label(i).is_positive()).map(|i| d.row(i).to_vec()).collect()
    };
    ensure(negs(&ds) == negs(&lt), || "long-tailing changed the negatives".into())?;
    let noisy = core(corrupt(&lt, 0.3, 4))?;
    check_p(&noisy)?;
    ensure(noisy.labels() == lt.labels(), || "corruption changed labels".into())?;
    ensure(noisy.features().iter().all(|v| (0.0..=1.0).contains(v)), || "corruption left the box".into())?;
    Ok(String::new())
}

fn normalization_idempotent() -> Outcome {
    let dir = std::env::temp_dir().join(format!("drauc-verify-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("norm.csv");
    let result = (|| {
        let ds = core(gen_synthetic(100, 2, BlobSpec::default(), 12))?;
        csv::save_csv(&ds, &path).map_err(|e| e.to_string())?;
        let back = csv::load_csv(&path).map_err(|e| e.to_string())?;
        ensure(back.features() == ds.features(), || "reloading renormalized the data".into())
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result.map(|_| String::new())
}

fn round_trips() -> Outcome {
    let ds = small_long_tailed()?;
    let text = csv::render(&ds);
    let table = csv::parse(&text).map_err(|e| e.to_string())?;
    let same = table.features.iter().zip(ds.features()).all(|(a, b)| a.to_bits() == b.to_bits());
    ensure(same && table.labels == ds.labels(), || "CSV round trip changed the data".into())?;

    let cfg = small_cfg(Variant::Da);
    let st = core(train_da(&ds, &cfg, core(ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 4 }, 2, 1))?))?;
    let ck = Checkpoint::from_state(&st, &cfg, ds.scaler().to_vec());
    let back = Checkpoint::from_text(&ck.to_text()).map_err(|e| e.to_string())?;
    ensure(back == ck, || "checkpoint round trip changed a field".into())?;
    Ok(String::new())
}

#[cfg(test)]
mod tests {
    #[test]
    fn lambda_grid_shape() {
        let g = super::lambda_grid(100);
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 1e-3).abs() < 1e-15 && (g[99] - 1e3).abs() < 1e-9);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
