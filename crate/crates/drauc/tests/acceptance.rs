//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line. Criteria listed in `KNOWN_FAILING` are
//! still run and reported as FAIL; any other failure, or a known failure that
//! starts passing, makes the process exit 1.

use std::process::Command;
use std::time::Instant;

use drauc::checkpoint::Checkpoint;
use drauc::csv;
use drauc::verify::{lambda_grid, tiny_instance};
use drauc_core::auc::{closed_form_aux, g_loss, pairwise_sq_risk, saddle_value, LabeledScore};
use drauc_core::data::{corrupt, gen_synthetic, make_long_tailed, BlobSpec};
use drauc_core::diagnostics::grad_check;
use drauc_core::robust::{
    brute_force_worst_case, dual_curve, estimate_drauc, min_cost_strict_auc_zero, prop1_barycenter_attack, Budget,
    EstimateConfig, InnerSolver,
};
use drauc_core::trainer::{split_epsilon, train, train_aucm_baseline, train_da, train_df};
use drauc_core::{Arch, AuxParams, Dataset, Label, ScoringModel, TrainConfig, TrainState, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Near-strong duality does not hold against a Monge-map brute force on a few
/// tiny instances whose objective is non-concave in the destination; the dual
/// value there matches the mass-splitting (coupling) optimum instead.
const KNOWN_FAILING: &[usize] = &[4];

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("saddle identity", c1_saddle_identity),
        ("closed-form optima", c2_closed_form),
        ("gradient validation", c3_gradients),
        ("weak and near-strong duality", c4_duality),
        ("barycenter attack example", c5_barycenter),
        ("ablation equivalence", c6_ablation),
        ("robustness direction", c7_robustness_direction),
        ("budget identity", c8_budget_identity),
        ("determinism and persistence", c9_persistence),
        ("monotone robust estimate", c10_monotone_estimate),
    ];
    let mut failed = 0;
    let mut unexpected = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let known = KNOWN_FAILING.contains(&(i + 1));
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => {
                if known {
                    unexpected += 1;
                }
                println!("criterion {:>2} PASS {name} [{secs:.2}s] {detail}", i + 1);
            }
            Err(detail) => {
                failed += 1;
                if !known {
                    unexpected += 1;
                }
                let tag = if known { " (known)" } else { "" };
                println!("criterion {:>2} FAIL{tag} {name} [{secs:.2}s] {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed, {unexpected} unexpected", criteria.len() - failed);
    if unexpected > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn random_scores(rng: &mut ChaCha8Rng, max_n: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rng.random_range(2..=max_n);
    let n_pos = rng.random_range(1..n);
    let pos = (0..n_pos).map(|_| rng.random_range(0.0..=1.0)).collect();
    let neg = (0..n - n_pos).map(|_| rng.random_range(0.0..=1.0)).collect();
    (pos, neg)
}

/// Pairwise AUC by direct counting, ties worth one half.
fn auc_by_pairs(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn scores(model: &ScoringModel, ds: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for i in 0..ds.len() {
        let f = model.score(ds.row(i)).unwrap();
        if ds.label(i).is_positive() {
            pos.push(f);
        } else {
            neg.push(f);
        }
    }
    (pos, neg)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// The surrogate written out directly from its definition.
fn g_direct(a: f64, b: f64, alpha: f64, p: f64, f: f64, positive: bool) -> f64 {
    let (ip, in_) = if positive { (1.0, 0.0) } else { (0.0, 1.0) };
    (1.0 - p) * (f - a) * (f - a) * ip + p * (f - b) * (f - b) * in_ + 2.0 * (1.0 + alpha) * (p * f * in_ - (1.0 - p) * f * ip)
        - p * (1.0 - p) * alpha * alpha
}

fn c1_saddle_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (pos, neg) = random_scores(&mut rng, 20);
        let n = (pos.len() + neg.len()) as f64;
        let p = pos.len() as f64 / n;
        let labeled: Vec<LabeledScore> = pos
            .iter()
            .map(|&f| LabeledScore { f, y: Label::Positive })
            .chain(neg.iter().map(|&f| LabeledScore { f, y: Label::Negative }))
            .collect();
        let value = ok(saddle_value(&labeled))?;
        // independent pairwise risk
        let mut risk = 0.0;
        for &fp in &pos {
            for &fn_ in &neg {
                risk += (1.0 - fp + fn_).powi(2);
            }
        }
        risk /= (pos.len() * neg.len()) as f64;
        ensure((risk - ok(pairwise_sq_risk(&pos, &neg))?).abs() <= 1e-14, || "pairwise risk disagrees".into())?;
        worst = worst.max((value - p * (1.0 - p) * (risk - 1.0)).abs());
    }
    ensure(worst <= 1e-10, || format!("max gap {worst:e} > 1e-10"))?;
    Ok(format!("100 datasets, max gap {worst:.2e} (tol 1e-10)"))
}

/// Mean surrogate split into the parts that depend only on `a`, on `b`, and on `alpha`.
struct Parts<'a> {
    pos: &'a [f64],
    neg: &'a [f64],
    p: f64,
    n: f64,
}

impl Parts<'_> {
    fn a_part(&self, a: f64) -> f64 {
        self.pos.iter().map(|&f| (1.0 - self.p) * (f - a) * (f - a)).sum::<f64>() / self.n
    }
    fn b_part(&self, b: f64) -> f64 {
        self.neg.iter().map(|&f| self.p * (f - b) * (f - b)).sum::<f64>() / self.n
    }
    fn alpha_part(&self, alpha: f64) -> f64 {
        let s_neg: f64 = self.neg.iter().sum();
        let s_pos: f64 = self.pos.iter().sum();
        2.0 * (1.0 + alpha) * (self.p * s_neg - (1.0 - self.p) * s_pos) / self.n - self.p * (1.0 - self.p) * alpha * alpha
    }
    fn full(&self, a: f64, b: f64, alpha: f64) -> f64 {
        let total: f64 = self
            .pos
            .iter()
            .map(|&f| g_direct(a, b, alpha, self.p, f, true))
            .chain(self.neg.iter().map(|&f| g_direct(a, b, alpha, self.p, f, false)))
            .sum();
        total / self.n
    }
}

/// The mean surrogate is a sum of an `a`-only, a `b`-only and an `alpha`-only
/// part, so the step-1e-3 grid min-max equals `min A + min B + max C` over the
/// 1-D grids. A full triple loop on a coarser grid cross-checks the split.
fn c2_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let fine = |i: usize| i as f64 * 1e-3;
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..20 {
        let (pos, neg) = random_scores(&mut rng, 20);
        let n = (pos.len() + neg.len()) as f64;
        let parts = Parts {
            pos: &pos,
            neg: &neg,
            p: pos.len() as f64 / n,
            n,
        };
        let star = ok(closed_form_aux(&pos, &neg))?;
        let mean_g = |aux: &AuxParams| {
            let total: f64 = pos
                .iter()
                .map(|&f| g_loss(aux, parts.p, f, Label::Positive).unwrap())
                .chain(neg.iter().map(|&f| g_loss(aux, parts.p, f, Label::Negative).unwrap()))
                .sum();
            total / n
        };
        let v_star = mean_g(&star);
        ensure((v_star - parts.full(star.a, star.b, star.alpha)).abs() <= 1e-14, || "library and direct surrogate disagree".into())?;

        let min_a = (0..=1000).map(|i| parts.a_part(fine(i))).fold(f64::INFINITY, f64::min);
        let min_b = (0..=1000).map(|i| parts.b_part(fine(i))).fold(f64::INFINITY, f64::min);
        let max_alpha = (0..=2000)
            .map(|i| parts.alpha_part(-1.0 + fine(i)))
            .fold(f64::NEG_INFINITY, f64::max);
        let grid_minmax = min_a + min_b + max_alpha;
        // the min player may not do better at alpha*, the max player not better at (a*, b*)
        let min_at_star = min_a + min_b + parts.alpha_part(star.alpha);
        let max_at_star = parts.a_part(star.a) + parts.b_part(star.b) + max_alpha;
        let improvement = (v_star - min_at_star).max(max_at_star - v_star).max(v_star - grid_minmax);
        worst = worst.max(improvement);
        ensure(improvement <= 1e-5, || format!("grid improves on the closed form by {improvement:e}"))?;

        // coarse full 3-D grid against the split
        let coarse = |i: usize| i as f64 * 0.05;
        let mut by_loop = f64::NEG_INFINITY;
        for k in 0..=40 {
            let alpha = -1.0 + coarse(k);
            let mut inner = f64::INFINITY;
            for i in 0..=20 {
                for j in 0..=20 {
                    inner = inner.min(parts.full(coarse(i), coarse(j), alpha));
                }
            }
            by_loop = by_loop.max(inner);
        }
        let by_split = (0..=20).map(|i| parts.a_part(coarse(i))).fold(f64::INFINITY, f64::min)
            + (0..=20).map(|i| parts.b_part(coarse(i))).fold(f64::INFINITY, f64::min)
            + (0..=40).map(|k| parts.alpha_part(-1.0 + coarse(k))).fold(f64::NEG_INFINITY, f64::max);
        ensure((by_loop - by_split).abs() <= 1e-12, || format!("split {by_split} vs triple loop {by_loop}"))?;
    }
    Ok(format!("20 datasets, largest grid improvement {worst:.2e} (tol 1e-5)"))
}

fn c3_gradients() -> Outcome {
    let mut details = Vec::new();
    for arch in [Arch::LinearSigmoid, Arch::Mlp1TanhSigmoid { hidden: 8 }] {
        let r = ok(grad_check(arch, 1000, 1e-5, 1e-5, 1003))?;
        ensure(r.passed(), || format!("{}: max rel err {:e} at {:?}", arch.name(), r.max_rel_err, r.worst))?;
        ensure(r.comparisons >= 1000 * 4, || "too few comparisons".into())?;
        details.push(format!("{} {:.1e}", arch.name(), r.max_rel_err));
    }
    Ok(format!("1000 trials each, max rel err: {} (tol 1e-5)", details.join(", ")))
}

fn c4_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    let grid = lambda_grid(100);
    let instances = 60;
    let mut worst_gap: f64 = 0.0;
    let mut worst_weak: f64 = f64::INFINITY;
    let mut over = Vec::new();
    for i in 0..instances {
        let ds = tiny_instance(&mut rng, 4);
        let arch = if i % 2 == 0 {
            Arch::LinearSigmoid
        } else {
            Arch::LinearIdentityClamped
        };
        let theta = match arch {
            Arch::LinearSigmoid => vec![rng.random_range(-6.0..6.0), rng.random_range(-3.0..3.0)],
            _ => vec![rng.random_range(-1.0..1.0), rng.random_range(0.0..1.0)],
        };
        let model = ok(ScoringModel::from_params(arch, 1, theta))?;
        let aux = AuxParams {
            a: rng.random_range(0.0..=1.0),
            b: rng.random_range(0.0..=1.0),
            alpha: rng.random_range(-1.0..=1.0),
        };
        let eps = rng.random_range(0.001..0.1);
        let p = ds.p_hat();
        let sup = ok(brute_force_worst_case(&model, &aux, p, &ds, eps, 1001))?.sup_value;
        let curve = ok(dual_curve(&model, &aux, p, &ds, eps, &grid, InnerSolver::Grid { resolution: 1001 }))?;
        for &(lambda, value) in &curve.curve {
            worst_weak = worst_weak.min(value - sup);
            ensure(value >= sup - 1e-9, || format!("instance {i}: dual {value} < sup {sup} at lambda {lambda}"))?;
        }
        let tol = 1e-2f64.max(0.05 * sup.abs());
        let gap = curve.best_value - sup;
        worst_gap = worst_gap.max(gap / tol);
        if gap > tol {
            over.push(format!("#{i} n={} dual min {:.5} vs sup {sup:.5}", ds.len(), curve.best_value));
        }
    }
    let summary = format!(
        "{instances} instances, min(dual - sup) {worst_weak:.1e}, largest gap {:.1}% of tolerance",
        100.0 * worst_gap
    );
    if over.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {} over tolerance: {}", over.len(), over.join("; ")))
    }
}

fn c5_barycenter() -> Outcome {
    let a = ok(prop1_barycenter_attack(0.99, 0.01, 1, 99))?;
    let p = 0.01;
    ensure((a.target - 0.0198).abs() <= 1e-15, || format!("target {}", a.target))?;
    let expected = p * (1.0 - p) * 0.98 * 0.98;
    ensure((a.cost - 0.0095080).abs() <= 1e-6, || format!("cost {}", a.cost))?;
    ensure((a.cost - expected).abs() <= 1e-12, || format!("cost {} vs p(1-p)gap^2 {expected}", a.cost))?;
    ensure(a.attacked_strict_auc() == 0.0, || "strict AUC after attack is not 0".into())?;

    let res = 100_001;
    let (search, _) = ok(min_cost_strict_auc_zero(&[0.99], &[0.01; 99], res))?;
    let step = 0.98 / (res - 1) as f64;
    ensure(search >= a.cost - 1e-12, || format!("threshold search found cheaper attack {search}"))?;
    ensure(search <= a.cost + step * step, || format!("threshold search {search} above the bound"))?;

    // independent 2-D search: the positive moves to u, the co-located
    // negatives (averaged, by convexity) to v, with u <= v
    let n = 1000;
    let mut best = f64::INFINITY;
    for i in 0..=n {
        let u = i as f64 / n as f64;
        for j in i..=n {
            let v = j as f64 / n as f64;
            best = best.min(p * (u - 0.99).powi(2) + (1.0 - p) * (v - 0.01).powi(2));
        }
    }
    ensure(best >= a.cost - 1e-12, || format!("2-D search found cheaper attack {best}"))?;
    ensure(best <= a.cost + 1e-6, || format!("2-D search {best} far above the bound"))?;

    let out = ok(Command::new(env!("CARGO_BIN_EXE_drauc"))
        .args(["attack-oracle", "--preset", "example1"])
        .output())?;
    let text = String::from_utf8_lossy(&out.stdout);
    ensure(out.status.success(), || "attack-oracle failed".into())?;
    ensure(text.contains("example1.target=0.0198") && text.contains("0.009702"), || {
        format!("attack-oracle output lacks target or note:\n{text}")
    })?;
    Ok(format!(
        "target {}, cost {:.7} (0.009702 is the unsquared p(1-p)gap), searches {search:.7} / {best:.7}",
        a.target, a.cost
    ))
}

fn same_bits(a: &TrainState, b: &TrainState) -> bool {
    let eq = |x: f64, y: f64| x.to_bits() == y.to_bits();
    a.model.params().iter().zip(b.model.params()).all(|(x, y)| eq(*x, *y))
        && eq(a.aux.a, b.aux.a)
        && eq(a.aux.b, b.aux.b)
        && eq(a.aux.alpha, b.aux.alpha)
        && a.history.len() == b.history.len()
        && a.history.iter().zip(&b.history).all(|(x, y)| {
            eq(x.objective, y.objective) && eq(x.alpha, y.alpha) && x.batch_auc.map(f64::to_bits) == y.batch_auc.map(f64::to_bits)
        })
}

fn c6_ablation() -> Outcome {
    let ds = ok(make_long_tailed(&ok(gen_synthetic(600, 2, BlobSpec::default(), 6))?, 0.2, 7))?;
    let cfg = |variant| TrainConfig {
        variant,
        iterations: 200,
        batch_size: 64,
        eta_z: 0.0,
        eps: 0.0,
        seed: 8,
        ..TrainConfig::default()
    };
    let init = ok(ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 8 }, 2, 9))?;
    let base = ok(train_aucm_baseline(&ds, &cfg(Variant::AucmBaseline), init.clone()))?;
    let df = ok(train_df(&ds, &cfg(Variant::Df), init.clone()))?;
    let da = ok(train_da(&ds, &cfg(Variant::Da), init.clone()))?;
    ensure(same_bits(&df, &base), || "df trajectory differs from the baseline".into())?;
    ensure(same_bits(&da, &base), || "da trajectory differs from the baseline".into())?;
    ensure(base.model != init, || "training did not move the model".into())?;
    Ok("T=200, df, da and baseline bitwise identical".into())
}

fn c7_robustness_direction() -> Outcome {
    let (mut da_cor, mut base_cor, mut da_nom, mut base_nom) = (vec![], vec![], vec![], vec![]);
    for seed in 0..5u64 {
        let train_set = ok(make_long_tailed(&ok(gen_synthetic(2000, 2, BlobSpec::default(), seed))?, 0.1, seed + 1))?;
        let test = ok(make_long_tailed(
            &ok(gen_synthetic(2000, 2, BlobSpec::default(), seed + 100))?,
            0.1,
            seed + 101,
        ))?;
        let noisy = ok(corrupt(&test, 0.2, seed + 200))?;
        for (variant, cor, nom) in [
            (Variant::Da, &mut da_cor, &mut da_nom),
            (Variant::AucmBaseline, &mut base_cor, &mut base_nom),
        ] {
            let cfg = TrainConfig {
                variant,
                iterations: 2000,
                eps: 0.5,
                k_split: 1.0,
                seed,
                ..TrainConfig::default()
            };
            let init = ok(ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 8 }, 2, seed))?;
            let st = ok(train(&train_set, &cfg, init))?;
            let (p, n) = scores(&st.model, &test);
            nom.push(auc_by_pairs(&p, &n));
            let (p, n) = scores(&st.model, &noisy);
            cor.push(auc_by_pairs(&p, &n));
        }
    }
    let (dc, bc, dn, bn) = (median(da_cor), median(base_cor), median(da_nom), median(base_nom));
    let detail = format!("median corrupted AUC da {dc:.4} vs baseline {bc:.4}; nominal da {dn:.4} vs baseline {bn:.4}");
    ensure(dc >= bc, || detail.clone())?;
    ensure((dn - bn).abs() <= 0.03, || detail.clone())?;
    Ok(detail)
}

fn c8_budget_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for i in 0..=40 {
        let eps = i as f64 * 0.025;
        for j in 1..100 {
            let p = j as f64 * 0.01;
            for m in 0..=10 {
                let k = 0.5 + 0.1 * m as f64;
                if k * p >= 1.0 {
                    continue;
                }
                let (ep, en) = ok(split_epsilon(eps, p, k))?;
                let err = (p * ep + (1.0 - p) * en - eps).abs();
                worst = worst.max(err / eps.max(f64::MIN_POSITIVE));
                count += 1;
                ensure(err <= 4.0 * f64::EPSILON * eps, || format!("eps {eps} p {p} k {k}: error {err:e}"))?;
                ensure((ep - k * eps).abs() <= f64::EPSILON * eps, || "eps_pos != k eps".into())?;
            }
        }
    }
    Ok(format!("{count} (eps, p, k) triples, max relative error {worst:.1e}"))
}

fn c9_persistence() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let bin = env!("CARGO_BIN_EXE_drauc");
    let train_to = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = ok(Command::new(bin)
            .args(["train", "--variant", "da", "--eps", "0.5", "--k", "1.0", "--ratio", "0.1", "--seed", "7"])
            .args(["--iters-T", "300", "--robust-eps", "", "--out"])
            .arg(&out)
            .env_remove("DRAUC_SEED")
            .output())?;
        ensure(status.status.success(), || String::from_utf8_lossy(&status.stderr).into_owned())?;
        ok(std::fs::read(&out))
    };
    let (a, b) = (train_to("a.ckpt")?, train_to("b.ckpt")?);
    ensure(a == b, || "two identical runs wrote different checkpoints".into())?;

    let path = dir.path().join("a.ckpt");
    let ck = ok(Checkpoint::load(&path))?;
    let again = dir.path().join("again.ckpt");
    ok(ck.save(&again))?;
    ensure(ok(std::fs::read(&again))? == a, || "checkpoint save(load(x)) != x".into())?;
    ensure(ok(Checkpoint::load(&again))? == ck, || "checkpoint load(save(c)) != c".into())?;

    let ds = ok(make_long_tailed(&ok(gen_synthetic(500, 3, BlobSpec::default(), 5))?, 0.2, 6))?;
    let csv_path = dir.path().join("d.csv");
    ok(csv::save_csv(&ds, &csv_path))?;
    let back = ok(csv::load_csv(&csv_path))?;
    let bits = |d: &Dataset| d.features().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    ensure(bits(&back) == bits(&ds) && back.labels() == ds.labels(), || "CSV round trip changed the data".into())?;
    let csv_again = dir.path().join("e.csv");
    ok(csv::save_csv(&back, &csv_again))?;
    ensure(ok(std::fs::read(&csv_path))? == ok(std::fs::read(&csv_again))?, || "CSV bytes changed".into())?;
    Ok(format!("checkpoint {} bytes, CSV {} rows, all bitwise", a.len(), ds.len()))
}

fn c10_monotone_estimate() -> Outcome {
    let ds = ok(make_long_tailed(&ok(gen_synthetic(600, 2, BlobSpec::default(), 10))?, 0.2, 11))?;
    let cfg = TrainConfig {
        variant: Variant::Df,
        iterations: 300,
        eps: 0.1,
        seed: 12,
        ..TrainConfig::default()
    };
    let st = ok(train(&ds, &cfg, ok(ScoringModel::init(Arch::Mlp1TanhSigmoid { hidden: 8 }, 2, 13))?))?;
    let (p, n) = scores(&st.model, &ds);
    let nominal = auc_by_pairs(&p, &n);
    let est = EstimateConfig::default();
    let mut values = Vec::new();
    for eps in [0.0, 0.05, 0.1, 0.2] {
        values.push(ok(estimate_drauc(&st.model, &ds, Budget::Single(eps), &st.aux, &est))?);
    }
    let listing = values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ");
    ensure(values[0] == nominal, || format!("eps=0 gives {} but nominal is {nominal}", values[0]))?;
    ensure(values.windows(2).all(|w| w[1] <= w[0]), || format!("not non-increasing: {listing}"))?;
    Ok(format!("nominal {nominal:.4}; estimates at eps 0, 0.05, 0.1, 0.2: {listing}"))
}
