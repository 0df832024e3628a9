//! The `drauc` command line.
//!
//! Exit codes: 0 on success, 1 when a verification or gradient check fails,
//! 2 on usage, configuration, IO or file-format errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use drauc_core::auc::{auc_mann_whitney, closed_form_aux, TiePolicy};
use drauc_core::data::{corrupt, gen_synthetic, make_long_tailed, BlobSpec};
use drauc_core::diagnostics::grad_check;
use drauc_core::robust::{
    brute_force_worst_case, dual_curve, estimate_drauc, min_cost_strict_auc_zero, prop1_barycenter_attack, Budget,
    EstimateConfig, InnerSolver,
};
use drauc_core::trainer::train;
use drauc_core::{Arch, AuxParams, Dataset, Label, ScoringModel};

use crate::checkpoint::Checkpoint;
use crate::config::{Settings, SEED_ENV};
use crate::error::{Error, Result};
use crate::report::RunReport;
use crate::{csv, fmt_f64, verify};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

// offsets that separate the random streams derived from one seed
const STREAM_LONG_TAIL: u64 = 1;
const STREAM_INIT: u64 = 2;
const STREAM_CORRUPT: u64 = 3;

#[derive(Debug, Parser)]
#[command(name = "drauc", version, about = "Distributionally robust AUC training and verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic two-blob dataset as CSV.
    GenData {
        #[command(flatten)]
        settings: SettingFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write a checkpoint and a report.
    Train {
        #[command(flatten)]
        settings: SettingFlags,
        /// Training CSV; a synthetic dataset is generated when absent.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value = "drauc.ckpt")]
        out: PathBuf,
        /// Report path, `<out>.report` by default.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Score a CSV with a checkpoint and report nominal, corrupted and robust AUC.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated noise levels.
        #[arg(long)]
        sigmas: Option<String>,
        /// Comma-separated Wasserstein radii.
        #[arg(long = "robust-eps")]
        robust_eps: Option<String>,
        /// Corruption seed, the checkpoint's seed by default.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive worst-case and barycenter attack oracles on tiny instances.
    AttackOracle {
        #[arg(long, default_value = "all", value_parser = ["example1", "tiny", "all"])]
        preset: String,
        #[arg(long, default_value_t = 100_001)]
        resolution: usize,
    },
    /// Run the invariant suite.
    Verify,
    /// Compare analytic gradients with central finite differences.
    GradCheck {
        #[arg(long, default_value = "mlp", value_parser = ["linear", "mlp"])]
        arch: String,
        #[arg(long, default_value_t = 8)]
        hidden: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct SettingFlags {
    /// key=value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["df", "da", "aucm"])]
    variant: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long = "eta-z")]
    eta_z: Option<f64>,
    #[arg(long = "eta-lambda")]
    eta_lambda: Option<f64>,
    #[arg(long = "eta-w")]
    eta_w: Option<f64>,
    #[arg(long = "eta-alpha")]
    eta_alpha: Option<f64>,
    #[arg(long = "steps-K")]
    steps_k: Option<usize>,
    #[arg(long = "iters-T")]
    iters_t: Option<usize>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda0: Option<f64>,
    #[arg(long = "lambda-max")]
    lambda_max: Option<f64>,
    #[arg(long = "step-decay")]
    step_decay: Option<bool>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, value_parser = ["linear", "mlp"])]
    arch: Option<String>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    sigmas: Option<String>,
    #[arg(long = "robust-eps")]
    robust_eps: Option<String>,
}

impl SettingFlags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        macro_rules! collect {
            ($($key:literal => $field:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field {
                    out.push(($key, v.to_string()));
                })*
            };
        }
        collect!(
            "variant" => variant, "eps" => eps, "k" => k, "eta-z" => eta_z,
            "eta-lambda" => eta_lambda, "eta-w" => eta_w, "eta-alpha" => eta_alpha,
            "steps-K" => steps_k, "iters-T" => iters_t, "batch" => batch, "ratio" => ratio,
            "seed" => seed, "lambda0" => lambda0, "lambda-max" => lambda_max,
            "step-decay" => step_decay, "restarts" => restarts, "arch" => arch,
            "hidden" => hidden, "n" => n, "dim" => dim, "sigmas" => sigmas,
            "robust-eps" => robust_eps,
        );
        out
    }

    fn resolve(&self) -> Result<Settings> {
        let env_seed = std::env::var(SEED_ENV).ok();
        Settings::resolve(env_seed.as_deref(), self.config.as_deref(), &self.pairs())
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Errors go to stderr.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::GenData { settings, out } => gen_data(&settings.resolve()?, &out),
        Command::Train {
            settings,
            data,
            out,
            report,
        } => {
            let report = report.unwrap_or_else(|| {
                let mut p = out.clone().into_os_string();
                p.push(".report");
                p.into()
            });
            run_train(&settings.resolve()?, data.as_deref(), &out, &report)
        }
        Command::Eval {
            checkpoint,
            data,
            sigmas,
            robust_eps,
            seed,
            out,
        } => {
            let mut s = Settings::default();
            if let Some(v) = sigmas {
                s.apply("sigmas", &v)?;
            }
            if let Some(v) = robust_eps {
                s.apply("robust-eps", &v)?;
            }
            run_eval(&checkpoint, &data, &s.sigmas, &s.robust_eps, seed, out.as_deref())
        }
        Command::AttackOracle { preset, resolution } => attack_oracle(&preset, resolution),
        Command::Verify => Ok(run_verify()),
        Command::GradCheck {
            arch,
            hidden,
            trials,
            h,
            tol,
            seed,
        } => {
            let arch = if arch == "linear" {
                Arch::LinearSigmoid
            } else {
                Arch::Mlp1TanhSigmoid { hidden }
            };
            let r = grad_check(arch, trials, h, tol, seed)?;
            println!("arch={}", arch.name());
            println!("trials={}", r.trials);
            println!("comparisons={}", r.comparisons);
            println!("max_rel_err={:e}", r.max_rel_err);
            println!("worst={:?}", r.worst);
            println!("tol={tol:e}");
            println!("passed={}", r.passed());
            Ok(if r.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

fn synthetic(s: &Settings) -> Result<Dataset> {
    let ds = gen_synthetic(s.n, s.dim, BlobSpec::default(), s.train.seed)?;
    long_tail(ds, s)
}

fn long_tail(ds: Dataset, s: &Settings) -> Result<Dataset> {
    Ok(match s.ratio {
        Some(r) => make_long_tailed(&ds, r, s.train.seed.wrapping_add(STREAM_LONG_TAIL))?,
        None => ds,
    })
}

fn gen_data(s: &Settings, out: &Path) -> Result<i32> {
    let ds = synthetic(s)?;
    csv::save_csv(&ds, out)?;
    println!("rows={}", ds.len());
    println!("p_hat={}", fmt_f64(ds.p_hat()));
    Ok(EXIT_OK)
}

fn split_scores(model: &ScoringModel, ds: &Dataset) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    for i in 0..ds.len() {
        let f = model.score(ds.row(i))?;
        match ds.label(i) {
            Label::Positive => pos.push(f),
            Label::Negative => neg.push(f),
        }
    }
    Ok((pos, neg))
}

pub fn nominal_auc(model: &ScoringModel, ds: &Dataset) -> Result<f64> {
    let (pos, neg) = split_scores(model, ds)?;
    Ok(auc_mann_whitney(&pos, &neg, TiePolicy::Half)?)
}

/// Nominal, corrupted and robust AUC of `model` on `ds`.
fn evaluate(
    report: &mut RunReport,
    model: &ScoringModel,
    aux: &AuxParams,
    ds: &Dataset,
    sigmas: &[f64],
    radii: &[f64],
    seed: u64,
) -> Result<()> {
    report.nominal_auc = Some(nominal_auc(model, ds)?);
    for &sigma in sigmas {
        let noisy = corrupt(ds, sigma, seed.wrapping_add(STREAM_CORRUPT))?;
        report.corrupted_auc.push((sigma, nominal_auc(model, &noisy)?));
    }
    for &eps in radii {
        let auc = estimate_drauc(model, ds, Budget::Single(eps), aux, &EstimateConfig::default())?;
        report.robust_auc.push((eps, auc));
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run_train(s: &Settings, data: Option<&Path>, out: &Path, report_path: &Path) -> Result<i32> {
    let started = Instant::now();
    let ds = match data {
        Some(path) => long_tail(csv::load_csv(path)?, s)?,
        None => synthetic(s)?,
    };
    let model = ScoringModel::init(s.arch, ds.dim(), s.train.seed.wrapping_add(STREAM_INIT))?;
    let state = train(&ds, &s.train, model)?;
    let ck = Checkpoint::from_state(&state, &s.train, ds.scaler().to_vec());
    ck.save(out)?;

    let mut report = RunReport {
        config: s.entries(),
        history: state.history.clone(),
        ..RunReport::default()
    };
    report.config.push(("data".into(), data.map_or("synthetic".into(), |p| p.display().to_string())));
    report.config.push(("rows".into(), ds.len().to_string()));
    report.config.push(("p_hat".into(), fmt_f64(ds.p_hat())));
    evaluate(
        &mut report,
        &state.model,
        &state.aux,
        &ds,
        &s.sigmas,
        &s.robust_eps,
        s.train.seed,
    )?;
    report.wall_clock_secs = started.elapsed().as_secs_f64();
    write_text(report_path, &report.render())?;
    println!("checkpoint={}", out.display());
    println!("report={}", report_path.display());
    if let Some(a) = report.nominal_auc {
        println!("auc.nominal={}", fmt_f64(a));
    }
    Ok(EXIT_OK)
}

fn run_eval(
    checkpoint: &Path,
    data: &Path,
    sigmas: &[f64],
    radii: &[f64],
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<i32> {
    let started = Instant::now();
    let ck = Checkpoint::load(checkpoint)?;
    let ds = csv::load_csv_with_scaler(data, &ck.scaler)?;
    let seed = seed.unwrap_or(ck.seed());
    let mut report = RunReport::default();
    report.config.push(("checkpoint".into(), checkpoint.display().to_string()));
    report.config.push(("data".into(), data.display().to_string()));
    report.config.push(("seed".into(), seed.to_string()));
    report.config.extend(
        crate::checkpoint::config_entries(&ck.cfg)
            .into_iter()
            .filter(|(k, _)| *k != "seed")
            .map(|(k, v)| (format!("train.{k}"), v)),
    );
    evaluate(&mut report, &ck.model, &ck.aux, &ds, sigmas, radii, seed)?;
    report.wall_clock_secs = started.elapsed().as_secs_f64();
    let text = report.render();
    if let Some(path) = out {
        write_text(path, &text)?;
    }
    print!("{text}");
    Ok(EXIT_OK)
}

fn attack_oracle(preset: &str, resolution: usize) -> Result<i32> {
    if matches!(preset, "example1" | "all") {
        let (x_pos, x_neg, n_pos, n_neg) = (0.99, 0.01, 1, 99);
        let a = prop1_barycenter_attack(x_pos, x_neg, n_pos, n_neg)?;
        let (search_cost, threshold) = min_cost_strict_auc_zero(&vec![x_pos; n_pos], &vec![x_neg; n_neg], resolution)?;
        println!("example1.p_hat={}", a.p_hat);
        println!("example1.target={}", a.target);
        println!("example1.cost={}", a.cost);
        println!("example1.bound={}", a.bound);
        println!("example1.strict_auc_after={}", a.attacked_strict_auc());
        println!("example1.search_min_cost={search_cost}");
        println!("example1.search_threshold={threshold}");
        println!(
            "example1.note=the often quoted 0.009702 is p(1-p)(x+ - x-) without the square; \
             the squared-Euclidean cost is p(1-p)(x+ - x-)^2 = {:.6}",
            a.bound
        );
    }
    if matches!(preset, "tiny" | "all") {
        // four scalar points scored by a fixed sigmoid
        let ds = Dataset::new(
            vec![0.8, 0.55, 0.45, 0.2],
            vec![Label::Positive, Label::Positive, Label::Negative, Label::Negative],
            1,
            vec![drauc_core::data::Scaler::IDENTITY],
        )?;
        let model = ScoringModel::from_params(Arch::LinearSigmoid, 1, vec![4.0, -2.0])?;
        let (pos, neg) = split_scores(&model, &ds)?;
        let aux = closed_form_aux(&pos, &neg)?;
        let eps = 0.01;
        let grid_res = resolution.clamp(101, 2001);
        let sup = brute_force_worst_case(&model, &aux, ds.p_hat(), &ds, eps, grid_res)?;
        let curve = dual_curve(
            &model,
            &aux,
            ds.p_hat(),
            &ds,
            eps,
            &verify::lambda_grid(100),
            InnerSolver::Grid { resolution: grid_res },
        )?;
        println!("tiny.eps={eps}");
        println!("tiny.brute_force_sup={}", sup.sup_value);
        println!("tiny.brute_force_mean_cost={}", sup.mean_cost);
        println!(
            "tiny.brute_force_positions={}",
            sup.positions.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
        );
        println!("tiny.dual_min={}", curve.best_value);
        println!("tiny.dual_argmin_lambda={}", curve.best_lambda);
    }
    Ok(EXIT_OK)
}

fn run_verify() -> i32 {
    let checks = verify::run_all();
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        if c.detail.is_empty() {
            println!("{status} {}", c.name);
        } else {
            println!("{status} {} ({})", c.name, c.detail);
        }
    }
    println!("checks={} failed={failed}", checks.len());
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
