//! Line-oriented `metric=value` run reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use drauc_core::trainer::IterationRecord;

use crate::fmt_f64;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    /// Resolved configuration, written as `config.<key>=<value>`.
    pub config: Vec<(String, String)>,
    pub history: Vec<IterationRecord>,
    pub nominal_auc: Option<f64>,
    /// `(sigma, auc)`
    pub corrupted_auc: Vec<(f64, f64)>,
    /// `(eps, auc)`
    pub robust_auc: Vec<(f64, f64)>,
    pub wall_clock_secs: f64,
}

impl RunReport {
    /// Every AUC in the report, including per-batch history values.
    pub fn aucs(&self) -> impl Iterator<Item = f64> + '_ {
        self.nominal_auc
            .into_iter()
            .chain(self.corrupted_auc.iter().map(|p| p.1))
            .chain(self.robust_auc.iter().map(|p| p.1))
            .chain(self.history.iter().filter_map(|h| h.batch_auc))
    }

    pub fn aucs_in_unit_interval(&self) -> bool {
        self.aucs().all(|a| (0.0..=1.0).contains(&a))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            let _ = writeln!(out, "config.{k}={v}");
        }
        for h in &self.history {
            let t = h.iteration;
            let _ = writeln!(out, "history.{t}.objective={}", fmt_f64(h.objective));
            let _ = writeln!(out, "history.{t}.lambda_pos={}", fmt_f64(h.lambdas[0]));
            let _ = writeln!(out, "history.{t}.lambda_neg={}", fmt_f64(h.lambdas[1]));
            let _ = writeln!(out, "history.{t}.alpha={}", fmt_f64(h.alpha));
            let _ = writeln!(out, "history.{t}.mean_cost={}", fmt_f64(h.mean_cost));
            if let Some(a) = h.batch_auc {
                let _ = writeln!(out, "history.{t}.batch_auc={}", fmt_f64(a));
            }
        }
        if let Some(a) = self.nominal_auc {
            let _ = writeln!(out, "auc.nominal={}", fmt_f64(a));
        }
        for &(sigma, a) in &self.corrupted_auc {
            let _ = writeln!(out, "auc.corrupted.sigma={}={}", sigma, fmt_f64(a));
        }
        for &(eps, a) in &self.robust_auc {
            let _ = writeln!(out, "auc.robust.eps={}={}", eps, fmt_f64(a));
        }
        let _ = writeln!(out, "wall_clock_secs={:.3}", self.wall_clock_secs);
        out
    }
}

/// Splits report text into `metric -> value`. The value is everything after
/// the last `=`, so keys such as `auc.robust.eps=0.1` stay intact.
pub fn parse_metrics(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.rsplit_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parses_back() {
        let r = RunReport {
            config: vec![("eps".into(), "0.5".into())],
            history: vec![IterationRecord {
                iteration: 0,
                objective: 0.25,
                lambdas: [1.0, 2.0],
                alpha: -0.5,
                batch_auc: Some(0.75),
                mean_cost: 0.01,
            }],
            nominal_auc: Some(0.9),
            corrupted_auc: vec![(0.2, 0.8)],
            robust_auc: vec![(0.1, 0.7)],
            wall_clock_secs: 1.5,
        };
        assert!(r.aucs_in_unit_interval());
        let m = parse_metrics(&r.render());
        assert_eq!(m["config.eps"], "0.5");
        assert_eq!(m["history.0.lambda_neg"].parse::<f64>().unwrap(), 2.0);
        assert_eq!(m["auc.nominal"].parse::<f64>().unwrap(), 0.9);
        assert_eq!(m["auc.corrupted.sigma=0.2"].parse::<f64>().unwrap(), 0.8);
        assert_eq!(m["auc.robust.eps=0.1"].parse::<f64>().unwrap(), 0.7);
        assert_eq!(m["wall_clock_secs"], "1.500");
    }
}
