use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::ScenarioKind;
use super::harness::TrialEnsemble;
use crate::{FusionError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Position,
    Velocity,
    /// Reported in deg/s.
    TurnRate,
}

impl Metric {
    pub fn components(self) -> &'static [usize] {
        match self {
            Metric::Position => &[0, 2],
            Metric::Velocity => &[1, 3],
            Metric::TurnRate => &[4],
        }
    }

    pub fn scale(self) -> f64 {
        match self {
            Metric::TurnRate => 180.0 / std::f64::consts::PI,
            _ => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Position => "position",
            Metric::Velocity => "velocity",
            Metric::TurnRate => "turn_rate",
        }
    }

    pub fn for_kind(kind: ScenarioKind) -> &'static [Metric] {
        match kind {
            ScenarioKind::Linear => &[Metric::Position, Metric::Velocity],
            ScenarioKind::CoordinatedTurn => &[Metric::Position, Metric::Velocity, Metric::TurnRate],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseSeries {
    pub per_step: Vec<f64>,
    /// Mean of `per_step` over the horizon.
    pub average: f64,
    /// Trials that ran to completion and entered the average.
    pub trials_used: usize,
}

/// RMSE over trials of the selected state components, per step and averaged
/// over the horizon. Failed trials are left out.
pub fn rmse_components(ens: &TrialEnsemble, filter: usize, components: &[usize], scale: f64) -> Result<RmseSeries> {
    if ens.trials.is_empty() {
        return Err(FusionError::InvalidConfig("empty ensemble".into()));
    }
    if filter >= ens.labels.len() {
        return Err(FusionError::InvalidConfig(format!("no filter with index {filter}")));
    }
    let horizon = ens.config.horizon;
    let mut sums = vec![0.0; horizon];
    let mut used = 0;
    for t in &ens.trials {
        let trace = &t.filters[filter];
        if trace.failure.is_some() {
            continue;
        }
        used += 1;
        for (k, est) in trace.estimates.iter().enumerate() {
            let est = est.as_ref().expect("completed trial has every estimate");
            let truth = &t.truth[k + 1];
            sums[k] += components
                .iter()
                .map(|&c| (scale * (est[c] - truth[c])).powi(2))
                .sum::<f64>();
        }
    }
    let per_step: Vec<f64> = sums.iter().map(|s| (s / used as f64).sqrt()).collect();
    let average = per_step.iter().sum::<f64>() / horizon as f64;
    Ok(RmseSeries { per_step, average, trials_used: used })
}

pub fn rmse(ens: &TrialEnsemble, filter: usize, metric: Metric) -> Result<RmseSeries> {
    rmse_components(ens, filter, metric.components(), metric.scale())
}

/// Per-step trial mean and variance of the AA weight on sensor 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTrace {
    pub mean: Vec<f64>,
    /// Population variance over trials.
    pub variance: Vec<f64>,
    pub average: f64,
}

pub fn weight_trace(ens: &TrialEnsemble, filter: usize) -> Result<WeightTrace> {
    let runs: Vec<&Vec<f64>> = ens
        .trials
        .iter()
        .map(|t| &t.filters[filter].sensor1_weight)
        .filter(|w| w.len() == ens.config.horizon)
        .collect();
    if runs.is_empty() {
        return Err(FusionError::InvalidConfig(format!(
            "filter {} recorded no complete weight traces",
            ens.labels.get(filter).map(String::as_str).unwrap_or("?")
        )));
    }
    let n = runs.len() as f64;
    let mut mean = vec![0.0; ens.config.horizon];
    let mut variance = vec![0.0; ens.config.horizon];
    for k in 0..ens.config.horizon {
        mean[k] = runs.iter().map(|w| w[k]).sum::<f64>() / n;
        variance[k] = runs.iter().map(|w| (w[k] - mean[k]).powi(2)).sum::<f64>() / n;
    }
    let average = mean.iter().sum::<f64>() / mean.len() as f64;
    Ok(WeightTrace { mean, variance, average })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub filter: String,
    pub metric: String,
    pub value: f64,
}

/// Averaged RMSE per metric, divergence counts and, for AA filters, the mean
/// sensor-1 weight.
pub fn summarize(ens: &TrialEnsemble) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    for (i, label) in ens.labels.iter().enumerate() {
        let mut push = |metric: String, value: f64| rows.push(SummaryRow { filter: label.clone(), metric, value });
        for &m in Metric::for_kind(ens.config.kind) {
            push(format!("{}_armse", m.as_str()), rmse(ens, i, m)?.average);
        }
        let divergent = ens.trials.iter().filter(|t| t.filters[i].divergent).count();
        let failed = ens.trials.iter().filter(|t| t.filters[i].failure.is_some()).count();
        push("divergent_trials".into(), divergent as f64);
        push("failed_trials".into(), failed as f64);
        if ens.trials.iter().any(|t| !t.filters[i].sensor1_weight.is_empty()) {
            if let Ok(w) = weight_trace(ens, i) {
                push("sensor1_weight_mean".into(), w.average);
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub step: usize,
    pub filter: String,
    pub metric: String,
    pub rmse: f64,
}

fn csv_err(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_summary_json<W: Write>(rows: &[SummaryRow], mut out: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)
}

/// Per-step RMSE series in long form: `step, filter, metric, rmse`.
pub fn write_steps_csv<W: Write>(ens: &TrialEnsemble, out: W) -> Result<()> {
    let io = |e: std::io::Error| FusionError::InvalidConfig(format!("write failed: {e}"));
    let mut w = csv::Writer::from_writer(out);
    for (i, label) in ens.labels.iter().enumerate() {
        for &m in Metric::for_kind(ens.config.kind) {
            let series = rmse(ens, i, m)?;
            for (k, v) in series.per_step.iter().enumerate() {
                w.serialize(StepRow {
                    step: k + 1,
                    filter: label.clone(),
                    metric: m.as_str().into(),
                    rmse: *v,
                })
                .map_err(|e| io(csv_err(e)))?;
            }
        }
    }
    w.flush().map_err(io)
}

#[derive(Serialize)]
struct EnsembleLine<'a> {
    trial: usize,
    step: usize,
    truth: &'a [f64],
    estimates: Vec<(&'a str, Option<&'a [f64]>)>,
}

/// One JSON object per `(trial, step)` with the truth and every filter's estimate.
pub fn write_ensemble_jsonl<W: Write>(ens: &TrialEnsemble, mut out: W) -> std::io::Result<()> {
    for t in &ens.trials {
        for k in 0..ens.config.horizon {
            let line = EnsembleLine {
                trial: t.trial,
                step: k + 1,
                truth: t.truth[k + 1].as_slice(),
                estimates: ens
                    .labels
                    .iter()
                    .zip(&t.filters)
                    .map(|(l, f)| (l.as_str(), f.estimates[k].as_ref().map(|e| e.as_slice())))
                    .collect(),
            };
            serde_json::to_writer(&mut out, &line)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{FilterTrace, ScenarioConfig, TrialRecord};
    use nalgebra::DVector;

    fn ensemble(errors: &[[f64; 2]]) -> TrialEnsemble {
        let mut cfg = ScenarioConfig::linear();
        cfg.horizon = 2;
        cfg.trials = errors.len();
        cfg.filter_set.truncate(1);
        let trials = errors
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let truth = vec![DVector::zeros(4); 3];
                let estimates = e
                    .iter()
                    .map(|&v| Some(DVector::from_vec(vec![v, 0.0, 0.0, 0.0])))
                    .collect();
                TrialRecord {
                    trial: i,
                    truth,
                    filters: vec![FilterTrace {
                        estimates,
                        sensor1_weight: vec![0.6, 0.4],
                        divergent: false,
                        failure: None,
                    }],
                }
            })
            .collect();
        TrialEnsemble { labels: vec![cfg.filter_set[0].label()], config: cfg, trials }
    }

    #[test]
    fn perfect_estimates_score_zero() {
        let e = ensemble(&[[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(rmse(&e, 0, Metric::Position).unwrap().average, 0.0);
    }

    #[test]
    fn single_error_is_its_magnitude() {
        let mut e = ensemble(&[[-3.5, 0.0]]);
        e.config.horizon = 1;
        e.trials[0].filters[0].estimates.truncate(1);
        assert_eq!(rmse(&e, 0, Metric::Position).unwrap().average, 3.5);
    }

    #[test]
    fn matches_brute_force_reduction() {
        let errs = [[1.0, -2.0], [3.0, 0.5], [-1.0, 4.0]];
        let e = ensemble(&errs);
        let s = rmse(&e, 0, Metric::Position).unwrap();
        for k in 0..2 {
            let ms: f64 = errs.iter().map(|r| r[k] * r[k]).sum::<f64>() / 3.0;
            assert!((s.per_step[k] - ms.sqrt()).abs() < 1e-15);
        }
        assert!((s.average - (s.per_step[0] + s.per_step[1]) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn failed_trials_are_skipped() {
        let mut e = ensemble(&[[1.0, 1.0], [100.0, 100.0]]);
        e.trials[1].filters[0].failure = Some("boom".into());
        let s = rmse(&e, 0, Metric::Position).unwrap();
        assert_eq!(s.trials_used, 1);
        assert_eq!(s.average, 1.0);
    }

    #[test]
    fn weight_trace_statistics() {
        let e = ensemble(&[[0.0, 0.0], [0.0, 0.0]]);
        let w = weight_trace(&e, 0).unwrap();
        assert_eq!(w.mean, vec![0.6, 0.4]);
        assert_eq!(w.variance, vec![0.0, 0.0]);
        assert!((w.average - 0.5).abs() < 1e-15);
    }

    #[test]
    fn summary_csv_has_three_columns() {
        let e = ensemble(&[[1.0, 2.0]]);
        let rows = summarize(&e).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("filter,metric,value\n"));
        assert!(text.contains("KF-Noncoop1,position_armse,"));
    }
}
