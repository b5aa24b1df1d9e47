use std::io::Write;
use std::path::Path;

use fusionlab::gaussian::{moment_match, GaussianMixture};
use fusionlab::weights::{
    bound_weights, merging_benchmark, optimal_weights_gaussian, suboptimal_weights_diversity,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::input::{build_all, read_json, RawGaussian};
use crate::OutputFormat;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsInput {
    sources: Vec<RawGaussian>,
    #[serde(default)]
    target: Option<RawGaussian>,
    #[serde(default)]
    objective: Option<String>,
}

pub fn run(input: &Path, objective: Option<&str>) -> CliResult<String> {
    let doc: WeightsInput = read_json(input)?;
    let objective = objective
        .map(str::to_owned)
        .or(doc.objective)
        .unwrap_or_else(|| if doc.target.is_some() { "opt".into() } else { "diversity".into() });
    let sources = build_all(&doc.sources)?;
    let solution = match objective.as_str() {
        "opt" => {
            let target = doc
                .target
                .as_ref()
                .ok_or_else(|| CliError::Usage("objective opt needs a \"target\" density".into()))?
                .build()?;
            optimal_weights_gaussian(&sources, &target)?
        }
        "diversity" => suboptimal_weights_diversity(&sources)?,
        "bound" => bound_weights(&sources)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown objective {other:?}; expected opt, diversity or bound"
            )))
        }
    };
    serde_json::to_string_pretty(&solution).map_err(|e| CliError::Invariant(e.to_string()))
}

/// Published optimal weights for the four merging targets.
pub const FIG2_REFERENCE: [[f64; 4]; 4] = [
    [0.0256, 0.0855, 0.8547, 0.0342],
    [0.0, 0.0, 0.966, 0.034],
    [0.0, 0.0, 0.2738, 0.7262],
    [0.0, 0.0, 0.0, 1.0],
];

#[derive(Debug, Serialize)]
struct Fig2Row {
    case: usize,
    target_mean: f64,
    target_var: f64,
    weights: [f64; 4],
    reference: [f64; 4],
    max_abs_diff: f64,
    merged_mean: f64,
    merged_var: f64,
}

pub fn fig2(format: OutputFormat, mut out: impl Write) -> CliResult<()> {
    let (sources, targets) = merging_benchmark();
    let mut rows = Vec::new();
    for (i, target) in targets.iter().enumerate() {
        let s = optimal_weights_gaussian(&sources, target)?;
        let w: [f64; 4] = s.w.as_slice().try_into().expect("four sources");
        let mix = GaussianMixture::from_unnormalized(w.iter().copied().zip(sources.iter().cloned()).collect())?;
        let merged = moment_match(&mix)?;
        rows.push(Fig2Row {
            case: i + 1,
            target_mean: target.mean()[0],
            target_var: target.cov()[(0, 0)],
            weights: w,
            reference: FIG2_REFERENCE[i],
            max_abs_diff: w
                .iter()
                .zip(&FIG2_REFERENCE[i])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
            merged_mean: merged.mean()[0],
            merged_var: merged.cov()[(0, 0)],
        });
    }
    let io = |e: std::io::Error| CliError::Invariant(e.to_string());
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| CliError::Invariant(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "case,target_mean,target_var,w1,w2,w3,w4,ref1,ref2,ref3,ref4,max_abs_diff,merged_mean,merged_var")
                .map_err(io)?;
            for r in &rows {
                let w = r.weights.map(|v| format!("{v:.4}")).join(",");
                let rf = r.reference.map(|v| format!("{v}")).join(",");
                writeln!(
                    out,
                    "{},{},{},{w},{rf},{:.4},{:.3},{:.3}",
                    r.case, r.target_mean, r.target_var, r.max_abs_diff, r.merged_mean, r.merged_var
                )
                .map_err(io)?;
            }
        }
    }
    Ok(())
}
