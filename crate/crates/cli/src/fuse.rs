use std::path::Path;

use fusionlab::fusion::{aa_fuse_pairs, ci_fuse, cu_fuse, ffcc_fuse, ga_fuse, naive_fuse, CuBound};
use fusionlab::Weights;
use serde::Deserialize;

use crate::error::{CliError, CliResult};
use crate::input::{build_all, read_json, RawGaussian};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FuseInput {
    sources: Vec<RawGaussian>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    #[serde(default)]
    rule: Option<String>,
    #[serde(default)]
    delta: Option<f64>,
}

pub const RULES: [&str; 7] = ["naive", "ga", "ci", "ffcc", "cu_max", "cu_min", "aa"];

pub fn run(input: &Path, rule: Option<&str>, delta: Option<f64>) -> CliResult<String> {
    let doc: FuseInput = read_json(input)?;
    let rule = rule
        .map(str::to_owned)
        .or(doc.rule)
        .ok_or_else(|| CliError::Usage(format!("no fusion rule given; expected one of {}", RULES.join(", "))))?;
    let sources = build_all(&doc.sources)?;
    if sources.is_empty() {
        return Err(CliError::Usage("no sources given".into()));
    }
    let weights = match &doc.weights {
        Some(w) => Weights::new(w.clone())?,
        None => Weights::uniform(sources.len())?,
    };
    let fused = match rule.as_str() {
        "naive" => naive_fuse(&sources)?,
        "ga" => ga_fuse(&sources, &weights)?,
        "ci" => ci_fuse(&sources)?,
        "ffcc" => {
            let d = delta
                .or(doc.delta)
                .ok_or_else(|| CliError::Usage("rule ffcc needs --delta (or \"delta\" in the input)".into()))?;
            if !(d > 0.0 && d <= 1.0) {
                return Err(CliError::Usage(format!("delta must lie in (0, 1], got {d}")));
            }
            let scaled = Weights::with_total(weights.as_slice().iter().map(|w| w * d).collect(), d)?;
            ffcc_fuse(&sources, &scaled)?
        }
        "cu_max" => cu_fuse(&sources, &weights, CuBound::Max)?,
        "cu_min" => cu_fuse(&sources, &weights, CuBound::Min)?,
        "aa" | "aa_merged" => aa_fuse_pairs(&sources, &weights)?,
        other => {
            return Err(CliError::Usage(format!(
                "unknown rule {other:?}; expected one of {}",
                RULES.join(", ")
            )))
        }
    };
    serde_json::to_string_pretty(&fused).map_err(|e| CliError::Invariant(e.to_string()))
}
