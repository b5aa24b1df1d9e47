use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fusionlab::scenarios::{
    run_experiment, summarize, weight_trace, write_ensemble_jsonl, write_steps_csv, write_summary_csv,
    write_summary_json, FusionMode, ScenarioConfig, SummaryRow, TrialEnsemble,
};
use serde::Serialize;

use crate::error::{io_error, CliError, CliResult};
use crate::input::read_json;
use crate::OutputFormat;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub version: &'static str,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

pub struct SimulateArgs<'a> {
    pub config: &'a Path,
    pub out_dir: &'a Path,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub format: OutputFormat,
    pub ensemble: bool,
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn write_weights_csv(ens: &TrialEnsemble, path: &Path) -> CliResult<()> {
    let mut w = create(path)?;
    let io = |e| io_error(path, e);
    writeln!(w, "step,filter,mean,variance").map_err(io)?;
    for (i, label) in ens.labels.iter().enumerate() {
        if ens.config.filter_set[i].mode != FusionMode::Aa {
            continue;
        }
        let Ok(trace) = weight_trace(ens, i) else { continue };
        for (k, (m, v)) in trace.mean.iter().zip(&trace.variance).enumerate() {
            writeln!(w, "{},{label},{m},{v}", k + 1).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Divergence counts above half the trials for any filter other than naive fusion.
fn health(ens: &TrialEnsemble) -> Option<String> {
    let limit = ens.config.trials as f64 / 2.0;
    let bad: Vec<String> = ens
        .labels
        .iter()
        .enumerate()
        .filter(|(i, _)| ens.config.filter_set[*i].mode != FusionMode::Nf)
        .filter_map(|(i, label)| {
            let n = ens.trials.iter().filter(|t| t.filters[i].divergent).count();
            (n as f64 > limit).then(|| format!("{label}: {n}/{} trials divergent", ens.config.trials))
        })
        .collect();
    (!bad.is_empty()).then(|| bad.join("; "))
}

pub fn run(args: SimulateArgs<'_>, mut stdout: impl Write) -> CliResult<()> {
    let mut config: ScenarioConfig = read_json(args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    std::fs::create_dir_all(args.out_dir).map_err(|e| io_error(args.out_dir, e))?;
    let started = chrono::Utc::now().to_rfc3339();
    log::info!(
        "running {} trials x {} steps, {} filters",
        config.trials,
        config.horizon,
        config.filter_set.len()
    );
    let ens = run_experiment(&config, args.jobs)?;
    let rows: Vec<SummaryRow> = summarize(&ens)?;

    let mut outputs = Vec::new();
    let path = args.out_dir.join("summary.csv");
    let mut w = create(&path)?;
    write_summary_csv(&rows, &mut w).map_err(|e| io_error(&path, e))?;
    w.flush().map_err(|e| io_error(&path, e))?;
    outputs.push(path);

    let path = args.out_dir.join("summary.json");
    let mut w = create(&path)?;
    write_summary_json(&rows, &mut w).map_err(|e| io_error(&path, e))?;
    w.flush().map_err(|e| io_error(&path, e))?;
    outputs.push(path);

    let path = args.out_dir.join("steps.csv");
    let mut w = create(&path)?;
    write_steps_csv(&ens, &mut w)?;
    w.flush().map_err(|e| io_error(&path, e))?;
    outputs.push(path);

    if config.filter_set.iter().any(|f| f.mode == FusionMode::Aa) {
        let path = args.out_dir.join("weights.csv");
        write_weights_csv(&ens, &path)?;
        outputs.push(path);
    }

    if args.ensemble {
        let path = args.out_dir.join("ensemble.jsonl");
        let mut w = create(&path)?;
        write_ensemble_jsonl(&ens, &mut w).map_err(|e| io_error(&path, e))?;
        w.flush().map_err(|e| io_error(&path, e))?;
        outputs.push(path);
    }

    let manifest_path = args.out_dir.join("manifest.json");
    let mut listed = outputs.clone();
    listed.push(manifest_path.clone());
    let manifest = RunManifest {
        seed: config.seed,
        config,
        version: env!("CARGO_PKG_VERSION"),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        outputs: listed,
    };
    let mut w = create(&manifest_path)?;
    serde_json::to_writer_pretty(&mut w, &manifest).map_err(|e| CliError::Invariant(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| io_error(&manifest_path, e))?;

    let io = |e: std::io::Error| CliError::Invariant(e.to_string());
    match args.format {
        OutputFormat::Csv => write_summary_csv(&rows, &mut stdout).map_err(io)?,
        OutputFormat::Json => write_summary_json(&rows, &mut stdout).map_err(io)?,
    }
    match health(&ens) {
        Some(report) => Err(CliError::Health(report)),
        None => Ok(()),
    }
}
