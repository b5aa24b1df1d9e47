use std::io::Write;

use fusionlab::fusion::{chain_check, random_instance, CHAIN_LINKS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::OutputFormat;

pub const CHAIN_DIMS: [usize; 3] = [1, 2, 4];

#[derive(Debug, Serialize)]
struct LinkCount {
    link: &'static str,
    passed: usize,
    total: usize,
}

/// Checks the trace chains on `n` random instances of 2 to 4 sources.
/// Returns an invariant error if any link fails anywhere.
pub fn run(n: usize, dim: usize, seed: u64, format: OutputFormat, mut out: impl Write) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    if !CHAIN_DIMS.contains(&dim) {
        return Err(CliError::Usage(format!("--dim must be one of 1, 2, 4; got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: Vec<LinkCount> = CHAIN_LINKS
        .iter()
        .map(|&link| LinkCount { link, passed: 0, total: 0 })
        .collect();
    for _ in 0..n {
        let count = rng.random_range(2..=4);
        let delta = rng.random_range(0.5..=1.0);
        let (sources, w) = random_instance(&mut rng, count, dim)?;
        let report = chain_check(&sources, &w, delta)?;
        for (c, l) in counts.iter_mut().zip(&report.links) {
            c.total += 1;
            c.passed += usize::from(l.holds);
        }
    }
    let io = |e: std::io::Error| CliError::Invariant(e.to_string());
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &counts).map_err(|e| CliError::Invariant(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "link,passed,total").map_err(io)?;
            for c in &counts {
                writeln!(out, "{},{},{}", c.link, c.passed, c.total).map_err(io)?;
            }
        }
    }
    let failed: Vec<_> = counts.iter().filter(|c| c.passed < c.total).map(|c| c.link).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("chain links violated: {}", failed.join(", "))))
    }
}
