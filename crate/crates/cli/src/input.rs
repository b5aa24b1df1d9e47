//! JSON input documents. Densities are read as raw numbers first so that a
//! malformed document (exit 2) is told apart from a well-formed one that
//! describes an invalid density (exit 3).

use std::path::Path;

use fusionlab::gaussian::GaussianDensity;
use fusionlab::Gaussian;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{io_error, CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGaussian {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl RawGaussian {
    pub fn build(&self) -> CliResult<Gaussian> {
        let n = self.mean.len();
        if self.cov.len() != n || self.cov.iter().any(|r| r.len() != n) {
            return Err(CliError::Invariant(format!("covariance must be {n}x{n}")));
        }
        let flat: Vec<f64> = self.cov.concat();
        Ok(GaussianDensity::from_slices(&self.mean, &flat)?)
    }
}

pub fn build_all(raw: &[RawGaussian]) -> CliResult<Vec<Gaussian>> {
    raw.iter().map(RawGaussian::build).collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
