//! Loading quotes, curves and parameter files.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use serde::Deserialize;

use fpc_core::calibrate::CalibrationReport;
use fpc_core::marketdata::{load_quotes, CdsQuote, DiscountCurve};
use fpc_core::survival::ScenarioSet;

use crate::Failure;

pub fn quotes(path: &Path, first: Option<usize>) -> Result<Vec<CdsQuote>, Failure> {
    let mut q = load_quotes(path).map_err(|e| Failure::Input(anyhow!(e).context(format!("reading quotes {}", path.display()))))?;
    if let Some(n) = first {
        q.truncate(n);
    }
    Ok(q)
}

/// Discount curve from a CSV file, or flat 3% when none is given.
pub fn curve(path: Option<&Path>) -> Result<DiscountCurve, Failure> {
    match path {
        Some(p) => DiscountCurve::load_csv(p).map_err(|e| Failure::Input(anyhow!(e).context(format!("reading discount curve {}", p.display())))),
        None => Ok(DiscountCurve::flat(0.03)),
    }
}

/// Model parameters with the maturity up to which they were calibrated.
pub struct Params {
    pub scenarios: ScenarioSet,
    pub valid_to: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BareParams {
    scenarios: ScenarioSet,
    #[serde(default)]
    valid_to: Option<f64>,
}

/// Accepts a calibration report written by `fpc calibrate`, or a bare
/// `{"scenarios": [...], "valid_to": ...}` object.
pub fn params(path: &Path) -> Result<Params, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading parameters {}", path.display()))?;
    if let Ok(report) = serde_json::from_str::<CalibrationReport>(&text) {
        return Ok(Params { scenarios: report.parameters, valid_to: report.valid_to });
    }
    let bare: BareParams = serde_json::from_str(&text).with_context(|| format!("parsing parameters {}", path.display()))?;
    Ok(Params { scenarios: bare.scenarios, valid_to: bare.valid_to.unwrap_or(f64::INFINITY) })
}

pub fn json_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

pub fn write_output(path: Option<&Path>, contents: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, contents).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{contents}"),
    }
    Ok(())
}
