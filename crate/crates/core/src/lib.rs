//! First-passage structural credit models (AT1P and its scenario extensions
//! SBAT1P and SVBAT1P): closed-form survival, CDS pricing, calibration and
//! Monte Carlo counterparty risk for equity return swaps.

pub mod calibrate;
pub mod cdspricer;
pub mod error;
pub mod ersmc;
pub mod intensity;
pub mod marketdata;
pub mod math;
pub mod survival;

pub use error::{Error, Result};
