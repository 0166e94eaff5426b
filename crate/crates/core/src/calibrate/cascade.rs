use crate::cdspricer::CdsBook;
use crate::error::{invalid, Error, Result};
use crate::marketdata::{CdsQuote, DiscountCurve};
use crate::math::roots::{brent, RootOptions};
use crate::survival::{FirmDynamics, PiecewiseVol, VolSegment};

const SIGMA_BRACKET: (f64, f64) = (0.001, 3.0);

/// Cascade inversion of a piecewise-constant volatility with breakpoints at
/// the quote tenors. Each segment is solved with the earlier ones frozen, and
/// each quote is priced on its own grid ending at its maturity, so adding a
/// longer quote never moves the existing segments.
pub fn calibrate_at1p_cascade(quotes: &[CdsQuote], h_ratio: f64, beta: f64, discount: &DiscountCurve) -> Result<FirmDynamics> {
    if quotes.is_empty() {
        return Err(invalid("no quotes to calibrate"));
    }
    FirmDynamics::with_flat_vol(h_ratio, beta, 0.2)?;
    let mut segments: Vec<VolSegment> = Vec::with_capacity(quotes.len());
    for quote in quotes {
        if segments.last().is_some_and(|s| quote.tenor <= s.end) {
            return Err(invalid("quotes must be sorted by increasing tenor"));
        }
        let book = CdsBook::new(std::slice::from_ref(quote), discount)?;
        let pv = |sigma: f64| {
            let mut trial = segments.clone();
            trial.push(VolSegment { end: quote.tenor, sigma });
            let firm = FirmDynamics { h_ratio, beta, vol: PiecewiseVol::new(trial).expect("valid trial volatility") };
            book.pv(0, quote.mid, &book.survival_values(&firm))
        };
        let sigma = brent(pv, SIGMA_BRACKET.0, SIGMA_BRACKET.1, RootOptions::with_f_tol(1e-12))
            .map_err(|e| Error::Calibration { tenor: quote.tenor, message: format!("volatility cascade: {e}") })?;
        log::debug!("cascade {}y: sigma = {sigma}", quote.tenor);
        segments.push(VolSegment { end: quote.tenor, sigma });
    }
    FirmDynamics::new(h_ratio, beta, PiecewiseVol::new(segments)?)
}
