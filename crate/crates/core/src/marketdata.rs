//! Term structures, CDS quotes, payment schedules and CSV ingestion.
//!
//! Times are year fractions from the valuation date. Rates are
//! continuously compounded decimals; CDS spreads are basis points.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};

const QUOTE_HEADER: [&str; 5] = ["tenor_years", "bid_bps", "ask_bps", "mid_bps", "recovery"];
const CURVE_HEADER: [&str; 2] = ["time_years", "zero_rate"];

/// Pillars of a continuously-compounded zero curve, interpolated linearly in
/// `t·z(t)` (log-linear in discount factors) with flat zero-rate extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ZeroCurve {
    pillars: Vec<(f64, f64)>,
}

impl ZeroCurve {
    fn new(pillars: Vec<(f64, f64)>, what: &str) -> Result<Self> {
        if pillars.is_empty() {
            return Err(invalid(format!("{what}: at least one pillar required")));
        }
        if pillars[0].0 < 0.0 {
            return Err(invalid(format!("{what}: first pillar time must be >= 0")));
        }
        for w in pillars.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(invalid(format!(
                    "{what}: pillar times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(t, z)) = pillars.iter().find(|(t, z)| !t.is_finite() || !z.is_finite()) {
            return Err(invalid(format!("{what}: non-finite pillar ({t}, {z})")));
        }
        Ok(Self { pillars })
    }

    /// `∫₀ᵗ r(s) ds = t·z(t)`.
    fn integral(&self, t: f64) -> f64 {
        let p = &self.pillars;
        let (t0, z0) = p[0];
        if t <= t0 {
            return t * z0;
        }
        let last = p[p.len() - 1];
        if t >= last.0 {
            return t * last.1;
        }
        let i = p.partition_point(|&(ti, _)| ti <= t);
        let (ta, za) = p[i - 1];
        let (tb, zb) = p[i];
        let ya = ta * za;
        let yb = tb * zb;
        ya + (yb - ya) * (t - ta) / (tb - ta)
    }
}

/// Deterministic risk-free discount curve `P(0,t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DiscountCurve(ZeroCurve);

impl TryFrom<Vec<(f64, f64)>> for DiscountCurve {
    type Error = Error;
    fn try_from(p: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<DiscountCurve> for Vec<(f64, f64)> {
    fn from(c: DiscountCurve) -> Self {
        c.0.pillars
    }
}

impl DiscountCurve {
    /// Builds a curve from `(time, zero_rate)` pillars.
    pub fn new(pillars: Vec<(f64, f64)>) -> Result<Self> {
        ZeroCurve::new(pillars, "discount curve").map(Self)
    }

    /// Flat continuously-compounded curve.
    pub fn flat(rate: f64) -> Self {
        Self(ZeroCurve { pillars: vec![(1.0, rate)] })
    }

    pub fn pillars(&self) -> &[(f64, f64)] {
        &self.0.pillars
    }

    /// `P(0,t)`; errors for negative `t`.
    pub fn discount_factor(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(domain(format!("discount factor requested at negative time {t}")));
        }
        Ok(self.df(t))
    }

    /// Unchecked `P(0,t)` for `t >= 0`.
    pub(crate) fn df(&self, t: f64) -> f64 {
        (-self.0.integral(t)).exp()
    }

    /// `∫₀ᵗ r(s) ds`.
    pub fn integrated_rate(&self, t: f64) -> f64 {
        self.0.integral(t)
    }

    pub fn zero_rate(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.0.integral(t) / t
        } else {
            self.0.pillars[0].1
        }
    }

    /// Forward discount factor `P(t1,t2) = P(0,t2)/P(0,t1)`.
    pub fn forward_discount(&self, t1: f64, t2: f64) -> f64 {
        (self.0.integral(t1) - self.0.integral(t2)).exp()
    }

    /// Simply-compounded forward rate `(P(0,t1)/P(0,t2) − 1)/accrual`.
    pub fn forward_simple_rate(&self, t1: f64, t2: f64, accrual: f64) -> Result<f64> {
        if t1 < 0.0 || t1 >= t2 {
            return Err(domain(format!("forward rate needs 0 <= t1 < t2, got t1={t1}, t2={t2}")));
        }
        if accrual <= 0.0 {
            return Err(domain(format!("accrual must be positive, got {accrual}")));
        }
        Ok(((self.0.integral(t2) - self.0.integral(t1)).exp() - 1.0) / accrual)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_to_string(path)?;
        Self::parse_csv(text.as_bytes())
    }

    /// Parses `time_years,zero_rate` rows.
    pub fn parse_csv<R: Read>(reader: R) -> Result<Self> {
        let pillars = parse_two_columns(reader, &CURVE_HEADER)?;
        Self::new(pillars)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CURVE_HEADER)?;
        for &(t, z) in self.pillars() {
            w.write_record([t.to_string(), z.to_string()])?;
        }
        w.flush().map_err(|e| Error::Io { path: "<writer>".into(), source: e })
    }
}

/// Continuous payout (dividend) yield curve `q(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DividendCurve(ZeroCurve);

impl TryFrom<Vec<(f64, f64)>> for DividendCurve {
    type Error = Error;
    fn try_from(p: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<DividendCurve> for Vec<(f64, f64)> {
    fn from(c: DividendCurve) -> Self {
        c.0.pillars
    }
}

impl DividendCurve {
    pub fn new(pillars: Vec<(f64, f64)>) -> Result<Self> {
        ZeroCurve::new(pillars, "dividend curve").map(Self)
    }

    pub fn flat(yield_: f64) -> Self {
        Self(ZeroCurve { pillars: vec![(1.0, yield_)] })
    }

    pub fn zero() -> Self {
        Self::flat(0.0)
    }

    /// `∫₀ᵗ q(s) ds`.
    pub fn integrated_yield(&self, t: f64) -> f64 {
        self.0.integral(t)
    }
}

/// Market quote of a running CDS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdsQuote {
    /// Maturity in years (premium leg starts at 0).
    pub tenor: f64,
    pub bid: f64,
    pub ask: f64,
    pub mid: f64,
    pub recovery: f64,
    /// Premium payments per year.
    #[serde(default = "default_frequency")]
    pub frequency: u32,
}

fn default_frequency() -> u32 {
    4
}

impl CdsQuote {
    pub fn new(tenor: f64, bid: f64, ask: f64, mid: f64, recovery: f64) -> Result<Self> {
        let q = Self { tenor, bid, ask, mid, recovery, frequency: 4 };
        q.validate()?;
        Ok(q)
    }

    /// Quote with zero bid/ask width.
    pub fn from_mid(tenor: f64, mid: f64, recovery: f64) -> Result<Self> {
        Self::new(tenor, mid, mid, mid, recovery)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.tenor, self.bid, self.ask, self.mid, self.recovery];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(invalid("quote fields must be finite"));
        }
        if self.tenor <= 0.0 {
            return Err(invalid(format!("tenor must be positive, got {}", self.tenor)));
        }
        if self.bid < 0.0 || self.ask < 0.0 || self.mid < 0.0 {
            return Err(invalid("quoted spreads must be non-negative"));
        }
        if self.bid > self.ask {
            return Err(invalid(format!("crossed quote: bid {} > ask {}", self.bid, self.ask)));
        }
        if self.mid < self.bid || self.mid > self.ask {
            return Err(invalid(format!(
                "mid {} outside [bid {}, ask {}]",
                self.mid, self.bid, self.ask
            )));
        }
        if !(0.0..1.0).contains(&self.recovery) {
            return Err(invalid(format!("recovery must be in [0,1), got {}", self.recovery)));
        }
        if !matches!(self.frequency, 1 | 2 | 4 | 12) {
            return Err(invalid(format!("unsupported payment frequency {}", self.frequency)));
        }
        Ok(())
    }

    pub fn lgd(&self) -> f64 {
        1.0 - self.recovery
    }

    /// Premium schedule from 0 to the quote's tenor.
    pub fn schedule(&self) -> Result<PaymentSchedule> {
        PaymentSchedule::build(0.0, self.tenor, self.frequency)
    }

    /// Same quote with all spreads multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { bid: self.bid * factor, ask: self.ask * factor, mid: self.mid * factor, ..self.clone() }
    }
}

/// Premium dates `T_{a+1} < … < T_b` with their year fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentSchedule {
    start: f64,
    dates: Vec<f64>,
    accruals: Vec<f64>,
}

impl PaymentSchedule {
    pub fn new(start: f64, dates: Vec<f64>, accruals: Vec<f64>) -> Result<Self> {
        if dates.is_empty() || dates.len() != accruals.len() {
            return Err(invalid("schedule needs matching, non-empty dates and accruals"));
        }
        if dates[0] <= start || dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("schedule dates must be strictly increasing and after start"));
        }
        if accruals.iter().any(|&a| a <= 0.0) {
            return Err(invalid("accruals must be positive"));
        }
        Ok(Self { start, dates, accruals })
    }

    /// Equally spaced dates every `1/frequency` years after `start`, with a
    /// short final stub when the tenor is not a whole number of periods.
    pub fn build(start: f64, maturity: f64, frequency: u32) -> Result<Self> {
        if !(maturity > start) {
            return Err(domain(format!("non-positive tenor: start {start}, maturity {maturity}")));
        }
        if !matches!(frequency, 1 | 2 | 4 | 12) {
            return Err(domain(format!("frequency must be one of 1, 2, 4, 12; got {frequency}")));
        }
        let period = 1.0 / frequency as f64;
        let span = maturity - start;
        let eps = 1e-9;
        let full = ((span + eps) / period).floor() as usize;
        let mut dates: Vec<f64> = (1..=full).map(|k| start + k as f64 * period).collect();
        match dates.last_mut() {
            Some(last) if (maturity - *last).abs() <= eps => *last = maturity,
            _ => dates.push(maturity),
        }
        let mut prev = start;
        let accruals = dates
            .iter()
            .map(|&d| {
                let a = d - prev;
                prev = d;
                a
            })
            .collect();
        Ok(Self { start, dates, accruals })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn accruals(&self) -> &[f64] {
        &self.accruals
    }

    pub fn maturity(&self) -> f64 {
        self.dates[self.dates.len() - 1]
    }

    /// Index (into `dates`) of the first payment date strictly after `t`;
    /// equals `dates.len()` when `t >= maturity`.
    pub fn next_index(&self, t: f64) -> usize {
        self.dates.partition_point(|&d| d <= t)
    }

    /// Start of the accrual period containing `t`, i.e. `T_{β(t)−1}`.
    pub fn period_start(&self, t: f64) -> f64 {
        match self.next_index(t) {
            0 => self.start,
            i => self.dates[i - 1],
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    Ok(s)
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .has_headers(true)
        .from_reader(reader)
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            row: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    Ok(())
}

fn parse_field(record: &csv::StringRecord, idx: usize, name: &str, row: usize) -> Result<f64> {
    let raw = record.get(idx).ok_or_else(|| Error::Parse {
        row,
        message: format!("missing field `{name}`"),
    })?;
    raw.parse::<f64>().map_err(|_| Error::Parse {
        row,
        message: format!("field `{name}` is not a number: `{raw}`"),
    })
}

fn row_of(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn parse_two_columns<R: Read>(reader: R, header: &[&str; 2]) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv_reader(reader);
    check_header(rdr.headers()?, header)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = row_of(&rec);
        out.push((parse_field(&rec, 0, header[0], row)?, parse_field(&rec, 1, header[1], row)?));
    }
    Ok(out)
}

/// Parses CDS quotes from CSV (`tenor_years,bid_bps,ask_bps,mid_bps,recovery`).
///
/// Rows are validated and returned sorted by tenor. Error rows are reported
/// by their line number in the input.
pub fn parse_quotes<R: Read>(reader: R) -> Result<Vec<CdsQuote>> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        log::warn!("quote file is empty");
        return Ok(Vec::new());
    }
    check_header(&header, &QUOTE_HEADER)?;

    let mut quotes: Vec<(usize, CdsQuote)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            row: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = row_of(&rec);
        if rec.len() != QUOTE_HEADER.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", QUOTE_HEADER.len(), rec.len()),
            });
        }
        let f = |i: usize| parse_field(&rec, i, QUOTE_HEADER[i], row);
        let quote = CdsQuote {
            tenor: f(0)?,
            bid: f(1)?,
            ask: f(2)?,
            mid: f(3)?,
            recovery: f(4)?,
            frequency: default_frequency(),
        };
        quote.validate().map_err(|e| Error::Parse { row, message: e.to_string() })?;
        if let Some((first_row, _)) = quotes.iter().find(|(_, q)| q.tenor == quote.tenor) {
            return Err(Error::Parse {
                row,
                message: format!("duplicate tenor {} (first seen at row {first_row})", quote.tenor),
            });
        }
        quotes.push((row, quote));
    }
    if quotes.is_empty() {
        log::warn!("quote file contains no quotes");
    }
    let mut quotes: Vec<CdsQuote> = quotes.into_iter().map(|(_, q)| q).collect();
    quotes.sort_by(|a, b| a.tenor.total_cmp(&b.tenor));
    Ok(quotes)
}

pub fn load_quotes(path: impl AsRef<Path>) -> Result<Vec<CdsQuote>> {
    let text = read_to_string(path.as_ref())?;
    parse_quotes(text.as_bytes())
}

pub fn write_quotes<W: Write>(writer: W, quotes: &[CdsQuote]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(QUOTE_HEADER)?;
    for q in quotes {
        w.write_record([
            q.tenor.to_string(),
            q.bid.to_string(),
            q.ask.to_string(),
            q.mid.to_string(),
            q.recovery.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io { path: "<writer>".into(), source: e })
}

pub fn save_quotes(path: impl AsRef<Path>, quotes: &[CdsQuote]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    write_quotes(file, quotes)
}

/// The Vodafone CDS book of 10 March 2004 (recovery 40%, quarterly premiums).
pub fn vodafone_quotes() -> Vec<CdsQuote> {
    [(1.0, 19.0, 24.0, 21.5), (3.0, 32.0, 34.0, 33.0), (5.0, 42.0, 44.0, 43.0), (7.0, 45.0, 53.0, 49.0), (10.0, 56.0, 66.0, 61.0)]
        .iter()
        .map(|&(t, b, a, m)| CdsQuote { tenor: t, bid: b, ask: a, mid: m, recovery: 0.4, frequency: 4 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn discount_factor_at_zero_is_one() {
        let c = DiscountCurve::new(vec![(1.0, 0.02), (2.0, 0.04)]).unwrap();
        assert_eq!(c.discount_factor(0.0).unwrap(), 1.0);
    }

    #[test]
    fn flat_curve_discount() {
        let c = DiscountCurve::flat(0.03);
        assert_abs_diff_eq!(c.discount_factor(1.0).unwrap(), (-0.03f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.discount_factor(1.0).unwrap(), 0.970446, epsilon = 1e-6);
    }

    #[test]
    fn two_pillar_interpolation_is_linear_in_t_times_z() {
        // t·z goes 0.02 -> 0.08 between 1y and 2y, so 0.05 at 1.5y.
        let c = DiscountCurve::new(vec![(1.0, 0.02), (2.0, 0.04)]).unwrap();
        assert_abs_diff_eq!(c.discount_factor(1.5).unwrap(), (-0.05f64).exp(), epsilon = 1e-15);
        // Pillar rates are reproduced exactly.
        assert_abs_diff_eq!(c.zero_rate(1.0), 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(c.zero_rate(2.0), 0.04, epsilon = 1e-15);
        // Flat extrapolation on either side.
        assert_abs_diff_eq!(c.zero_rate(0.5), 0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(c.zero_rate(7.0), 0.04, epsilon = 1e-15);
    }

    #[test]
    fn negative_time_is_a_domain_error() {
        assert!(matches!(DiscountCurve::flat(0.03).discount_factor(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_unsorted_pillars() {
        assert!(DiscountCurve::new(vec![(2.0, 0.01), (1.0, 0.01)]).is_err());
        assert!(DiscountCurve::new(vec![(-1.0, 0.01)]).is_err());
    }

    #[test]
    fn forward_rates() {
        assert_eq!(DiscountCurve::flat(0.0).forward_simple_rate(1.0, 2.0, 1.0).unwrap(), 0.0);
        let f = DiscountCurve::flat(0.03).forward_simple_rate(0.0, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(f, ((0.015f64).exp() - 1.0) / 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(f, 0.030226, epsilon = 1e-6);
        // P(0,1)=0.98, P(0,1.5)=0.965 via pillars at those points.
        let c = DiscountCurve::new(vec![(1.0, -(0.98f64).ln()), (1.5, -(0.965f64).ln() / 1.5)]).unwrap();
        let f = c.forward_simple_rate(1.0, 1.5, 0.5).unwrap();
        assert_abs_diff_eq!(f, (0.98 / 0.965 - 1.0) / 0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(f, 0.031088, epsilon = 1e-6);
        assert!(matches!(DiscountCurve::flat(0.03).forward_simple_rate(1.0, 1.0, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn schedule_quarterly_one_year() {
        let s = PaymentSchedule::build(0.0, 1.0, 4).unwrap();
        assert_eq!(s.dates(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(s.accruals(), &[0.25; 4]);
        assert_eq!(PaymentSchedule::build(0.0, 5.0, 4).unwrap().dates().len(), 20);
    }

    #[test]
    fn schedule_short_final_stub() {
        let s = PaymentSchedule::build(0.0, 1.1, 4).unwrap();
        assert_eq!(s.dates().len(), 5);
        assert_eq!(s.dates()[3], 1.0);
        assert_eq!(s.maturity(), 1.1);
        assert_abs_diff_eq!(s.accruals()[4], 0.1, epsilon = 1e-12);
    }

    #[test]
    fn schedule_rejects_bad_inputs() {
        assert!(matches!(PaymentSchedule::build(1.0, 1.0, 4), Err(Error::Domain(_))));
        assert!(matches!(PaymentSchedule::build(0.0, 1.0, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn period_lookup() {
        let s = PaymentSchedule::build(0.0, 1.0, 4).unwrap();
        assert_eq!(s.period_start(0.1), 0.0);
        assert_eq!(s.period_start(0.3), 0.25);
        assert_eq!(s.period_start(0.5), 0.5);
        assert_eq!(s.next_index(1.0), 4);
    }

    const VOD: &str = "# Vodafone, 10 March 2004\n\
tenor_years,bid_bps,ask_bps,mid_bps,recovery\n\
1,19,24,21.5,0.4\n3,32,34,33,0.4\n5,42,44,43,0.4\n7,45,53,49,0.4\n10,56,66,61,0.4\n";

    #[test]
    fn parses_vodafone_book() {
        let q = parse_quotes(VOD.as_bytes()).unwrap();
        assert_eq!(q, vodafone_quotes());
    }

    #[test]
    fn empty_input_gives_no_quotes() {
        assert!(parse_quotes("".as_bytes()).unwrap().is_empty());
        assert!(parse_quotes("tenor_years,bid_bps,ask_bps,mid_bps,recovery\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn crossed_quote_names_its_row() {
        let text = "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n1,19,24,21.5,0.4\n3,35,34,34.5,0.4\n";
        match parse_quotes(text.as_bytes()) {
            Err(Error::Parse { row, message }) => {
                assert_eq!(row, 3);
                assert!(message.contains("crossed"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_malformed_rows_fail() {
        let dup = "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n1,19,24,21.5,0.4\n1,19,24,21.5,0.4\n";
        assert!(matches!(parse_quotes(dup.as_bytes()), Err(Error::Parse { row: 3, .. })));
        let bad = "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n1,nineteen,24,21.5,0.4\n";
        assert!(matches!(parse_quotes(bad.as_bytes()), Err(Error::Parse { row: 2, .. })));
        let hdr = "tenor,bid,ask,mid,rec\n1,19,24,21.5,0.4\n";
        assert!(matches!(parse_quotes(hdr.as_bytes()), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn quotes_are_sorted_by_tenor() {
        let text = "tenor_years,bid_bps,ask_bps,mid_bps,recovery\n5,42,44,43,0.4\n1,19,24,21.5,0.4\n";
        let q = parse_quotes(text.as_bytes()).unwrap();
        assert_eq!(q[0].tenor, 1.0);
        assert_eq!(q[1].tenor, 5.0);
    }

    #[test]
    fn curve_csv_parses() {
        let c = DiscountCurve::parse_csv("time_years,zero_rate\n1,0.03\n".as_bytes()).unwrap();
        assert_eq!(c, DiscountCurve::flat(0.03));
    }
}
