//! Calendar-aligned monthly series and the transforms applied to them
//! before estimation.

mod transform;

pub use transform::{pct_change, seasonal_adjust, standardize, yoy_growth};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;

use crate::{Error, Result};

/// A calendar month. Ordered by `(year, month)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonthStamp {
    year: i32,
    month: u32,
}

impl MonthStamp {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidMonth { year, month });
        }
        Ok(Self { year, month })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn month(self) -> u32 {
        self.month
    }

    /// Months elapsed since year 0, January.
    pub fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    pub fn from_ordinal(ordinal: i64) -> Self {
        Self { year: ordinal.div_euclid(12) as i32, month: ordinal.rem_euclid(12) as u32 + 1 }
    }

    pub fn offset(self, months: i64) -> Self {
        Self::from_ordinal(self.ordinal() + months)
    }

    /// Signed number of months from `self` to `later`.
    pub fn months_until(self, later: MonthStamp) -> i64 {
        later.ordinal() - self.ordinal()
    }

    /// Zero-based month-of-year index.
    pub fn month_index(self) -> usize {
        (self.month - 1) as usize
    }
}

impl fmt::Display for MonthStamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for MonthStamp {
    type Err = Error;

    /// Parses `YYYY-MM`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(alloc::format!("malformed month `{s}`"));
        let (y, m) = s.trim().split_once('-').ok_or_else(bad)?;
        if y.len() != 4 || m.len() != 2 {
            return Err(bad());
        }
        let year: i32 = y.parse().map_err(|_| bad())?;
        let month: u32 = m.parse().map_err(|_| bad())?;
        MonthStamp::new(year, month)
    }
}

/// A gap-free monthly series of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    name: String,
    start: MonthStamp,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(name: impl Into<String>, start: MonthStamp, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { name, index });
        }
        Ok(Self { name, start, values })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn start(&self) -> MonthStamp {
        self.start
    }

    pub fn end(&self) -> MonthStamp {
        self.start.offset(self.values.len() as i64 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn month_at(&self, i: usize) -> MonthStamp {
        self.start.offset(i as i64)
    }

    pub fn get(&self, month: MonthStamp) -> Option<f64> {
        let i = self.start.months_until(month);
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (MonthStamp, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.start.offset(i as i64), v))
    }

    /// The sub-series covering `[from, to]`, which must lie inside the span.
    pub fn window(&self, from: MonthStamp, to: MonthStamp) -> Result<TimeSeries> {
        if from < self.start || to > self.end() || to < from {
            return Err(Error::InvalidRequest(alloc::format!(
                "window {from}..{to} outside `{}` ({}..{})",
                self.name,
                self.start,
                self.end()
            )));
        }
        let a = self.start.months_until(from) as usize;
        let b = self.start.months_until(to) as usize;
        Ok(Self { name: self.name.clone(), start: from, values: self.values[a..=b].to_vec() })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        TimeSeries::new(self.name.clone(), self.start, self.values.iter().map(|&v| f(v)).collect())
    }
}

/// Equal-length series covering one common window.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPanel {
    series: Vec<TimeSeries>,
    window: (MonthStamp, MonthStamp),
}

impl SeriesPanel {
    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn into_series(self) -> Vec<TimeSeries> {
        self.series
    }

    pub fn window(&self) -> (MonthStamp, MonthStamp) {
        self.window
    }

    pub fn start(&self) -> MonthStamp {
        self.window.0
    }

    pub fn n_vars(&self) -> usize {
        self.series.len()
    }

    /// Number of observations per series.
    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.series.iter().map(|s| String::from(s.name())).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.series.iter().position(|s| s.name() == name)
    }

    /// Observations as a `T x n` matrix, one column per series.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.len(), self.n_vars(), |t, j| self.series[j].values[t])
    }

    /// Builds a panel from a `T x n` matrix starting at `start`.
    pub fn from_matrix(start: MonthStamp, names: &[String], data: &DMatrix<f64>) -> Result<Self> {
        if names.len() != data.ncols() {
            return Err(Error::LengthMismatch { expected: data.ncols(), got: names.len() });
        }
        let series = names
            .iter()
            .enumerate()
            .map(|(j, name)| TimeSeries::new(name.clone(), start, data.column(j).iter().copied().collect()))
            .collect::<Result<Vec<_>>>()?;
        align(&series)
    }
}

/// Trims every series to the common calendar window, keeping input order.
pub fn align(series: &[TimeSeries]) -> Result<SeriesPanel> {
    if series.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let from = series.iter().map(TimeSeries::start).max().unwrap();
    let to = series.iter().map(TimeSeries::end).min().unwrap();
    if from.months_until(to) < 1 {
        return Err(Error::EmptyOverlap);
    }
    let series = series.iter().map(|s| s.window(from, to)).collect::<Result<Vec<_>>>()?;
    Ok(SeriesPanel { series, window: (from, to) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m(y: i32, mo: u32) -> MonthStamp {
        MonthStamp::new(y, mo).unwrap()
    }

    fn span(from: MonthStamp, to: MonthStamp) -> TimeSeries {
        let n = from.months_until(to) as usize + 1;
        TimeSeries::new("s", from, (0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn month_parsing_and_order() {
        assert_eq!("2010-05".parse::<MonthStamp>().unwrap(), m(2010, 5));
        assert!("2010-13".parse::<MonthStamp>().is_err());
        assert!("2010-5".parse::<MonthStamp>().is_err());
        assert!(m(2009, 12) < m(2010, 1));
        assert_eq!(m(2009, 12).offset(1), m(2010, 1));
        assert_eq!(m(2010, 1).offset(-1), m(2009, 12));
        assert_eq!(m(2004, 1).months_until(m(2006, 12)), 35);
        assert_eq!(m(2010, 3).to_string(), "2010-03");
    }

    #[test]
    fn rejects_non_finite_and_empty() {
        assert_eq!(TimeSeries::new("x", m(2000, 1), vec![]), Err(Error::EmptySeries));
        assert!(matches!(
            TimeSeries::new("x", m(2000, 1), vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn align_identical_spans() {
        let a = span(m(2004, 1), m(2006, 12));
        let p = align(&[a.clone(), a]).unwrap();
        assert_eq!(p.window(), (m(2004, 1), m(2006, 12)));
        assert_eq!(p.len(), 36);
    }

    #[test]
    fn align_intersects() {
        let a = span(m(2004, 1), m(2010, 12)).with_name("a");
        let b = span(m(2008, 1), m(2015, 6)).with_name("b");
        let p = align(&[a, b]).unwrap();
        assert_eq!(p.window(), (m(2008, 1), m(2010, 12)));
        assert_eq!(p.len(), 36);
        assert_eq!(p.names(), vec![String::from("a"), String::from("b")]);
        assert_eq!(p.series()[0].values()[0], 48.0);
        assert_eq!(p.series()[1].values()[0], 0.0);
    }

    #[test]
    fn align_disjoint_or_single_month() {
        let a = span(m(2004, 1), m(2005, 12));
        let b = span(m(2006, 1), m(2007, 12));
        assert_eq!(align(&[a.clone(), b]), Err(Error::EmptyOverlap));
        let c = span(m(2005, 12), m(2007, 1));
        assert_eq!(align(&[a, c]), Err(Error::EmptyOverlap));
        assert_eq!(align(&[]), Err(Error::EmptyOverlap));
    }

    #[test]
    fn align_idempotent() {
        let a = span(m(2001, 3), m(2010, 12));
        let b = span(m(2003, 7), m(2012, 1));
        let p = align(&[a, b]).unwrap();
        assert_eq!(align(p.series()).unwrap(), p);
    }

    #[test]
    fn matrix_round_trip() {
        let a = span(m(2001, 1), m(2001, 12)).with_name("a");
        let b = a.map(|v| 2.0 * v).unwrap().with_name("b");
        let p = align(&[a, b]).unwrap();
        let back = SeriesPanel::from_matrix(p.start(), &p.names(), &p.to_matrix()).unwrap();
        assert_eq!(back, p);
    }
}
