//! Monthly series ingestion, validation, alignment and return transforms.
//!
//! Months are integer keys (`year * 12 + month - 1`), so gap detection is
//! plain integer arithmetic. A [`MonthlySeries`] is contiguous by
//! construction: it stores its first month and one value per month after it.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error("column `{column}` not present (header row {row})")]
    MissingColumn { column: String, row: usize },
    #[error("gap in dates at row {row}: {previous} followed by {found}")]
    GapInDates {
        row: usize,
        previous: MonthKey,
        found: MonthKey,
    },
    #[error("duplicate or out-of-order date {month} at row {row}")]
    DuplicateDate { row: usize, month: MonthKey },
    #[error("unparseable value `{raw}` in column `{column}` at row {row}")]
    UnparseableValue {
        row: usize,
        column: String,
        raw: String,
    },
    #[error("unparseable date `{raw}` at row {row}")]
    UnparseableDate { row: usize, raw: String },
    #[error("non-finite value at position {index} of `{name}`")]
    NonFiniteValue { name: String, index: usize },
    #[error("non-positive value {value} at position {index} of `{name}`")]
    NonPositiveValue {
        name: String,
        index: usize,
        value: f64,
    },
    #[error("series `{0}` is too short for this transform")]
    TooShort(String),
    #[error("series month ranges do not overlap")]
    EmptyIntersection,
    #[error("no series supplied")]
    NoSeries,
    #[error("column `{0}` has length {1}, expected {2}")]
    ColumnLength(String, usize, usize),
    #[error("csv error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, SeriesError>;

/// Calendar month as `year * 12 + (month - 1)`.
/// Serializes as `"YYYY-MM"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct MonthKey(i32);

impl From<MonthKey> for String {
    fn from(m: MonthKey) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for MonthKey {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse().map_err(|_| format!("invalid month `{s}`, expected YYYY-MM"))
    }
}

impl MonthKey {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        if !(1..=12).contains(&month) {
            return None;
        }
        Some(Self(year * 12 + month as i32 - 1))
    }

    pub fn from_raw(key: i32) -> Self {
        Self(key)
    }

    pub fn raw(self) -> i32 {
        self.0
    }

    pub fn year(self) -> i32 {
        self.0.div_euclid(12)
    }

    pub fn month(self) -> u32 {
        self.0.rem_euclid(12) as u32 + 1
    }

    /// Shift by a signed number of months.
    pub fn offset(self, months: i32) -> Self {
        Self(self.0 + months)
    }

    /// Signed number of months from `other` to `self`.
    pub fn months_since(self, other: MonthKey) -> i32 {
        self.0 - other.0
    }
}

impl fmt::Display for MonthKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year(), self.month())
    }
}

impl FromStr for MonthKey {
    type Err = ();

    /// Accepts `YYYY-MM`.
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        let s = s.trim();
        let (y, m) = s.split_once('-').ok_or(())?;
        if y.len() != 4 || m.len() != 2 {
            return Err(());
        }
        let year: i32 = y.parse().map_err(|_| ())?;
        let month: u32 = m.parse().map_err(|_| ())?;
        MonthKey::new(year, month).ok_or(())
    }
}

/// A contiguous run of monthly observations of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthlySeries {
    name: String,
    start: MonthKey,
    values: Vec<f64>,
}

impl MonthlySeries {
    /// Build from a start month and one value per consecutive month.
    pub fn new(name: impl Into<String>, start: MonthKey, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SeriesError::NonFiniteValue { name, index });
        }
        Ok(Self {
            name,
            start,
            values,
        })
    }

    /// Build from explicit `(month, value)` pairs, checking ordering and gaps.
    /// Reported rows are 1-based positions in `observations`.
    pub fn from_observations(
        name: impl Into<String>,
        observations: &[(MonthKey, f64)],
    ) -> Result<Self> {
        let name = name.into();
        let Some(&(start, _)) = observations.first() else {
            return Self::new(name, MonthKey(0), Vec::new());
        };
        for (i, pair) in observations.windows(2).enumerate() {
            let (prev, next) = (pair[0].0, pair[1].0);
            let row = i + 2;
            if next <= prev {
                return Err(SeriesError::DuplicateDate { row, month: next });
            }
            if next.months_since(prev) != 1 {
                return Err(SeriesError::GapInDates {
                    row,
                    previous: prev,
                    found: next,
                });
            }
        }
        Self::new(name, start, observations.iter().map(|o| o.1).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn start(&self) -> MonthKey {
        self.start
    }

    /// Last month covered. Equal to `start` minus one for an empty series.
    pub fn end(&self) -> MonthKey {
        self.start.offset(self.values.len() as i32 - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn months(&self) -> impl Iterator<Item = MonthKey> + '_ {
        (0..self.values.len()).map(|i| self.start.offset(i as i32))
    }

    pub fn get(&self, month: MonthKey) -> Option<f64> {
        let idx = month.months_since(self.start);
        if idx < 0 {
            return None;
        }
        self.values.get(idx as usize).copied()
    }

    pub fn observations(&self) -> Vec<(MonthKey, f64)> {
        self.months().zip(self.values.iter().copied()).collect()
    }

    /// Same dates, new values and name.
    pub fn with_values(&self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::new(name, self.start, values)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Restrict to the inclusive range `[from, to]`.
    pub fn slice(&self, from: MonthKey, to: MonthKey) -> Self {
        let lo = from.months_since(self.start).max(0) as usize;
        let hi = (to.months_since(self.start) + 1).clamp(0, self.values.len() as i32) as usize;
        let lo = lo.min(hi);
        Self {
            name: self.name.clone(),
            start: self.start.offset(lo as i32),
            values: self.values[lo..hi].to_vec(),
        }
    }
}

/// Maps a series name to the CSV header it is read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub column: String,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, column: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            column: column.into(),
        }
    }
}

/// Read series from a CSV file whose first column holds `YYYY-MM` dates.
pub fn load_series(path: impl AsRef<Path>, columns: &[ColumnSpec]) -> Result<Vec<MonthlySeries>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|_| SeriesError::MissingFile(path.display().to_string()))?;
    load_series_from_reader(file, columns)
}

/// Reader variant of [`load_series`]. Data rows are numbered from 1.
pub fn load_series_from_reader<R: Read>(
    reader: R,
    columns: &[ColumnSpec],
) -> Result<Vec<MonthlySeries>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SeriesError::Csv(e.to_string()))?
        .clone();
    let indices = columns
        .iter()
        .map(|spec| {
            headers
                .iter()
                .position(|h| h == spec.column)
                .ok_or_else(|| SeriesError::MissingColumn {
                    column: spec.column.clone(),
                    row: 0,
                })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut dates: Vec<MonthKey> = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| SeriesError::Csv(format!("row {row}: {e}")))?;
        let raw_date = record.get(0).unwrap_or("");
        let month = raw_date
            .parse::<MonthKey>()
            .map_err(|_| SeriesError::UnparseableDate {
                row,
                raw: raw_date.to_string(),
            })?;
        if let Some(&prev) = dates.last() {
            if month <= prev {
                return Err(SeriesError::DuplicateDate { row, month });
            }
            if month.months_since(prev) != 1 {
                return Err(SeriesError::GapInDates {
                    row,
                    previous: prev,
                    found: month,
                });
            }
        }
        dates.push(month);
        for ((spec, &idx), out) in columns.iter().zip(&indices).zip(values.iter_mut()) {
            let raw = record.get(idx).ok_or_else(|| SeriesError::MissingColumn {
                column: spec.column.clone(),
                row,
            })?;
            let v = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| SeriesError::UnparseableValue {
                    row,
                    column: spec.column.clone(),
                    raw: raw.to_string(),
                })?;
            out.push(v);
        }
    }

    let start = dates.first().copied().unwrap_or(MonthKey(0));
    columns
        .iter()
        .zip(values)
        .map(|(spec, vals)| MonthlySeries::new(spec.name.clone(), start, vals))
        .collect()
}

/// Several series on one shared calendar axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedFrame {
    start: MonthKey,
    len: usize,
    columns: Vec<(String, Vec<f64>)>,
}

impl AlignedFrame {
    pub fn new(start: MonthKey, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let len = columns.first().map_or(0, |c| c.1.len());
        for (name, col) in &columns {
            if col.len() != len {
                return Err(SeriesError::ColumnLength(name.clone(), col.len(), len));
            }
        }
        Ok(Self {
            start,
            len,
            columns,
        })
    }

    pub fn start(&self) -> MonthKey {
        self.start
    }

    pub fn end(&self) -> MonthKey {
        self.start.offset(self.len as i32 - 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn months(&self) -> impl Iterator<Item = MonthKey> + '_ {
        (0..self.len).map(|i| self.start.offset(i as i32))
    }

    pub fn month_at(&self, row: usize) -> MonthKey {
        self.start.offset(row as i32)
    }

    /// Row index of `month`, if inside the frame.
    pub fn row_of(&self, month: MonthKey) -> Option<usize> {
        let idx = month.months_since(self.start);
        (idx >= 0 && (idx as usize) < self.len).then_some(idx as usize)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.0.as_str())
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.iter().any(|c| c.0 == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.0 == name)
            .map(|c| c.1.as_slice())
            .ok_or_else(|| SeriesError::MissingColumn {
                column: name.to_string(),
                row: 0,
            })
    }

    pub fn series(&self, name: &str) -> Result<MonthlySeries> {
        MonthlySeries::new(name, self.start, self.column(name)?.to_vec())
    }

    pub fn to_series(&self) -> Vec<MonthlySeries> {
        self.columns
            .iter()
            .map(|(n, v)| MonthlySeries {
                name: n.clone(),
                start: self.start,
                values: v.clone(),
            })
            .collect()
    }
}

/// Truncate every series to the intersection of their month ranges.
pub fn align(series: &[MonthlySeries]) -> Result<AlignedFrame> {
    if series.is_empty() {
        return Err(SeriesError::NoSeries);
    }
    let from = series.iter().map(|s| s.start()).max().unwrap();
    let to = series.iter().map(|s| s.end()).min().unwrap();
    if series.iter().any(|s| s.is_empty()) || to < from {
        return Err(SeriesError::EmptyIntersection);
    }
    let columns = series
        .iter()
        .map(|s| {
            let part = s.slice(from, to);
            (s.name.clone(), part.values)
        })
        .collect();
    AlignedFrame::new(from, columns)
}

/// `ln(x_t / x_{t-1})`, dated at `t`.
pub fn log_returns(s: &MonthlySeries) -> Result<MonthlySeries> {
    if s.len() < 2 {
        return Err(SeriesError::TooShort(s.name.clone()));
    }
    if let Some((index, &value)) = s.values.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(SeriesError::NonPositiveValue {
            name: s.name.clone(),
            index,
            value,
        });
    }
    let values = s.values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    MonthlySeries::new(s.name.clone(), s.start.offset(1), values)
}

/// A log return of 0.01 (one percent) is 100 basis points.
pub fn to_basis_points(r: &MonthlySeries) -> MonthlySeries {
    MonthlySeries {
        name: r.name.clone(),
        start: r.start,
        values: r.values.iter().map(|v| v * 10_000.0).collect(),
    }
}

/// Sign flip, so falls read as positive loss magnitudes.
pub fn positive_component(s: &MonthlySeries) -> MonthlySeries {
    MonthlySeries {
        name: s.name.clone(),
        start: s.start,
        values: s.values.iter().map(|v| -v).collect(),
    }
}
