//! CSV formats.
//!
//! * series: `date,value[,name]`, one row per month, `YYYY-MM` dates in
//!   ascending order without gaps;
//! * wide tables (panels, query groups): `date,<col1>,<col2>,...`;
//! * vocabulary: `term,category,is_benchmark`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use cci_core::index::{QueryTerm, QueryVocabulary};
use cci_core::{MonthStamp, SeriesPanel, TimeSeries};

use crate::error::{IngestError, Result};

const SHIPPED_VOCABULARY: &str = include_str!("../fixtures/vocabulary.csv");

/// Label of the benchmark query in the shipped vocabulary.
pub const SHIPPED_BENCHMARK: &str = "natural gas";

/// A date-indexed table with one or more numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub start: MonthStamp,
    pub columns: Vec<String>,
    /// `rows[t][j]` is column `j` at month `start + t`.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn series(&self, j: usize) -> Result<TimeSeries> {
        Ok(TimeSeries::new(self.columns[j].clone(), self.start, self.column(j))?)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| IngestError::io(path, e))
}

fn source_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Parses a wide table. `text_columns` trailing columns are kept as text and
/// returned separately (used for the optional series `name` column).
fn parse_table(text: &str, path: &Path, text_columns: &[&str]) -> Result<(Table, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| IngestError::parse(path, 1, e.to_string()))?.clone();
    if headers.get(0) != Some("date") {
        return Err(IngestError::parse(path, 1, "first column must be `date`"));
    }
    let mut columns: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut text_index = None;
    if let Some(last) = columns.last() {
        if text_columns.contains(&last.as_str()) {
            text_index = Some(columns.len());
            columns.pop();
        }
    }
    if columns.is_empty() {
        return Err(IngestError::parse(path, 1, "no value columns"));
    }
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = columns.iter().find(|c| !seen.insert(c.as_str())) {
        return Err(IngestError::parse(path, 1, format!("duplicate column `{dup}`")));
    }

    let mut start = None;
    let mut expected: Option<MonthStamp> = None;
    let mut rows = Vec::new();
    let mut texts = Vec::new();
    let mut missing = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            IngestError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let date: MonthStamp =
            record[0].parse().map_err(|_| IngestError::parse(path, line, format!("invalid month `{}`", &record[0])))?;
        if let Some(next) = expected {
            if date < next {
                return Err(IngestError::parse(path, line, format!("month {date} out of order")));
            }
            let mut m = next;
            while m < date {
                missing.push(m);
                m = m.offset(1);
            }
        } else {
            start = Some(date);
        }
        expected = Some(date.offset(1));
        let mut values = Vec::with_capacity(columns.len());
        for (j, col) in columns.iter().enumerate() {
            let field = &record[j + 1];
            let v: f64 = field
                .parse()
                .map_err(|_| IngestError::parse(path, line, format!("`{col}`: invalid number `{field}`")))?;
            if !v.is_finite() {
                return Err(IngestError::parse(path, line, format!("`{col}`: non-finite value")));
            }
            values.push(v);
        }
        rows.push(values);
        if let Some(k) = text_index {
            texts.push(record[k].to_string());
        }
    }
    if !missing.is_empty() {
        return Err(IngestError::Gap { source_name: path.display().to_string(), missing });
    }
    let start = start.ok_or_else(|| IngestError::parse(path, 1, "no data rows"))?;
    Ok((Table { start, columns, rows }, texts))
}

/// Reads a date-indexed wide table.
pub fn load_table(path: impl AsRef<Path>) -> Result<Table> {
    let path = path.as_ref();
    Ok(parse_table(&read_text(path)?, path, &[])?.0)
}

/// Reads one series. The name comes from the `name` column when present,
/// otherwise from the file stem.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let (table, names) = parse_table(&read_text(path)?, path, &["name"])?;
    if table.columns != ["value"] {
        return Err(IngestError::parse(path, 1, "expected header `date,value[,name]`"));
    }
    let name = names.first().filter(|n| !n.is_empty()).cloned().unwrap_or_else(|| source_name(path));
    Ok(table.series(0)?.with_name(name))
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| IngestError::io(&dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| IngestError::io(&dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| IngestError::io(path, e))?;
    tmp.persist(path).map_err(|e| IngestError::io(path, e.error))?;
    Ok(())
}

/// Writes a file via a temporary sibling and a rename.
pub fn write_file(path: impl AsRef<Path>, contents: &str) -> Result<()> {
    write_atomic(path.as_ref(), contents)
}

fn to_csv(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 fields")
}

pub fn series_to_csv(series: &TimeSeries) -> String {
    let header = vec!["date".into(), "value".into(), "name".into()];
    to_csv(header, series.iter().map(|(d, v)| vec![d.to_string(), v.to_string(), series.name().to_string()]))
}

/// Writes `date,value,name`; values use the shortest representation that
/// parses back to the same bits.
pub fn write_csv(path: impl AsRef<Path>, series: &TimeSeries) -> Result<()> {
    write_atomic(path.as_ref(), &series_to_csv(series))
}

pub fn panel_to_csv(panel: &SeriesPanel) -> String {
    let mut header = vec!["date".to_string()];
    header.extend(panel.names());
    to_csv(
        header,
        (0..panel.len()).map(|t| {
            let mut row = vec![panel.start().offset(t as i64).to_string()];
            row.extend(panel.series().iter().map(|s| s.values()[t].to_string()));
            row
        }),
    )
}

pub fn write_panel(path: impl AsRef<Path>, panel: &SeriesPanel) -> Result<()> {
    write_atomic(path.as_ref(), &panel_to_csv(panel))
}

/// Reads a panel; every column becomes a variable.
pub fn load_panel(path: impl AsRef<Path>) -> Result<SeriesPanel> {
    let table = load_table(path)?;
    let series = (0..table.columns.len()).map(|j| table.series(j)).collect::<Result<Vec<_>>>()?;
    Ok(cci_core::series::align(&series)?)
}

fn parse_vocabulary(text: &str, path: &Path, benchmark_label: Option<&str>) -> Result<QueryVocabulary> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| IngestError::parse(path, 1, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["term", "category", "is_benchmark"] {
        return Err(IngestError::parse(path, 1, "expected header `term,category,is_benchmark`"));
    }
    let mut terms = Vec::new();
    for record in reader.records() {
        let record =
            record.map_err(|e| IngestError::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let category: u8 = record[1]
            .parse()
            .map_err(|_| IngestError::parse(path, line, format!("invalid category `{}`", &record[1])))?;
        let is_benchmark = match record[2].to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            other => return Err(IngestError::parse(path, line, format!("invalid is_benchmark `{other}`"))),
        };
        terms.push(
            QueryTerm::new(&record[0], category, is_benchmark)
                .map_err(|e| IngestError::parse(path, line, e.to_string()))?,
        );
    }
    Ok(QueryVocabulary::new(terms, benchmark_label)?)
}

pub fn load_vocabulary(path: impl AsRef<Path>, benchmark_label: Option<&str>) -> Result<QueryVocabulary> {
    let path = path.as_ref();
    parse_vocabulary(&read_text(path)?, path, benchmark_label)
}

/// The bundled 7-category climate vocabulary.
pub fn shipped_vocabulary() -> QueryVocabulary {
    parse_vocabulary(SHIPPED_VOCABULARY, Path::new("vocabulary.csv"), Some(SHIPPED_BENCHMARK))
        .expect("bundled vocabulary is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<TimeSeries> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        fs::write(&path, text).unwrap();
        load_csv(&path)
    }

    #[test]
    fn three_rows() {
        let s = parse("date,value\n2010-01,1.5\n2010-02,2\n2010-03,-3e-2\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.values(), &[1.5, 2.0, -0.03]);
        assert_eq!(s.name(), "s");
        assert_eq!(s.start(), MonthStamp::new(2010, 1).unwrap());
    }

    #[test]
    fn name_column() {
        let s = parse("date,value,name\n2010-01,1,ip\n2010-02,2,ip\n").unwrap();
        assert_eq!(s.name(), "ip");
    }

    #[test]
    fn gap_names_missing_month() {
        let err = parse("date,value\n2010-03,1\n2010-04,1\n2010-06,1\n").unwrap_err();
        match err {
            IngestError::Gap { missing, .. } => assert_eq!(missing, vec![MonthStamp::new(2010, 5).unwrap()]),
            other => panic!("{other}"),
        }
        assert!(parse("date,value\n2010-04,1\n2010-06,1\n").unwrap_err().to_string().contains("2010-05"));
    }

    #[test]
    fn bad_month_reports_line() {
        match parse("date,value\n2010-11,1\n2010-12,1\n2010-13,1\n").unwrap_err() {
            IngestError::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("2010-13"));
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn other_malformed_inputs() {
        assert!(matches!(parse("when,value\n2010-01,1\n"), Err(IngestError::Parse { line: 1, .. })));
        assert!(matches!(parse("date,value\n2010-01,abc\n"), Err(IngestError::Parse { line: 2, .. })));
        assert!(matches!(parse("date,value\n2010-01,NaN\n"), Err(IngestError::Parse { .. })));
        assert!(matches!(parse("date,value\n2010-02,1\n2010-01,1\n"), Err(IngestError::Parse { line: 3, .. })));
        assert!(matches!(parse("date,value\n2010-02,1\n2010-02,1\n"), Err(IngestError::Parse { line: 3, .. })));
        assert!(matches!(parse("date,value\n"), Err(IngestError::Parse { .. })));
        assert!(matches!(parse("date,value\n2010-01\n"), Err(IngestError::Parse { .. })));
    }

    #[test]
    fn round_trip_is_exact() {
        let values = vec![0.1 + 0.2, 1e-300, -123456.789, 1.0 / 3.0, 5e15];
        let s = TimeSeries::new("x", MonthStamp::new(1999, 11).unwrap(), values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&path, &s).unwrap();
        assert_eq!(load_csv(&path).unwrap(), s);
    }

    #[test]
    fn panel_round_trip() {
        let a = TimeSeries::new("a", MonthStamp::new(2004, 1).unwrap(), vec![1.0, 2.0, 3.0]).unwrap();
        let b = TimeSeries::new("b", MonthStamp::new(2004, 1).unwrap(), vec![0.5, -2.0, 7.25]).unwrap();
        let panel = cci_core::series::align(&[a, b]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        write_panel(&path, &panel).unwrap();
        assert_eq!(load_panel(&path).unwrap(), panel);
    }

    #[test]
    fn shipped_vocabulary_loads() {
        let v = shipped_vocabulary();
        assert_eq!(v.benchmark().category, 4);
        assert!(v.benchmark().text.to_lowercase().starts_with(SHIPPED_BENCHMARK));
        assert_eq!(v.len(), 107);
        assert_eq!(v.terms().len(), 106);
    }
}
