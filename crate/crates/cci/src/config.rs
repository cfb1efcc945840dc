//! Run configuration: a line-oriented `key: value` text format.
//!
//! ```text
//! # comments start with '#'
//! window: 2004-01 2023-06
//! lags: 6
//! horizon: 12
//! level: 0.68
//! reps: 1000
//! block_len: 21
//! seed: 7
//! adjust_order: adjust-then-transform
//! source: local_csv data/cci.csv name=cci
//! source: remote_api INDPRO name=ip transform=pct_change adjust=true
//! instrument: local_csv data/t90.csv
//! ```
//!
//! `source` may repeat; order defines the VAR ordering, so the concern
//! index goes first. Relative paths resolve against the config file's
//! directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use cci_core::series::{pct_change, seasonal_adjust, standardize, yoy_growth};
use cci_core::{MonthStamp, SeriesPanel, TimeSeries};

use crate::csv_io::load_csv;
use crate::error::{IngestError, Result};
use crate::fred::{FredClient, DEFAULT_API_BASE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    LocalCsv,
    RemoteApi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Transform {
    #[default]
    None,
    PctChange,
    Yoy,
    Standardize,
}

impl Transform {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "none" => Transform::None,
            "pct_change" => Transform::PctChange,
            "yoy" => Transform::Yoy,
            "standardize" => Transform::Standardize,
            _ => return None,
        })
    }

    /// Months of history consumed by the transform.
    fn lost_months(self) -> i64 {
        match self {
            Transform::PctChange => 1,
            Transform::Yoy => 12,
            _ => 0,
        }
    }

    pub fn apply(self, s: &TimeSeries) -> cci_core::Result<TimeSeries> {
        match self {
            Transform::None => Ok(s.clone()),
            Transform::PctChange => pct_change(s),
            Transform::Yoy => yoy_growth(s),
            Transform::Standardize => standardize(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdjustOrder {
    #[default]
    AdjustThenTransform,
    TransformThenAdjust,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSource {
    pub kind: SourceKind,
    pub locator: String,
    pub name: Option<String>,
    pub transform: Transform,
    pub seasonal_adjust: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sources: Vec<SeriesSource>,
    pub instrument: Option<SeriesSource>,
    pub window: Option<(MonthStamp, MonthStamp)>,
    pub var_lags: usize,
    pub horizon: usize,
    pub level: f64,
    pub reps: usize,
    pub block_len: Option<usize>,
    pub seed: u64,
    pub adjust_order: AdjustOrder,
    pub api_base: String,
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
    /// Directory relative paths resolve against.
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sources: Vec::new(),
            instrument: None,
            window: None,
            var_lags: 6,
            horizon: 12,
            level: 0.68,
            reps: 1000,
            block_len: None,
            seed: 0,
            adjust_order: AdjustOrder::default(),
            api_base: DEFAULT_API_BASE.to_string(),
            cache_dir: None,
            offline: false,
            base_dir: PathBuf::from("."),
        }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| IngestError::config(key, format!("invalid number `{value}`")))
}

fn month(key: &str, value: &str) -> Result<MonthStamp> {
    value.parse().map_err(|_| IngestError::config(key, format!("invalid month `{value}`")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(IngestError::config(key, format!("expected true or false, got `{value}`"))),
    }
}

fn parse_source(key: &str, value: &str) -> Result<SeriesSource> {
    let mut parts = value.split_whitespace();
    let kind = match parts.next() {
        Some("local_csv") => SourceKind::LocalCsv,
        Some("remote_api") => SourceKind::RemoteApi,
        Some(other) => return Err(IngestError::config(key, format!("unknown source kind `{other}`"))),
        None => return Err(IngestError::config(key, "missing source kind")),
    };
    let locator = parts.next().ok_or_else(|| IngestError::config(key, "missing locator"))?.to_string();
    let mut source = SeriesSource { kind, locator, name: None, transform: Transform::None, seasonal_adjust: false };
    for opt in parts {
        let (k, v) =
            opt.split_once('=').ok_or_else(|| IngestError::config(key, format!("option `{opt}` is not key=value")))?;
        match k {
            "name" => source.name = Some(v.to_string()),
            "transform" => {
                source.transform =
                    Transform::parse(v).ok_or_else(|| IngestError::config(key, format!("unknown transform `{v}`")))?
            }
            "adjust" => source.seasonal_adjust = boolean(key, v)?,
            _ => return Err(IngestError::config(key, format!("unknown option `{k}`"))),
        }
    }
    Ok(source)
}

/// Parses config text; relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<RunConfig> {
    let mut cfg = RunConfig { base_dir: base_dir.to_path_buf(), ..RunConfig::default() };
    let mut seen = BTreeSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| IngestError::config(line, format!("line {} is not `key: value`", k + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if key != "source" && !seen.insert(key.to_string()) {
            return Err(IngestError::config(key, "given more than once"));
        }
        match key {
            "source" => cfg.sources.push(parse_source(key, value)?),
            "instrument" => cfg.instrument = Some(parse_source(key, value)?),
            "window" => {
                let (a, b) = value
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| IngestError::config(key, "expected `<start> <end>`"))?;
                cfg.window = Some((month(key, a.trim())?, month(key, b.trim())?));
            }
            "lags" => cfg.var_lags = number(key, value)?,
            "horizon" => cfg.horizon = number(key, value)?,
            "level" => cfg.level = number(key, value)?,
            "reps" => cfg.reps = number(key, value)?,
            "block_len" => cfg.block_len = Some(number(key, value)?),
            "seed" => cfg.seed = number(key, value)?,
            "adjust_order" => {
                cfg.adjust_order = match value {
                    "adjust-then-transform" => AdjustOrder::AdjustThenTransform,
                    "transform-then-adjust" => AdjustOrder::TransformThenAdjust,
                    _ => return Err(IngestError::config(key, format!("unknown order `{value}`"))),
                }
            }
            "api_base" => cfg.api_base = value.to_string(),
            "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
            "offline" => cfg.offline = boolean(key, value)?,
            _ => return Err(IngestError::config(key, "unknown key")),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    parse_config(&text, &base)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sources.is_empty() {
            return Err(IngestError::config("source", "at least one source is required"));
        }
        if let Some((a, b)) = self.window {
            if b <= a {
                return Err(IngestError::config("window", format!("end {b} is not after start {a}")));
            }
        }
        if self.var_lags == 0 {
            return Err(IngestError::config("lags", "must be at least 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(IngestError::config("level", format!("{} is outside (0, 1)", self.level)));
        }
        if self.reps < 100 {
            return Err(IngestError::config("reps", format!("{} is below the minimum of 100", self.reps)));
        }
        if self.block_len == Some(0) {
            return Err(IngestError::config("block_len", "must be at least 1"));
        }
        let remote = self.sources.iter().chain(&self.instrument).any(|s| s.kind == SourceKind::RemoteApi);
        if remote && self.window.is_none() {
            return Err(IngestError::config("window", "required when a source is remote_api"));
        }
        let mut names = BTreeSet::new();
        for s in &self.sources {
            let name = s.name.clone().unwrap_or_else(|| s.locator.clone());
            if !names.insert(name.clone()) {
                return Err(IngestError::config("source", format!("duplicate series name `{name}`")));
            }
        }
        Ok(())
    }

    fn client(&self) -> FredClient {
        let mut client = FredClient::from_env(self.api_base.clone()).offline(self.offline);
        if let Some(dir) = &self.cache_dir {
            client = client.with_cache(self.base_dir.join(dir));
        }
        client
    }

    /// Reads one source and applies its adjustment and transform.
    pub fn load_source(&self, source: &SeriesSource) -> Result<TimeSeries> {
        let raw = match source.kind {
            SourceKind::LocalCsv => load_csv(self.base_dir.join(&source.locator))?,
            SourceKind::RemoteApi => {
                let (a, b) = self.window.expect("validated");
                self.client().fetch(&source.locator, (a.offset(-source.transform.lost_months()), b))?
            }
        };
        let raw = match &source.name {
            Some(n) => raw.with_name(n.clone()),
            None if source.kind == SourceKind::RemoteApi => raw.with_name(source.locator.clone()),
            None => raw,
        };
        let adjust =
            |s: TimeSeries| -> Result<TimeSeries> { Ok(if source.seasonal_adjust { seasonal_adjust(&s)? } else { s }) };
        Ok(match self.adjust_order {
            AdjustOrder::AdjustThenTransform => source.transform.apply(&adjust(raw)?)?,
            AdjustOrder::TransformThenAdjust => adjust(source.transform.apply(&raw)?)?,
        })
    }

    /// All sources aligned, restricted to the configured window where it
    /// overlaps the data.
    pub fn load_panel(&self) -> Result<SeriesPanel> {
        let series = self.sources.iter().map(|s| self.load_source(s)).collect::<Result<Vec<_>>>()?;
        let panel = cci_core::series::align(&series)?;
        match self.window {
            None => Ok(panel),
            Some((a, b)) => {
                let (from, to) = panel.window();
                let (from, to) = (from.max(a), to.min(b));
                let windowed = panel
                    .series()
                    .iter()
                    .map(|s| s.window(from, to))
                    .collect::<cci_core::Result<Vec<_>>>()
                    .map_err(|_| IngestError::config("window", format!("no data inside {a}..{b}")))?;
                Ok(cci_core::series::align(&windowed)?)
            }
        }
    }

    pub fn load_instrument(&self) -> Result<Option<TimeSeries>> {
        self.instrument.as_ref().map(|s| self.load_source(s)).transpose()
    }
}
