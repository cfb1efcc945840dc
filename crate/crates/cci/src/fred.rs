//! Client for a FRED-style `series/observations` JSON endpoint with a
//! file cache and an offline mode.
//!
//! Cache layout: `<cache_dir>/<series_id>/<start>_<end>.json`, holding the
//! raw response body.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use cci_core::{MonthStamp, TimeSeries};
use serde::Deserialize;

use crate::csv_io::write_file;
use crate::error::{IngestError, Result};

pub const API_KEY_ENV: &str = "FRED_API_KEY";
pub const DEFAULT_API_BASE: &str = "https://api.stlouisfed.org/fred";

const EXCERPT_CHARS: usize = 200;

#[derive(Debug, Clone)]
pub struct FredClient {
    api_base: String,
    api_key: Option<String>,
    cache_dir: Option<PathBuf>,
    offline: bool,
    attempts: u32,
    base_delay: Duration,
    timeout: Duration,
}

#[derive(Deserialize)]
struct Response {
    observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct Observation {
    date: String,
    value: String,
}

impl FredClient {
    pub fn new(api_base: impl Into<String>) -> Self {
        Self {
            api_base: api_base.into().trim_end_matches('/').to_string(),
            api_key: None,
            cache_dir: None,
            offline: false,
            attempts: 3,
            base_delay: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }

    /// Client for `api_base` with the key taken from `FRED_API_KEY`.
    pub fn from_env(api_base: impl Into<String>) -> Self {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self { api_key: key, ..Self::new(api_base) }
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn with_cache(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }

    /// In offline mode only the cache is consulted.
    pub fn offline(mut self, offline: bool) -> Self {
        self.offline = offline;
        self
    }

    /// Total attempts and the delay before the first retry; later delays
    /// double.
    pub fn with_retry(mut self, attempts: u32, base_delay: Duration) -> Self {
        self.attempts = attempts.max(1);
        self.base_delay = base_delay;
        self
    }

    pub fn cache_path(&self, series_id: &str, window: (MonthStamp, MonthStamp)) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|d| d.join(series_id).join(format!("{}_{}.json", window.0, window.1)))
    }

    pub fn fetch(&self, series_id: &str, window: (MonthStamp, MonthStamp)) -> Result<TimeSeries> {
        let cache = self.cache_path(series_id, window);
        if self.offline {
            let path = cache.ok_or_else(|| IngestError::CacheMiss(PathBuf::from(series_id)))?;
            if !path.exists() {
                return Err(IngestError::CacheMiss(path));
            }
            let body = fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
            return parse_observations(&body, series_id);
        }
        if let Some(path) = cache.as_ref().filter(|p| p.exists()) {
            let body = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
            return parse_observations(&body, series_id);
        }
        let body = self.request(series_id, window)?;
        let series = parse_observations(&body, series_id)?;
        if let Some(path) = cache {
            write_file(&path, &body)?;
        }
        Ok(series)
    }

    fn request(&self, series_id: &str, window: (MonthStamp, MonthStamp)) -> Result<String> {
        let key = self.api_key.as_deref().ok_or_else(|| IngestError::Auth(format!("no API key; set {API_KEY_ENV}")))?;
        let agent: ureq::Agent =
            ureq::Agent::config_builder().http_status_as_error(false).timeout_global(Some(self.timeout)).build().into();
        let url = format!("{}/series/observations", self.api_base);
        let start = format!("{}-01", window.0);
        let end = format!("{}-01", window.1);
        let mut last = IngestError::Transport("no attempt made".into());
        for attempt in 0..self.attempts {
            if attempt > 0 {
                thread::sleep(self.base_delay * 2u32.pow(attempt - 1));
            }
            let response = agent
                .get(&url)
                .query("series_id", series_id)
                .query("observation_start", &start)
                .query("observation_end", &end)
                .query("file_type", "json")
                .query("api_key", key)
                .call();
            let mut response = match response {
                Ok(r) => r,
                Err(e) => {
                    last = IngestError::Transport(e.to_string());
                    continue;
                }
            };
            let status = response.status().as_u16();
            let body = response.body_mut().read_to_string().unwrap_or_default();
            match status {
                200..=299 => return Ok(body),
                401 | 403 => return Err(IngestError::Auth(excerpt(&body))),
                400 if body.contains("api_key") => return Err(IngestError::Auth(excerpt(&body))),
                429 | 500..=599 => last = IngestError::Http { status, body: excerpt(&body) },
                _ => return Err(IngestError::Http { status, body: excerpt(&body) }),
            }
        }
        Err(last)
    }
}

fn excerpt(body: &str) -> String {
    body.chars().take(EXCERPT_CHARS).collect()
}

/// Maps an observations response to a monthly series. Missing values (`.`)
/// and skipped months are reported together as a gap.
pub fn parse_observations(body: &str, series_id: &str) -> Result<TimeSeries> {
    let source = Path::new(series_id);
    let response: Response =
        serde_json::from_str(body).map_err(|e| IngestError::parse(source, e.line() as u64, e.to_string()))?;
    let mut start = None;
    let mut values = Vec::new();
    let mut missing = Vec::new();
    let mut expected: Option<MonthStamp> = None;
    for (k, obs) in response.observations.iter().enumerate() {
        let date: MonthStamp = obs
            .date
            .get(..7)
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| IngestError::parse(source, k as u64 + 1, format!("invalid date `{}`", obs.date)))?;
        if let Some(next) = expected {
            if date < next {
                return Err(IngestError::parse(source, k as u64 + 1, format!("observation {date} out of order")));
            }
            let mut m = next;
            while m < date {
                missing.push(m);
                values.push(f64::NAN);
                m = m.offset(1);
            }
        } else {
            start = Some(date);
        }
        expected = Some(date.offset(1));
        if obs.value.trim() == "." {
            missing.push(date);
            values.push(f64::NAN);
        } else {
            let v: f64 = obs
                .value
                .trim()
                .parse()
                .map_err(|_| IngestError::parse(source, k as u64 + 1, format!("invalid value `{}`", obs.value)))?;
            values.push(v);
        }
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(IngestError::Gap { source_name: series_id.to_string(), missing });
    }
    let start = start.ok_or_else(|| IngestError::parse(source, 0, "no observations"))?;
    Ok(TimeSeries::new(series_id, start, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_observations() {
        let body = r#"{"observations":[
            {"realtime_start":"x","date":"2020-01-01","value":"1.5"},
            {"date":"2020-02-01","value":"2"},
            {"date":"2020-03-01","value":"-0.25"}]}"#;
        let s = parse_observations(body, "INDPRO").unwrap();
        assert_eq!(s.values(), &[1.5, 2.0, -0.25]);
        assert_eq!(s.name(), "INDPRO");
        assert_eq!(s.start(), MonthStamp::new(2020, 1).unwrap());
    }

    #[test]
    fn dot_is_missing() {
        let body = r#"{"observations":[{"date":"2020-01-01","value":"1"},{"date":"2020-02-01","value":"."},{"date":"2020-04-01","value":"3"}]}"#;
        match parse_observations(body, "X").unwrap_err() {
            IngestError::Gap { missing, .. } => {
                assert_eq!(missing, vec![MonthStamp::new(2020, 2).unwrap(), MonthStamp::new(2020, 3).unwrap()])
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn malformed_bodies() {
        assert!(matches!(parse_observations("{", "X"), Err(IngestError::Parse { .. })));
        assert!(matches!(parse_observations(r#"{"observations":[]}"#, "X"), Err(IngestError::Parse { .. })));
        let bad_date = r#"{"observations":[{"date":"20-1","value":"1"}]}"#;
        assert!(matches!(parse_observations(bad_date, "X"), Err(IngestError::Parse { .. })));
    }

    #[test]
    fn offline_without_cache_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let client = FredClient::new("http://unused").with_cache(dir.path()).offline(true);
        let w = (MonthStamp::new(2020, 1).unwrap(), MonthStamp::new(2020, 3).unwrap());
        assert!(matches!(client.fetch("X", w), Err(IngestError::CacheMiss(_))));
        assert_eq!(client.cache_path("X", w).unwrap(), dir.path().join("X").join("2020-01_2020-03.json"));
    }

    #[test]
    fn missing_key_is_auth_error() {
        let client = FredClient::new("http://127.0.0.1:9");
        let w = (MonthStamp::new(2020, 1).unwrap(), MonthStamp::new(2020, 3).unwrap());
        assert!(matches!(client.fetch("X", w), Err(IngestError::Auth(_))));
    }
}
