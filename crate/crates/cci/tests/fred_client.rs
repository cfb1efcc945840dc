//! FRED client against a local mock server.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use cci::fred::FredClient;
use cci::IngestError;
use cci_core::MonthStamp;

const BODY: &str = r#"{"realtime_start":"2024-01-01","observations":[
{"realtime_start":"2024-01-01","realtime_end":"2024-01-01","date":"2020-01-01","value":"101.5"},
{"realtime_start":"2024-01-01","realtime_end":"2024-01-01","date":"2020-02-01","value":"102.25"},
{"realtime_start":"2024-01-01","realtime_end":"2024-01-01","date":"2020-03-01","value":"99.75"}]}"#;

struct Mock {
    base: String,
    hits: Arc<AtomicUsize>,
    targets: Arc<Mutex<Vec<String>>>,
}

/// Serves `responses` in order, repeating the last one.
fn serve(responses: Vec<(u16, &'static str)>) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}/fred", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let targets = Arc::new(Mutex::new(Vec::new()));
    let (h, tg) = (hits.clone(), targets.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                    break;
                }
            }
            tg.lock().unwrap().push(request_line.split_whitespace().nth(1).unwrap_or_default().to_string());
            let k = h.fetch_add(1, Ordering::SeqCst);
            let (status, body) = responses[k.min(responses.len() - 1)];
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            let _ = stream.write_all(reply.as_bytes());
        }
    });
    Mock { base, hits, targets }
}

fn window() -> (MonthStamp, MonthStamp) {
    (MonthStamp::new(2020, 1).unwrap(), MonthStamp::new(2020, 3).unwrap())
}

#[test]
fn fetches_three_observations() {
    let mock = serve(vec![(200, BODY)]);
    let client = FredClient::new(&mock.base).with_api_key("k123");
    let s = client.fetch("INDPRO", window()).unwrap();
    assert_eq!(s.values(), &[101.5, 102.25, 99.75]);
    assert_eq!(s.start(), MonthStamp::new(2020, 1).unwrap());
    let target = mock.targets.lock().unwrap()[0].clone();
    assert!(target.starts_with("/fred/series/observations?"), "{target}");
    for part in [
        "series_id=INDPRO",
        "observation_start=2020-01-01",
        "observation_end=2020-03-01",
        "file_type=json",
        "api_key=k123",
    ] {
        assert!(target.contains(part), "{target} lacks {part}");
    }
}

#[test]
fn rate_limit_retries_then_fails() {
    let mock = serve(vec![(429, r#"{"error_message":"Too Many Requests"}"#)]);
    let client = FredClient::new(&mock.base).with_api_key("k").with_retry(3, Duration::from_millis(5));
    match client.fetch("INDPRO", window()).unwrap_err() {
        IngestError::Http { status, .. } => assert_eq!(status, 429),
        other => panic!("unexpected {other}"),
    }
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn recovers_after_transient_errors() {
    let mock = serve(vec![(503, "busy"), (429, "slow down"), (200, BODY)]);
    let client = FredClient::new(&mock.base).with_api_key("k").with_retry(3, Duration::from_millis(5));
    assert_eq!(client.fetch("INDPRO", window()).unwrap().len(), 3);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 3);
}

#[test]
fn bad_key_is_auth_error_without_retry() {
    let mock = serve(vec![(
        400,
        r#"{"error_code":400,"error_message":"Bad Request.  The value for variable api_key is not registered."}"#,
    )]);
    let client = FredClient::new(&mock.base).with_api_key("bad").with_retry(3, Duration::from_millis(5));
    assert!(matches!(client.fetch("INDPRO", window()), Err(IngestError::Auth(_))));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);

    let mock = serve(vec![(403, "forbidden")]);
    let client = FredClient::new(&mock.base).with_api_key("bad");
    assert!(matches!(client.fetch("INDPRO", window()), Err(IngestError::Auth(_))));
}

#[test]
fn not_found_fails_immediately() {
    let mock = serve(vec![(404, "no such series")]);
    let client = FredClient::new(&mock.base).with_api_key("k").with_retry(3, Duration::from_millis(5));
    assert!(matches!(client.fetch("NOPE", window()), Err(IngestError::Http { status: 404, .. })));
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);
}

#[test]
fn cache_round_trip_serves_offline() {
    let dir = tempfile::tempdir().unwrap();
    let mock = serve(vec![(200, BODY)]);
    let online = FredClient::new(&mock.base).with_api_key("k").with_cache(dir.path());
    let first = online.fetch("INDPRO", window()).unwrap();
    assert!(online.cache_path("INDPRO", window()).unwrap().exists());
    // Second online call is served from the cache.
    assert_eq!(online.fetch("INDPRO", window()).unwrap(), first);
    assert_eq!(mock.hits.load(Ordering::SeqCst), 1);

    let offline = FredClient::new("http://127.0.0.1:9").with_cache(dir.path()).offline(true);
    assert_eq!(offline.fetch("INDPRO", window()).unwrap(), first);
    let other = (MonthStamp::new(2021, 1).unwrap(), MonthStamp::new(2021, 3).unwrap());
    assert!(matches!(offline.fetch("INDPRO", other), Err(IngestError::CacheMiss(_))));
}

#[test]
fn missing_observation_is_a_gap() {
    const HOLE: &str = r#"{"observations":[{"date":"2020-01-01","value":"1"},{"date":"2020-02-01","value":"."},{"date":"2020-03-01","value":"3"}]}"#;
    let mock = serve(vec![(200, HOLE)]);
    let client = FredClient::new(&mock.base).with_api_key("k");
    match client.fetch("X", window()).unwrap_err() {
        IngestError::Gap { missing, .. } => assert_eq!(missing, vec![MonthStamp::new(2020, 2).unwrap()]),
        other => panic!("unexpected {other}"),
    }
}
