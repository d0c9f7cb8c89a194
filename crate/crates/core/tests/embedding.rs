use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use mofname::embedding::*;
use mofname::nomenclature::normalize;

fn fixture() -> Vec<String> {
    include_str!("fixtures/names100.txt").lines().map(str::to_string).collect()
}

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 14695981039346656037;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(1099511628211);
    }
    h
}

/// Straightforward re-derivation of the baseline embedder.
fn oracle_embedding(name: &str, dim: usize) -> Vec<f64> {
    let chars: Vec<char> = normalize(name).chars().collect();
    let mut counts: BTreeMap<String, u32> = BTreeMap::new();
    for n in 3..=5 {
        for w in chars.windows(n) {
            *counts.entry(w.iter().collect()).or_default() += 1;
        }
    }
    let mut v = vec![0.0f64; dim];
    for (g, tf) in counts {
        let h = fnv(g.as_bytes());
        let s = if h & (1 << 63) != 0 { -1.0 } else { 1.0 };
        v[(h % dim as u64) as usize] += s * (1.0 + (tf as f64).ln());
    }
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn digest(embs: &[Embedding]) -> u64 {
    let mut bytes = Vec::new();
    for e in embs {
        for v in &e.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fnv(&bytes)
}

const FIXTURE_DIGEST: u64 = 0xbfad_9629_83e0_7b4e;

#[test]
fn baseline_matches_oracle_and_frozen_digest() {
    let names = fixture();
    assert_eq!(names.len(), 100);
    let provider = Provider::new(ProviderConfig::default()).unwrap();
    let a = provider.embed(&names).unwrap();
    let b = provider.embed(&names).unwrap();
    assert_eq!(a, b);
    for (name, e) in names.iter().zip(&a) {
        assert_eq!(e.dim(), 512);
        assert_eq!(e.provider_id, "baseline-ngram-fnv1a:d512:n3-5");
        let oracle = oracle_embedding(name, 512);
        for (x, y) in e.values.iter().zip(&oracle) {
            assert!((f64::from(*x) - y).abs() < 1e-6, "{name}");
        }
        let norm: f64 = e.values.iter().map(|v| f64::from(*v).powi(2)).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
    }
    assert_eq!(digest(&a), FIXTURE_DIGEST);
}

#[test]
fn unicode_and_ascii_spellings_embed_identically() {
    let provider = Provider::new(ProviderConfig::default()).unwrap();
    let e = provider
        .embed(&["catena-(tris(μ₄-Terephthalato)-tetra-zinc)".into(), "catena-(tris(mu4-terephthalato)-tetra-zinc)".into()])
        .unwrap();
    assert_eq!(e[0], e[1]);
    let short = provider.embed(&["ab".into()]).unwrap();
    assert!(short[0].is_zero());
}

#[test]
fn store_round_trip_is_bitwise() {
    let names = fixture();
    let embs = Provider::new(ProviderConfig::default()).unwrap().embed(&names).unwrap();
    let records: Vec<(String, Embedding)> = embs.into_iter().enumerate().map(|(i, e)| (format!("REF{i:03}"), e)).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.mofe");
    store_embeddings(&records, &path).unwrap();
    let loaded = load_embeddings(&path).unwrap();
    assert_eq!(loaded.len(), records.len());
    for ((la, ea), (lb, eb)) in records.iter().zip(&loaded) {
        assert_eq!(la, lb);
        let bits_a: Vec<u32> = ea.values.iter().map(|v| v.to_bits()).collect();
        let bits_b: Vec<u32> = eb.values.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"MOFE");
    assert_eq!(encode_store(&loaded).unwrap(), bytes);
}

#[test]
fn corrupted_stores_raise_specific_errors() {
    let records = vec![("A".to_string(), Embedding::new(vec![0.6, 0.8], "p"))];
    let good = encode_store(&records).unwrap();

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert!(matches!(decode_store(&bad_magic, "p"), Err(StoreError::BadMagic)));

    let mut bad_version = good.clone();
    bad_version[4] = 9;
    assert!(matches!(decode_store(&bad_version, "p"), Err(StoreError::UnsupportedVersion(9))));

    let mut flipped = good.clone();
    let mid = good.len() - 6;
    flipped[mid] ^= 0x40;
    assert!(matches!(decode_store(&flipped, "p"), Err(StoreError::ChecksumMismatch { .. })));

    for cut in 0..good.len() {
        assert!(matches!(decode_store(&good[..cut], "p"), Err(StoreError::Truncated)), "cut {cut}");
    }

    let mut trailing = good.clone();
    trailing.push(0);
    assert!(decode_store(&trailing, "p").is_err());

    let dir = tempfile::tempdir().unwrap();
    assert!(load_embeddings(dir.path().join("missing.mofe")).is_err());
}

// ---- remote client against a recording stub ----

#[derive(Clone, Copy)]
enum Mode {
    Echo,
    Status(u16),
    Garbage,
    DropOne,
    RaggedDims,
    Slow,
}

struct Stub {
    url: String,
    requests: Arc<Mutex<Vec<Vec<String>>>>,
}

fn read_request(reader: &mut BufReader<TcpStream>) -> Option<Vec<u8>> {
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).ok()? == 0 {
            return None;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().ok()?;
            }
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).ok()?;
    Some(body)
}

fn respond(stream: &mut TcpStream, status: u16, body: &str) {
    let reason = if status == 200 { "OK" } else { "Error" };
    let _ = write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\n\r\n{body}",
        body.len()
    );
    let _ = stream.flush();
}

/// Vector for `text`: deliberately not unit length, first coordinate encodes the text length.
fn stub_vector(text: &str) -> Vec<f32> {
    vec![text.chars().count() as f32, 2.0, -1.0]
}

fn start_stub(mode: Mode) -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&requests);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let log = Arc::clone(&log);
            thread::spawn(move || {
                let mut writer = stream.try_clone().unwrap();
                let mut reader = BufReader::new(stream);
                while let Some(body) = read_request(&mut reader) {
                    let req: serde_json::Value = serde_json::from_slice(&body).unwrap();
                    let texts: Vec<String> = serde_json::from_value(req["texts"].clone()).unwrap();
                    log.lock().unwrap().push(texts.clone());
                    let mut vectors: Vec<Vec<f32>> = texts.iter().map(|t| stub_vector(t)).collect();
                    match mode {
                        Mode::Echo => {}
                        Mode::Status(code) => {
                            respond(&mut writer, code, r#"{"error":"nope"}"#);
                            continue;
                        }
                        Mode::Garbage => {
                            respond(&mut writer, 200, "{not json");
                            continue;
                        }
                        Mode::DropOne => {
                            vectors.pop();
                        }
                        Mode::RaggedDims => {
                            vectors[0].push(1.0);
                        }
                        Mode::Slow => thread::sleep(Duration::from_millis(600)),
                    }
                    let body = serde_json::json!({ "embeddings": vectors }).to_string();
                    respond(&mut writer, 200, &body);
                }
            });
        }
    });
    Stub { url, requests }
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("name {}", "x".repeat(i % 50 + 1))).collect()
}

#[test]
fn remote_batches_and_preserves_order() {
    let stub = start_stub(Mode::Echo);
    let config = ProviderConfig::remote(&stub.url);
    let input = names(1000);
    let out = embed_remote(&input, &config).unwrap();
    let requests = stub.requests.lock().unwrap().clone();
    assert_eq!(requests.len(), 1000usize.div_ceil(32));
    assert!(requests.iter().all(|r| r.len() <= 32));
    let mut sent: Vec<String> = requests.concat();
    sent.sort();
    let mut expected = input.clone();
    expected.sort();
    assert_eq!(sent, expected);
    for (text, e) in input.iter().zip(&out) {
        let raw = stub_vector(text);
        let n = raw.iter().map(|v| f64::from(*v).powi(2)).sum::<f64>().sqrt();
        assert!((f64::from(e.values[0]) - f64::from(raw[0]) / n).abs() < 1e-6);
        let norm: f64 = e.values.iter().map(|v| f64::from(*v).powi(2)).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
        assert_eq!(e.provider_id, format!("remote:{}", stub.url));
    }
}

#[test]
fn remote_sends_raw_or_normalized_text() {
    let stub = start_stub(Mode::Echo);
    let raw = vec!["Catena-(μ₄-Oxo)".to_string()];
    embed_remote(&raw, &ProviderConfig::remote(&stub.url)).unwrap();
    let normalized = ProviderConfig { send_normalized: true, ..ProviderConfig::remote(&stub.url) };
    embed_remote(&raw, &normalized).unwrap();
    let reqs = stub.requests.lock().unwrap().clone();
    assert_eq!(reqs, vec![vec!["Catena-(μ₄-Oxo)".to_string()], vec!["catena-(mu4-oxo)".to_string()]]);
}

#[test]
fn remote_empty_input_sends_nothing() {
    let stub = start_stub(Mode::Echo);
    assert!(embed_remote(&[], &ProviderConfig::remote(&stub.url)).unwrap().is_empty());
    assert!(stub.requests.lock().unwrap().is_empty());
}

#[test]
fn remote_error_mapping() {
    let input = names(5);
    let err = embed_remote(&input, &ProviderConfig::remote(start_stub(Mode::Status(503)).url)).unwrap_err();
    assert!(matches!(err, RemoteError::Status { status: 503, .. }) && err.is_retryable());
    let err = embed_remote(&input, &ProviderConfig::remote(start_stub(Mode::Status(400)).url)).unwrap_err();
    assert!(matches!(err, RemoteError::Status { status: 400, .. }) && !err.is_retryable());
    let err = embed_remote(&input, &ProviderConfig::remote(start_stub(Mode::Garbage).url)).unwrap_err();
    assert!(matches!(err, RemoteError::Decode(_)));
    let err = embed_remote(&input, &ProviderConfig::remote(start_stub(Mode::DropOne).url)).unwrap_err();
    assert!(matches!(err, RemoteError::CountMismatch { sent: 5, received: 4 }));
    let err = embed_remote(&input, &ProviderConfig::remote(start_stub(Mode::RaggedDims).url)).unwrap_err();
    assert!(matches!(err, RemoteError::DimensionMismatch { .. }));

    let slow = ProviderConfig { timeout_ms: 100, ..ProviderConfig::remote(start_stub(Mode::Slow).url) };
    let err = embed_remote(&input, &slow).unwrap_err();
    assert!(matches!(err, RemoteError::Transport { .. }) && err.is_retryable());

    let closed = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/embed", closed.local_addr().unwrap());
    drop(closed);
    let err = embed_remote(&input, &ProviderConfig::remote(url)).unwrap_err();
    assert!(matches!(err, RemoteError::Transport { .. }) && err.is_retryable());
}

#[test]
fn provider_config_validation() {
    assert!(Provider::new(ProviderConfig { dim: 0, ..Default::default() }).is_err());
    assert!(Provider::new(ProviderConfig { ngram_range: (4, 3), ..Default::default() }).is_err());
    assert!(Provider::new(ProviderConfig { batch_size: 0, ..Default::default() }).is_err());
    assert!(Provider::new(ProviderConfig::remote("")).is_err());
}
