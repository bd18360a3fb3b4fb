//! Pluggable synthesis-engine boundary.
//!
//! Engines take a text or SSML payload plus voice and prosody and return a
//! PCM clip in whatever rate/layout they produce; the synth layer converts to
//! canonical form. Two implementations ship here: a deterministic mock that
//! renders sine tones (so the whole pipeline runs and measures offline) and a
//! generic HTTP adapter that posts JSON and decodes a WAV response.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::audio::{decode_wav, AudioClip, CANONICAL_SAMPLE_RATE};
use crate::planner::Voice;
use crate::prosody::Prosody;
use crate::ssml::SsmlDialect;

/// Text or pre-rendered SSML to synthesize.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Text(String),
    Ssml(String),
}

impl Payload {
    pub fn as_str(&self) -> &str {
        match self {
            Payload::Text(s) | Payload::Ssml(s) => s,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.as_str().is_empty()
    }
}

/// One synthesis request at the engine boundary.
#[derive(Debug, Clone)]
pub struct EngineRequest {
    pub payload: Payload,
    pub voice: Voice,
    pub prosody: Prosody,
    pub dialect: SsmlDialect,
}

/// Transport or engine error; `retryable` marks transient failures.
#[derive(Debug, Clone, Error)]
#[error("engine failure ({code}): {message}")]
pub struct EngineFailure {
    pub code: String,
    pub message: String,
    pub retryable: bool,
}

impl EngineFailure {
    pub fn new(code: &str, message: impl Into<String>, retryable: bool) -> Self {
        EngineFailure {
            code: code.to_string(),
            message: message.into(),
            retryable,
        }
    }
}

/// The synthesis-engine contract. Implementations must be usable from
/// concurrent requests.
pub trait SynthesisEngine: Send + Sync {
    fn name(&self) -> &str;
    fn render(&self, req: &EngineRequest) -> Result<AudioClip, EngineFailure>;
}

/// Retry policy for transient engine failures: `max_retries` extra attempts
/// with doubling delay.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 2,
            base_delay: Duration::from_millis(100),
        }
    }
}

impl RetryPolicy {
    /// No retries; useful where failing fast is the point.
    pub fn none() -> Self {
        RetryPolicy {
            max_retries: 0,
            base_delay: Duration::ZERO,
        }
    }
}

/// Renders with retries on retryable failures.
pub fn render_with_retry(
    engine: &dyn SynthesisEngine,
    req: &EngineRequest,
    policy: &RetryPolicy,
) -> Result<AudioClip, EngineFailure> {
    let mut delay = policy.base_delay;
    let mut attempt = 0;
    loop {
        match engine.render(req) {
            Ok(clip) => return Ok(clip),
            Err(err) if err.retryable && attempt < policy.max_retries => {
                std::thread::sleep(delay);
                delay *= 2;
                attempt += 1;
            }
            Err(err) => return Err(err),
        }
    }
}

/// Stable 64-bit FNV-1a hash; keeps mock voice frequencies fixed forever.
fn fnv1a64(data: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in data.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// The mock tone frequency assigned to a voice id: 200 + 10 * (hash mod 40) Hz.
pub fn voice_base_frequency(voice_id: &str) -> f64 {
    200.0 + 10.0 * (fnv1a64(voice_id) % 40) as f64
}

/// Deterministic offline engine.
///
/// Text renders as a sine tone at the voice's base frequency scaled by
/// `1 + pitch_pct/100`, lasting 80 ms per input character divided by
/// `1 + rate_pct/100`, at half full scale. SSML payloads render their text
/// content the same way with `<break>` tags as silence, so pause plumbing
/// stays observable in unified-request mode.
#[derive(Debug, Default)]
pub struct MockEngine {
    calls: AtomicUsize,
}

/// Seconds of mock audio per input character.
pub const MOCK_SECONDS_PER_CHAR: f64 = 0.080;
const MOCK_AMPLITUDE_FS: f64 = 0.5;

impl MockEngine {
    pub fn new() -> Self {
        MockEngine::default()
    }

    /// Number of render calls so far.
    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn tone(&self, char_count: usize, voice_id: &str, prosody: &Prosody) -> Vec<i16> {
        let frequency =
            voice_base_frequency(voice_id) * (1.0 + prosody.pitch_pct as f64 / 100.0);
        let duration_s =
            MOCK_SECONDS_PER_CHAR * char_count as f64 / (1.0 + prosody.rate_pct as f64 / 100.0);
        let n = (duration_s * CANONICAL_SAMPLE_RATE as f64).round() as usize;
        let amp = MOCK_AMPLITUDE_FS * i16::MAX as f64;
        (0..n)
            .map(|i| {
                let phase = 2.0 * std::f64::consts::PI * frequency * i as f64
                    / CANONICAL_SAMPLE_RATE as f64;
                (amp * phase.sin()).round() as i16
            })
            .collect()
    }
}

impl SynthesisEngine for MockEngine {
    fn name(&self) -> &str {
        "mock"
    }

    fn render(&self, req: &EngineRequest) -> Result<AudioClip, EngineFailure> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if req.payload.is_empty() {
            return Err(EngineFailure::new("empty_payload", "nothing to render", false));
        }
        let samples = match &req.payload {
            Payload::Text(text) => self.tone(text.chars().count(), &req.voice.id, &req.prosody),
            Payload::Ssml(ssml) => {
                let mut samples = Vec::new();
                for chunk in scan_ssml(ssml) {
                    match chunk {
                        SsmlChunk::Text(text) => samples.extend(self.tone(
                            text.chars().count(),
                            &req.voice.id,
                            &req.prosody,
                        )),
                        SsmlChunk::BreakMs(ms) => {
                            let n = ms as usize * CANONICAL_SAMPLE_RATE as usize / 1000;
                            samples.extend(std::iter::repeat_n(0i16, n));
                        }
                    }
                }
                samples
            }
        };
        Ok(AudioClip::canonical(samples))
    }
}

enum SsmlChunk {
    Text(String),
    BreakMs(u32),
}

/// Minimal SSML scan for the mock: text nodes and break durations in order.
fn scan_ssml(ssml: &str) -> Vec<SsmlChunk> {
    let mut chunks = Vec::new();
    let mut text = String::new();
    let mut rest = ssml;
    while let Some(open) = rest.find('<') {
        text.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let Some(close) = after.find('>') else {
            break;
        };
        let tag = &after[..close];
        if tag.trim_start().starts_with("break") {
            if !text.is_empty() {
                chunks.push(SsmlChunk::Text(unescape(&text)));
                text.clear();
            }
            if let Some(ms) = parse_break_ms(tag) {
                chunks.push(SsmlChunk::BreakMs(ms));
            }
        }
        rest = &after[close + 1..];
    }
    text.push_str(rest);
    if !text.is_empty() {
        chunks.push(SsmlChunk::Text(unescape(&text)));
    }
    chunks
}

fn parse_break_ms(tag: &str) -> Option<u32> {
    let start = tag.find("time=\"")? + "time=\"".len();
    let value = &tag[start..tag[start..].find('"')? + start];
    if let Some(ms) = value.strip_suffix("ms") {
        ms.parse().ok()
    } else if let Some(s) = value.strip_suffix('s') {
        s.parse::<f64>().ok().map(|v| (v * 1000.0).round() as u32)
    } else {
        None
    }
}

fn unescape(text: &str) -> String {
    text.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

/// JSON body posted by the HTTP adapter.
#[derive(Debug, Serialize)]
struct HttpRequestBody<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ssml: Option<&'a str>,
    voice_id: &'a str,
    sample_rate_hint: u32,
}

/// Generic HTTP engine adapter: POST JSON, expect an `audio/wav` body.
///
/// Endpoint and extra headers come from configuration; vendor-specific
/// authentication is out of scope, but arbitrary headers cover token schemes.
/// The blocking client is built on first use — `render` must run on a
/// blocking-capable thread, never inside an async executor.
pub struct HttpEngine {
    endpoint: String,
    headers: Vec<(String, String)>,
    client: std::sync::OnceLock<reqwest::blocking::Client>,
}

impl HttpEngine {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpEngine {
            endpoint: endpoint.into(),
            headers: Vec::new(),
            client: std::sync::OnceLock::new(),
        }
    }

    pub fn with_headers(mut self, headers: Vec<(String, String)>) -> Self {
        self.headers = headers;
        self
    }

    fn client(&self) -> &reqwest::blocking::Client {
        self.client.get_or_init(|| {
            reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(30))
                .build()
                .expect("HTTP client construction cannot fail")
        })
    }
}

impl SynthesisEngine for HttpEngine {
    fn name(&self) -> &str {
        "http"
    }

    fn render(&self, req: &EngineRequest) -> Result<AudioClip, EngineFailure> {
        let body = match &req.payload {
            Payload::Text(t) => HttpRequestBody {
                text: Some(t),
                ssml: None,
                voice_id: &req.voice.id,
                sample_rate_hint: CANONICAL_SAMPLE_RATE,
            },
            Payload::Ssml(s) => HttpRequestBody {
                text: None,
                ssml: Some(s),
                voice_id: &req.voice.id,
                sample_rate_hint: CANONICAL_SAMPLE_RATE,
            },
        };
        let mut request = self.client().post(&self.endpoint).json(&body);
        for (name, value) in &self.headers {
            request = request.header(name, value);
        }
        let response = request.send().map_err(|e| {
            EngineFailure::new("transport", e.to_string(), true)
        })?;
        let status = response.status();
        if status.is_server_error() {
            return Err(EngineFailure::new(
                "http_5xx",
                format!("engine returned {status}"),
                true,
            ));
        }
        if !status.is_success() {
            return Err(EngineFailure::new(
                "http_error",
                format!("engine returned {status}"),
                false,
            ));
        }
        let bytes = response
            .bytes()
            .map_err(|e| EngineFailure::new("transport", e.to_string(), true))?;
        decode_wav(&bytes).map_err(|e| EngineFailure::new("bad_audio", e.to_string(), false))
    }
}
