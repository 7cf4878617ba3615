//! Pluggable record sources: replayable local fixtures and a thin,
//! rate-limited HTTP adapter.

use super::{IngestError, SourceDescriptor};
use std::path::PathBuf;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Uniform page-oriented source contract. Payload decoding is left to
/// the caller (per-adapter schemas).
pub trait Source {
    /// Fetch one page of raw payload. Page 0 is the first.
    fn request(&self, page: usize) -> Result<Vec<u8>, IngestError>;
}

/// A local file treated as a single-page source. Two reads yield
/// byte-identical payloads, which makes fixture runs replayable.
#[derive(Debug, Clone)]
pub struct FixtureSource {
    path: PathBuf,
}

impl FixtureSource {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        FixtureSource { path: path.into() }
    }
}

impl Source for FixtureSource {
    fn request(&self, page: usize) -> Result<Vec<u8>, IngestError> {
        if page > 0 {
            return Ok(Vec::new());
        }
        std::fs::read(&self.path).map_err(|e| IngestError::SourceUnavailable {
            uri: self.path.display().to_string(),
            detail: e.to_string(),
        })
    }
}

/// Environment variable carrying the API key for a named source.
pub fn api_key_env_var(source_name: &str) -> String {
    format!("CHAINSPILL_API_KEY_{}", source_name.to_ascii_uppercase().replace('-', "_"))
}

/// Minimal HTTP GET adapter with bearer-token auth and a request-rate
/// floor. Pages map to a `?page=N` query parameter.
pub struct HttpSource {
    agent: ureq::Agent,
    uri: String,
    api_key: Option<String>,
    min_interval: Duration,
    last_request: Mutex<Option<Instant>>,
}

impl HttpSource {
    /// Build from a descriptor; when `credentials` names a source, the
    /// key is read from `CHAINSPILL_API_KEY_<NAME>` (absent is fine —
    /// requests simply go unauthenticated).
    pub fn from_descriptor(descriptor: &SourceDescriptor) -> Result<Self, IngestError> {
        let api_key = descriptor
            .credentials
            .as_deref()
            .and_then(|name| std::env::var(api_key_env_var(name)).ok());
        let min_interval = if descriptor.rate_limit.is_finite() && descriptor.rate_limit > 0.0 {
            Duration::from_secs_f64(1.0 / descriptor.rate_limit)
        } else {
            Duration::ZERO
        };
        let config = ureq::config::Config::builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .build();
        Ok(HttpSource {
            agent: ureq::Agent::new_with_config(config),
            uri: descriptor.uri.clone(),
            api_key,
            min_interval,
            last_request: Mutex::new(None),
        })
    }

    fn throttle(&self) {
        if self.min_interval.is_zero() {
            return;
        }
        let mut last = self.last_request.lock().expect("rate-limit lock");
        if let Some(prev) = *last {
            let elapsed = prev.elapsed();
            if elapsed < self.min_interval {
                std::thread::sleep(self.min_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

impl Source for HttpSource {
    fn request(&self, page: usize) -> Result<Vec<u8>, IngestError> {
        self.throttle();
        let sep = if self.uri.contains('?') { '&' } else { '?' };
        let url = format!("{}{sep}page={page}", self.uri);
        let mut builder = self.agent.get(&url);
        if let Some(key) = &self.api_key {
            builder = builder.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = builder.call().map_err(|e| IngestError::SourceUnavailable {
            uri: url.clone(),
            detail: e.to_string(),
        })?;
        response
            .body_mut()
            .read_to_vec()
            .map_err(|e| IngestError::SourceUnavailable { uri: url, detail: e.to_string() })
    }
}

// ---------------------------------------------------------------------------
