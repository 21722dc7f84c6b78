//! Uniform access to completion backends with caching, budgets, retries,
//! and a bounded-concurrency gate.
//!
//! The [`Gateway`] wraps any [`CompletionBackend`] — the HTTP client or
//! the scripted mock — and adds the operational layer: a persistent
//! response cache keyed by `(backend, model, prompt, temperature,
//! sample index)`, a hard request budget, and a semaphore limiting
//! in-flight backend calls. Repeated stochastic draws stay cacheable
//! because the sample index participates in the key, which is what makes
//! probing runs resumable without re-spending API calls.

mod cache;
mod http;
mod mock;

pub use cache::{CacheError, CacheRecord, ResponseCache};
pub use http::{HttpBackend, HttpBackendConfig, PromptShape};
pub use mock::{MockBackend, MockFixture, MockMatcher, MockRule};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::GenerationParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("network failure after {attempts} attempt(s): {message}")]
    Network { attempts: u32, message: String },
    #[error("backend error{}: {body}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Backend { status: Option<u16>, body: String },
    #[error("request budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("cache failure: {0}")]
    Cache(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl From<CacheError> for GatewayError {
    fn from(e: CacheError) -> Self {
        GatewayError::Cache(e.to_string())
    }
}

/// One completion request.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub params: GenerationParams,
    /// Skip the cache lookup (the result is still stored).
    pub cache_bypass: bool,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, params: GenerationParams) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            params,
            cache_bypass: false,
        }
    }
}

/// Digest identifying a completion request in the cache.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey(String);

impl CacheKey {
    /// Equal inputs yield equal keys; the sample index distinguishes
    /// repeated draws at nonzero temperature. Fields are length-prefixed
    /// before hashing so no two distinct tuples can collide by
    /// concatenation.
    pub fn compute(
        backend_id: &str,
        model_name: &str,
        prompt: &str,
        temperature: f64,
        sample_index: u32,
    ) -> Self {
        let mut hasher = Sha256::new();
        for field in [backend_id, model_name, prompt] {
            hasher.update((field.len() as u64).to_be_bytes());
            hasher.update(field.as_bytes());
        }
        hasher.update(temperature.to_bits().to_be_bytes());
        hasher.update(sample_index.to_be_bytes());
        CacheKey(hex::encode(hasher.finalize()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Counting semaphore bounding in-flight backend calls.
struct Limiter {
    available: Mutex<usize>,
    signal: Condvar,
}

impl Limiter {
    fn new(permits: usize) -> Self {
        Limiter {
            available: Mutex::new(permits),
            signal: Condvar::new(),
        }
    }

    fn acquire(&self) -> LimiterGuard<'_> {
        let mut available = self.available.lock().expect("limiter lock");
        while *available == 0 {
            available = self.signal.wait(available).expect("limiter wait");
        }
        *available -= 1;
        LimiterGuard { limiter: self }
    }
}

struct LimiterGuard<'a> {
    limiter: &'a Limiter,
}

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        let mut available = self.limiter.available.lock().expect("limiter lock");
        *available += 1;
        self.limiter.signal.notify_one();
    }
}

/// Snapshot of gateway counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GatewayStats {
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub backend_calls: u64,
}

/// Backend access point shared across worker threads.
pub struct Gateway {
    backend: Arc<dyn CompletionBackend>,
    cache: Option<ResponseCache>,
    limiter: Option<Limiter>,
    budget: Option<u64>,
    used_budget: AtomicU64,
    hits: AtomicU64,
    misses: AtomicU64,
    calls: AtomicU64,
}

impl Gateway {
    pub fn new(backend: Arc<dyn CompletionBackend>) -> Self {
        Gateway {
            backend,
            cache: None,
            limiter: None,
            budget: None,
            used_budget: AtomicU64::new(0),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_cache(mut self, cache: ResponseCache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Caps the number of backend calls (cache hits are free).
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Caps concurrent in-flight backend calls.
    pub fn with_concurrency_limit(mut self, permits: usize) -> Self {
        self.limiter = Some(Limiter::new(permits.max(1)));
        self
    }

    pub fn stats(&self) -> GatewayStats {
        GatewayStats {
            cache_hits: self.hits.load(Ordering::SeqCst),
            cache_misses: self.misses.load(Ordering::SeqCst),
            backend_calls: self.calls.load(Ordering::SeqCst),
        }
    }

    /// Single completion (sample index 1).
    pub fn complete(&self, req: &CompletionRequest) -> Result<String, GatewayError> {
        self.complete_indexed(req, 1)
    }

    /// Completion for one draw of a repeated-sampling request.
    pub fn complete_indexed(
        &self,
        req: &CompletionRequest,
        sample_index: u32,
    ) -> Result<String, GatewayError> {
        if req.prompt.is_empty() {
            return Err(GatewayError::InvalidRequest("empty prompt".into()));
        }
        if req.params.temperature.is_nan() || req.params.temperature < 0.0 {
            return Err(GatewayError::InvalidRequest(format!(
                "temperature {} must be >= 0",
                req.params.temperature
            )));
        }
        if sample_index == 0 {
            return Err(GatewayError::InvalidRequest(
                "sample index is 1-based".into(),
            ));
        }

        let key = CacheKey::compute(
            self.backend.id(),
            &req.params.model_name,
            &req.prompt,
            req.params.temperature,
            sample_index,
        );
        if !req.cache_bypass {
            if let Some(cache) = &self.cache {
                if let Some(text) = cache.get(key.as_str()) {
                    self.hits.fetch_add(1, Ordering::SeqCst);
                    return Ok(text);
                }
                self.misses.fetch_add(1, Ordering::SeqCst);
            }
        }

        if let Some(budget) = self.budget {
            let claimed =
                self.used_budget
                    .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |used| {
                        (used < budget).then_some(used + 1)
                    });
            if claimed.is_err() {
                return Err(GatewayError::BudgetExceeded { budget });
            }
        }

        let _permit = self.limiter.as_ref().map(|l| l.acquire());
        self.calls.fetch_add(1, Ordering::SeqCst);
        let text = self
            .backend
            .complete(&req.prompt, &req.params, sample_index)?;
        if let Some(cache) = &self.cache {
            cache.store(key.as_str(), &req.prompt, &req.params, &text)?;
        }
        Ok(text)
    }

    /// `n` completions with sample indices `1..=n`. All-or-nothing: any
    /// failure discards the partial result list (already-cached draws
    /// remain cached, so a retry resumes cheaply).
    pub fn complete_n(&self, req: &CompletionRequest, n: u32) -> Result<Vec<String>, GatewayError> {
        if n == 0 {
            return Err(GatewayError::InvalidRequest("n must be >= 1".into()));
        }
        let mut out = Vec::with_capacity(n as usize);
        for index in 1..=n {
            out.push(self.complete_indexed(req, index)?);
        }
        Ok(out)
    }
}

/// A completion source: the real HTTP client or the scripted mock.
pub trait CompletionBackend: Send + Sync {
    /// Stable identifier mixed into cache keys.
    fn id(&self) -> &str;

    fn complete(
        &self,
        prompt: &str,
        params: &GenerationParams,
        sample_index: u32,
    ) -> Result<String, GatewayError>;
}
