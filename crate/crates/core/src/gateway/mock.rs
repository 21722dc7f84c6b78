//! Scripted mock backend.
//!
//! Maps prompts to canned responses via a fixture file, so the whole
//! pipeline runs bit-reproducibly with zero network access. Rules match
//! either the exact SHA-256 digest of the prompt or a regex over it;
//! the first matching rule wins, in file order.
//!
//! A rule holds an ordered response list. At temperature 0 the mock is
//! deterministic and always serves the first response; at any higher
//! temperature the sample index selects from the list (wrapping), which
//! models a sampling distribution the way repeated API draws would.

use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{CompletionBackend, GatewayError};
use crate::domain::GenerationParams;

/// How a rule decides whether it applies to a prompt.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum MockMatcher {
    /// Hex SHA-256 of the full prompt text.
    ExactDigest(String),
    /// Regex evaluated against the full prompt text.
    Regex(String),
}

/// One fixture rule.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockRule {
    #[serde(rename = "match")]
    pub matcher: MockMatcher,
    pub responses: Vec<String>,
}

/// A whole fixture file: `{"rules": [...]}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockFixture {
    pub rules: Vec<MockRule>,
}

enum CompiledMatcher {
    Digest(String),
    Pattern(regex::Regex),
}

struct CompiledRule {
    matcher: CompiledMatcher,
    responses: Vec<String>,
}

/// Fixture-driven backend with call instrumentation.
pub struct MockBackend {
    rules: Vec<CompiledRule>,
    delay: Option<Duration>,
    calls: AtomicU64,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
}

impl MockBackend {
    pub fn from_fixture(fixture: MockFixture) -> Result<Self, GatewayError> {
        let mut rules = Vec::with_capacity(fixture.rules.len());
        for rule in fixture.rules {
            let matcher = match rule.matcher {
                MockMatcher::ExactDigest(d) => CompiledMatcher::Digest(d.to_lowercase()),
                MockMatcher::Regex(p) => {
                    CompiledMatcher::Pattern(regex::Regex::new(&p).map_err(|e| {
                        GatewayError::Backend {
                            status: None,
                            body: format!("bad mock rule regex {p:?}: {e}"),
                        }
                    })?)
                }
            };
            rules.push(CompiledRule {
                matcher,
                responses: rule.responses,
            });
        }
        Ok(MockBackend {
            rules,
            delay: None,
            calls: AtomicU64::new(0),
            in_flight: AtomicUsize::new(0),
            max_in_flight: AtomicUsize::new(0),
        })
    }

    pub fn from_fixture_file(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GatewayError::Backend {
            status: None,
            body: format!("cannot read mock fixture {}: {e}", path.display()),
        })?;
        let fixture: MockFixture =
            serde_json::from_str(&text).map_err(|e| GatewayError::Backend {
                status: None,
                body: format!("malformed mock fixture {}: {e}", path.display()),
            })?;
        MockBackend::from_fixture(fixture)
    }

    /// Adds an artificial per-call delay, for concurrency tests.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    /// Total completed calls.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    /// High-water mark of concurrent in-flight calls.
    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    /// Hex SHA-256 of a prompt, as expected by [`MockMatcher::ExactDigest`].
    pub fn prompt_digest(prompt: &str) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(prompt.as_bytes()))
    }
}

impl CompletionBackend for MockBackend {
    fn id(&self) -> &str {
        "mock"
    }

    fn complete(
        &self,
        prompt: &str,
        params: &GenerationParams,
        sample_index: u32,
    ) -> Result<String, GatewayError> {
        let current = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(current, Ordering::SeqCst);
        if let Some(delay) = self.delay {
            std::thread::sleep(delay);
        }

        let digest = Self::prompt_digest(prompt);
        let result = self
            .rules
            .iter()
            .find(|rule| match &rule.matcher {
                CompiledMatcher::Digest(d) => *d == digest,
                CompiledMatcher::Pattern(re) => re.is_match(prompt),
            })
            .and_then(|rule| {
                if rule.responses.is_empty() {
                    return None;
                }
                let idx = if params.temperature == 0.0 {
                    0
                } else {
                    (sample_index.saturating_sub(1) as usize) % rule.responses.len()
                };
                Some(rule.responses[idx].clone())
            })
            .ok_or_else(|| GatewayError::Backend {
                status: None,
                body: format!("no mock rule matches prompt (digest {digest})"),
            });

        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        self.calls.fetch_add(1, Ordering::SeqCst);
        result
    }
}
