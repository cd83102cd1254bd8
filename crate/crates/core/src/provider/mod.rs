//! Embedding and text-completion backends.
//!
//! Reducers and oracles only see the two traits below. Backends are picked
//! by name with [`ProviderConfig`]: `fake` gives deterministic offline
//! implementations, `openai` talks to an OpenAI-compatible HTTP endpoint.

mod fake;
mod http;

use std::path::PathBuf;
use std::sync::Arc;

pub use fake::{CannedCompletion, HashEmbedder};
pub use http::OpenAiCompatible;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("provider returned an unusable response: {0}")]
    BadResponse(String),
}

pub trait EmbeddingProvider: Send + Sync {
    /// One vector per input text, all of equal length.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub system: &'a str,
    pub user: &'a str,
    /// Opaque screenshot reference, forwarded untouched.
    pub image_ref: Option<&'a str>,
}

pub trait TextCompletionProvider: Send + Sync {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<String, ProviderError>;
}

pub const ENV_API_BASE: &str = "MFSCOPE_API_BASE";
pub const ENV_API_KEY: &str = "MFSCOPE_API_KEY";
pub const ENV_CHAT_MODEL: &str = "MFSCOPE_CHAT_MODEL";
pub const ENV_EMBED_MODEL: &str = "MFSCOPE_EMBED_MODEL";
/// File with canned completions for the `fake` backend, one JSON string per
/// line (or plain text lines).
pub const ENV_FAKE_RESPONSES: &str = "MFSCOPE_FAKE_RESPONSES";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProviderConfig {
    Fake {
        responses: Option<PathBuf>,
    },
    OpenAi {
        base: String,
        api_key: Option<String>,
        chat_model: String,
        embed_model: String,
    },
}

impl ProviderConfig {
    /// Resolves a backend name, filling endpoint details from the
    /// environment.
    pub fn from_name(name: &str) -> Result<Self, ProviderError> {
        match name {
            "fake" => Ok(ProviderConfig::Fake {
                responses: std::env::var_os(ENV_FAKE_RESPONSES).map(PathBuf::from),
            }),
            "openai" => {
                let base = std::env::var(ENV_API_BASE)
                    .map_err(|_| ProviderError::Unavailable(format!("{ENV_API_BASE} is not set")))?;
                Ok(ProviderConfig::OpenAi {
                    base,
                    api_key: std::env::var(ENV_API_KEY).ok(),
                    chat_model: std::env::var(ENV_CHAT_MODEL).unwrap_or_default(),
                    embed_model: std::env::var(ENV_EMBED_MODEL).unwrap_or_default(),
                })
            }
            other => Err(ProviderError::Unavailable(format!(
                "unknown provider backend `{other}` (expected `fake` or `openai`)"
            ))),
        }
    }
}

/// Both provider kinds, shared across reducers and threads.
#[derive(Clone)]
pub struct Providers {
    pub embedder: Arc<dyn EmbeddingProvider>,
    pub completion: Arc<dyn TextCompletionProvider>,
}

impl Providers {
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        match cfg {
            ProviderConfig::Fake { responses } => {
                let completion = match responses {
                    Some(path) => CannedCompletion::from_file(path)?,
                    None => CannedCompletion::new(Vec::new()),
                };
                Ok(Providers {
                    embedder: Arc::new(HashEmbedder::default()),
                    completion: Arc::new(completion),
                })
            }
            ProviderConfig::OpenAi {
                base,
                api_key,
                chat_model,
                embed_model,
            } => {
                let client = Arc::new(OpenAiCompatible::new(
                    base.clone(),
                    api_key.clone(),
                    chat_model.clone(),
                    embed_model.clone(),
                ));
                Ok(Providers {
                    embedder: client.clone(),
                    completion: client,
                })
            }
        }
    }

    /// Offline defaults: hash embedder, no canned responses.
    pub fn fake() -> Self {
        Providers {
            embedder: Arc::new(HashEmbedder::default()),
            completion: Arc::new(CannedCompletion::new(Vec::new())),
        }
    }
}

impl std::fmt::Debug for Providers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Providers { .. }")
    }
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_basics() {
        assert!((cosine(&[1.0, 2.0], &[2.0, 4.0]) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((cosine(&[1.0, 0.0], &[0.0, 1.0])).abs() < 1e-12);
    }

    #[test]
    fn unknown_backend() {
        assert!(ProviderConfig::from_name("nope").is_err());
        assert!(matches!(
            ProviderConfig::from_name("fake"),
            Ok(ProviderConfig::Fake { .. })
        ));
    }
}
