use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{CompletionRequest, EmbeddingProvider, ProviderError, TextCompletionProvider};
use crate::text::tokenize;

/// Bag-of-words embedder: each lowercased `\w+` token adds 1 to bucket
/// `fnv1a(token) % dims`.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dims: usize,
}

impl HashEmbedder {
    pub fn new(dims: usize) -> Self {
        assert!(dims > 0, "embedding dimension must be positive");
        HashEmbedder { dims }
    }

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.dims];
        for tok in tokenize(text) {
            v[(fnv1a(tok.as_bytes()) % self.dims as u64) as usize] += 1.0;
        }
        v
    }
}

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(256)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl EmbeddingProvider for HashEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

/// Returns canned responses in order, cycling when exhausted.
#[derive(Debug, Default)]
pub struct CannedCompletion {
    responses: Vec<String>,
    next: AtomicUsize,
}

impl CannedCompletion {
    pub fn new(responses: Vec<String>) -> Self {
        CannedCompletion {
            responses,
            next: AtomicUsize::new(0),
        }
    }

    pub fn always(response: impl Into<String>) -> Self {
        Self::new(vec![response.into()])
    }

    /// One response per line. A line holding a JSON string literal is
    /// decoded (so responses may contain newlines); other lines are taken
    /// verbatim.
    pub fn from_file(path: &Path) -> Result<Self, ProviderError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ProviderError::Unavailable(format!("reading {}: {e}", path.display())))?;
        let responses = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str::<String>(l).unwrap_or_else(|_| l.to_string()))
            .collect();
        Ok(Self::new(responses))
    }

    pub fn calls(&self) -> usize {
        self.next.load(Ordering::SeqCst)
    }
}

impl TextCompletionProvider for CannedCompletion {
    fn complete(&self, _req: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        if self.responses.is_empty() {
            return Err(ProviderError::Unavailable(
                "fake completion backend has no canned responses".into(),
            ));
        }
        let i = self.next.fetch_add(1, Ordering::SeqCst);
        Ok(self.responses[i % self.responses.len()].clone())
    }
}
