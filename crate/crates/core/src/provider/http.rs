use std::time::Duration;

use serde_json::{json, Value};

use super::{CompletionRequest, EmbeddingProvider, ProviderError, TextCompletionProvider};

/// Client for `/chat/completions` and `/embeddings` on an OpenAI-compatible
/// server.
pub struct OpenAiCompatible {
    agent: ureq::Agent,
    base: String,
    api_key: Option<String>,
    chat_model: String,
    embed_model: String,
}

impl OpenAiCompatible {
    pub fn new(base: String, api_key: Option<String>, chat_model: String, embed_model: String) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .into();
        OpenAiCompatible {
            agent,
            base: base.trim_end_matches('/').to_string(),
            api_key,
            chat_model,
            embed_model,
        }
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, ProviderError> {
        let mut req = self.agent.post(format!("{}{path}", self.base));
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| ProviderError::Unavailable(e.to_string()))?;
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| ProviderError::BadResponse(e.to_string()))
    }
}

impl TextCompletionProvider for OpenAiCompatible {
    fn complete(&self, req: &CompletionRequest<'_>) -> Result<String, ProviderError> {
        let user = match req.image_ref {
            Some(url) => json!([
                {"type": "image_url", "image_url": {"url": url}},
                {"type": "text", "text": req.user},
            ]),
            None => json!(req.user),
        };
        let body = json!({
            "model": self.chat_model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": user},
            ],
        });
        let v = self.post("/chat/completions", &body)?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ProviderError::BadResponse("missing choices[0].message.content".into()))
    }
}

impl EmbeddingProvider for OpenAiCompatible {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let v = self.post("/embeddings", &json!({"model": self.embed_model, "input": texts}))?;
        let data = v
            .get("data")
            .and_then(Value::as_array)
            .ok_or_else(|| ProviderError::BadResponse("missing `data` array".into()))?;
        let mut out = vec![None; texts.len()];
        for (pos, item) in data.iter().enumerate() {
            let idx = item.get("index").and_then(Value::as_u64).map_or(pos, |i| i as usize);
            let vec = item
                .get("embedding")
                .and_then(Value::as_array)
                .ok_or_else(|| ProviderError::BadResponse("missing `embedding`".into()))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| ProviderError::BadResponse("non-numeric embedding".into()))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            if idx >= out.len() {
                return Err(ProviderError::BadResponse(format!(
                    "embedding index {idx} out of range"
                )));
            }
            out[idx] = Some(vec);
        }
        out.into_iter()
            .map(|v| v.ok_or_else(|| ProviderError::BadResponse("embedding count mismatch".into())))
            .collect()
    }
}
