//! JSON-over-HTTPS embedding client.
//!
//! The request is `{model, input_type, texts: [...]}` and the response is
//! `{embeddings: [[...], ...]}`, with every field name remappable through
//! [`FieldMap`] so other vendors can be wired in by configuration alone.
//! The credential is read from an environment variable and sent as a
//! bearer token; it is never logged or echoed into errors.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{EmbeddingProvider, ProviderConfig, ProviderError};

/// JSON field names used on the wire.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldMap {
    pub model: String,
    pub input_type: String,
    pub texts: String,
    pub embeddings: String,
}

impl Default for FieldMap {
    fn default() -> Self {
        Self {
            model: "model".to_string(),
            input_type: "input_type".to_string(),
            texts: "texts".to_string(),
            embeddings: "embeddings".to_string(),
        }
    }
}

/// One remote embedding endpoint plus its credential.
pub struct RemoteProvider {
    endpoint_url: String,
    model_id: String,
    input_type: String,
    dim: usize,
    api_key: String,
    fields: FieldMap,
    agent: ureq::Agent,
}

impl RemoteProvider {
    /// Build from config, resolving the credential from the environment.
    /// Fails with an auth error before any network traffic when the
    /// variable is missing or empty.
    pub fn from_config(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        if cfg.endpoint_url.is_empty() {
            return Err(ProviderError::Config(
                "remote provider requires endpoint_url".to_string(),
            ));
        }
        if cfg.model_id.is_empty() {
            return Err(ProviderError::Config(
                "remote provider requires model_id".to_string(),
            ));
        }
        let api_key = std::env::var(&cfg.api_key_env).map_err(|_| {
            ProviderError::Auth(format!(
                "environment variable {} is not set",
                cfg.api_key_env
            ))
        })?;
        if api_key.is_empty() {
            return Err(ProviderError::Auth(format!(
                "environment variable {} is empty",
                cfg.api_key_env
            )));
        }
        Ok(Self::new(
            &cfg.endpoint_url,
            &cfg.model_id,
            &cfg.input_type,
            cfg.dim,
            api_key,
            cfg.fields.clone(),
        ))
    }

    pub fn new(
        endpoint_url: &str,
        model_id: &str,
        input_type: &str,
        dim: usize,
        api_key: String,
        fields: FieldMap,
    ) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .new_agent();
        Self {
            endpoint_url: endpoint_url.to_string(),
            model_id: model_id.to_string(),
            input_type: input_type.to_string(),
            dim,
            api_key,
            fields,
            agent,
        }
    }

    fn request_body(&self, texts: &[String]) -> Value {
        let mut body = Map::new();
        body.insert(
            self.fields.model.clone(),
            Value::from(self.model_id.clone()),
        );
        body.insert(
            self.fields.input_type.clone(),
            Value::from(self.input_type.clone()),
        );
        body.insert(self.fields.texts.clone(), Value::from(texts.to_vec()));
        Value::Object(body)
    }

    fn parse_rows(&self, value: Value) -> Result<Vec<Vec<f32>>, ProviderError> {
        let rows = value
            .get(&self.fields.embeddings)
            .and_then(Value::as_array)
            .ok_or_else(|| {
                ProviderError::Transport(format!(
                    "response has no {:?} array",
                    self.fields.embeddings
                ))
            })?;
        rows.iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| {
                        ProviderError::Transport("embedding row is not an array".to_string())
                    })?
                    .iter()
                    .map(|v| {
                        v.as_f64().map(|f| f as f32).ok_or_else(|| {
                            ProviderError::Transport("embedding value is not a number".to_string())
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

impl EmbeddingProvider for RemoteProvider {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn input_type(&self) -> &str {
        &self.input_type
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, ProviderError> {
        let response = self
            .agent
            .post(&self.endpoint_url)
            .header("Authorization", format!("Bearer {}", self.api_key))
            .send_json(self.request_body(texts))
            .map_err(|e| ProviderError::Transport(e.to_string()))?;

        match response.status().as_u16() {
            200..=299 => {
                let value: Value = response
                    .into_body()
                    .read_json()
                    .map_err(|e| ProviderError::Transport(format!("invalid json body: {e}")))?;
                self.parse_rows(value)
            }
            401 | 403 => Err(ProviderError::Auth(
                "endpoint rejected the credential".to_string(),
            )),
            429 => Err(ProviderError::RateLimited),
            status => Err(ProviderError::Transport(format!(
                "unexpected http status {status}"
            ))),
        }
    }
}
