use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Map, Value};

use super::{whitespace_tokenize, Backend, BackendConfig, BackendError, Prompt, TokenDistribution};

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Gate {
    in_flight: Mutex<usize>,
    freed: Condvar,
    max: usize,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(max: usize) -> Self {
        Self {
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
            max: max.max(1),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().expect("gate poisoned");
        while *n >= self.max {
            n = self.freed.wait(n).expect("gate poisoned");
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().expect("gate poisoned");
        *n -= 1;
        self.0.freed.notify_one();
    }
}

/// Client for completion-style servers that return top-k logprobs for the
/// next position.
///
/// Request: `POST {prompt, max_tokens: 1, logprobs: k}` (field names
/// configurable). The response is located by a JSON pointer and may be an
/// array of `{token, logprob}` objects, an array of `[token, logprob]` pairs,
/// or an object mapping tokens to logprobs.
#[derive(Debug)]
pub struct HttpBackend {
    config: BackendConfig,
    id: String,
    endpoint: String,
    auth: Option<String>,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl HttpBackend {
    pub fn new(config: BackendConfig) -> Result<Self, BackendError> {
        let endpoint = config
            .endpoint
            .clone()
            .ok_or_else(|| BackendError::Config("http backend needs an endpoint".into()))?;
        let auth = match &config.auth_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BackendError::Config(format!("auth token variable {var} is not set"))
            })?),
            None => None,
        };
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| BackendError::Network(e.to_string()))?;
        Ok(Self {
            id: config
                .id
                .clone()
                .unwrap_or_else(|| format!("http:{endpoint}")),
            gate: Gate::new(config.max_parallel),
            endpoint,
            auth,
            client,
            config,
        })
    }

    fn post(&self, url: &str, body: &Value, prompt_id: &str) -> Result<Value, BackendError> {
        let _permit = self.gate.acquire();
        let mut req = self.client.post(url).json(body);
        if let Some(token) = &self.auth {
            req = req.bearer_auth(token);
        }
        let map_err = |e: reqwest::Error| {
            if e.is_timeout() {
                BackendError::Timeout {
                    prompt_id: prompt_id.to_string(),
                }
            } else {
                BackendError::Network(e.to_string())
            }
        };
        let resp = req.send().map_err(map_err)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(BackendError::Network(format!("{url} answered {status}")));
        }
        resp.json::<Value>().map_err(map_err)
    }

    fn request_body(&self, text: &str) -> Value {
        let f = &self.config.fields;
        let mut body = Map::new();
        for (k, v) in &self.config.extra_body {
            body.insert(k.clone(), v.clone());
        }
        body.insert(f.prompt.clone(), json!(text));
        body.insert(f.max_tokens.clone(), json!(1));
        body.insert(f.logprobs.clone(), json!(self.config.top_k));
        Value::Object(body)
    }

    fn parse_logprobs(&self, response: &Value) -> Result<TokenDistribution, BackendError> {
        let f = &self.config.fields;
        let node = response.pointer(&f.response_pointer).ok_or_else(|| {
            BackendError::Response(format!("nothing at pointer {:?}", f.response_pointer))
        })?;
        let pairs = extract_pairs(node, &f.token, &f.logprob)?;
        TokenDistribution::from_logprobs(pairs)
    }
}

fn extract_pairs(
    node: &Value,
    token_key: &str,
    logprob_key: &str,
) -> Result<Vec<(String, f64)>, BackendError> {
    let bad = |what: &str| BackendError::Response(format!("unexpected logprob entry: {what}"));
    match node {
        Value::Object(map) => map
            .iter()
            .map(|(t, lp)| lp.as_f64().map(|lp| (t.clone(), lp)).ok_or_else(|| bad(t)))
            .collect(),
        // A one-element list wrapping a token map, as in per-position lists.
        Value::Array(items)
            if items.len() == 1
                && items[0]
                    .as_object()
                    .is_some_and(|o| !o.contains_key(token_key)) =>
        {
            extract_pairs(&items[0], token_key, logprob_key)
        }
        Value::Array(items) => items
            .iter()
            .map(|item| match item {
                Value::Object(o) => {
                    let t = o.get(token_key).and_then(Value::as_str);
                    let lp = o.get(logprob_key).and_then(Value::as_f64);
                    t.zip(lp)
                        .map(|(t, lp)| (t.to_string(), lp))
                        .ok_or_else(|| bad(&item.to_string()))
                }
                Value::Array(pair) if pair.len() == 2 => pair[0]
                    .as_str()
                    .zip(pair[1].as_f64())
                    .map(|(t, lp)| (t.to_string(), lp))
                    .ok_or_else(|| bad(&item.to_string())),
                _ => Err(bad(&item.to_string())),
            })
            .collect(),
        other => Err(bad(&other.to_string())),
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn next_token_distribution(
        &self,
        prompt: &Prompt,
        prefix: &[String],
    ) -> Result<TokenDistribution, BackendError> {
        let mut text = prompt.text.clone();
        for t in prefix {
            text.push_str(t);
        }
        let response = self.post(&self.endpoint, &self.request_body(&text), &prompt.id())?;
        self.parse_logprobs(&response)
    }

    fn tokenize(&self, surface: &str) -> Result<Vec<String>, BackendError> {
        let Some(url) = &self.config.tokenize_endpoint else {
            return Ok(whitespace_tokenize(surface));
        };
        let response = self.post(url, &json!({ "text": surface }), "tokenize")?;
        response
            .get("tokens")
            .and_then(Value::as_array)
            .and_then(|ts| ts.iter().map(|t| t.as_str().map(String::from)).collect())
            .ok_or_else(|| BackendError::Response("tokenize response lacks a tokens array".into()))
    }
}
