//! Asking a completion server for the next-token distribution after a
//! question, then for a credence.
//!
//! $ cargo run --example http_client -- http://localhost:8000/v1/completions
//!
//! The server must accept `{"prompt", "max_tokens", "logprobs"}` and answer
//! with top logprobs at `/top_logprobs`; see `HttpFields` to rename fields.
//! Set `CREDAUDIT_TOKEN` to send a bearer token.

use credence_audit::backend::{
    build_prompt, Backend, BackendConfig, BackendKind, HttpBackend, PromptTemplate,
};
use credence_audit::credence::{credence, AssentLexicon, ProbeOptions};
use credence_audit::logic::AtomRegistry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let endpoint = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "http://127.0.0.1:8000/v1/completions".into());
    let config = BackendConfig {
        kind: BackendKind::Http,
        endpoint: Some(endpoint),
        top_k: 20,
        timeout_ms: 10_000,
        auth_env: std::env::var("CREDAUDIT_TOKEN")
            .ok()
            .map(|_| "CREDAUDIT_TOKEN".into()),
        ..BackendConfig::default()
    };
    let backend = HttpBackend::new(config)?;

    let reg = AtomRegistry::from_entries([("paris", "Paris is in France")])?;
    let f = reg.atom("paris")?;
    let prompt = build_prompt(&f, &reg, PromptTemplate::Default)?;
    let dist = backend.next_token_distribution(&prompt, &[])?;
    for (token, p) in dist.head(10) {
        println!("{token:?}\t{p:.4}");
    }
    println!("residual\t{:.4}", dist.residual());

    let record = credence(
        &f,
        &reg,
        &AssentLexicon::default_lexicon(),
        &backend,
        &ProbeOptions::default(),
    )?;
    println!("cr({f}) = {:?}", record.credence);
    Ok(())
}
