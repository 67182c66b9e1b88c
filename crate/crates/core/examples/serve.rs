//! Serves a model for a synthetic form over HTTP.
//!
//! ```text
//! cargo run --example serve -- 127.0.0.1:8080
//! curl localhost:8080/schema
//! curl -XPOST localhost:8080/suggest -H 'content-type: application/json' \
//!      -d '{"filled": {"region": "Region 03", "revenue": "47.5"}, "target": "sector"}'
//! ```

use formfill::model::{build, BuildConfig};
use formfill::service::{serve, AppState, Loaded};
use formfill::synthetic::planted;

#[tokio::main]
async fn main() -> formfill::Result<()> {
    let bind = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "127.0.0.1:8080".into());
    let (bundle, _) = build(&planted(5000, 1), &BuildConfig::default())?;
    let loaded = Loaded::from_bundle(bundle)?;
    eprintln!("model {} listening on {bind}", &loaded.fingerprint[..12]);
    serve(AppState::new(loaded), &bind).await
}
