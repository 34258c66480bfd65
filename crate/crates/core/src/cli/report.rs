use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::ConjectureReport;

pub const CSV_HEADER: &str =
    "n,body,theta_hash,E|X|²,Var|X|²,lambda2,variance_ratio,ratio_SE,sigma,thin_shell_ratio,b2,a_eta,n3_var";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub version: String,
    pub seed: u64,
    #[serde(rename = "timestamp-utc")]
    pub timestamp_utc: String,
    pub argv: Vec<String>,
}

impl Meta {
    pub fn now(seed: u64, argv: Vec<String>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            timestamp_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            argv,
        }
    }
}

/// First 8 bytes of the SHA-256 of the little-endian coordinates, as hex.
pub fn theta_hash(theta: &[f64]) -> String {
    let mut h = Sha256::new();
    for t in theta {
        h.update(t.to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

fn find_null(v: &Value, path: &str) -> Option<String> {
    match v {
        Value::Null => Some(path.to_string()),
        Value::Array(items) => items.iter().enumerate().find_map(|(i, x)| find_null(x, &format!("{path}[{i}]"))),
        Value::Object(map) => map.iter().find_map(|(k, x)| find_null(x, &format!("{path}.{k}"))),
        _ => None,
    }
}

/// `{meta, config, results}`; refuses results holding non-finite numbers
/// (serde_json turns them into `null`).
pub fn json_document<C: Serialize, R: Serialize>(meta: &Meta, config: &C, results: &R) -> Result<String> {
    let results = serde_json::to_value(results).map_err(|e| Error::Io(e.to_string()))?;
    if let Some(path) = find_null(&results, "results") {
        return Err(Error::NotFinite(path));
    }
    let doc = serde_json::json!({
        "meta": meta,
        "config": serde_json::to_value(config).map_err(|e| Error::Io(e.to_string()))?,
        "results": results,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// One CSV row per report, in the column order of [`CSV_HEADER`].
pub fn csv_document(reports: &[ConjectureReport]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(CSV_HEADER.split(',')).map_err(|e| Error::Io(e.to_string()))?;
    for r in reports {
        let theta = r.theta.as_deref().unwrap_or(&[]);
        let numbers = [
            ("E|X|²", r.e_x2),
            ("Var|X|²", r.var_x2),
            ("lambda2", r.lambda2),
            ("variance_ratio", r.variance_ratio),
            ("ratio_SE", r.variance_ratio_se.unwrap_or(f64::NAN)),
            ("sigma", r.sigma),
            ("thin_shell_ratio", r.thin_shell_ratio),
            ("b2", r.b2),
            ("a_eta", r.a_eta.unwrap_or(f64::NAN)),
            ("n3_var", (r.n as f64).powi(3) * r.var_x2),
        ];
        if let Some((name, _)) = numbers.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NotFinite(format!("{name} at n = {}", r.n)));
        }
        let mut row = vec![r.n.to_string(), r.body.clone(), theta_hash(theta)];
        row.extend(numbers.iter().map(|(_, v)| format!("{v:?}")));
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Writes `text` to `path`, or to standard output when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
