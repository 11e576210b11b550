//! Versioned result documents: UTF-8 JSON, diffable and archivable.
//! Identical jobs on identical engine versions produce byte-identical
//! documents modulo the timestamp field.

use crate::homalg::Certificate;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    /// Every row carries its certificate.
    pub certificate: String,
}

impl ResultRow {
    pub fn dim_row(degree: usize, dim: usize, cert: &Certificate) -> ResultRow {
        ResultRow {
            degree,
            dim: Some(dim),
            rank: None,
            source_dim: None,
            target_dim: None,
            verdict: None,
            certificate: cert_string(cert),
        }
    }
}

pub fn cert_string(cert: &Certificate) -> String {
    match cert {
        Certificate::Exact { resolution_len } => format!("exact(resolution_len={resolution_len})"),
        Certificate::StableRange { r, bound, status } => {
            format!("stable-range(r={r}, bound={bound}, {status:?})")
        }
        Certificate::Truncated { n_max, stable } => {
            let flags: Vec<&str> =
                stable.iter().map(|&s| if s { "stable" } else { "unknown" }).collect();
            format!("truncated(N={n_max}, [{}])", flags.join(","))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema_version: u32,
    pub engine_version: String,
    pub job: serde_json::Value,
    pub rows: Vec<ResultRow>,
    /// Wall-clock stamp; the only nondeterministic field.
    pub timestamp_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ResultDoc {
    pub fn new(job: serde_json::Value, rows: Vec<ResultRow>) -> ResultDoc {
        ResultDoc {
            schema_version: SCHEMA_VERSION,
            engine_version: super::ENGINE_VERSION.to_string(),
            job,
            rows,
            timestamp_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
            note: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialize")
    }

    /// Flat CSV: degree,dim,rank,source_dim,target_dim,verdict,certificate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,dim,rank,source_dim,target_dim,verdict,certificate\n");
        for r in &self.rows {
            let opt = |v: &Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.degree,
                opt(&r.dim),
                opt(&r.rank),
                opt(&r.source_dim),
                opt(&r.target_dim),
                r.verdict.clone().unwrap_or_default(),
                r.certificate.replace(',', ";"),
            ));
        }
        out
    }

    /// The document with the timestamp normalized, for byte-determinism checks.
    pub fn normalized_json(&self) -> String {
        let mut c = self.clone();
        c.timestamp_ms = 0;
        serde_json::to_string_pretty(&c).expect("result documents serialize")
    }
}
