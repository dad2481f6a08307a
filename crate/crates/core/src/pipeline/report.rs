use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::experiments::{ComparisonReport, MsplitRow, WernerSweepReport};
use crate::error::Result;

/// Cell value for a class error whose class is absent.
pub const NOT_APPLICABLE: &str = "NA";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_APPLICABLE.to_string(), |x| x.to_string())
}

/// `comparison.csv`: one row per run and method.
pub fn write_comparison_csv<W: Write>(report: &ComparisonReport, writer: W) -> Result<()> {
    let c = &report.config;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "run_id",
        "seed",
        "method",
        "m",
        "l",
        "u",
        "M",
        "overall_error",
        "pos_error",
        "neg_error",
    ])?;
    for run in &report.runs {
        for (method, e) in [("svm", &run.svm), ("s4vm", &run.s4vm)] {
            w.write_record([
                run.run_id.to_string(),
                run.seed.to_string(),
                method.to_string(),
                c.m.to_string(),
                c.l.to_string(),
                c.u.to_string(),
                c.splits.to_string(),
                e.overall_error.to_string(),
                opt(e.positive_error),
                opt(e.negative_error),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `werner_sweep.csv`: one row per sweep point.
pub fn write_werner_csv<W: Write>(report: &WernerSweepReport, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["p", "truth", "svm_pred", "s4vm_pred"])?;
    for pt in &report.points {
        w.write_record([
            pt.p.to_string(),
            pt.truth.to_string(),
            pt.svm_pred.to_string(),
            pt.s4vm_pred.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_msplit_csv<W: Write>(rows: &[MsplitRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "run_id",
        "seed",
        "M",
        "overall_error",
        "pos_error",
        "neg_error",
        "fallback_used",
        "seconds",
    ])?;
    for r in rows {
        w.write_record([
            r.run_id.to_string(),
            r.seed.to_string(),
            r.splits.to_string(),
            r.report.overall_error.to_string(),
            opt(r.report.positive_error),
            opt(r.report.negative_error),
            r.report.fallback_used.to_string(),
            format!("{:.3}", r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// SHA-256 over `"blob <len>\0"` followed by the bytes, hex encoded.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub hash: String,
}

/// Record of one command run: enough to repeat it bit-identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    /// Hash of the canonical config JSON followed by the input hashes.
    pub content_hash: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(
        command: &str,
        seeds: Vec<u64>,
        config: serde_json::Value,
        inputs: Vec<InputDigest>,
    ) -> Self {
        let mut buf = serde_json::to_vec(&config).expect("JSON values serialize");
        for i in &inputs {
            buf.extend_from_slice(i.hash.as_bytes());
        }
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            config,
            content_hash: content_hash(&buf),
            inputs,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_hash_matches_git_style_sha256() {
        // `printf 'blob 6\0hello\n' | sha256sum`
        assert_eq!(
            content_hash(b"hello\n"),
            "2cf8d83d9ee29543b34a87727421fdecb7e3f3a183d337639025de576db9ebb4"
        );
    }

    #[test]
    fn manifest_hash_tracks_config() {
        let a = Manifest::new("gen", vec![1], serde_json::json!({"n": 4}), Vec::new());
        let b = Manifest::new("gen", vec![1], serde_json::json!({"n": 6}), Vec::new());
        assert_ne!(a.content_hash, b.content_hash);
        assert_eq!(
            a,
            Manifest::new("gen", vec![1], serde_json::json!({"n": 4}), Vec::new())
        );
    }
}
