//! Report envelopes and deterministic serialization helpers.
//!
//! Every experiment emits a JSON report embedding the full resolved
//! configuration and a content hash of its inputs, so any figure or table is
//! reproducible from the file alone. CSV floats are printed with 17
//! significant digits and round-trip exactly.

use std::path::{Path, PathBuf};

use crate::error::Result;

/// One experiment outcome: `{"experiment":…, "params":…, "passed":…, "data":…}`.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: String,
    pub params: serde_json::Value,
    pub passed: bool,
    pub data: serde_json::Value,
    /// FNV-1a hash of the resolved configuration and input bytes.
    pub input_hash: String,
}

impl Report {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "experiment": self.experiment,
            "params": self.params,
            "passed": self.passed,
            "input_hash": self.input_hash,
            "data": self.data,
        })
    }

    /// Writes `<experiment>-<seed>.json` under `dir` and returns the path.
    pub fn write_json(&self, dir: &Path, seed: u64) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}-{}.json", self.experiment, seed));
        let mut text = serde_json::to_string_pretty(&self.to_json())?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    /// Writes `<experiment>-<seed>.csv` under `dir` and returns the path.
    pub fn write_csv(&self, dir: &Path, seed: u64, csv: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}-{}.csv", self.experiment, seed));
        std::fs::write(&path, csv)?;
        Ok(path)
    }
}

/// A float with 17 significant digits: enough to round-trip f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// 64-bit FNV-1a over arbitrary bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hex content hash of a list of labelled input chunks.
pub fn content_hash<'a>(chunks: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for chunk in chunks {
        for &b in chunk {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        // chunk separator so ["ab", "c"] != ["a", "bc"]
        hash ^= 0xff;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_f64_round_trips() {
        for x in [1.0, 0.1, std::f64::consts::PI, 1.9921875, 1e-300, -3.5e17] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn fnv_matches_known_vectors() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn content_hash_separates_chunks() {
        let a = content_hash([b"ab".as_slice(), b"c".as_slice()]);
        let b = content_hash([b"a".as_slice(), b"bc".as_slice()]);
        assert_ne!(a, b);
    }

    #[test]
    fn report_files_land_where_expected() {
        let dir = std::env::temp_dir().join("gaborlab-report-test");
        let _ = std::fs::remove_dir_all(&dir);
        let report = Report {
            experiment: "bounds".to_string(),
            params: serde_json::json!({"L": 16}),
            passed: true,
            data: serde_json::json!({"A": 1.0}),
            input_hash: content_hash([b"x".as_slice()]),
        };
        let jp = report.write_json(&dir, 7).unwrap();
        let cp = report.write_csv(&dir, 7, "N\n1\n").unwrap();
        assert!(jp.ends_with("bounds-7.json"));
        assert!(cp.ends_with("bounds-7.csv"));
        let text = std::fs::read_to_string(jp).unwrap();
        assert!(text.contains("\"passed\": true"));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
