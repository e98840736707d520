//! Flat key=value configuration with later-wins resolution.
//!
//! Sources are merged in order: built-in defaults, then the `--config` file
//! (top to bottom), then each `--set key=value` (left to right), then the
//! dedicated `--seed` / `--out` flags. Values stay strings until a command
//! asks for them, so unknown keys are legal and round-trip into reports.

use std::collections::BTreeMap;
use std::path::PathBuf;

use gaborlab::norms::NormParams;
use gaborlab::signal::{Normalization, WindowKind, WindowSpec};
use gaborlab::testsig::TestSignal;
use gaborlab::{Error, GaborSystem, Signal};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone)]
pub struct Config {
    values: BTreeMap<String, String>,
    /// Raw bytes of every file that went into this configuration, hashed
    /// into each report.
    pub input_chunks: Vec<Vec<u8>>,
}

const DEFAULTS: &[(&str, &str)] = &[
    ("L", "128"),
    ("a", "8"),
    ("b", "8"),
    ("window", "gaussian"),
    ("width", "8"),
    ("window_norm", "unit-l2"),
    ("norm", "p=2,q=2,weight=flat"),
    ("source", "p=1,q=1,weight=flat"),
    ("target", "p=2,q=2,weight=flat"),
    ("scale", "diagonal"),
    ("ns", "1,2,4,8,16,32,64,128"),
    ("trials", "100"),
    ("seed", "42"),
    ("out", "reports"),
    ("signal", "noise"),
    ("method", "greedy+ls"),
    ("n", "8"),
    ("which", "primal"),
    ("p", "1"),
    ("q", "2"),
    ("p1", "1"),
    ("q1", "1"),
    ("tau", "1.1"),
    ("atoms", "64"),
    ("sep", "1"),
    ("alpha", "0.5"),
    ("lambda", "1"),
    ("beta", "0.75,1,1.5"),
    ("nmax", "256,512,1024,2048"),
];

impl Config {
    pub fn defaults() -> Self {
        let values = DEFAULTS
            .iter()
            .map(|&(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self {
            values,
            input_chunks: Vec::new(),
        }
    }

    pub fn merge_file(&mut self, path: &PathBuf) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.input_chunks.push(text.as_bytes().to_vec());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                what: "config line",
                input: format!("{}:{}: {line}", path.display(), lineno + 1),
            })?;
            self.set(key.trim(), value.trim());
        }
        Ok(())
    }

    pub fn merge_set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment.split_once('=').ok_or_else(|| Error::Parse {
            what: "--set assignment",
            input: assignment.to_string(),
        })?;
        self.set(key.trim(), value.trim());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn require(&self, key: &'static str) -> Result<&str> {
        self.get(key).ok_or(Error::Parse {
            what: "missing config key",
            input: key.to_string(),
        })
    }

    pub fn usize_key(&self, key: &'static str) -> Result<usize> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Parse {
            what: "integer",
            input: format!("{key}={raw}"),
        })
    }

    pub fn u64_key(&self, key: &'static str) -> Result<u64> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Parse {
            what: "integer",
            input: format!("{key}={raw}"),
        })
    }

    pub fn f64_key(&self, key: &'static str) -> Result<f64> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Parse {
            what: "real",
            input: format!("{key}={raw}"),
        })
    }

    pub fn seed(&self) -> Result<u64> {
        self.u64_key("seed")
    }

    pub fn out_dir(&self) -> Result<PathBuf> {
        Ok(PathBuf::from(self.require("out")?))
    }

    /// `ns` accepts a comma list (`1,2,4`) or an inclusive range (`1..256`).
    pub fn ns(&self) -> Result<Vec<usize>> {
        let raw = self.require("ns")?;
        parse_usize_list(raw)
    }

    pub fn usize_list(&self, key: &'static str) -> Result<Vec<usize>> {
        parse_usize_list(self.require(key)?)
    }

    pub fn f64_list(&self, key: &'static str) -> Result<Vec<f64>> {
        let raw = self.require(key)?;
        raw.split(',')
            .map(|s| {
                s.trim().parse().map_err(|_| Error::Parse {
                    what: "real list",
                    input: format!("{key}={raw}"),
                })
            })
            .collect()
    }

    /// Semicolon-separated list of norm parameter strings.
    pub fn norms(&self) -> Result<Vec<NormParams>> {
        self.require("norm")?
            .split(';')
            .map(NormParams::parse)
            .collect()
    }

    pub fn norm_key(&self, key: &'static str) -> Result<NormParams> {
        NormParams::parse(self.require(key)?)
    }

    pub fn method(&self) -> Result<gaborlab::Method> {
        gaborlab::Method::parse(self.require("method")?)
    }

    pub fn window_spec(&self, l: usize) -> Result<WindowSpec> {
        let width = self.f64_key("width")?;
        let normalization = match self.require("window_norm")? {
            "unit-l2" => Normalization::UnitL2,
            "none" => Normalization::None,
            other => {
                return Err(Error::Parse {
                    what: "window_norm",
                    input: other.to_string(),
                })
            }
        };
        let kind = match self.require("window")? {
            "gaussian" => WindowKind::Gaussian,
            "hann" => WindowKind::Hann,
            "boxcar" => WindowKind::Boxcar,
            // Block indicator on [0, width): the tiling window whose
            // critically sampled system is an orthonormal basis.
            "tile" => {
                let w = width as usize;
                if w == 0 || w > l {
                    return Err(Error::BadWindowWidth(width));
                }
                let mut samples = vec![0.0; l];
                for s in samples.iter_mut().take(w) {
                    *s = 1.0;
                }
                WindowKind::Custom(samples)
            }
            other => {
                return Err(Error::Parse {
                    what: "window kind",
                    input: other.to_string(),
                })
            }
        };
        Ok(WindowSpec {
            kind,
            width,
            normalization,
        })
    }

    /// Builds the system without frame data attached.
    pub fn system(&self) -> Result<GaborSystem> {
        let l = self.usize_key("L")?;
        let a = self.usize_key("a")?;
        let b = self.usize_key("b")?;
        let g = gaborlab::make_window(&self.window_spec(l)?, l)?;
        GaborSystem::new(g, a, b)
    }

    /// Builds the system and attaches the canonical dual, failing on
    /// non-frames. Experiments that need norms or approximation start here.
    pub fn frame_system(&self) -> Result<GaborSystem> {
        self.system()?.canonical_dual()
    }

    /// The input signal: `signal_file` (JSON [re, im] pairs) wins over the
    /// generated `signal` spec.
    pub fn signal(&mut self, sys: Option<&GaborSystem>) -> Result<Signal> {
        if let Some(path) = self.get("signal_file").map(PathBuf::from) {
            let bytes = std::fs::read(&path)?;
            self.input_chunks.push(bytes.clone());
            let signal: Signal = serde_json::from_slice(&bytes)?;
            return Ok(signal);
        }
        let l = self.usize_key("L")?;
        let seed = self.seed()?;
        let kind = self.signal_kind()?;
        let (f, _) = gaborlab::generate_test_signal(&kind, sys, l, seed)?;
        Ok(f)
    }

    /// Grammar: `noise`, `chirp:f0=<real>,f1=<real>`,
    /// `power-law:atoms=<int>,tau=<real>,sep=<int>`.
    pub fn signal_kind(&self) -> Result<TestSignal> {
        let raw = self.require("signal")?;
        if raw == "noise" {
            return Ok(TestSignal::Noise);
        }
        if let Some(rest) = raw.strip_prefix("chirp:") {
            let kv = parse_kv(rest)?;
            return Ok(TestSignal::Chirp {
                f0: kv_f64(&kv, "f0", raw)?,
                f1: kv_f64(&kv, "f1", raw)?,
            });
        }
        if let Some(rest) = raw.strip_prefix("power-law:") {
            let kv = parse_kv(rest)?;
            return Ok(TestSignal::PowerLawCoeffs {
                atoms: kv_f64(&kv, "atoms", raw)? as usize,
                tau: kv_f64(&kv, "tau", raw)?,
                min_separation: kv_f64(&kv, "sep", raw).unwrap_or(1.0) as usize,
            });
        }
        Err(Error::Parse {
            what: "signal spec",
            input: raw.to_string(),
        })
    }

    /// The fully resolved configuration as a deterministic JSON object.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }

    /// Canonical byte form hashed into every report.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out.into_bytes()
    }

    pub fn content_hash(&self) -> String {
        let canon = self.canonical_bytes();
        let mut chunks: Vec<&[u8]> = vec![&canon];
        for c in &self.input_chunks {
            chunks.push(c);
        }
        gaborlab::report::content_hash(chunks)
    }
}

fn parse_usize_list(raw: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = raw.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| Error::Parse {
            what: "range",
            input: raw.to_string(),
        })?;
        let hi: usize = hi.trim().parse().map_err(|_| Error::Parse {
            what: "range",
            input: raw.to_string(),
        })?;
        if hi < lo {
            return Err(Error::Parse {
                what: "range",
                input: raw.to_string(),
            });
        }
        return Ok((lo..=hi).collect());
    }
    raw.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| Error::Parse {
                what: "integer list",
                input: raw.to_string(),
            })
        })
        .collect()
}

fn parse_kv(raw: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for part in raw.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| Error::Parse {
            what: "key=value",
            input: raw.to_string(),
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn kv_f64(kv: &BTreeMap<String, String>, key: &str, ctx: &str) -> Result<f64> {
    kv.get(key)
        .ok_or_else(|| Error::Parse {
            what: "missing field",
            input: format!("{key} in {ctx}"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            what: "real",
            input: format!("{key} in {ctx}"),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_sources_win() {
        let mut cfg = Config::defaults();
        assert_eq!(cfg.get("L"), Some("128"));
        cfg.merge_set("L=64").unwrap();
        assert_eq!(cfg.get("L"), Some("64"));
        cfg.merge_set("L=32").unwrap();
        assert_eq!(cfg.usize_key("L").unwrap(), 32);
    }

    #[test]
    fn file_lines_parse_and_comments_skip() {
        let dir = std::env::temp_dir().join("gaborlab-cfg-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.cfg");
        std::fs::write(&path, "# comment\nL=64\n\na=4\nnorm=p=1,q=2,weight=flat\n").unwrap();
        let mut cfg = Config::defaults();
        cfg.merge_file(&path).unwrap();
        assert_eq!(cfg.usize_key("L").unwrap(), 64);
        assert_eq!(cfg.usize_key("a").unwrap(), 4);
        assert_eq!(cfg.norms().unwrap()[0].label(), "p=1,q=2,weight=flat");
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn ns_accepts_lists_and_ranges() {
        let mut cfg = Config::defaults();
        cfg.merge_set("ns=1,2,4").unwrap();
        assert_eq!(cfg.ns().unwrap(), vec![1, 2, 4]);
        cfg.merge_set("ns=3..6").unwrap();
        assert_eq!(cfg.ns().unwrap(), vec![3, 4, 5, 6]);
        cfg.merge_set("ns=bogus").unwrap();
        assert!(cfg.ns().is_err());
    }

    #[test]
    fn signal_specs_parse() {
        let mut cfg = Config::defaults();
        assert!(matches!(cfg.signal_kind().unwrap(), TestSignal::Noise));
        cfg.merge_set("signal=chirp:f0=1,f1=20").unwrap();
        assert!(matches!(
            cfg.signal_kind().unwrap(),
            TestSignal::Chirp { .. }
        ));
        cfg.merge_set("signal=power-law:atoms=8,tau=1.5,sep=2").unwrap();
        match cfg.signal_kind().unwrap() {
            TestSignal::PowerLawCoeffs {
                atoms,
                tau,
                min_separation,
            } => {
                assert_eq!(atoms, 8);
                assert_eq!(tau, 1.5);
                assert_eq!(min_separation, 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        cfg.merge_set("signal=sawtooth").unwrap();
        assert!(cfg.signal_kind().is_err());
    }

    #[test]
    fn hash_changes_with_values() {
        let a = Config::defaults();
        let mut b = Config::defaults();
        b.merge_set("seed=43").unwrap();
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn tile_window_builds_an_onb() {
        let mut cfg = Config::defaults();
        for kv in ["L=64", "a=8", "b=8", "window=tile", "width=8"] {
            cfg.merge_set(kv).unwrap();
        }
        let sys = cfg.frame_system().unwrap();
        let (a, b) = sys.bounds().unwrap();
        assert!((a - 1.0).abs() < 1e-10 && (b - 1.0).abs() < 1e-10);
    }
}
