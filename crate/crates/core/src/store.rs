//! Run configuration, the partition cache and output formatting.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bowen_series::{BuildOptions, MarkovSystem};
use crate::error::{Error, Result};
use crate::fuchsian::SurfaceGroupRep;
use crate::precision::Precision;
use crate::symbolic::{partition_codes, PreperiodicCode};

pub const CACHE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::InvalidConfig(format!("unknown format `{s}`"))),
        }
    }
}

/// A curve label and the twist parameters to visit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistSpec {
    pub curve: String,
    pub ts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub genus: usize,
    pub precision: Precision,
    pub depth: usize,
    /// Tolerance of the partition-point and Markov checks.
    pub tol: f64,
    pub twist: Option<TwistSpec>,
    pub cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            genus: 2,
            precision: Precision::Double,
            depth: 4,
            tol: BuildOptions::default().markov_tol,
            twist: None,
            cache: None,
            out: None,
            format: OutputFormat::Json,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.genus < 2 {
            return Err(Error::InvalidGenus(self.genus));
        }
        if self.depth < 1 {
            return Err(Error::InvalidConfig("depth must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn build_options(&self) -> BuildOptions {
        BuildOptions {
            markov_tol: self.tol,
            ..BuildOptions::default()
        }
    }
}

/// The standard Markov system with its partition codes, as written to disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheFile {
    pub format_version: u32,
    /// SHA-256 over the group serialization and the tolerance block.
    pub content_hash: String,
    pub system: MarkovSystem,
    pub codes: Vec<PreperiodicCode>,
}

pub fn content_hash(rep: &SurfaceGroupRep, options: &BuildOptions) -> Result<String> {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(rep)?);
    h.update(serde_json::to_vec(options)?);
    Ok(hex::encode(h.finalize()))
}

impl CacheFile {
    pub fn new(system: MarkovSystem) -> Result<Self> {
        let codes = partition_codes(&system)?;
        Ok(CacheFile {
            format_version: CACHE_VERSION,
            content_hash: content_hash(&system.rep, &system.options)?,
            system,
            codes,
        })
    }

    pub fn build(genus: usize, options: &BuildOptions) -> Result<Self> {
        CacheFile::new(MarkovSystem::standard_with(genus, options)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parses and checks the version and the content hash.
    pub fn from_json(s: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        let found = v.get("format_version").and_then(|x| x.as_u64()).unwrap_or(0) as u32;
        if found != CACHE_VERSION {
            return Err(Error::CacheVersion {
                found,
                expected: CACHE_VERSION,
            });
        }
        let c: CacheFile = serde_json::from_value(v)?;
        if c.content_hash != content_hash(&c.system.rep, &c.system.options)? {
            return Err(Error::CacheHash);
        }
        Ok(c)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        CacheFile::from_json(&std::fs::read_to_string(path)?)
    }

    /// Whether this cache was built for the given genus and options.
    pub fn matches(&self, genus: usize, options: &BuildOptions) -> bool {
        self.system.genus == genus && &self.system.options == options
    }
}

/// Loads the cache when it matches, otherwise builds (and writes it, when a
/// path is given).
pub fn load_or_build(path: Option<&Path>, genus: usize, options: &BuildOptions) -> Result<CacheFile> {
    if let Some(p) = path {
        if p.exists() {
            let c = CacheFile::read(p)?;
            if c.matches(genus, options) {
                return Ok(c);
            }
        }
    }
    let c = CacheFile::build(genus, options)?;
    if let Some(p) = path {
        c.write(p)?;
    }
    Ok(c)
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

/// One CSV row per sample: `dual_word,value,error_bound`.
pub fn scaling_csv(rows: &[crate::scaling::ScalingSample]) -> String {
    let mut s = String::from("dual_word,value,error_bound\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.dual_word.display(), fmt17(r.value), fmt17(r.error_bound)));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 1.0 / 3.0, 2f64.sqrt() * 1e-300, -7.25e12, 0.0] {
            let y: f64 = fmt17(x).parse().unwrap();
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(fmt17(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig { genus: 1, ..RunConfig::default() };
        assert_eq!(bad.validate(), Err(Error::InvalidGenus(1)));
        let bad = RunConfig { tol: 0.0, ..RunConfig::default() };
        assert!(bad.validate().is_err());
        let bad = RunConfig { depth: 0, ..RunConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cache_round_trip_is_exact() {
        let c = CacheFile::build(2, &BuildOptions::default()).unwrap();
        let s = c.to_json().unwrap();
        let back = CacheFile::from_json(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json().unwrap(), s);
    }

    #[test]
    fn cache_rejects_tampering() {
        let c = CacheFile::build(2, &BuildOptions::default()).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        v["format_version"] = 99.into();
        assert!(matches!(CacheFile::from_json(&v.to_string()), Err(Error::CacheVersion { .. })));
        v["format_version"] = CACHE_VERSION.into();
        v["system"]["options"]["markov_tol"] = 1e-3.into();
        assert_eq!(CacheFile::from_json(&v.to_string()), Err(Error::CacheHash));
    }
}
