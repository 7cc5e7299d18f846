//! On-disk cache of dipole traces so that interrupted sweeps can resume.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::tdse::{DipoleTrace, ElectronRunSpec};

const MAGIC: &[u8; 8] = b"QLTRACE1";

/// Directory of binary trace files named by the SHA-256 of their run spec.
#[derive(Debug, Clone)]
pub struct TraceCache {
    dir: PathBuf,
}

impl TraceCache {
    pub fn new(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(spec: &ElectronRunSpec) -> Result<String> {
        let bytes = serde_json::to_vec(spec)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.trace"))
    }

    pub fn load(&self, key: &str) -> Result<Option<DipoleTrace>> {
        let path = self.path(key);
        if !path.exists() {
            return Ok(None);
        }
        let mut bytes = Vec::new();
        fs::File::open(&path)?.read_to_end(&mut bytes)?;
        match decode(&bytes) {
            Some(t) => Ok(Some(t)),
            None => {
                log::warn!("discarding corrupt cache entry {}", path.display());
                Ok(None)
            }
        }
    }

    pub fn store(&self, key: &str, trace: &DipoleTrace) -> Result<()> {
        let path = self.path(key);
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::File::create(&tmp)?.write_all(&encode(trace))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    /// Cached trace for `spec`, computing and storing it on a miss.
    pub fn get_or_compute(&self, spec: &ElectronRunSpec, compute: impl FnOnce() -> Result<DipoleTrace>) -> Result<DipoleTrace> {
        let key = Self::key(spec)?;
        if let Some(t) = self.load(&key)? {
            return Ok(t);
        }
        let t = compute()?;
        self.store(&key, &t)?;
        Ok(t)
    }
}

fn encode(t: &DipoleTrace) -> Vec<u8> {
    let n = t.values.len();
    let mut out = Vec::with_capacity(32 + 16 * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&t.dt.to_le_bytes());
    out.extend_from_slice(&t.beta_q.to_le_bytes());
    for v in t.values.iter().chain(&t.norm_trace) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8]) -> Option<DipoleTrace> {
    if bytes.len() < 32 || &bytes[..8] != MAGIC {
        return None;
    }
    let word = |i: usize| -> [u8; 8] { bytes[i..i + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(8)) as usize;
    if bytes.len() != 32 + 16 * n {
        return None;
    }
    let dt = f64::from_le_bytes(word(16));
    let beta_q = f64::from_le_bytes(word(24));
    let read = |start: usize| -> Vec<f64> { (0..n).map(|j| f64::from_le_bytes(word(start + 8 * j))).collect() };
    Some(DipoleTrace {
        dt,
        values: read(32),
        norm_trace: read(32 + 8 * n),
        beta_q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = DipoleTrace {
            dt: 0.25,
            values: vec![0.1, -0.2, 0.3],
            norm_trace: vec![1.0, 1.0, 0.999],
            beta_q: 0.41,
        };
        assert_eq!(decode(&encode(&t)).unwrap(), t);
        assert!(decode(&encode(&t)[..40]).is_none());
    }
}
