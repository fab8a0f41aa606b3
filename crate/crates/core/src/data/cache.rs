//! Reference-solution cache.
//!
//! File layout (text, one field per line):
//!
//! ```text
//! adabfgs-refsol 1
//! hash <sha256 hex of dataset content and objective parameters>
//! n <dimension>
//! f_star <value>
//! <x_0>
//! ...
//! <x_{n-1}>
//! end
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a load reproduces the
//! stored bits exactly.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CACHE_FORMAT: &str = "adabfgs-refsol 1";

#[derive(Debug, Clone, PartialEq)]
pub struct CachedSolution {
    pub x_star: Vec<f64>,
    pub f_star: f64,
}

#[derive(Debug, Clone)]
pub struct RefsolCache {
    dir: PathBuf,
}

impl RefsolCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Cache key from a dataset digest and a parameter description.
    pub fn key(dataset_hash: &str, params: &str) -> String {
        let mut h = Sha256::new();
        h.update(dataset_hash.as_bytes());
        h.update(b"\0");
        h.update(params.as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.refsol"))
    }

    /// Loads the entry for `name`. Missing files, hash mismatches, and
    /// corrupted payloads all yield `None`; the latter two log a warning.
    pub fn load(&self, name: &str, key: &str) -> Option<CachedSolution> {
        let path = self.path(name);
        let text = fs::read_to_string(&path).ok()?;
        match decode(&text) {
            Some((hash, sol)) if hash == key => Some(sol),
            Some(_) => {
                log::warn!("{}: content hash changed, recomputing", path.display());
                None
            }
            None => {
                log::warn!("{}: corrupted cache entry, recomputing", path.display());
                None
            }
        }
    }

    pub fn store(&self, name: &str, key: &str, sol: &CachedSolution) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let mut text = format!("{CACHE_FORMAT}\nhash {key}\nn {}\nf_star {:?}\n", sol.x_star.len(), sol.f_star);
        for v in &sol.x_star {
            text.push_str(&format!("{v:?}\n"));
        }
        text.push_str("end\n");
        let tmp = self.dir.join(format!("{name}.refsol.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(tmp, self.path(name))?;
        Ok(())
    }

    /// Returns the cached entry or computes and stores it. The flag reports
    /// whether the value came from disk.
    pub fn get_or_compute<F>(&self, name: &str, key: &str, compute: F) -> Result<(CachedSolution, bool)>
    where
        F: FnOnce() -> Result<CachedSolution>,
    {
        if let Some(sol) = self.load(name, key) {
            return Ok((sol, true));
        }
        let sol = compute()?;
        self.store(name, key, &sol)?;
        Ok((sol, false))
    }
}

fn decode(text: &str) -> Option<(String, CachedSolution)> {
    let mut lines = text.lines();
    if lines.next()? != CACHE_FORMAT {
        return None;
    }
    let hash = lines.next()?.strip_prefix("hash ")?.to_string();
    let n: usize = lines.next()?.strip_prefix("n ")?.parse().ok()?;
    let f_star: f64 = lines.next()?.strip_prefix("f_star ")?.parse().ok()?;
    let mut x_star = Vec::with_capacity(n);
    for _ in 0..n {
        x_star.push(lines.next()?.parse().ok()?);
    }
    if lines.next()? != "end" || !f_star.is_finite() {
        return None;
    }
    Some((hash, CachedSolution { x_star, f_star }))
}
