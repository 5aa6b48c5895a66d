//! SHA-256 checksums in `sha256sum` format.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `<hex>  <name>` lines for `names` (relative to `dir`), sorted by
/// name, so `sha256sum -c` can verify them from inside `dir`.
pub fn write_manifest(dir: &Path, names: &[String], manifest: &str) -> Result<()> {
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    let mut out = String::new();
    for n in &names {
        let path = dir.join(n);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        out.push_str(&sha256_hex(&bytes));
        out.push_str("  ");
        out.push_str(n);
        out.push('\n');
    }
    let path = dir.join(manifest);
    fs::write(&path, out).map_err(|e| Error::io(&path, e))
}
