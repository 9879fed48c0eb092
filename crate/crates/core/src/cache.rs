//! Advisory disk cache for oracle tables.
//!
//! Entries are keyed by artifact version and parameters; writes go through
//! a temp file and an atomic rename. A cache entry that fails to parse or
//! validate is recomputed, never trusted.

use std::path::{Path, PathBuf};

use crate::cohomology::CohError;
use crate::fox::betti_oracle;

fn betti_path(dir: &Path, n: u32) -> PathBuf {
    dir.join(format!("betti-v{}-n{}.json", crate::ARTIFACT_VERSION, n))
}

fn read_betti(path: &Path, n: u32) -> Option<Vec<usize>> {
    let text = std::fs::read_to_string(path).ok()?;
    let values: Vec<usize> = serde_json::from_str(&text).ok()?;
    // A well-formed table has one entry per cochain degree and starts with
    // the single component.
    if values.len() != n as usize || values.first() != Some(&1) {
        return None;
    }
    Some(values)
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Betti numbers of the configuration-space oracle, cached per `n`.
pub fn betti_oracle_cached(n: u32, dir: &Path) -> Result<Vec<usize>, CohError> {
    let path = betti_path(dir, n);
    if let Some(cached) = read_betti(&path, n) {
        return Ok(cached);
    }
    let table = betti_oracle(n)?;
    if std::fs::create_dir_all(dir).is_ok() {
        let text = serde_json::to_string(&table).expect("table serializes");
        let _ = write_atomic(&path, &text);
    }
    Ok(table)
}
