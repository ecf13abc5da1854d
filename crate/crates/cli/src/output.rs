//! Artifact writing: every file lands atomically (temp file in the target
//! directory, then rename), so a failing run never leaves a half-written
//! artifact behind.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// Writes `bytes` to `path` through a temp file + rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic_with(path, bytes, || Ok(()))
}

/// Same as [`write_atomic`] with a hook between the temp write and the
/// rename; tests inject failures there to confirm nothing partial survives.
pub fn write_atomic_with(
    path: &Path,
    bytes: &[u8],
    between: impl FnOnce() -> std::io::Result<()>,
) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)
        .map_err(|e| CliError::user(format!("cannot create {}: {e}", dir.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    let io_err = |e: std::io::Error| CliError::user(format!("write {}: {e}", path.display()));
    let result = (|| {
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        f.write_all(bytes).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
        between().map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Four-significant-digit rendering for human tables.
pub fn human(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor();
    if (-3.0..4.0).contains(&mag) {
        let decimals = (3 - mag as i32).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.3e}")
    }
}
