//! Small filesystem helpers.

use std::io;
use std::path::{Path, PathBuf};

/// Write through a temp file in the same directory and rename into place,
/// so readers never observe a partially written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Default output directory: `--out` flag, else the TOPOGAIT_OUT
/// environment variable, else ./topogait-out.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("TOPOGAIT_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("topogait-out"))
}
