//! Result files. Each is written to a temporary name and renamed into place,
//! so readers never see a half-written file.

use std::fs;
use std::path::{Path, PathBuf};

use crate::{CliError, ExperimentConfig};

pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let io = |what: &str, path: &Path, e: std::io::Error| {
        CliError::Runtime(format!("cannot {what} {}: {e}", path.display()))
    };
    fs::create_dir_all(dir).map_err(|e| io("create", dir, e))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| io("write", &tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| io("rename into", &target, e))?;
    Ok(target)
}

/// `# config=<hash> seed=<seed>` for CSV files.
pub fn csv_stamp(cfg: &ExperimentConfig) -> String {
    format!("# config={} seed={}\n", cfg.hash(), cfg.seed)
}

/// The same stamp as an HTML comment for markdown files.
pub fn md_stamp(cfg: &ExperimentConfig) -> String {
    format!("<!-- config={} seed={} -->\n", cfg.hash(), cfg.seed)
}

/// `meta.txt`: what ran, with which settings.
pub fn meta(cfg: &ExperimentConfig, command: &str, source: &str) -> String {
    format!(
        "command = {command}\nconfig_hash = {}\nseed = {}\ntrials = {}\npayoff_source = {source}\nversion = {}\n\n[config]\n{}",
        cfg.hash(),
        cfg.seed,
        cfg.trials,
        env!("CARGO_PKG_VERSION"),
        cfg.canonical()
    )
}
