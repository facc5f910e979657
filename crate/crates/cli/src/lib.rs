//! Batch front end for the assurance-contract model: presets, sweeps and
//! exhibit replication with CSV/SVG output.

pub mod audit;
pub mod commands;
pub mod config;
pub mod error;
pub mod replicate;
pub mod svg;
pub mod table;

use std::path::{Path, PathBuf};

pub use commands::{Artifact, Outcome};
pub use config::{Command, RunConfig};
pub use error::{CliError, CliResult};

/// Runs `cmd` on a dedicated pool when `cfg.threads` is set.
pub fn execute(cmd: Command, cfg: &RunConfig) -> CliResult<Outcome> {
    if let Some(c) = cfg.command {
        if c != cmd {
            return Err(CliError::config(format!(
                "config file is for `{}` but `{}` was invoked",
                c.name(),
                cmd.name()
            )));
        }
    }
    match cfg.threads {
        Some(0) => Err(CliError::config("threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(|| commands::run(cmd, cfg)),
        None => commands::run(cmd, cfg),
    }
}

pub fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

/// Writes every artifact under `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> CliResult<Vec<PathBuf>> {
    if artifacts.is_empty() {
        return Ok(Vec::new());
    }
    let io = |context: String| move |source| CliError::Io { context, source };
    std::fs::create_dir_all(dir).map_err(io(format!("creating {}", dir.display())))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.contents).map_err(io(format!("writing {}", path.display())))?;
            Ok(path)
        })
        .collect()
}
