use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::{classify, OutcomeKind, ProverEmission, ProverOutcome};

/// Environment variable naming the prover binary.
pub const PROVER_PATH_ENV: &str = "RBACV_PROVER_PATH";

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("prover binary not found: {0}")]
    BinaryNotFound(PathBuf),
    #[error("could not launch {binary}: {source}")]
    LaunchFailure {
        binary: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("i/o error in prover workspace: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunnerConfig {
    /// `prover9` or `mace4`; both are invoked as `<binary> -f <input>`.
    pub binary: PathBuf,
    pub timeout: Duration,
    /// Parent directory for per-run scratch directories. Defaults to the
    /// system temp dir.
    pub workdir: Option<PathBuf>,
}

impl RunnerConfig {
    pub fn new(binary: impl Into<PathBuf>, timeout: Duration) -> Self {
        RunnerConfig {
            binary: binary.into(),
            timeout,
            workdir: None,
        }
    }

    /// Reads the binary from `RBACV_PROVER_PATH`, if set.
    pub fn from_env(timeout: Duration) -> Option<Self> {
        std::env::var_os(PROVER_PATH_ENV)
            .filter(|v| !v.is_empty())
            .map(|v| RunnerConfig::new(PathBuf::from(v), timeout))
    }
}

/// Resolves `binary` as a path, or through `PATH` when it has no separator.
pub fn find_binary(binary: &Path) -> Option<PathBuf> {
    if binary.components().count() > 1 || binary.is_absolute() {
        return binary.is_file().then(|| binary.to_path_buf());
    }
    std::env::var_os("PATH").and_then(|paths| {
        std::env::split_paths(&paths)
            .map(|dir| dir.join(binary))
            .find(|candidate| candidate.is_file())
    })
}

/// Writes the emission into a private scratch directory, runs the prover on
/// it, and classifies the captured output. A run exceeding the timeout is
/// killed and reported as `Unresolved` with a note.
pub fn run_external(
    e: &ProverEmission,
    runner: &RunnerConfig,
) -> Result<ProverOutcome, BridgeError> {
    let binary = find_binary(&runner.binary)
        .ok_or_else(|| BridgeError::BinaryNotFound(runner.binary.clone()))?;
    let scratch = match &runner.workdir {
        Some(dir) => tempfile::Builder::new().prefix("rbacv-").tempdir_in(dir)?,
        None => tempfile::Builder::new().prefix("rbacv-").tempdir()?,
    };
    let input = scratch.path().join("input.in");
    let output = scratch.path().join("output.txt");
    fs::write(&input, e.render())?;
    let sink = fs::File::create(&output)?;

    let mut child = Command::new(&binary)
        .arg("-f")
        .arg(&input)
        .current_dir(scratch.path())
        .stdin(Stdio::null())
        .stdout(sink.try_clone()?)
        .stderr(sink)
        .spawn()
        .map_err(|source| match source.kind() {
            io::ErrorKind::NotFound => BridgeError::BinaryNotFound(binary.clone()),
            _ => BridgeError::LaunchFailure {
                binary: binary.clone(),
                source,
            },
        })?;

    let deadline = Instant::now() + runner.timeout;
    let timed_out = loop {
        if child.try_wait()?.is_some() {
            break false;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            break true;
        }
        thread::sleep(Duration::from_millis(10));
    };

    let raw = String::from_utf8_lossy(&fs::read(&output)?).into_owned();
    if timed_out {
        return Ok(ProverOutcome {
            kind: OutcomeKind::Unresolved,
            raw,
            note: Some(format!("timed out after {:?}", runner.timeout)),
        });
    }
    Ok(ProverOutcome {
        kind: classify(&raw),
        raw,
        note: None,
    })
}
