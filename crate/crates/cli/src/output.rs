//! Files written by the commands.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use beachlab::{GridFunction1D, SurfaceState};
use serde::Serialize;

use crate::CliError;

/// Seventeen significant digits.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Collects the paths written by one command.
#[derive(Debug, Default)]
pub struct Files {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl Files {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| io(&path, e))?;
        w.write_record(header).map_err(|e| io(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| io(&path, e))?;
        }
        w.flush().map_err(|e| io(&path, e))
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| io(&path, e))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| io(&path, e))
    }

    pub fn states(&mut self, name: &str, times: &[f64], states: &[SurfaceState]) -> Result<(), CliError> {
        let path = self.path(name);
        write_states(&path, times, states)
    }
}

const MAGIC: &[u8; 8] = b"BLSTATE1";

/// Little-endian: magic, sample count and node count as `u64`, then per
/// sample `t`, `eta`, `psi` as `f64`.
pub fn write_states(path: &Path, times: &[f64], states: &[SurfaceState]) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| io(path, e))?;
    let mut w = BufWriter::new(f);
    let n = states.first().map_or(0, |s| s.eta.len());
    let mut put = |b: &[u8]| w.write_all(b).map_err(|e| io(path, e));
    put(MAGIC)?;
    put(&(states.len() as u64).to_le_bytes())?;
    put(&(n as u64).to_le_bytes())?;
    for (t, s) in times.iter().zip(states) {
        put(&t.to_le_bytes())?;
        for v in s.eta.iter().chain(s.psi.iter()) {
            put(&v.to_le_bytes())?;
        }
    }
    w.flush().map_err(|e| io(path, e))
}

pub fn read_states(path: &Path) -> Result<(Vec<f64>, Vec<SurfaceState>), CliError> {
    let f = File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut r = BufReader::new(f);
    let bad = |what: &str| CliError::Input(format!("{}: {what}", path.display()));
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("not a state file"));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8], CliError> {
        r.read_exact(&mut word).map_err(|_| bad("truncated data"))?;
        Ok(word)
    };
    let count = u64::from_le_bytes(next(&mut r)?) as usize;
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let mut times = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(f64::from_le_bytes(next(&mut r)?));
        let mut field = || -> Result<GridFunction1D, CliError> {
            (0..n).map(|_| Ok(f64::from_le_bytes(next(&mut r)?))).collect::<Result<Vec<_>, _>>().map(Into::into)
        };
        let eta = field()?;
        let psi = field()?;
        states.push(SurfaceState::new(eta, psi));
    }
    Ok((times, states))
}

/// `manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub artifact_version: &'a str,
    pub config: &'a C,
    /// Seconds since the Unix epoch at start, and elapsed seconds.
    pub started_unix: f64,
    pub wall_seconds: f64,
    pub outputs: Vec<String>,
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}
