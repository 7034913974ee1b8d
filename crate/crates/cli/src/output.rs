//! Run directories: atomic file emission and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use leaper_core::io::write_atomic;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const MANIFEST_SCHEMA: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const OUTPUT_ROOT_VAR: &str = "LEAPER_OUTPUT_ROOT";

/// Root for run directories: `$LEAPER_OUTPUT_ROOT`, else `./runs`.
pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileRecord {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema: u32,
    pub command: String,
    pub code_version: String,
    pub config: Value,
    /// Final RNG state per seed and stream, keyed by seed.
    pub rng_states: BTreeMap<String, BTreeMap<String, Value>>,
    /// Wall-clock seconds per named phase.
    pub timings: BTreeMap<String, f64>,
    pub files: Vec<FileRecord>,
}

/// Collects files written into one run directory; `finish` writes the
/// manifest that references them.
#[derive(Debug)]
pub struct RunOutput {
    dir: PathBuf,
    files: Vec<FileRecord>,
    rng_states: BTreeMap<String, BTreeMap<String, Value>>,
    timings: BTreeMap<String, f64>,
}

impl RunOutput {
    pub fn new(dir: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            files: Vec::new(),
            rng_states: BTreeMap::new(),
            timings: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileRecord] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        let record = FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        };
        match self.files.iter_mut().find(|f| f.path == name) {
            Some(f) => *f = record,
            None => self.files.push(record),
        }
        Ok(path)
    }

    /// Writes a CSV whose first line is `# schema: <schema>`.
    pub fn write_csv<R, I>(
        &mut self,
        name: &str,
        schema: &str,
        header: &[&str],
        rows: I,
    ) -> std::io::Result<PathBuf>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
    {
        let mut buf = format!("# schema: {schema}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for row in rows {
                w.write_record(row)?;
            }
            w.flush()?;
        }
        self.write_bytes(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        self.write_bytes(name, text.as_bytes())
    }

    /// Registers a file written by another component (e.g. a checkpoint).
    pub fn register(&mut self, name: &str) -> std::io::Result<()> {
        let bytes = std::fs::read(self.dir.join(name))?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord {
            path: name.to_string(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn record_rng<T: Serialize>(&mut self, seed: u64, stream: &str, rng: &T) {
        let v = serde_json::to_value(rng).unwrap_or(Value::Null);
        self.rng_states
            .entry(seed.to_string())
            .or_default()
            .insert(stream.to_string(), v);
    }

    pub fn record_time(&mut self, phase: &str, seconds: f64) {
        *self.timings.entry(phase.to_string()).or_default() += seconds;
    }

    pub fn finish(self, command: &str, config: Value) -> std::io::Result<RunManifest> {
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA,
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            rng_states: self.rng_states,
            timings: self.timings,
            files: self.files,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        write_atomic(&self.dir.join(MANIFEST_FILE), text.as_bytes())?;
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads a CSV written by [`RunOutput::write_csv`], skipping the schema line.
pub fn read_csv(path: &Path) -> std::io::Result<(String, Vec<csv::StringRecord>)> {
    let text = std::fs::read_to_string(path)?;
    let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
    let schema = first
        .strip_prefix("# schema: ")
        .ok_or_else(|| std::io::Error::other(format!("{}: missing schema line", path.display())))?
        .to_string();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let rows = r.records().collect::<Result<Vec<_>, _>>().map_err(std::io::Error::other)?;
    Ok((schema, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_match_written_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = RunOutput::new(dir.path().join("run")).unwrap();
        out.write_csv("a.csv", "test/1", &["x", "y"], [["1", "2"], ["3", "4"]])
            .unwrap();
        out.write_bytes("b.txt", b"hello").unwrap();
        out.write_bytes("b.txt", b"hello again").unwrap();
        let m = out.finish("test", Value::Null).unwrap();
        assert_eq!(m.files.len(), 2);
        for f in &m.files {
            let bytes = std::fs::read(dir.path().join("run").join(&f.path)).unwrap();
            assert_eq!(sha256_hex(&bytes), f.sha256);
        }
        let (schema, rows) = read_csv(&dir.path().join("run/a.csv")).unwrap();
        assert_eq!(schema, "test/1");
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[1][0], "3");
    }

    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
