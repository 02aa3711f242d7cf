//! CSV tables and the output directory.
//!
//! Every CSV starts with one comment line `# randcrit <command> config_hash=<hex>`
//! followed by the header. Fields are written with Rust's shortest
//! round-trip float formatting, LF line endings and no quoting.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const HASH_PREFIX: &str = "config_hash=";

/// A CSV table assembled in memory.
pub struct Table {
    buf: Vec<u8>,
    width: usize,
}

impl Table {
    pub fn new(command: &str, hash: &str, header: &[&str]) -> Self {
        let mut buf = format!("# randcrit {command} {HASH_PREFIX}{hash}\n").into_bytes();
        buf.extend_from_slice(header.join(",").as_bytes());
        buf.push(b'\n');
        Self {
            buf,
            width: header.len(),
        }
    }

    pub fn row(&mut self, fields: &[String]) {
        assert_eq!(fields.len(), self.width, "row width");
        debug_assert!(fields.iter().all(|f| !f.contains([',', '\n', '"'])));
        self.buf.extend_from_slice(fields.join(",").as_bytes());
        self.buf.push(b'\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }
}

/// Empty string for a missing value.
pub fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The hash recorded in the first line of a CSV artifact.
pub fn csv_hash(text: &str) -> Option<&str> {
    let first = text.lines().next()?;
    let rest = first.strip_prefix("# randcrit ")?;
    rest.split_whitespace().find_map(|t| t.strip_prefix(HASH_PREFIX))
}

/// Data rows of a CSV artifact as a header plus records.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for r in rdr.records() {
        let r = r.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        rows.push(r.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

/// Files written into the output directory, removed again on failure.
pub struct OutputDir {
    dir: PathBuf,
    created: bool,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn open(dir: &Path) -> Result<Self, CliError> {
        let created = !dir.exists();
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created,
            written: Vec::new(),
        })
    }

    /// Writes `name` and reads it back to confirm the bytes landed.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::write(&path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        let back = fs::read(&path).map_err(|e| CliError::io(format!("reading back {}", path.display()), e))?;
        if back != bytes {
            return Err(CliError::Validation(format!("{} does not match what was written", path.display())));
        }
        Ok(())
    }

    pub fn rollback(self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
        if self.created {
            // only succeeds if nothing else ended up in it
            let _ = fs::remove_dir(&self.dir);
        }
    }
}
