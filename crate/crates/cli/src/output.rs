//! Run directory with whole-file atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use homlab_core::GridFunction;
use serde::Serialize;

use crate::CliError;

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self, CliError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes to a temporary sibling and renames it into place.
    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", target.display()));
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(bytes).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, &target).map_err(io)?;
        Ok(target)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_grid_function(&self, name: &str, u: &GridFunction) -> Result<PathBuf, CliError> {
        let mut buf = Vec::new();
        u.write_csv(&mut buf)?;
        self.write_bytes(name, &buf)
    }

    /// CSV with a header row; values are written with full precision.
    pub fn write_table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    /// Two whitespace-separated columns under a `#` header.
    pub fn write_plot(&self, name: &str, labels: (&str, &str), points: &[(f64, f64)]) -> Result<PathBuf, CliError> {
        let mut text = format!("# {} {}\n", labels.0, labels.1);
        for (a, b) in points {
            text.push_str(&format!("{a:e} {b:e}\n"));
        }
        self.write_bytes(name, text.as_bytes())
    }
}
