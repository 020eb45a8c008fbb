//! Output files: CSV tables, atomic writes and run manifests.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

/// Environment variable that overrides the default output directory.
pub const OUTPUT_DIR_ENV: &str = "NH3PT_OUTPUT_DIR";

/// A CSV file under construction: a units comment, a header, then rows.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub units: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[(&'static str, &'static str)]) -> Table {
        Table {
            columns: columns.iter().map(|c| c.0).collect(),
            units: columns.iter().map(|c| c.1).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, fingerprint: &str) -> Result<String, CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "# units: {}", self.units.join(", ")).map_err(CliError::io)?;
        writeln!(buf, "# config sha256: {fingerprint}").map_err(CliError::io)?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(&self.columns).map_err(CliError::io)?;
        for r in &self.rows {
            w.write_record(r).map_err(CliError::io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::io(e.into_error()))?;
        String::from_utf8(bytes).map_err(CliError::io)
    }
}

/// Plain number formatting that round-trips exactly.
pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    columns: Vec<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    units: Vec<&'static str>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_fingerprint: &'a str,
    files: &'a [FileEntry],
}

/// Collects a command's files and writes them with a manifest.
pub struct Output {
    dir: PathBuf,
    fingerprint: String,
    files: Vec<FileEntry>,
}

impl Output {
    pub fn new(dir: &Path, fingerprint: String) -> Result<Output, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            fingerprint,
            files: Vec::new(),
        })
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let text = table.to_csv(&self.fingerprint)?;
        self.file(name, text.as_bytes(), table.columns.clone(), table.units.clone())
    }

    /// A CSV produced by the library with its own header lines.
    pub fn raw_csv(&mut self, name: &str, body: &str, columns: &[&'static str]) -> Result<(), CliError> {
        let text = format!("# config sha256: {}\n{body}", self.fingerprint);
        self.file(name, text.as_bytes(), columns.to_vec(), Vec::new())
    }

    fn file(&mut self, name: &str, bytes: &[u8], columns: Vec<&'static str>, units: Vec<&'static str>) -> Result<(), CliError> {
        write_atomic(&self.dir.join(name), bytes)?;
        self.files.push(FileEntry {
            path: name.to_string(),
            sha256: Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect(),
            columns,
            units,
        });
        Ok(())
    }

    /// Writes `<stem>.manifest.json` and returns the paths written.
    pub fn finish(self, command: &str, stem: &str) -> Result<Vec<PathBuf>, CliError> {
        let manifest = Manifest {
            command,
            config_fingerprint: &self.fingerprint,
            files: &self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(CliError::io)?;
        text.push('\n');
        let name = format!("{stem}.manifest.json");
        write_atomic(&self.dir.join(&name), text.as_bytes())?;
        let mut paths: Vec<PathBuf> = self.files.iter().map(|f| self.dir.join(&f.path)).collect();
        paths.push(self.dir.join(name));
        Ok(paths)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    tmp.write_all(bytes).map_err(CliError::io)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(CliError::io)?;
    }
    tmp.persist(path).map_err(|e| CliError::io(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}
