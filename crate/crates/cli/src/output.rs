use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Fixed float format so reruns are byte-identical.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.8e}")
    }
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<(), CliError> {
        std::fs::write(self.path(name), text).map_err(|e| CliError::Io(format!("{name}: {e}")))
    }
}

#[derive(Serialize)]
pub struct RunMeta<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config_sha256: String,
}
