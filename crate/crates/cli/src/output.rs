//! Output directory writers. Files are written whole and in a fixed order.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const CONFIG_ECHO: &str = "config.json";

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<(), CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(format!("{name}: {e}")))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn csv<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<(), CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let to_io = |e: csv::Error| CliError::io(&path, e.into());
        for row in rows {
            w.serialize(row).map_err(to_io)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    /// Writes the resolved, self-contained configuration.
    pub fn echo(&self, config: &RunConfig) -> Result<(), CliError> {
        let mut echo = config.clone();
        echo.output = None;
        self.json(CONFIG_ECHO, &echo)
    }

    pub fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.path(name);
        let mut f = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f.write_all(body.as_bytes()).map_err(|e| CliError::io(&path, e))
    }
}
