use std::fs::File;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// CSV file whose rows all start with the config hash. Every row is
/// flushed as soon as it is written.
pub struct CsvReport {
    writer: csv::Writer<File>,
    hash: String,
    path: PathBuf,
}

impl CsvReport {
    pub fn create(path: &Path, hash: &str, header: &[&str]) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(std::iter::once("config_hash").chain(header.iter().copied()))?;
        writer.flush().map_err(|e| CliError::io(path, e))?;
        Ok(CsvReport {
            writer,
            hash: hash.to_string(),
            path: path.to_path_buf(),
        })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut rec = csv::StringRecord::new();
        rec.push_field(&self.hash);
        for f in fields {
            rec.push_field(f.as_ref());
        }
        self.writer.write_record(&rec)?;
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
