use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// The artifact directory of one run.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::output(format!("creating {}", root.display()), e))?;
        Ok(OutDir {
            root: root.to_owned(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write_with(
        &self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> CliResult<()> {
        let path = self.root.join(name);
        let file = File::create(&path)
            .map_err(|e| CliError::output(format!("creating {}", path.display()), e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::output(format!("writing {}", path.display()), e))
    }

    /// Pretty JSON with a trailing newline.
    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> CliResult<()> {
        let text = to_json(value)?;
        self.write_with(name, |w| w.write_all(text.as_bytes()))
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(socialrank::Error::from)?;
    text.push('\n');
    Ok(text)
}

/// Writes `resolved-config.json` and returns its SHA-256 digest.
pub fn write_resolved_config(out: &OutDir, config: &serde_json::Value) -> CliResult<String> {
    let text = to_json(config)?;
    out.write_with("resolved-config.json", |w| w.write_all(text.as_bytes()))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}
