//! Run manifest: line-oriented key=value listing the inputs (normalized
//! config digest, seed, code version) and a content digest per output
//! file. Identical config + seed produce identical digests.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub struct Manifest {
    lines: Vec<String>,
    dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(dir: &Path, scenario: &str, seed: u64, normalized_config: &str) -> Self {
        let mut lines = vec![
            "manifest=MDCS-MANIFEST v1".to_string(),
            format!("version={}", env!("CARGO_PKG_VERSION")),
            format!("scenario={scenario}"),
            format!("seed={seed}"),
            format!("config_digest={}", sha256_hex(normalized_config.as_bytes())),
        ];
        lines.push(format!(
            "inputs_digest={}",
            sha256_hex(format!("{normalized_config}\nseed={seed}").as_bytes())
        ));
        Self { lines, dir: dir.to_path_buf() }
    }

    /// Record the content digest of an output file (by its name in the
    /// output directory).
    pub fn add_output(&mut self, name: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let bytes =
            std::fs::read(&path).map_err(|source| CliError::Read { path: path.clone(), source })?;
        self.lines.push(format!("output.{name}={}", sha256_hex(&bytes)));
        Ok(())
    }

    pub fn write(&self) -> Result<(), CliError> {
        let path = self.dir.join("manifest.txt");
        let text = self.lines.join("\n") + "\n";
        std::fs::write(&path, text).map_err(|source| CliError::Write { path, source })
    }
}
