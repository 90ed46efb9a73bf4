use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::Output;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce one output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    /// Arguments after the program name, as given.
    pub command: Vec<String>,
    /// Directory the relative paths in `command` are resolved against.
    pub working_dir: PathBuf,
    pub inputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub output: FileDigest,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn digest_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

impl RunManifest {
    pub fn new(command: Vec<String>, output: &Path, out: &Output) -> Result<Self, CliError> {
        let working_dir = std::env::current_dir().map_err(|e| CliError::io(".", e))?;
        let inputs = out
            .inputs
            .iter()
            .map(|p| Ok(FileDigest { path: p.display().to_string(), sha256: digest_file(p)? }))
            .collect::<Result<_, CliError>>()?;
        Ok(Self {
            command,
            working_dir,
            inputs,
            parameters: out.parameters.clone(),
            seed: out.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            output: FileDigest { path: output.display().to_string(), sha256: sha256_hex(&out.bytes) },
        })
    }

    pub fn write_beside(&self, output: &Path) -> Result<(), CliError> {
        let path = manifest_path(output);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| CliError::Schema(vec![format!("{}: {}: {}", path.display(), e.path(), e.inner())]))
    }

    /// Fails when an input file no longer matches its recorded digest.
    pub fn check_inputs(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        for f in &self.inputs {
            let p = self.working_dir.join(&f.path);
            let now = digest_file(&p)?;
            if now != f.sha256 {
                problems.push(format!("error: input {} changed since the recorded run", f.path));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("run/out.csv")), PathBuf::from("run/out.csv.manifest.json"));
    }
}
