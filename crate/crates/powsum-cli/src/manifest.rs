//! Run manifests: what was asked for, with which seed, on which inputs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything that determines a run's output. Timing is deliberately absent
/// so that a replay reproduces the output byte for byte.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: String,
    /// Arguments after the program name, without `--out`.
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub field: Option<String>,
    pub inputs: Vec<InputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, seed: Option<u64>) -> Self {
        RunManifest {
            tool: format!("powsum {}", env!("CARGO_PKG_VERSION")),
            command: command.to_string(),
            argv,
            seed,
            field: None,
            inputs: Vec::new(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        String::from_utf8(bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("manifest serializes").as_bytes())
    }
}

/// The manifest embedded in a previous output, JSON or moment table.
pub fn extract(text: &str) -> Result<RunManifest, CliError> {
    if let Some(line) = text.lines().find_map(|l| l.strip_prefix("# manifest ")) {
        return serde_json::from_str(line).map_err(|e| CliError::Io(format!("bad manifest line: {e}")));
    }
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Io(format!("not a powsum output: {e}")))?;
    serde_json::from_value(v.get("manifest").cloned().unwrap_or_default())
        .map_err(|e| CliError::Io(format!("output has no readable manifest: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunManifest::new("bounds", vec!["bounds".into(), "--n".into(), "30".into()], None);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = Some(1);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn extraction_from_both_formats() {
        let m = RunManifest::new("x", vec!["x".into()], Some(3));
        let json = serde_json::json!({ "manifest": m, "result": 1 }).to_string();
        assert_eq!(extract(&json).unwrap(), m);
        let table = format!("# manifest {}\n1; 2; 3\n", serde_json::to_string(&m).unwrap());
        assert_eq!(extract(&table).unwrap(), m);
        assert!(extract("nonsense").is_err());
    }
}
