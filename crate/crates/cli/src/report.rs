//! Run reports, input digests and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "sandwich";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// An input file read fully into memory, with its digest.
#[derive(Debug, Clone)]
pub struct Input {
    pub role: &'static str,
    pub path: PathBuf,
    pub bytes: Vec<u8>,
    pub sha256: String,
}

impl Input {
    pub fn read(role: &'static str, path: &Path) -> CliResult<Input> {
        let bytes = fs::read(path)
            .map_err(|e| CliError::validation(format!("cannot read {role} file {}: {e}", path.display())))?;
        Ok(Input {
            role,
            path: path.to_path_buf(),
            sha256: sha256_hex(&bytes),
            bytes,
        })
    }

    pub fn text(&self) -> CliResult<&str> {
        std::str::from_utf8(&self.bytes).map_err(|e| {
            CliError::validation(format!("{} file {} is not UTF-8: {e}", self.role, self.path.display()))
        })
    }

    /// Parses the file as JSON, reporting the line and column of any error.
    pub fn json<T: DeserializeOwned>(&self) -> CliResult<T> {
        serde_json::from_slice(&self.bytes).map_err(|e| {
            // serde_json's message already carries the line and column
            CliError::validation(format!("{} file {}: {e}", self.role, self.path.display()))
        })
    }

    pub fn digest(&self) -> InputDigest {
        InputDigest {
            role: self.role.to_string(),
            path: self.path.display().to_string(),
            sha256: self.sha256.clone(),
            bytes: self.bytes.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Metadata shared by every subcommand's output. There is deliberately no
/// timestamp, so identical runs produce identical bytes.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Everything needed to rerun: resolved options and parsed inputs.
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub inputs: Vec<InputDigest>,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(
        command: &'static str,
        seed: Option<u64>,
        config: serde_json::Value,
        inputs: &[&Input],
        result: T,
    ) -> Report<T> {
        let config_sha256 = sha256_hex(config.to_string().as_bytes());
        Report {
            tool: TOOL,
            version: VERSION,
            command,
            seed,
            config,
            config_sha256,
            inputs: inputs.iter().map(|i| i.digest()).collect(),
            result,
        }
    }

    pub fn to_json(&self) -> CliResult<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(CliError::runtime)?;
        s.push('\n');
        Ok(s)
    }

    /// One-line provenance stamp placed at the top of every output file.
    pub fn stamp(&self) -> String {
        let mut s = format!("{TOOL} {VERSION} {} config=sha256:{}", self.command, self.config_sha256);
        if let Some(seed) = self.seed {
            s.push_str(&format!(" seed={seed}"));
        }
        for i in &self.inputs {
            s.push_str(&format!(" {}=sha256:{}", i.role, i.sha256));
        }
        s
    }

    pub fn hash_comment(&self) -> String {
        format!("# {}\n", self.stamp())
    }

    pub fn html_comment(&self) -> String {
        format!("<!-- {} -->\n", self.stamp())
    }
}

/// Output files collected in memory and written together at the end, so a
/// failed run leaves nothing half-written.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents)
                .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn stamp_lists_seed_and_inputs() {
        let input = Input {
            role: "scenario",
            path: "s.json".into(),
            bytes: b"{}".to_vec(),
            sha256: sha256_hex(b"{}"),
        };
        let r = Report::new("optimize", Some(7), serde_json::json!({"a": 1}), &[&input], ());
        let stamp = r.stamp();
        assert!(stamp.starts_with("sandwich "));
        assert!(stamp.contains(" seed=7"));
        assert!(stamp.contains(&format!("scenario=sha256:{}", input.sha256)));
        assert!(r.hash_comment().starts_with("# "));
    }

    #[test]
    fn malformed_json_reports_position() {
        let input = Input {
            role: "pool",
            path: "p.json".into(),
            bytes: b"{\n  \"fee\": }".to_vec(),
            sha256: String::new(),
        };
        let err = input.json::<serde_json::Value>().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("line 2"));
    }
}
