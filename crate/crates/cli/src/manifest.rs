//! Run manifests: enough to reproduce an output file exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// A file read by the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
    /// Generation seed from the file's header, when it has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// For models: the manifest the model was written with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedded: Option<Box<RunManifest>>,
}

impl InputFile {
    pub fn new(path: &Path, bytes: &[u8], seed: Option<u64>) -> Self {
        let embedded = serde_json::from_slice::<serde_json::Value>(bytes)
            .ok()
            .and_then(|v| v.get("manifest").cloned())
            .and_then(|m| serde_json::from_value(m).ok())
            .map(Box::new);
        InputFile { path: path.display().to_string(), sha256: sha256_hex(bytes), seed, embedded }
    }

    pub fn is_model(&self) -> bool {
        self.embedded.as_ref().is_some_and(|m| m.subcommand == "train")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub config: serde_json::Value,
    #[serde(default)]
    pub inputs: Vec<InputFile>,
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &T) -> serde_json::Result<Self> {
        let mut config = serde_json::to_value(command)?;
        let subcommand = config
            .as_object_mut()
            .and_then(|m| m.remove("subcommand"))
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            subcommand,
            config,
            inputs: Vec::new(),
        })
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    /// Hashes and seeds of corpora that models among the inputs were trained on.
    pub fn model_training_inputs(&self) -> Vec<(String, Option<u64>)> {
        self.inputs
            .iter()
            .filter(|i| i.is_model())
            .filter_map(|i| i.embedded.as_deref())
            .flat_map(|m| m.inputs.iter().map(|i| (i.sha256.clone(), i.seed)))
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
