//! Run artifacts: a single JSON file capturing everything a fit
//! produced, self-describing via an echoed config and seeds.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use pacmix::bound::BoundReport;
use pacmix::hdr::WeightMatrix;
use pacmix::mixture::MixtureDistribution;
use pacmix::pool::CandidatePool;
use pacmix::sbs::SbsStep;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub method: String,
    pub seed: u64,
    /// The fully resolved configuration this run used.
    pub config_echo: Value,
    pub pool: CandidatePool,
    pub prior: MixtureDistribution,
    pub posterior: MixtureDistribution,
    pub report: BoundReport,
    /// Present for hdr runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightMatrix>,
    /// Present for sbs runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<SbsStep>>,
}

impl RunArtifact {
    /// Writes atomically: serialize to a temp file in the target
    /// directory, then rename over the destination.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Numeric(format!("artifact not serializable: {e}")))?;
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, format!("{text}\n"))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
        std::fs::rename(&tmp, path).map_err(|e| {
            let _ = std::fs::remove_file(&tmp);
            CliError::Io(format!("cannot move artifact into place: {e}"))
        })?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
        let artifact: RunArtifact = serde_json::from_str(&text)
            .map_err(|e| CliError::Artifact(format!("{}: {e}", path.display())))?;
        if artifact.schema_version != SCHEMA_VERSION {
            return Err(CliError::Artifact(format!(
                "{}: schema version {} (expected {SCHEMA_VERSION})",
                path.display(),
                artifact.schema_version
            )));
        }
        Ok(artifact)
    }
}
