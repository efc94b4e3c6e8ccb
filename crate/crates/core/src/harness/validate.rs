use super::config::{HarnessError, RunConfig};
use crate::pddl::{validate_catalog_json, RecordStatus};
use serde::Serialize;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ValidationReport {
    Catalog {
        entries: Vec<EntryStatus>,
        ok: usize,
        failed: usize,
    },
    Config {
        error: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryStatus {
    pub index: usize,
    pub id: Option<u32>,
    pub error: Option<String>,
}

impl From<RecordStatus> for EntryStatus {
    fn from(r: RecordStatus) -> Self {
        EntryStatus {
            index: r.index,
            id: r.id,
            error: r.error,
        }
    }
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        match self {
            ValidationReport::Catalog { failed, entries, .. } => *failed == 0 && !entries.is_empty(),
            ValidationReport::Config { error } => error.is_none(),
        }
    }
}

/// Checks a catalog (JSON array) or a run config (JSON object). Catalog
/// entries are reported individually.
pub fn cmd_validate(path: &Path) -> Result<ValidationReport, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    if text.trim_start().starts_with('[') {
        let entries: Vec<EntryStatus> = validate_catalog_json(&text)?.into_iter().map(Into::into).collect();
        let failed = entries.iter().filter(|e| e.error.is_some()).count();
        return Ok(ValidationReport::Catalog {
            ok: entries.len() - failed,
            failed,
            entries,
        });
    }
    Ok(ValidationReport::Config {
        error: RunConfig::load(path).err().map(|e| e.to_string()),
    })
}
