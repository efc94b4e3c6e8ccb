//! Goal-metric catalogs.
//!
//! A catalog file is a JSON array of `{"id", "original_id", "goal", "metric"}`
//! records, where `goal` and `metric` hold PDDL text. The shipped catalog
//! holds pairs 1 through 43.

use super::expr::GoalMetric;
use super::parser::{parse_goal, parse_metric, ParseError};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::Path;
use thiserror::Error;

const SHIPPED: &str = include_str!("../../data/goal_metrics.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error("catalog is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("catalog must be a JSON array of records")]
    NotAnArray,
    #[error("record {index}: {message}")]
    Record { index: usize, message: String },
    #[error("record {index}: missing integer `id`")]
    MissingId { index: usize },
    #[error("duplicate id {0}")]
    DuplicateId(u32),
    #[error("id {id}: {field}: {source}")]
    Parse {
        id: u32,
        field: &'static str,
        #[source]
        source: ParseError,
    },
}

#[derive(Debug, Deserialize)]
struct Record {
    id: Option<u32>,
    original_id: Option<u32>,
    goal: String,
    metric: String,
}

/// Immutable set of goal-metric pairs ordered by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: Vec<GoalMetric>,
}

impl Catalog {
    pub fn from_entries(mut entries: Vec<GoalMetric>) -> Result<Self, CatalogError> {
        entries.sort_by_key(|e| e.id);
        if let Some(w) = entries.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CatalogError::DuplicateId(w[0].id));
        }
        Ok(Catalog { entries })
    }

    /// The 43 pairs shipped with the crate.
    pub fn shipped() -> Catalog {
        Catalog::from_json(SHIPPED).expect("shipped catalog is valid")
    }

    pub fn shipped_json() -> &'static str {
        SHIPPED
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let values: Vec<serde_json::Value> = match serde_json::from_str(text)? {
            serde_json::Value::Array(v) => v,
            _ => return Err(CatalogError::NotAnArray),
        };
        let mut seen = BTreeSet::new();
        let mut entries = Vec::with_capacity(values.len());
        for (index, v) in values.into_iter().enumerate() {
            let gm = parse_record(index, v)?;
            if !seen.insert(gm.id) {
                return Err(CatalogError::DuplicateId(gm.id));
            }
            entries.push(gm);
        }
        Catalog::from_entries(entries)
    }

    pub fn entries(&self) -> &[GoalMetric] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&GoalMetric> {
        self.index_of(id).map(|i| &self.entries[i])
    }

    /// Zero-based position of `id` in id order.
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.entries.binary_search_by_key(&id, |e| e.id).ok()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn max_id(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.id)
    }
}

fn parse_record(index: usize, v: serde_json::Value) -> Result<GoalMetric, CatalogError> {
    let rec: Record = serde_json::from_value(v).map_err(|e| CatalogError::Record {
        index,
        message: e.to_string(),
    })?;
    let id = rec.id.ok_or(CatalogError::MissingId { index })?;
    let goal = parse_goal(&rec.goal).map_err(|source| CatalogError::Parse {
        id,
        field: "goal",
        source,
    })?;
    let metric = parse_metric(&rec.metric).map_err(|source| CatalogError::Parse {
        id,
        field: "metric",
        source,
    })?;
    Ok(GoalMetric {
        id,
        original_id: rec.original_id,
        goal,
        metric,
    })
}

/// Loads and type-checks a catalog file.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let text = std::fs::read_to_string(path)?;
    Catalog::from_json(&text)
}

/// Result of checking one catalog record.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordStatus {
    pub index: usize,
    pub id: Option<u32>,
    pub error: Option<String>,
}

/// Checks every record independently instead of stopping at the first
/// failure. Duplicate ids are reported on the later occurrence.
pub fn validate_catalog_json(text: &str) -> Result<Vec<RecordStatus>, CatalogError> {
    let values: Vec<serde_json::Value> = match serde_json::from_str(text)? {
        serde_json::Value::Array(v) => v,
        _ => return Err(CatalogError::NotAnArray),
    };
    let mut seen = BTreeSet::new();
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(index, v)| {
            let raw_id = v.get("id").and_then(|x| x.as_u64()).map(|x| x as u32);
            let error = match parse_record(index, v) {
                Ok(gm) if !seen.insert(gm.id) => Some(CatalogError::DuplicateId(gm.id).to_string()),
                Ok(_) => None,
                Err(e) => Some(e.to_string()),
            };
            RecordStatus {
                index,
                id: raw_id,
                error,
            }
        })
        .collect())
}
