//! The eight named feature groups and featurized ranking instances.

mod extract;
mod matrix;

pub use extract::{extract_features, extract_group, AuthorIndex, FeatureContext, FeatureModels};
pub use matrix::{featurize_splits, read_tsv, write_tsv, FeaturizedData};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Feature groups in canonical selection order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureGroup {
    Gt,
    Ar,
    Info,
    Lex,
    Resp,
    Rel,
    Mood,
    Comm,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 8] = [
        FeatureGroup::Gt,
        FeatureGroup::Ar,
        FeatureGroup::Info,
        FeatureGroup::Lex,
        FeatureGroup::Resp,
        FeatureGroup::Rel,
        FeatureGroup::Mood,
        FeatureGroup::Comm,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FeatureGroup::Gt => "GT",
            FeatureGroup::Ar => "AR",
            FeatureGroup::Info => "INFO",
            FeatureGroup::Lex => "LEX",
            FeatureGroup::Resp => "RESP",
            FeatureGroup::Rel => "REL",
            FeatureGroup::Mood => "MOOD",
            FeatureGroup::Comm => "COMM",
        }
    }

    pub fn parse(s: &str) -> Result<FeatureGroup> {
        match s.to_ascii_uppercase().as_str() {
            "GT" => Ok(FeatureGroup::Gt),
            "AR" => Ok(FeatureGroup::Ar),
            "INFO" => Ok(FeatureGroup::Info),
            "LEX" => Ok(FeatureGroup::Lex),
            "RESP" => Ok(FeatureGroup::Resp),
            "REL" => Ok(FeatureGroup::Rel),
            "MOOD" => Ok(FeatureGroup::Mood),
            "COMM" => Ok(FeatureGroup::Comm),
            other => Err(Error::Config(format!("unknown feature group: {other}"))),
        }
    }
}

impl std::fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Per-comment features partitioned into named groups. Group layout is
/// identical for every comment in a run.
#[derive(Debug, Clone)]
pub struct GroupedFeatureVector {
    pub comment_id: String,
    pub groups: Vec<(FeatureGroup, Vec<(String, f64)>)>,
}

impl GroupedFeatureVector {
    pub fn group(&self, g: FeatureGroup) -> Option<&[(String, f64)]> {
        self.groups
            .iter()
            .find(|(gg, _)| *gg == g)
            .map(|(_, v)| v.as_slice())
    }

    pub fn flat_names(&self) -> Vec<FeatureName> {
        self.groups
            .iter()
            .flat_map(|(g, v)| {
                v.iter().map(move |(name, _)| FeatureName {
                    group: *g,
                    name: name.clone(),
                })
            })
            .collect()
    }

    pub fn flat_values(&self) -> Vec<f64> {
        self.groups
            .iter()
            .flat_map(|(_, v)| v.iter().map(|(_, x)| *x))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureName {
    pub group: FeatureGroup,
    pub name: String,
}

impl std::fmt::Display for FeatureName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.group.name(), self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormStat {
    pub mean: f64,
    pub std: f64,
}

/// Featurization schema: column layout, dropped zero-variance columns and
/// the per-subreddit train-split normalization statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: u32,
    pub columns: Vec<FeatureName>,
    /// Columns removed because their train std was zero, with the
    /// subreddit that triggered the drop.
    pub dropped: Vec<(FeatureName, String)>,
    /// subreddit -> per-column stats, aligned with `columns`.
    pub normalization: std::collections::BTreeMap<String, Vec<NormStat>>,
}

pub const SCHEMA_VERSION: u32 = 1;

impl FeatureSchema {
    /// Indices of the columns belonging to any of `groups`.
    pub fn group_columns(&self, groups: &[FeatureGroup]) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| groups.contains(&c.group))
            .map(|(i, _)| i)
            .collect()
    }

    /// Stable digest of the column layout.
    pub fn hash(&self) -> String {
        let names: Vec<String> = self.columns.iter().map(|c| c.to_string()).collect();
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_string(&names).expect("serializable"));
        format!("{:x}", hasher.finalize())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let s: FeatureSchema = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if s.version != SCHEMA_VERSION {
            return Err(Error::Data(format!("unsupported schema version {}", s.version)));
        }
        Ok(s)
    }
}

/// One list member with its normalized feature row and gold karma.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturizedMember {
    pub comment_id: String,
    pub created_utc: i64,
    pub karma: i64,
    pub values: Vec<f64>,
}

/// A ranking instance after featurization.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturizedList {
    pub list_id: String,
    pub thread_id: String,
    pub subreddit: String,
    pub members: Vec<FeaturizedMember>,
}
