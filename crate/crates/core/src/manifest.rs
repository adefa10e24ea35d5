//! Dataset manifest: one CSV row per exported segment.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MANIFEST_HEADER: &str =
    "record_id,subject_id,segment_index,tensor_path,age,age_group,sbp,dbp,split";

/// Age bins `[0,20)`, `[20,30)`, `[30,40)`, `[40,inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgeGroup {
    #[serde(rename = "0-20")]
    Under20,
    #[serde(rename = "20-30")]
    From20To30,
    #[serde(rename = "30-40")]
    From30To40,
    #[serde(rename = "40+")]
    From40,
}

impl AgeGroup {
    pub fn from_age(age: f64) -> Option<Self> {
        if !(age.is_finite() && age >= 0.0) {
            return None;
        }
        Some(if age < 20.0 {
            AgeGroup::Under20
        } else if age < 30.0 {
            AgeGroup::From20To30
        } else if age < 40.0 {
            AgeGroup::From30To40
        } else {
            AgeGroup::From40
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            AgeGroup::Under20 => "0-20",
            AgeGroup::From20To30 => "20-30",
            AgeGroup::From30To40 => "30-40",
            AgeGroup::From40 => "40+",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParameter(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub record_id: String,
    pub subject_id: String,
    pub segment_index: usize,
    /// Relative to the manifest's directory.
    pub tensor_path: String,
    pub age: Option<f64>,
    pub age_group: Option<AgeGroup>,
    pub sbp: Option<f64>,
    pub dbp: Option<f64>,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordManifest {
    pub rows: Vec<ManifestRow>,
}

impl RecordManifest {
    pub fn split_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for row in &self.rows {
            counts[row.split as usize] += 1;
        }
        counts
    }

    /// Checks the row-level invariants: age groups agree with ages.
    pub fn validate(&self) -> Result<()> {
        for row in &self.rows {
            if let (Some(age), Some(group)) = (row.age, row.age_group) {
                if AgeGroup::from_age(age) != Some(group) {
                    return Err(Error::InvalidParameter(format!(
                        "{}#{}: age {age} is not in group {}",
                        row.record_id,
                        row.segment_index,
                        group.label()
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV with a fixed header, UTF-8, LF line endings.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row)?;
        }
        let mut bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        if self.rows.is_empty() {
            bytes = format!("{MANIFEST_HEADER}\n").into_bytes();
        }
        Ok(bytes)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_csv_bytes()?)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
        if header != MANIFEST_HEADER {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 1,
                message: format!("unexpected manifest header {header:?}"),
            });
        }
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<ManifestRow>, _>>()?;
        Ok(Self { rows })
    }
}
