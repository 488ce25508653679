//! CSV ingestion for count tables and raw two-group samples.
//!
//! Count format: header `level,count_nd,count_d`, one row per category.
//! Raw format: header `group,value` with an optional `stratum` column; group
//! labels are `ND` or `D` in any case.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binormal::{BinormalData, SufficientStats};
use crate::discrete::CountData;
use crate::dp::UniqueValueStats;
use crate::error::{Result, RocError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Counts,
    Raw,
}

/// Observations from the nondiseased and diseased groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawData {
    pub nd: Vec<f64>,
    pub d: Vec<f64>,
}

impl RawData {
    pub fn sufficient(&self) -> BinormalData {
        BinormalData {
            nd: SufficientStats::from_values(&self.nd),
            d: SufficientStats::from_values(&self.d),
        }
    }

    pub fn unique(&self) -> (UniqueValueStats, UniqueValueStats) {
        (UniqueValueStats::from_data(&self.nd), UniqueValueStats::from_data(&self.d))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Dataset {
    Counts(CountData),
    Raw(RawData),
}

impl Dataset {
    pub fn format(&self) -> DataFormat {
        match self {
            Dataset::Counts(_) => DataFormat::Counts,
            Dataset::Raw(_) => DataFormat::Raw,
        }
    }

    /// Diseased and nondiseased sample sizes.
    pub fn group_sizes(&self) -> (u64, u64) {
        match self {
            Dataset::Counts(c) => (c.n_d(), c.n_nd()),
            Dataset::Raw(r) => (r.d.len() as u64, r.nd.len() as u64),
        }
    }
}

pub fn ingest(path: &Path, format: DataFormat, stratum: Option<&str>) -> Result<Dataset> {
    let file = std::fs::File::open(path)
        .map_err(|e| RocError::Data(format!("cannot open {}: {e}", path.display())))?;
    ingest_reader(file, format, stratum)
}

pub fn ingest_reader<R: Read>(input: R, format: DataFormat, stratum: Option<&str>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    let column = |name: &str| header.iter().position(|h| h == name);
    let need = |name: &str| {
        column(name).ok_or_else(|| RocError::DataLine {
            line: 1,
            msg: format!("missing column `{name}`"),
        })
    };
    match format {
        DataFormat::Counts => {
            if stratum.is_some() {
                return Err(RocError::Config("strata apply to raw data only".into()));
            }
            let (lc, nc, dc) = (need("level")?, need("count_nd")?, need("count_d")?);
            let (mut levels, mut f_nd, mut f_d) = (vec![], vec![], vec![]);
            for (i, rec) in reader.records().enumerate() {
                let rec = rec?;
                let line = i + 2;
                levels.push(field::<f64>(&rec, lc, line, "level")?);
                f_nd.push(field::<u64>(&rec, nc, line, "count_nd")?);
                f_d.push(field::<u64>(&rec, dc, line, "count_d")?);
            }
            if levels.is_empty() {
                return Err(RocError::Data("no data rows".into()));
            }
            let data = CountData::new(levels, f_nd, f_d).map_err(|e| RocError::Data(e.to_string()))?;
            if data.n_nd() == 0 || data.n_d() == 0 {
                return Err(RocError::Data("each group needs at least one count".into()));
            }
            Ok(Dataset::Counts(data))
        }
        DataFormat::Raw => {
            let (gc, vc) = (need("group")?, need("value")?);
            let sc = match stratum {
                Some(_) => Some(need("stratum")?),
                None => None,
            };
            let (mut nd, mut d) = (vec![], vec![]);
            for (i, rec) in reader.records().enumerate() {
                let rec = rec?;
                let line = i + 2;
                if let (Some(c), Some(s)) = (sc, stratum) {
                    if rec.get(c) != Some(s) {
                        continue;
                    }
                }
                let value: f64 = field(&rec, vc, line, "value")?;
                if !value.is_finite() {
                    return Err(RocError::DataLine { line, msg: "value must be finite".into() });
                }
                match rec.get(gc).map(|g| g.to_ascii_uppercase()).as_deref() {
                    Some("ND") => nd.push(value),
                    Some("D") => d.push(value),
                    other => {
                        return Err(RocError::DataLine {
                            line,
                            msg: format!("unknown group label {:?}, expected ND or D", other.unwrap_or("")),
                        })
                    }
                }
            }
            if nd.is_empty() || d.is_empty() {
                let which = if nd.is_empty() { "ND" } else { "D" };
                let scope = stratum.map(|s| format!(" in stratum `{s}`")).unwrap_or_default();
                return Err(RocError::Data(format!("group {which} is empty{scope}")));
            }
            Ok(Dataset::Raw(RawData { nd, d }))
        }
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, col: usize, line: usize, name: &str) -> Result<T> {
    let raw = rec.get(col).ok_or_else(|| RocError::DataLine {
        line,
        msg: format!("missing field `{name}`"),
    })?;
    raw.parse().map_err(|_| RocError::DataLine {
        line,
        msg: format!("cannot parse `{name}` from {raw:?}"),
    })
}
