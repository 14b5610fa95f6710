//! Result records and their persistence as JSON and CSV.
//!
//! Every scalar carries a unit and every table column declares its unit in
//! a comment line above the CSV header. Records are written to
//! `<outdir>/<scenario-hash>/<analysis>.json` and each table to
//! `<outdir>/<scenario-hash>/<analysis>-<table>.csv`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use cslqp_core::materials::PhysicalConstants;

use crate::config::Format;
use crate::error::{CliError, Result};

/// A number with its unit. Non-finite values are written to JSON as
/// `null` and read back as NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    #[serde(deserialize_with = "real_or_nan")]
    pub value: f64,
    pub unit: String,
}

/// Column contents: numbers, integers or labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnData {
    Real(#[serde(deserialize_with = "reals_or_nan")] Vec<f64>),
    Integer(Vec<u64>),
    Label(Vec<String>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Real(v) => v.len(),
            ColumnData::Integer(v) => v.len(),
            ColumnData::Label(v) => v.len(),
        }
    }

    fn cell(&self, row: usize) -> String {
        match self {
            ColumnData::Real(v) => format!("{:e}", v[row]),
            ColumnData::Integer(v) => v[row].to_string(),
            ColumnData::Label(v) => v[row].clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    /// Unit, `1` for dimensionless numbers, `label` for text.
    pub unit: String,
    pub data: ColumnData,
}

impl Column {
    pub fn real(name: &str, unit: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            data: ColumnData::Real(values),
        }
    }

    pub fn integer(name: &str, unit: &str, values: Vec<u64>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            data: ColumnData::Integer(values),
        }
    }

    pub fn label(name: &str, values: Vec<String>) -> Self {
        Self {
            name: name.into(),
            unit: "label".into(),
            data: ColumnData::Label(values),
        }
    }
}

/// One curve or table, written as one CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub description: String,
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(name: impl Into<String>, description: impl Into<String>, columns: Vec<Column>) -> Self {
        let table = Self {
            name: name.into(),
            description: description.into(),
            columns,
        };
        debug_assert!(table.columns.windows(2).all(|w| w[0].data.len() == w[1].data.len()));
        table
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Values of a real-valued column.
    pub fn reals(&self, name: &str) -> Option<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Real(v) => Some(v),
            _ => None,
        }
    }
}

/// Outcome of an analysis, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    NonConvergence,
    BracketingFailure,
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Success => "success",
            Status::NonConvergence => "non-convergence",
            Status::BracketingFailure => "bracketing-failure",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Success => 0,
            Status::NonConvergence => 3,
            Status::BracketingFailure => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub constant_set: String,
    pub constants: PhysicalConstants,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
}

/// Everything one analysis produced for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario_hash: String,
    pub analysis: String,
    pub status: Status,
    pub outputs: BTreeMap<String, Quantity>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
    /// SHA-256 over status, outputs, tables, notes and warnings. Identical
    /// scenarios give identical hashes; provenance times are excluded.
    pub payload_hash: String,
}

/// Collects the parts of a record while an analysis runs.
#[derive(Debug)]
pub struct RecordBuilder {
    scenario_hash: String,
    analysis: String,
    status: Status,
    outputs: BTreeMap<String, Quantity>,
    tables: Vec<Table>,
    notes: Vec<String>,
    warnings: Vec<String>,
    started: f64,
}

impl RecordBuilder {
    pub fn new(scenario_hash: &str, analysis: &str) -> Self {
        Self {
            scenario_hash: scenario_hash.into(),
            analysis: analysis.into(),
            status: Status::Success,
            outputs: BTreeMap::new(),
            tables: Vec::new(),
            notes: Vec::new(),
            warnings: Vec::new(),
            started: unix_now(),
        }
    }

    pub fn output(&mut self, key: impl Into<String>, value: f64, unit: &str) -> &mut Self {
        self.outputs.insert(
            key.into(),
            Quantity {
                value,
                unit: unit.into(),
            },
        );
        self
    }

    pub fn table(&mut self, table: Table) -> &mut Self {
        self.tables.push(table);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    pub fn warn(&mut self, text: impl Into<String>) -> &mut Self {
        self.warnings.push(text.into());
        self
    }

    /// Keep the most severe status seen.
    pub fn status(&mut self, status: Status) -> &mut Self {
        self.status = self.status.max(status);
        self
    }

    pub fn finish(self) -> Result<ResultRecord> {
        let payload = serde_json::to_vec(&(&self.status, &self.outputs, &self.tables, &self.notes, &self.warnings))
            .map_err(|e| CliError::Encode {
                what: format!("{} payload", self.analysis),
                reason: e.to_string(),
            })?;
        Ok(ResultRecord {
            payload_hash: hex::encode(Sha256::digest(&payload)),
            scenario_hash: self.scenario_hash,
            analysis: self.analysis,
            status: self.status,
            outputs: self.outputs,
            tables: self.tables,
            notes: self.notes,
            warnings: self.warnings,
            provenance: Provenance {
                tool: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                constant_set: "CODATA 2018, proton mass as reference nucleon".into(),
                constants: PhysicalConstants::CODATA_2018,
                started_unix_s: self.started,
                finished_unix_s: unix_now(),
            },
        })
    }
}

impl ResultRecord {
    pub fn value(&self, key: &str) -> Option<f64> {
        self.outputs.get(key).map(|q| q.value)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn directory(&self, out_dir: &Path) -> PathBuf {
        out_dir.join(&self.scenario_hash)
    }

    /// Write the record in the requested formats and return the paths written.
    pub fn write(&self, out_dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
        let dir = self.directory(out_dir);
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Write {
            path: dir.clone(),
            source,
        })?;
        let mut written = Vec::new();
        if formats.contains(&Format::Json) {
            let path = dir.join(format!("{}.json", self.analysis));
            let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Encode {
                what: path.display().to_string(),
                reason: e.to_string(),
            })?;
            std::fs::write(&path, text + "\n").map_err(|source| CliError::Write {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        if formats.contains(&Format::Csv) {
            for table in &self.tables {
                let path = dir.join(format!("{}-{}.csv", self.analysis, table.name));
                write_csv(table, &path)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Write a table as CSV with a `# units:` comment line above the header.
pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let write_error = |e: std::io::Error| CliError::Write {
        path: path.to_path_buf(),
        source: e,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(write_error)?);
    writeln!(file, "# {}", table.description).map_err(write_error)?;
    let units: Vec<String> = table.columns.iter().map(|c| format!("{}={}", c.name, c.unit)).collect();
    writeln!(file, "# units: {}", units.join(", ")).map_err(write_error)?;
    let mut writer = csv::Writer::from_writer(file);
    let csv_error = |e: csv::Error| CliError::Encode {
        what: path.display().to_string(),
        reason: e.to_string(),
    };
    writer
        .write_record(table.columns.iter().map(|c| c.name.as_str()))
        .map_err(csv_error)?;
    for row in 0..table.rows() {
        writer
            .write_record(table.columns.iter().map(|c| c.data.cell(row)))
            .map_err(csv_error)?;
    }
    writer.flush().map_err(write_error)?;
    Ok(())
}

fn real_or_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

fn reals_or_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Ok(Vec::<Option<f64>>::deserialize(d)?
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect())
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}
