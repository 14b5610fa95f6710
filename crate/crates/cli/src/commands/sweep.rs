//! Parameter sweeps: one scenario per value of a numeric configuration leaf.

use std::collections::BTreeSet;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::Analysis;
use crate::config::{scenario_hash, set_numeric, Scenario, ScenarioConfig};
use crate::error::{CliError, Result};
use crate::record::{Column, RecordBuilder, ResultRecord, Table};

/// Per-point records plus a summary record.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<ResultRecord>,
    pub summary: ResultRecord,
}

/// Run `analysis` once per value of `axis`. Every point is validated before
/// any of them runs; points run concurrently and are reported in input order.
pub fn sweep(base: &ScenarioConfig, axis: &str, values: &[f64], analysis: Analysis) -> Result<SweepOutcome> {
    if values.is_empty() {
        return Err(CliError::config("--values", "need at least one value"));
    }
    let scenarios = values
        .iter()
        .map(|&v| Scenario::validate(set_numeric(base, axis, v)?))
        .collect::<Result<Vec<_>>>()?;
    let points = scenarios
        .par_iter()
        .map(|s| analysis.run(s))
        .collect::<Result<Vec<_>>>()?;

    let mut key = Sha256::new();
    key.update(scenario_hash(base)?);
    key.update(axis);
    key.update(analysis.name());
    for v in values {
        key.update(v.to_bits().to_le_bytes());
    }
    let hash = format!("sweep-{}", hex::encode(&key.finalize()[..8]));

    let mut r = RecordBuilder::new(&hash, "sweep");
    r.note(format!("{} swept over `{axis}`", analysis.name()));
    let names: BTreeSet<&String> = points.iter().flat_map(|p| p.outputs.keys()).collect();
    let mut columns = vec![
        Column::real(axis, "as configured", values.to_vec()),
        Column::label("scenario_hash", points.iter().map(|p| p.scenario_hash.clone()).collect()),
        Column::label("status", points.iter().map(|p| p.status.label().to_string()).collect()),
    ];
    for name in names {
        let unit = points
            .iter()
            .find_map(|p| p.outputs.get(name).map(|q| q.unit.clone()))
            .unwrap_or_default();
        let data = points.iter().map(|p| p.value(name).unwrap_or(f64::NAN)).collect();
        columns.push(Column::real(name, &unit, data));
    }
    r.table(Table::new(
        "summary",
        format!("scalar outputs of `{}` for each value of `{axis}`", analysis.name()),
        columns,
    ));
    for p in &points {
        r.status(p.status);
        for w in &p.warnings {
            r.warn(format!("{}: {w}", p.scenario_hash));
        }
    }
    Ok(SweepOutcome {
        summary: r.finish()?,
        points,
    })
}
