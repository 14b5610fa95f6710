//! One function per analysis. Each turns a validated [`Scenario`] into a
//! [`ResultRecord`]; writing files is left to the caller.

mod budget;
mod crossover;
mod rates;
mod steady_state;
mod sweep;

use clap::ValueEnum;
use cslqp_core::phonon_kernels::RateCurve;

pub use budget::budget;
pub use crossover::crossover;
pub use rates::rates;
pub use steady_state::{solve_at, steady_state, TemperatureSolution};
pub use sweep::{sweep, SweepOutcome};

use crate::config::Scenario;
use crate::error::Result;
use crate::record::{Column, ResultRecord, Table};

/// Analyses that can be run directly or swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Analysis {
    Rates,
    SteadyState,
    Crossover,
    Budget,
}

impl Analysis {
    pub fn name(&self) -> &'static str {
        match self {
            Analysis::Rates => "rates",
            Analysis::SteadyState => "steady-state",
            Analysis::Crossover => "crossover",
            Analysis::Budget => "budget",
        }
    }

    pub fn run(&self, scenario: &Scenario) -> Result<ResultRecord> {
        match self {
            Analysis::Rates => rates(scenario),
            Analysis::SteadyState => steady_state(scenario),
            Analysis::Crossover => crossover(scenario),
            Analysis::Budget => budget(scenario),
        }
    }
}

/// Label for a temperature usable in keys and file names, e.g. `T20mK`
/// or `T20500uK`.
pub fn temperature_tag(temperature_k: f64) -> String {
    let micro = (temperature_k * 1e6).round() as i64;
    if micro % 1000 == 0 {
        format!("T{}mK", micro / 1000)
    } else {
        format!("T{micro}uK")
    }
}

/// Rate curve against temperature as a three-column table.
fn rate_table(curve: &RateCurve, name: &str, description: &str) -> Table {
    Table::new(
        name,
        description,
        vec![
            Column::real("abscissa", "K", curve.abscissa.clone()),
            Column::real("value", "1/s", curve.values.clone()),
            Column::label("kind", vec![curve.kind.label().to_string(); curve.values.len()]),
        ],
    )
}
