//! Temperatures where collapse generation overtakes thermal pair breaking
//! and recombination.

use cslqp_core::phonon_kernels::{crossover_temperatures, RateComparison};

use super::rate_table;
use crate::config::Scenario;
use crate::error::Result;
use crate::record::{RecordBuilder, ResultRecord, Status};

pub fn crossover(s: &Scenario) -> Result<ResultRecord> {
    let mut r = RecordBuilder::new(&s.hash, "crossover");
    let mat = &s.crossover_material;
    r.note(format!("material `{}` with gap {:e} eV", mat.name, mat.gap0_ev));
    r.output("gap", mat.gap0_ev, "eV");
    r.output("energy", s.crossover.energy, "gap");

    // The curves are written whether or not the roots are bracketed.
    let comparison = RateComparison::new(mat, &s.csl, &s.crossover)?;
    for c in comparison.curves()? {
        let description = match c.label.as_str() {
            "d1" => "collapse generation minus phonon pair breaking".to_string(),
            "d2" => "collapse generation minus recombination".to_string(),
            other => format!("{other} rate"),
        };
        r.table(rate_table(&c, &c.label, &format!("{description} against temperature")));
    }

    match crossover_temperatures(mat, &s.csl, &s.crossover) {
        Ok(c) => {
            r.output("generation_crossover", c.generation_k, "K");
            r.output("recombination_crossover", c.recombination_k, "K");
            r.output("tolerance", c.tolerance_k, "K");
            if c.generation_k <= c.recombination_k {
                r.warn("pair-breaking crossover is not above the recombination crossover");
            }
        }
        Err(cslqp_core::Error::Bracketing { label, lo, hi, .. }) => {
            r.status(Status::BracketingFailure);
            r.warn(format!("{label} does not change sign between {lo} K and {hi} K"));
        }
        Err(e) => return Err(e.into()),
    }
    r.finish()
}
