//! Collapse-noise rates and the competing electron-phonon rates.

use cslqp_core::bcs::EmptyOccupation;
use cslqp_core::csl_rates::{power_density, reduction_rate, total_generation_rate, CslGeneration};
use cslqp_core::kinetic::EnergyGrid;
use cslqp_core::phonon_kernels::{RateComparison, RateKind};

use super::rate_table;
use crate::config::Scenario;
use crate::error::Result;
use crate::record::{Column, RecordBuilder, ResultRecord, Table};

pub fn rates(s: &Scenario) -> Result<ResultRecord> {
    let mut r = RecordBuilder::new(&s.hash, "rates");
    let (mat, csl) = (&s.material, &s.csl);
    let cfg = &s.config.rates;

    r.output(
        "reduction_rate",
        reduction_rate(csl, cfg.nucleons_per_group, cfg.groups)?,
        "1/s",
    );
    r.output("total_generation_rate", total_generation_rate(mat, csl), "1/(s um^3)");
    r.output("power_density", power_density(mat, csl), "W/um^3");

    let model = CslGeneration::new(mat, csl);
    let scales = model.scales();
    r.output("scale.fermi_over_gap", scales.beta, "1");
    r.output("scale.t_csl", scales.t_csl, "K");
    r.output("scale.gauss_width", scales.gauss_width, "1");
    r.output("csl_generation_at_gap", model.rate(1.0, &EmptyOccupation)?, "1/s");

    let grid = EnergyGrid::build(&s.grid)?;
    let curve = model.curve(&grid, &EmptyOccupation)?;
    r.output("csl_generation_first_node", curve.rates[0], "1/s");
    r.table(Table::new(
        "csl_generation",
        "collapse-noise generation rate against energy, no Pauli blocking",
        vec![
            Column::real("x", "gap", curve.nodes.clone()),
            Column::real("rate", "1/s", curve.rates.clone()),
        ],
    ));

    let comparison = RateComparison::new(mat, csl, &s.crossover)?;
    for c in comparison.curves()?.iter().filter(|c| c.kind != RateKind::Difference) {
        let description = format!(
            "{} rate at reduced energy {} against phonon temperature",
            c.kind.label(),
            s.crossover.energy
        );
        r.table(rate_table(c, &format!("{}_vs_temperature", c.label), &description));
    }
    if csl.lambda == 0.0 {
        r.note("collapse rate is zero: every collapse-noise entry is zero");
    }
    r.finish()
}
