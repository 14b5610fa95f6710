//! Gate budgets of N-qubit computations and workload verdicts.

use cslqp_core::observables::{budget_frontier, feasibility, qubit_relaxation};

use super::{solve_at, temperature_tag};
use crate::config::Scenario;
use crate::error::Result;
use crate::record::{Column, RecordBuilder, ResultRecord, Status, Table};

pub fn budget(s: &Scenario) -> Result<ResultRecord> {
    let mut r = RecordBuilder::new(&s.hash, "budget");
    let cfg = &s.config.budget;
    let t1 = match cfg.t1_s {
        Some(t1) => {
            r.note(format!("relaxation time {t1:e} s taken from the configuration"));
            t1
        }
        None => {
            let t = s.config.temperatures.iter().cloned().fold(f64::INFINITY, f64::min);
            let sol = solve_at(s, &s.grid, t)?;
            if !sol.numeric.converged {
                r.status(Status::NonConvergence);
                r.warn("steady state used for the relaxation time did not converge");
            }
            let relaxation = qubit_relaxation(sol.xqp_numeric.value, &s.material, &s.qubit)?;
            r.note(format!(
                "relaxation time derived from the numeric steady state at {}",
                temperature_tag(t)
            ));
            relaxation.time
        }
    };
    r.output("t1", t1, "s");
    r.output("t_gate", s.qubit.t_gate, "s");
    r.output("safety", cfg.safety, "1");

    let frontier = budget_frontier(t1, s.qubit.t_gate, cfg.safety, &cfg.qubit_counts)?;
    r.table(Table::new(
        "frontier",
        "largest gate count against number of qubits",
        vec![
            Column::integer("n_qubits", "count", frontier.iter().map(|p| p.0).collect()),
            Column::integer("max_gates", "count", frontier.iter().map(|p| p.1).collect()),
        ],
    ));

    if !s.workloads.is_empty() {
        let verdicts = s
            .workloads
            .iter()
            .map(|w| feasibility(w, t1, s.qubit.t_gate, cfg.safety))
            .collect::<cslqp_core::Result<Vec<_>>>()?;
        for v in &verdicts {
            r.output(format!("verdict.{}.feasible", v.workload), f64::from(u8::from(v.feasible)), "bool");
            r.output(format!("verdict.{}.max_gates", v.workload), v.max_gates as f64, "count");
            r.output(format!("verdict.{}.margin_log10", v.workload), v.margin_log10, "1");
        }
        r.table(Table::new(
            "verdicts",
            "workloads against the gate budget of their qubit count",
            vec![
                Column::label("workload", s.workloads.iter().map(|w| w.name.clone()).collect()),
                Column::integer("n_qubits", "count", s.workloads.iter().map(|w| w.n_qubits).collect()),
                Column::real("n_gates", "count", s.workloads.iter().map(|w| w.n_gates).collect()),
                Column::integer("max_gates", "count", verdicts.iter().map(|v| v.max_gates).collect()),
                Column::label(
                    "feasible",
                    verdicts.iter().map(|v| v.feasible.to_string()).collect(),
                ),
                Column::real("margin_log10", "1", verdicts.iter().map(|v| v.margin_log10).collect()),
                Column::label("source", s.workloads.iter().map(|w| w.source.clone()).collect()),
            ],
        ));
    }
    r.finish()
}
