//! Quantities measured on devices: quasiparticle density, qubit relaxation,
//! subgap junction current and the gate budget of a quantum computation.

use serde::{Deserialize, Serialize};

use crate::bcs::{dos_unchecked, Occupation};
use crate::error::{invalid, Result};
use crate::kinetic::OccupationFunction;
use crate::materials::{MaterialParams, HBAR};
use crate::quadrature::{gap_edge_integral_between, AdaptiveOptions};

/// Two spin states per quasiparticle energy.
pub const SPIN_DEGENERACY: f64 = 2.0;

/// Relative distance below which a gate count is snapped to the nearest integer.
const INTEGER_SNAP: f64 = 1e-9;

/// Quasiparticle density per Cooper pair with a bound on the part above the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XqpEstimate {
    pub value: f64,
    /// Estimated contribution above the last node, assuming the occupation
    /// keeps decaying at its final logarithmic slope. `None` if it does not decay.
    pub tail_bound: Option<f64>,
}

/// x_qp = 2 ∫ f ρ dx over the grid of `occupation`.
pub fn xqp_from_occupation(occupation: &OccupationFunction) -> XqpEstimate {
    let grid = occupation.grid();
    let f = occupation.values();
    let value = SPIN_DEGENERACY * grid.rho_weights().iter().zip(f).map(|(w, v)| w * v).sum::<f64>();
    let n = grid.len();
    let x = grid.nodes();
    let ln = occupation.ln_values();
    let slope = (ln[n - 1] - ln[n - 2]) / (x[n - 1] - x[n - 2]);
    let tail_bound = if f[n - 1] == 0.0 {
        Some(0.0)
    } else if slope < 0.0 {
        Some(SPIN_DEGENERACY * f[n - 1] * dos_unchecked(x[n - 1]) / -slope)
    } else {
        None
    };
    XqpEstimate { value, tail_bound }
}

/// x_qp = 2 ∫₁^{x_max} f ρ dx for any occupation, by adaptive quadrature.
pub fn xqp_from_distribution(occupation: &dyn Occupation, x_max: f64) -> Result<f64> {
    let options = AdaptiveOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        ..AdaptiveOptions::default()
    };
    let v = gap_edge_integral_between(&|x| occupation.occupation(x), 1.0, x_max, options, "xqp")?;
    Ok(SPIN_DEGENERACY * v.value)
}

/// Transmon parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    /// Angular qubit frequency [rad/s].
    pub omega_q: f64,
    /// Duration of one gate [s].
    pub t_gate: f64,
}

impl QubitParams {
    pub fn new(omega_q: f64, t_gate: f64) -> Result<Self> {
        if !(omega_q > 0.0 && omega_q.is_finite()) {
            return Err(invalid("omega_q", format!("must be positive, got {omega_q}")));
        }
        if !(t_gate > 0.0 && t_gate.is_finite()) {
            return Err(invalid("t_gate", format!("must be positive, got {t_gate}")));
        }
        Ok(Self { omega_q, t_gate })
    }

    /// 2π · 3.48 GHz and 100 ns gates.
    pub fn baseline() -> Self {
        Self {
            omega_q: 2.0 * std::f64::consts::PI * 3.48e9,
            t_gate: 1e-7,
        }
    }
}

/// Relaxation rate and time caused by a quasiparticle density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    /// Γ1 [1/s].
    pub rate: f64,
    /// T1 = 1/Γ1 [s]; infinite when the density is zero.
    pub time: f64,
}

/// Γ1 = √(2 ω_q Δ / (π² ħ)) x_qp.
pub fn qubit_relaxation(xqp: f64, material: &MaterialParams, qubit: &QubitParams) -> Result<Relaxation> {
    if !(xqp >= 0.0 && xqp.is_finite()) {
        return Err(invalid("xqp", format!("must be non-negative, got {xqp}")));
    }
    let scale = (2.0 * qubit.omega_q * material.gap_joule() / (std::f64::consts::PI.powi(2) * HBAR)).sqrt();
    let rate = scale * xqp;
    Ok(Relaxation {
        rate,
        time: if rate > 0.0 { 1.0 / rate } else { f64::INFINITY },
    })
}

/// Josephson junction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionParams {
    /// Critical current [A].
    pub i_c: f64,
}

impl JunctionParams {
    pub fn new(i_c: f64) -> Result<Self> {
        if !(i_c > 0.0 && i_c.is_finite()) {
            return Err(invalid("i_c", format!("must be positive, got {i_c}")));
        }
        Ok(Self { i_c })
    }
}

/// Prefactor convention of the subgap current.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentNormalization {
    /// (2/π) I_c, from the Ambegaokar-Baratoff normal-state resistance.
    #[default]
    AmbegaokarBaratoff,
    /// I_c, the commonly quoted simplified form.
    Simplified,
}

impl CurrentNormalization {
    fn factor(&self) -> f64 {
        match self {
            CurrentNormalization::AmbegaokarBaratoff => 2.0 / std::f64::consts::PI,
            CurrentNormalization::Simplified => 1.0,
        }
    }
}

/// Quasiparticle current through a junction biased below 2Δ/e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubgapCurrent {
    pub voltage: f64,
    /// Current [A].
    pub current: f64,
    /// Bound on the current carried by states above the grid [A].
    pub tail_bound: Option<f64>,
}

/// I(V) = c I_c ∫ ρ(x) ρ(x + v)(f(x) − f(x + v)) dx with v = eV/Δ.
pub fn subgap_current(
    occupation: &OccupationFunction,
    voltage: f64,
    junction: &JunctionParams,
    material: &MaterialParams,
    normalization: CurrentNormalization,
) -> Result<SubgapCurrent> {
    let v = voltage / material.gap0_ev;
    if !(v > 0.0 && v < 2.0) {
        return Err(invalid(
            "voltage",
            format!("must lie in (0, 2Δ/e) = (0, {:e}) V, got {voltage:e}", 2.0 * material.gap0_ev),
        ));
    }
    let grid = occupation.grid();
    let integral: f64 = grid
        .nodes()
        .iter()
        .zip(grid.rho_weights())
        .zip(occupation.values())
        .map(|((&x, w), f)| w * dos_unchecked(x + v) * (f - occupation.occupation(x + v)))
        .sum();
    let scale = normalization.factor() * junction.i_c;
    let tail = xqp_from_occupation(occupation)
        .tail_bound
        .map(|b| scale * b / SPIN_DEGENERACY * dos_unchecked(grid.nodes()[grid.len() - 1] + v));
    Ok(SubgapCurrent {
        voltage,
        current: scale * integral,
        tail_bound: tail,
    })
}

/// Bias points evenly spread over (lo, hi)·Δ/e, endpoints included.
pub fn voltage_sweep(material: &MaterialParams, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi < 2.0 && hi > lo && points >= 2) {
        return Err(invalid("voltage sweep", "need 0 < lo < hi < 2 and at least two points"));
    }
    Ok((0..points)
        .map(|k| (lo + (hi - lo) * k as f64 / (points - 1) as f64) * material.gap0_ev)
        .collect())
}

/// Default bias sweep: ten points on 0.1 to 1.9 Δ/e.
pub fn default_voltage_sweep(material: &MaterialParams) -> Vec<f64> {
    voltage_sweep(material, 0.1, 1.9, 10).expect("valid default sweep")
}

/// Time and gate allowance of a computation on N qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateBudget {
    /// T1 / N [s].
    pub total_time: f64,
    /// Time usable for gates, safety · T1 / N [s].
    pub operational_time: f64,
    pub max_gates: u64,
}

/// n_g,max = ⌊safety · T1 / (N t_gate)⌋.
pub fn gate_budget(t1: f64, n_qubits: u64, t_gate: f64, safety: f64) -> Result<GateBudget> {
    if !(t1 > 0.0) {
        return Err(invalid("t1", format!("must be positive, got {t1}")));
    }
    if n_qubits == 0 {
        return Err(invalid("n_qubits", "must be at least 1"));
    }
    if !(t_gate > 0.0 && t_gate.is_finite()) {
        return Err(invalid("t_gate", format!("must be positive, got {t_gate}")));
    }
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(invalid("safety", format!("must lie in (0, 1], got {safety}")));
    }
    let total_time = t1 / n_qubits as f64;
    let operational_time = safety * total_time;
    let quotient = operational_time / t_gate;
    let max_gates = if !quotient.is_finite() {
        u64::MAX
    } else {
        let nearest = quotient.round();
        let snapped = if (quotient - nearest).abs() <= INTEGER_SNAP * nearest.max(1.0) {
            nearest
        } else {
            quotient.floor()
        };
        snapped.min(u64::MAX as f64) as u64
    };
    Ok(GateBudget {
        total_time,
        operational_time,
        max_gates,
    })
}

/// A quantum algorithm and its resource needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub name: String,
    pub n_qubits: u64,
    pub n_gates: f64,
    pub source: String,
}

/// Resource estimates for two standard benchmark algorithms.
pub fn workload_catalog() -> Vec<Workload> {
    vec![
        Workload {
            name: "shor".into(),
            n_qubits: 1_000,
            n_gates: 1e9,
            source: "Childs et al. 2018, factoring resource estimate".into(),
        },
        Workload {
            name: "molecular-simulation".into(),
            n_qubits: 100,
            n_gates: 1e14,
            source: "Childs et al. 2018, quantum chemistry resource estimate".into(),
        },
    ]
}

/// Whether a workload fits in the gate budget of its qubit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub workload: String,
    pub feasible: bool,
    pub max_gates: u64,
    /// log10(n_g,max / n_g); negative when infeasible.
    pub margin_log10: f64,
}

pub fn feasibility(workload: &Workload, t1: f64, t_gate: f64, safety: f64) -> Result<Verdict> {
    if !(workload.n_gates > 0.0) {
        return Err(invalid("n_gates", format!("must be positive, got {}", workload.n_gates)));
    }
    let budget = gate_budget(t1, workload.n_qubits, t_gate, safety)?;
    let margin_log10 = if budget.max_gates == 0 {
        f64::NEG_INFINITY
    } else {
        (budget.max_gates as f64 / workload.n_gates).log10()
    };
    Ok(Verdict {
        workload: workload.name.clone(),
        feasible: budget.max_gates as f64 >= workload.n_gates,
        max_gates: budget.max_gates,
        margin_log10,
    })
}

/// (N, n_g,max) along a list of qubit counts.
pub fn budget_frontier(t1: f64, t_gate: f64, safety: f64, qubit_counts: &[u64]) -> Result<Vec<(u64, u64)>> {
    qubit_counts
        .iter()
        .map(|&n| Ok((n, gate_budget(t1, n, t_gate, safety)?.max_gates)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcs::ThermalOccupation;
    use crate::kinetic::{EnergyGrid, GridSpec};
    use proptest::prelude::*;

    #[test]
    fn thermal_density_matches_closed_form() {
        let al = MaterialParams::aluminum();
        for temperature in [0.05, 0.1, 0.2] {
            let occ = ThermalOccupation::new(&al, temperature).unwrap();
            let numeric = xqp_from_distribution(&occ, 4.0).unwrap();
            let closed = crate::bcs::thermal_xqp(&al, temperature).unwrap();
            assert!((numeric / closed - 1.0).abs() < 0.05, "T={temperature}: {numeric:e} vs {closed:e}");
        }
    }

    #[test]
    fn thermal_density_bessel_oracle() {
        // 2∫₁^∞ e^{−x/t} ρ dx = 2 K1(1/t); K1(10) = 1.864877345382558e-5.
        let t = 0.1;
        let occ = ThermalOccupation { reduced_temperature: t };
        let v = xqp_from_distribution(&occ, 40.0).unwrap();
        // The Fermi function differs from e^{−x/t} by a relative e^{−x/t} ≈ 5e-5.
        assert!((v / (2.0 * 1.864_877_345_382_558e-5) - 1.0).abs() < 1e-4);
    }

    #[test]
    fn grid_density_matches_quadrature() {
        let grid = EnergyGrid::build(&GridSpec::default()).unwrap();
        let t = 0.15;
        let f = OccupationFunction::thermal(&grid, t).unwrap();
        let est = xqp_from_occupation(&f);
        let occ = ThermalOccupation { reduced_temperature: t };
        let x0 = grid.nodes()[0];
        let options = AdaptiveOptions { rel_tol: 1e-12, abs_tol: 0.0, ..AdaptiveOptions::default() };
        let reference = 2.0 * gap_edge_integral_between(&|x| occ.occupation(x), x0, 4.0, options, "t").unwrap().value;
        assert!((est.value / reference - 1.0).abs() < 1e-6);
        assert!(est.tail_bound.unwrap() > 0.0);
    }

    #[test]
    fn relaxation_examples() {
        let al = MaterialParams::aluminum();
        let q = QubitParams::baseline();
        let r = qubit_relaxation(1e-18, &al, &q).unwrap();
        assert!(r.rate > 1e-8 && r.rate < 1e-4);
        // Direct SI evaluation.
        let delta = 3.4e-4 * 1.602_176_634e-19;
        let expected = (2.0 * q.omega_q * delta / (std::f64::consts::PI.powi(2) * 1.054_571_817e-34)).sqrt() * 1e-18;
        assert!((r.rate / expected - 1.0).abs() < 1e-14);
        assert_eq!(qubit_relaxation(0.0, &al, &q).unwrap().time, f64::INFINITY);
        assert!(qubit_relaxation(-1.0, &al, &q).is_err());
    }

    #[test]
    fn gate_budget_examples() {
        let cases = [(100, 100_000_000), (1_000, 10_000_000), (1_000_000, 10_000)];
        for (n, expected) in cases {
            assert_eq!(gate_budget(1e6, n, 1e-7, 1e-3).unwrap().max_gates, expected);
        }
        assert!(gate_budget(1e6, 0, 1e-7, 1e-3).is_err());
        assert!(gate_budget(1e6, 10, 1e-7, 1.5).is_err());
    }

    #[test]
    fn catalog_workloads_infeasible_at_baseline() {
        for w in workload_catalog() {
            let v = feasibility(&w, 1e6, 1e-7, 1e-3).unwrap();
            assert!(!v.feasible, "{}", w.name);
            assert!(v.margin_log10 < 0.0);
        }
    }

    #[test]
    fn subgap_current_of_thermal_state() {
        let al = MaterialParams::aluminum();
        let grid = EnergyGrid::build(&GridSpec::default()).unwrap();
        let f = OccupationFunction::thermal(&grid, 0.15).unwrap();
        let j = JunctionParams::new(1e-4).unwrap();
        let i = subgap_current(&f, al.gap0_ev, &j, &al, CurrentNormalization::AmbegaokarBaratoff).unwrap();
        assert!(i.current > 0.0);
        let s = subgap_current(&f, al.gap0_ev, &j, &al, CurrentNormalization::Simplified).unwrap();
        assert!((s.current / i.current - std::f64::consts::PI / 2.0).abs() < 1e-12);
        assert!(subgap_current(&f, 2.5 * al.gap0_ev, &j, &al, CurrentNormalization::Simplified).is_err());
    }

    #[test]
    fn subgap_current_oracle() {
        // Independent adaptive evaluation with the exact Fermi function.
        let al = MaterialParams::aluminum();
        let t = 0.15;
        let grid = EnergyGrid::build(&GridSpec::default()).unwrap();
        let f = OccupationFunction::thermal(&grid, t).unwrap();
        let occ = ThermalOccupation { reduced_temperature: t };
        let v = 0.7;
        let j = JunctionParams::new(1.0).unwrap();
        let numeric = subgap_current(&f, v * al.gap0_ev, &j, &al, CurrentNormalization::Simplified).unwrap();
        let x0 = grid.nodes()[0];
        let options = AdaptiveOptions { rel_tol: 1e-10, abs_tol: 0.0, ..AdaptiveOptions::default() };
        let upper = |x: f64| if x + v <= 4.0 { occ.occupation(x + v) } else { 0.0 };
        let reference = gap_edge_integral_between(
            &|x: f64| dos_unchecked(x + v) * (occ.occupation(x) - upper(x)),
            x0,
            4.0,
            options,
            "t",
        )
        .unwrap()
        .value;
        assert!((numeric.current / reference - 1.0).abs() < 1e-3, "{} vs {reference}", numeric.current);
    }

    #[test]
    fn sweep_spans_requested_range() {
        let al = MaterialParams::aluminum();
        let v = default_voltage_sweep(&al);
        assert_eq!(v.len(), 10);
        assert!((v[0] - 0.1 * al.gap0_ev).abs() < 1e-18);
        assert!((v[9] - 1.9 * al.gap0_ev).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn relaxation_linear_in_density(x in 0.0f64..1e-3, c in 0.0f64..100.0) {
            let al = MaterialParams::aluminum();
            let q = QubitParams::baseline();
            let a = qubit_relaxation(x, &al, &q).unwrap().rate;
            let b = qubit_relaxation(c * x, &al, &q).unwrap().rate;
            prop_assert!((b - c * a).abs() <= 1e-12 * b.abs().max(1e-300));
        }

        #[test]
        fn budget_monotone_in_qubits(n in 1u64..1_000_000, t1 in 1.0f64..1e9) {
            let a = gate_budget(t1, n, 1e-7, 1e-3).unwrap().max_gates;
            let b = gate_budget(t1, n + 1, 1e-7, 1e-3).unwrap().max_gates;
            prop_assert!(b <= a);
        }

        #[test]
        fn budget_times_are_consistent(n in 1u64..1_000_000, t1 in 1.0f64..1e9, safety in 1e-6f64..1.0) {
            let b = gate_budget(t1, n, 1e-7, safety).unwrap();
            prop_assert!((b.total_time * n as f64 / t1 - 1.0).abs() < 1e-12);
            prop_assert!((b.operational_time / (safety * b.total_time) - 1.0).abs() < 1e-12);
            prop_assert!((b.max_gates as f64) <= b.operational_time / 1e-7 * (1.0 + 1e-9));
        }
    }
}
