//! Linearised steady state at low temperature and comparison with the
//! numerical solution.
//!
//! When the excess occupation δf is small and thermal phonons are rare,
//! generation into energy x is balanced by phonon emission towards every
//! lower energy, which gives δf(x) = γ(x) / (γ0 ∫₁ˣ S(x, y) dy).

use serde::{Deserialize, Serialize};

use crate::bcs::{coherence_unchecked, ln_bose_reduced, ln_fermi_reduced};
use crate::csl_rates::CslGenerationCurve;
use crate::error::{Error, Result};
use crate::kinetic::grid::{EnergyGrid, NodeFlag, OccupationFunction};
use crate::materials::MaterialParams;
use crate::quadrature::{gap_edge_integral, AdaptiveOptions};

/// ∫₁ˣ S(x, y) dy with S = (x − y)² ρ(y) L²(x, y).
pub fn emission_integral(x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(crate::error::domain("emission_integral", format!("requires x > 1, got {x}")));
    }
    let options = AdaptiveOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-300,
        ..AdaptiveOptions::default()
    };
    let value = gap_edge_integral(
        &|y: f64| (x - y).powi(2) * coherence_unchecked(x, y).scattering,
        x,
        options,
        "emission_integral",
    )?
    .value;
    Ok(value)
}

/// Linearised steady state and the size of the terms it neglects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSteadyState {
    /// f_FD + δf, with the first node flagged as gap edge.
    pub occupation: OccupationFunction,
    pub excess: Vec<f64>,
    /// ∫₁ˣ S dy at every node.
    pub emission: Vec<f64>,
    /// In-scattering of excess quasiparticles from above, relative to the
    /// drive. The linearised solution assumes this is small.
    pub cascade_ratio: Vec<f64>,
    /// Thermal phonon absorption out of node x, relative to emission.
    pub absorption_ratio: Vec<f64>,
}

impl AnalyticSteadyState {
    pub fn max_cascade_ratio(&self) -> f64 {
        self.cascade_ratio.iter().cloned().fold(0.0, f64::max)
    }
}

/// Linearised steady state on `grid` at phonon temperature `temperature_k`.
pub fn analytic_steady_state(
    grid: &EnergyGrid,
    material: &MaterialParams,
    temperature_k: f64,
    drive: &CslGenerationCurve,
) -> Result<AnalyticSteadyState> {
    if drive.rates.len() != grid.len() {
        return Err(Error::GridMismatch("generation curve length differs from grid".into()));
    }
    let t = material.reduced_temperature(temperature_k);
    let gamma0 = material.gamma0();
    let x = grid.nodes();
    let emission = x.iter().map(|&xi| emission_integral(xi)).collect::<Result<Vec<f64>>>()?;
    let excess: Vec<f64> = drive
        .rates
        .iter()
        .zip(&emission)
        .map(|(g, e)| g / (gamma0 * e))
        .collect();
    let rw = grid.rho_weights();
    let n = grid.len();
    let mut cascade_ratio = vec![0.0; n];
    let mut absorption_ratio = vec![0.0; n];
    for i in 0..n {
        let (mut cascade, mut absorption) = (0.0, 0.0);
        for j in (i + 1)..n {
            let s = rw[j] * (x[j] - x[i]).powi(2) * coherence_unchecked(x[i], x[j]).scattering;
            cascade += s * excess[j];
            absorption += s * ln_bose_reduced(x[j] - x[i], t).exp();
        }
        let drive_i = drive.rates[i] / gamma0;
        cascade_ratio[i] = if drive_i > 0.0 { cascade / drive_i } else { 0.0 };
        absorption_ratio[i] = absorption / emission[i];
    }
    let ln_values = x
        .iter()
        .zip(&excess)
        .map(|(&xi, d)| {
            let ln_fd = ln_fermi_reduced(xi, t);
            let big = ln_fd.max(d.ln());
            let small = ln_fd.min(d.ln());
            if big == f64::NEG_INFINITY {
                big
            } else {
                big + (small - big).exp().ln_1p()
            }
        })
        .collect::<Vec<f64>>();
    let mut flags = vec![NodeFlag::Regular; n];
    flags[0] = NodeFlag::GapEdge;
    let occupation = OccupationFunction::from_ln_values(grid, ln_values)?.with_flags(flags)?;
    Ok(AnalyticSteadyState {
        occupation,
        excess,
        emission,
        cascade_ratio,
        absorption_ratio,
    })
}

/// Agreement between a numerical and an analytic steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationMetrics {
    /// log10(f_numeric / f_analytic) per node; `None` at flagged nodes.
    pub log10_ratio: Vec<Option<f64>>,
    pub max_abs_log10_ratio: f64,
    pub median_abs_log10_ratio: f64,
    pub compared_nodes: usize,
}

/// Compare two occupations node by node, skipping nodes flagged in `reference`.
pub fn validate(numeric: &OccupationFunction, reference: &OccupationFunction) -> Result<ValidationMetrics> {
    if !numeric.grid().same_nodes(reference.grid()) {
        return Err(Error::GridMismatch("numeric and analytic grids differ".into()));
    }
    let x = numeric.grid().nodes();
    let mut ratios = Vec::with_capacity(x.len());
    let mut magnitudes = Vec::new();
    for i in 0..x.len() {
        if reference.flags()[i] != NodeFlag::Regular {
            ratios.push(None);
            continue;
        }
        let (a, b) = (numeric.ln_values()[i], reference.ln_values()[i]);
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::ZeroOccupation { x: x[i] });
        }
        let r = (a - b) / std::f64::consts::LN_10;
        ratios.push(Some(r));
        magnitudes.push(r.abs());
    }
    if magnitudes.is_empty() {
        return Err(Error::GridMismatch("no unflagged nodes to compare".into()));
    }
    let max = magnitudes.iter().cloned().fold(0.0, f64::max);
    Ok(ValidationMetrics {
        log10_ratio: ratios,
        max_abs_log10_ratio: max,
        median_abs_log10_ratio: median(&mut magnitudes),
        compared_nodes: magnitudes.len(),
    })
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::grid::GridSpec;

    #[test]
    fn emission_integral_near_gap_edge() {
        // Leading behaviour at the gap edge is (2/3) δ^3.5.
        for delta in [1e-6, 1e-5] {
            let v = emission_integral(1.0 + delta).unwrap();
            let lead = 2.0 / 3.0 * f64::powf(delta, 3.5);
            assert!((v / lead - 1.0).abs() < 1e-3 * (1.0 + 1e6 * delta), "{v:e} vs {lead:e}");
        }
        assert!(emission_integral(1.0).is_err());
    }

    #[test]
    fn emission_integral_grid_oracle() {
        // Independent midpoint sum in s with y = 1 + s², where ρ dy = 2y/√(s² + 2) ds.
        let x = 2.5;
        let m = 200_000;
        let s_max = (x - 1.0f64).sqrt();
        let h = s_max / m as f64;
        let sum: f64 = (0..m)
            .map(|k| {
                let s = (k as f64 + 0.5) * h;
                let y = 1.0 + s * s;
                (x - y).powi(2) * 2.0 * y / (s * s + 2.0).sqrt() * coherence_unchecked(x, y).scattering * h
            })
            .sum();
        let v = emission_integral(x).unwrap();
        assert!((v / sum - 1.0).abs() < 1e-8, "{v} vs {sum}");
    }

    #[test]
    fn excess_scales_with_drive() {
        let grid = EnergyGrid::build(&GridSpec { n_nodes: 20, ..GridSpec::default() }).unwrap();
        let al = MaterialParams::aluminum();
        let drive = CslGenerationCurve::uniform(&grid, 1e-18);
        let a = analytic_steady_state(&grid, &al, 0.02, &drive).unwrap();
        let b = analytic_steady_state(&grid, &al, 0.02, &drive.scaled(10.0)).unwrap();
        for (p, q) in a.excess.iter().zip(&b.excess) {
            assert!((q / p - 10.0).abs() < 1e-12);
        }
        assert_eq!(a.occupation.flags()[0], NodeFlag::GapEdge);
    }

    #[test]
    fn validate_identical_is_zero() {
        let grid = EnergyGrid::build(&GridSpec { n_nodes: 20, ..GridSpec::default() }).unwrap();
        let al = MaterialParams::aluminum();
        let drive = CslGenerationCurve::uniform(&grid, 1e-18);
        let a = analytic_steady_state(&grid, &al, 0.02, &drive).unwrap();
        let m = validate(&a.occupation, &a.occupation).unwrap();
        assert_eq!(m.max_abs_log10_ratio, 0.0);
        assert_eq!(m.compared_nodes, 19);
    }

    #[test]
    fn validate_rejects_other_grid_and_zeros() {
        let g1 = EnergyGrid::build(&GridSpec { n_nodes: 20, ..GridSpec::default() }).unwrap();
        let g2 = EnergyGrid::build(&GridSpec { n_nodes: 21, ..GridSpec::default() }).unwrap();
        let a = OccupationFunction::thermal(&g1, 0.1).unwrap();
        let b = OccupationFunction::thermal(&g2, 0.1).unwrap();
        assert!(matches!(validate(&a, &b), Err(Error::GridMismatch(_))));
        let zero = OccupationFunction::from_values(&g1, vec![0.0; 20]).unwrap();
        assert!(matches!(validate(&zero, &a), Err(Error::ZeroOccupation { .. })));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
