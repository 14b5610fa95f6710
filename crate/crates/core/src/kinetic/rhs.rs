//! Electron-phonon collision terms of the quasiparticle kinetic equation,
//! discretised on an [`EnergyGrid`] with phonons held at equilibrium.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcs::{
    coherence_unchecked, ln_bose_plus_one_reduced, ln_bose_reduced, ln_fermi_reduced,
    ln_fermi_vacancy_reduced,
};
use crate::csl_rates::CslGenerationCurve;
use crate::error::{Error, Result};
use crate::kinetic::grid::{EnergyGrid, OccupationFunction};
use crate::materials::MaterialParams;
use crate::quadrature::{adaptive, AdaptiveOptions};

/// Treatment of states between the gap edge and the first grid node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapEdgeBoundary {
    /// The strip is held at thermal equilibrium with the phonons, so
    /// quasiparticles relaxing into it leave the system.
    #[default]
    Absorbing,
    /// The net flux into the strip is returned to the first node.
    Reflecting,
}

/// Per-node contributions to df/dt [1/s].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhsBreakdown {
    pub injection: Vec<f64>,
    pub scattering_gain: Vec<f64>,
    pub scattering_loss: Vec<f64>,
    pub pair_generation: Vec<f64>,
    pub recombination: Vec<f64>,
    /// Relaxation into the strip below the first node (a loss).
    pub edge_loss: Vec<f64>,
    /// Gains from the strip: thermal pair breaking and reflected flux.
    pub edge_gain: Vec<f64>,
    pub total: Vec<f64>,
}

impl RhsBreakdown {
    /// Largest single contribution at node i.
    pub fn largest_term(&self, i: usize) -> f64 {
        [
            self.injection[i],
            self.scattering_gain[i],
            self.scattering_loss[i],
            self.pair_generation[i],
            self.recombination[i],
            self.edge_loss[i],
            self.edge_gain[i],
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Sum of the magnitudes of all contributions at node i.
    pub fn gross_flux(&self, i: usize) -> f64 {
        self.injection[i].abs()
            + self.scattering_gain[i].abs()
            + self.scattering_loss[i].abs()
            + self.pair_generation[i].abs()
            + self.recombination[i].abs()
            + self.edge_loss[i].abs()
            + self.edge_gain[i].abs()
    }
}

/// Precomputed collision kernels for one grid, material and phonon temperature.
///
/// All rates are in units of γ0 = 1/τ0. Partner weights already include
/// the density of states, so scattering conserves Σ ρw_i f_i exactly.
#[derive(Debug, Clone)]
pub struct KineticModel {
    grid: EnergyGrid,
    gamma0: f64,
    reduced_temperature: f64,
    boundary: GapEdgeBoundary,
    n: usize,
    /// ln of the in-scattering coefficient from node j into node i.
    ln_in: Vec<f64>,
    /// ln of the out-scattering coefficient from node i towards node j.
    ln_out: Vec<f64>,
    /// ln of the pair-generation coefficient for partners (i, j).
    ln_pair_gen: Vec<f64>,
    /// ln of the recombination coefficient for partners (i, j).
    ln_pair_rec: Vec<f64>,
    /// Relaxation from node i into the strip (coefficient of f_i).
    edge_down: Vec<f64>,
    /// Absorption from the thermal strip up to node i (coefficient of 1 − f_i).
    edge_up: Vec<f64>,
    edge_pair_gen: Vec<f64>,
    edge_pair_rec: Vec<f64>,
}

impl KineticModel {
    pub fn new(
        grid: &EnergyGrid,
        material: &MaterialParams,
        phonon_temperature_k: f64,
        boundary: GapEdgeBoundary,
    ) -> Result<Self> {
        if !(phonon_temperature_k > 0.0 && phonon_temperature_k.is_finite()) {
            return Err(crate::error::invalid("phonon_temperature", "must be positive"));
        }
        let t = material.reduced_temperature(phonon_temperature_k);
        let n = grid.len();
        let x = grid.nodes();
        let rw = grid.rho_weights();
        let rows: Vec<[Vec<f64>; 4]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut ln_in = vec![f64::NEG_INFINITY; n];
                let mut ln_out = vec![f64::NEG_INFINITY; n];
                let mut ln_gen = vec![0.0; n];
                let mut ln_rec = vec![0.0; n];
                for j in 0..n {
                    let c = coherence_unchecked(x[i], x[j]);
                    let ln_w = rw[j].ln();
                    let sum = x[i] + x[j];
                    let ln_pair = ln_w + 2.0 * sum.ln() + c.pair.ln();
                    ln_gen[j] = ln_pair + ln_bose_reduced(sum, t);
                    ln_rec[j] = ln_pair + ln_bose_plus_one_reduced(sum, t);
                    if i == j {
                        continue;
                    }
                    let gap = (x[i] - x[j]).abs();
                    let ln_scat = ln_w + 2.0 * gap.ln() + c.scattering.ln();
                    let (ln_n, ln_n1) = (ln_bose_reduced(gap, t), ln_bose_plus_one_reduced(gap, t));
                    if j > i {
                        // Relaxation down from j emits a phonon; going up absorbs one.
                        ln_in[j] = ln_scat + ln_n1;
                        ln_out[j] = ln_scat + ln_n;
                    } else {
                        ln_in[j] = ln_scat + ln_n;
                        ln_out[j] = ln_scat + ln_n1;
                    }
                }
                [ln_in, ln_out, ln_gen, ln_rec]
            })
            .collect();
        let strip = x[0].acosh();
        let options = AdaptiveOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-300,
            ..AdaptiveOptions::default()
        };
        let edge: Vec<[f64; 4]> = x
            .par_iter()
            .map(|&xi| -> Result<[f64; 4]> {
                // Each integrand is ln(kernel) + ln(occupation factors), over y = cosh u.
                let strip_integral = |ln_integrand: &dyn Fn(f64) -> f64, context| {
                    adaptive(&|u: f64| (ln_integrand(u.cosh())).exp() * u.cosh(), 0.0, strip, options, context)
                        .map(|e| e.value)
                };
                let ln_scat = |y: f64| {
                    let gap = xi - y;
                    2.0 * gap.ln() + coherence_unchecked(xi, y).scattering.ln()
                };
                let ln_pair = |y: f64| 2.0 * (xi + y).ln() + coherence_unchecked(xi, y).pair.ln();
                let down = |y: f64| {
                    if xi - y <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    ln_scat(y) + ln_bose_plus_one_reduced(xi - y, t) + ln_fermi_vacancy_reduced(y, t)
                };
                let up = |y: f64| {
                    if xi - y <= 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    ln_scat(y) + ln_bose_reduced(xi - y, t) + ln_fermi_reduced(y, t)
                };
                let gen = |y: f64| ln_pair(y) + ln_bose_reduced(xi + y, t) + ln_fermi_vacancy_reduced(y, t);
                let rec = |y: f64| ln_pair(y) + ln_bose_plus_one_reduced(xi + y, t) + ln_fermi_reduced(y, t);
                Ok([
                    strip_integral(&down, "edge_relaxation")?,
                    strip_integral(&up, "edge_absorption")?,
                    strip_integral(&gen, "edge_pair_generation")?,
                    strip_integral(&rec, "edge_recombination")?,
                ])
            })
            .collect::<Result<_>>()?;
        let mut model = Self {
            grid: grid.clone(),
            gamma0: material.gamma0(),
            reduced_temperature: t,
            boundary,
            n,
            ln_in: Vec::with_capacity(n * n),
            ln_out: Vec::with_capacity(n * n),
            ln_pair_gen: Vec::with_capacity(n * n),
            ln_pair_rec: Vec::with_capacity(n * n),
            edge_down: edge.iter().map(|e| e[0]).collect(),
            edge_up: edge.iter().map(|e| e[1]).collect(),
            edge_pair_gen: edge.iter().map(|e| e[2]).collect(),
            edge_pair_rec: edge.iter().map(|e| e[3]).collect(),
        };
        for [a, b, c, d] in rows {
            model.ln_in.extend(a);
            model.ln_out.extend(b);
            model.ln_pair_gen.extend(c);
            model.ln_pair_rec.extend(d);
        }
        Ok(model)
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn reduced_temperature(&self) -> f64 {
        self.reduced_temperature
    }

    pub fn boundary(&self) -> GapEdgeBoundary {
        self.boundary
    }

    /// Rate [units of γ0] at which a quasiparticle at node i relaxes into the
    /// strip between the gap edge and the first node.
    pub fn edge_relaxation_rates(&self) -> &[f64] {
        &self.edge_down
    }

    fn net_edge_flux(&self, f: &[f64]) -> f64 {
        match self.boundary {
            GapEdgeBoundary::Absorbing => 0.0,
            GapEdgeBoundary::Reflecting => {
                let rw = self.grid.rho_weights();
                (0..self.n)
                    .map(|k| rw[k] * (f[k] * self.edge_down[k] - (1.0 - f[k]) * self.edge_up[k]))
                    .sum::<f64>()
                    / rw[0]
            }
        }
    }

    fn check(&self, f: &OccupationFunction, drive: Option<&CslGenerationCurve>) -> Result<()> {
        if !f.grid().same_nodes(&self.grid) {
            return Err(Error::GridMismatch("occupation grid differs from kernel grid".into()));
        }
        if let Some(d) = drive {
            if d.rates.len() != self.n {
                return Err(Error::GridMismatch("generation curve length differs from grid".into()));
            }
        }
        Ok(())
    }

    /// Every contribution to df/dt [1/s] at each node.
    pub fn breakdown(&self, f: &OccupationFunction, drive: Option<&CslGenerationCurve>) -> Result<RhsBreakdown> {
        self.check(f, drive)?;
        let scaled = self.scaled_breakdown(f.values(), f.ln_values(), drive.map(|d| d.rates.as_slice()));
        let g0 = self.gamma0;
        let s = |v: Vec<f64>| v.into_iter().map(|x| x * g0).collect::<Vec<f64>>();
        Ok(RhsBreakdown {
            injection: s(scaled.injection),
            scattering_gain: s(scaled.scattering_gain),
            scattering_loss: s(scaled.scattering_loss),
            pair_generation: s(scaled.pair_generation),
            recombination: s(scaled.recombination),
            edge_loss: s(scaled.edge_loss),
            edge_gain: s(scaled.edge_gain),
            total: s(scaled.total),
        })
    }

    /// df/dt [1/s] at each node.
    pub fn rhs(&self, f: &OccupationFunction, drive: Option<&CslGenerationCurve>) -> Result<Vec<f64>> {
        Ok(self.breakdown(f, drive)?.total)
    }

    /// Breakdown in units of γ0, from raw values and their logarithms.
    pub(crate) fn scaled_breakdown(&self, f: &[f64], ln_f: &[f64], drive: Option<&[f64]>) -> RhsBreakdown {
        let n = self.n;
        let ln_vac: Vec<f64> = f.iter().map(|v| (-v).ln_1p()).collect();
        let reflected = self.net_edge_flux(f);
        let rows: Vec<[f64; 8]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = i * n;
                let (mut gain, mut loss, mut gen, mut rec) = (0.0, 0.0, 0.0, 0.0);
                for j in 0..n {
                    gain += (ln_vac[i] + ln_f[j] + self.ln_in[row + j]).exp();
                    loss += (ln_f[i] + ln_vac[j] + self.ln_out[row + j]).exp();
                    gen += (ln_vac[i] + ln_vac[j] + self.ln_pair_gen[row + j]).exp();
                    rec += (ln_f[i] + ln_f[j] + self.ln_pair_rec[row + j]).exp();
                }
                let injection = drive.map_or(0.0, |d| d[i] / self.gamma0);
                let edge_loss = f[i] * (self.edge_down[i] + self.edge_pair_rec[i]);
                let mut edge_gain = (1.0 - f[i]) * (self.edge_up[i] + self.edge_pair_gen[i]);
                if i == 0 {
                    edge_gain += reflected;
                }
                let total = injection + gain - loss + gen - rec - edge_loss + edge_gain;
                [injection, gain, -loss, gen, -rec, -edge_loss, edge_gain, total]
            })
            .collect();
        let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
        RhsBreakdown {
            injection: col(0),
            scattering_gain: col(1),
            scattering_loss: col(2),
            pair_generation: col(3),
            recombination: col(4),
            edge_loss: col(5),
            edge_gain: col(6),
            total: col(7),
        }
    }

    /// Jacobian of the scaled right-hand side with respect to f, row-major.
    pub(crate) fn scaled_jacobian(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let rw = self.grid.rho_weights();
        let mut jac: Vec<f64> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let row = i * n;
                let vac_i = 1.0 - f[i];
                let mut out = vec![0.0; n];
                let mut diag =
                    -self.edge_down[i] - self.edge_pair_rec[i] - self.edge_up[i] - self.edge_pair_gen[i];
                for j in 0..n {
                    let p_in = self.ln_in[row + j].exp();
                    let p_out = self.ln_out[row + j].exp();
                    let g = self.ln_pair_gen[row + j].exp();
                    let r = self.ln_pair_rec[row + j].exp();
                    diag -= f[j] * p_in + (1.0 - f[j]) * p_out + (1.0 - f[j]) * g + f[j] * r;
                    out[j] = vac_i * p_in + f[i] * p_out - vac_i * g - f[i] * r;
                }
                out[i] += diag;
                out
            })
            .collect();
        if self.boundary == GapEdgeBoundary::Reflecting {
            for k in 0..n {
                jac[k] += rw[k] * (self.edge_down[k] + self.edge_up[k]) / rw[0];
            }
        }
        jac
    }
}
