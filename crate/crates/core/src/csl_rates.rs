//! Collapse-noise rates: the reduction rate of a superposed body, the
//! quasiparticle generation rate per energy, and the total generation rate
//! and heating power per unit volume.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bcs::{coherence_unchecked, Occupation};
use crate::error::{invalid, Error, Result};
use crate::kinetic::EnergyGrid;
use crate::materials::{derived_scales, CslParams, MaterialParams, ScaleSet, HBAR};
use crate::quadrature::{gap_edge_integral, AdaptiveOptions};

/// Default upper energy (in units of the gap) of the generation integral.
pub const DEFAULT_Y_MAX: f64 = 4.0;

/// Largest magnitude the combined exponent may reach on the integration domain.
pub const EXPONENT_BOUND: f64 = 1e4;

/// Cubic micrometres per cubic metre.
const PER_CUBIC_MICROMETRE: f64 = 1e-18;

/// Rate at which a superposition of `groups` groups of `nucleons_per_group`
/// nucleons is suppressed, λ n² N (m/m0)² [1/s].
pub fn reduction_rate(csl: &CslParams, nucleons_per_group: u64, groups: u64) -> Result<f64> {
    if nucleons_per_group == 0 {
        return Err(invalid("nucleons_per_group", "must be at least 1"));
    }
    if groups == 0 {
        return Err(invalid("groups", "must be at least 1"));
    }
    let n = nucleons_per_group as f64;
    Ok(csl.lambda * n * n * groups as f64 * csl.mass_ratio * csl.mass_ratio)
}

/// Total number of quasiparticles created per second and cubic micrometre.
pub fn total_generation_rate(material: &MaterialParams, csl: &CslParams) -> f64 {
    let m = csl.carrier_mass();
    let k_scale = (2.0 * m).sqrt() / HBAR;
    csl.lambda * csl.mass_ratio * csl.mass_ratio / (8.0 * std::f64::consts::PI)
        * k_scale.powi(3)
        * material.fermi_energy_joule().sqrt()
        * material.gap_joule()
        * PER_CUBIC_MICROMETRE
}

/// Heating power per cubic micrometre [W/μm³], one gap per created quasiparticle.
pub fn power_density(material: &MaterialParams, csl: &CslParams) -> f64 {
    total_generation_rate(material, csl) * material.gap_joule()
}

/// Energy-resolved generation rate γ_CSL(x) for one material and parameter set.
#[derive(Debug, Clone, Copy)]
pub struct CslGeneration {
    scales: ScaleSet,
    prefactor: f64,
    y_max: f64,
    quadrature: AdaptiveOptions,
}

impl CslGeneration {
    pub fn new(material: &MaterialParams, csl: &CslParams) -> Self {
        let scales = derived_scales(material, csl);
        let m = csl.carrier_mass();
        let prefactor = csl.lambda * csl.mass_ratio * csl.mass_ratio * csl.r_c
            / (2.0 * std::f64::consts::PI.sqrt())
            * (2.0 * m * material.gap_joule()).sqrt()
            / HBAR;
        Self {
            scales,
            prefactor,
            y_max: DEFAULT_Y_MAX,
            quadrature: AdaptiveOptions::default(),
        }
    }

    pub fn with_y_max(mut self, y_max: f64) -> Result<Self> {
        if !(y_max > 1.0 && y_max.is_finite()) {
            return Err(invalid("y_max", format!("must exceed 1, got {y_max}")));
        }
        self.y_max = y_max;
        Ok(self)
    }

    pub fn scales(&self) -> &ScaleSet {
        &self.scales
    }

    pub fn y_max(&self) -> f64 {
        self.y_max
    }

    /// Rate coefficient in front of the reduced integral [1/s].
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// −a(√(s_x+β) − √(s_y+β))², written as a ratio so that the two large
    /// square roots never get subtracted.
    pub fn fused_exponent_from_sqrt(&self, s_x: f64, s_y: f64) -> f64 {
        let beta = self.scales.beta;
        let sum = (s_x + beta).sqrt() + (s_y + beta).sqrt();
        let diff = s_x - s_y;
        -self.scales.gauss_width * diff * diff / (sum * sum)
    }

    /// Combined exponent at energies x and y.
    pub fn fused_exponent(&self, x: f64, y: f64) -> f64 {
        self.fused_exponent_from_sqrt(crate::bcs::gap_edge_sqrt(x), crate::bcs::gap_edge_sqrt(y))
    }

    /// The three exponent contributions before cancellation:
    /// −a(s_x + s_y), −2aβ and +2a√((s_x+β)(s_y+β)).
    pub fn unfused_exponent_terms(&self, x: f64, y: f64) -> [f64; 3] {
        let a = self.scales.gauss_width;
        let beta = self.scales.beta;
        let (sx, sy) = (crate::bcs::gap_edge_sqrt(x), crate::bcs::gap_edge_sqrt(y));
        [
            -a * (sx + sy),
            -2.0 * a * beta,
            2.0 * a * ((sx + beta) * (sy + beta)).sqrt(),
        ]
    }

    /// ln of the ratio between the neglected backward-momentum term and the
    /// retained term of the angular integral, −4a√((s_x+β)(s_y+β)).
    pub fn image_term_log_ratio(&self, x: f64, y: f64) -> f64 {
        let beta = self.scales.beta;
        let (sx, sy) = (crate::bcs::gap_edge_sqrt(x), crate::bcs::gap_edge_sqrt(y));
        -4.0 * self.scales.gauss_width * ((sx + beta) * (sy + beta)).sqrt()
    }

    /// Generation rate [1/s] into energy x, with Pauli blocking from `occupation`.
    pub fn rate(&self, x: f64, occupation: &dyn Occupation) -> Result<f64> {
        if !(x >= 1.0 && x.is_finite()) {
            return Err(crate::error::domain("csl_generation_rate", format!("requires x >= 1, got {x}")));
        }
        let s_x = crate::bcs::gap_edge_sqrt(x);
        let bad_exponent = std::cell::Cell::new(None);
        let integrand = |y: f64| {
            let s_y = crate::bcs::gap_edge_sqrt(y);
            let exponent = self.fused_exponent_from_sqrt(s_x, s_y);
            if !(exponent.abs() < EXPONENT_BOUND) {
                bad_exponent.set(Some(exponent));
                return 0.0;
            }
            let pair = coherence_unchecked(x, y).pair;
            (exponent + occupation.ln_vacancy(y)).exp() * pair
        };
        let integral = gap_edge_integral(&integrand, self.y_max, self.quadrature, "csl_generation_rate")?;
        if let Some(exponent) = bad_exponent.get() {
            return Err(Error::ExponentOverflow {
                context: "csl_generation_rate",
                exponent,
            });
        }
        Ok(self.prefactor / (s_x + self.scales.beta).sqrt() * integral.value)
    }

    /// Evaluate the rate on every node of a grid.
    pub fn curve(&self, grid: &EnergyGrid, occupation: &dyn Occupation) -> Result<CslGenerationCurve> {
        let rates = grid
            .nodes()
            .par_iter()
            .map(|&x| self.rate(x, occupation))
            .collect::<Result<Vec<f64>>>()?;
        let mut key = vec![self.prefactor, self.scales.beta, self.scales.gauss_width, self.y_max];
        key.extend_from_slice(grid.nodes());
        Ok(CslGenerationCurve {
            nodes: grid.nodes().to_vec(),
            rates,
            params_hash: crate::fingerprint(&key),
        })
    }
}

/// γ_CSL sampled on the nodes of an energy grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CslGenerationCurve {
    pub nodes: Vec<f64>,
    /// Generation rate at each node [1/s].
    pub rates: Vec<f64>,
    pub params_hash: String,
}

impl CslGenerationCurve {
    /// A curve with the same rate everywhere, for tests and what-if studies.
    pub fn uniform(grid: &EnergyGrid, rate: f64) -> Self {
        Self {
            nodes: grid.nodes().to_vec(),
            rates: vec![rate; grid.len()],
            params_hash: crate::fingerprint(&[rate, grid.len() as f64]),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            rates: self.rates.iter().map(|r| r * factor).collect(),
            params_hash: crate::fingerprint(&[factor]) + &self.params_hash,
        }
    }
}
