//! BCS quasiparticle density of states, coherence factors and the thermal
//! occupations of quasiparticles and phonons.
//!
//! Energies are measured in units of the gap unless a function says
//! otherwise. Occupations are carried as natural logarithms wherever they
//! can underflow.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::materials::{boltzmann_ev, MaterialParams};

/// Smallest phonon energy [eV] accepted by [`bose_einstein`].
pub const MIN_PHONON_ENERGY_EV: f64 = 1e-15;

/// Largest reduced temperature k_B T / Δ for the low-temperature density formula.
pub const MAX_LOW_T_REDUCED: f64 = 0.2;

/// Largest quasiparticle density accepted by [`gap_correction`].
pub const MAX_GAP_CORRECTION_XQP: f64 = 0.1;

/// √(x² − 1), written to keep precision near the gap edge.
pub fn gap_edge_sqrt(x: f64) -> f64 {
    ((x - 1.0) * (x + 1.0)).max(0.0).sqrt()
}

/// Normalized density of states ρ(x) = x / √(x² − 1) for x > 1.
pub fn dos(x: f64) -> Result<f64> {
    if !(x > 1.0) || !x.is_finite() {
        return Err(domain("dos", format!("requires x > 1, got {x}")));
    }
    Ok(dos_unchecked(x))
}

pub(crate) fn dos_unchecked(x: f64) -> f64 {
    x / gap_edge_sqrt(x)
}

/// ln(1 + e^z) without overflow or loss of precision.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// ln of the Fermi function at reduced energy x and reduced temperature t.
pub fn ln_fermi_reduced(x: f64, t: f64) -> f64 {
    -softplus(x / t)
}

/// ln of 1 − f at reduced energy x and reduced temperature t.
pub fn ln_fermi_vacancy_reduced(x: f64, t: f64) -> f64 {
    -softplus(-x / t)
}

/// ln N(w) of the Bose function at reduced phonon energy w > 0.
pub fn ln_bose_reduced(w: f64, t: f64) -> f64 {
    let z = w / t;
    if z > 1.0 {
        -z - (-(-z).exp()).ln_1p()
    } else {
        -z.exp_m1().ln()
    }
}

/// ln(N(w) + 1) at reduced phonon energy w > 0.
pub fn ln_bose_plus_one_reduced(w: f64, t: f64) -> f64 {
    ln_bose_reduced(w, t) + w / t
}

fn check_temperature(function: &'static str, temperature_k: f64) -> Result<()> {
    if temperature_k > 0.0 && temperature_k.is_finite() {
        Ok(())
    } else {
        Err(domain(function, format!("temperature must be positive, got {temperature_k}")))
    }
}

/// Fermi-Dirac occupation at energy `energy_ev` measured from the Fermi level.
pub fn fermi_dirac(energy_ev: f64, temperature_k: f64) -> Result<f64> {
    Ok(ln_fermi_dirac(energy_ev, temperature_k)?.exp())
}

/// Natural log of the Fermi-Dirac occupation; finite deep in the tail.
pub fn ln_fermi_dirac(energy_ev: f64, temperature_k: f64) -> Result<f64> {
    check_temperature("fermi_dirac", temperature_k)?;
    Ok(-softplus(energy_ev / (boltzmann_ev() * temperature_k)))
}

/// Bose-Einstein occupation of a phonon of energy `omega_ev`.
pub fn bose_einstein(omega_ev: f64, temperature_k: f64) -> Result<f64> {
    Ok(ln_bose_einstein(omega_ev, temperature_k)?.exp())
}

pub fn ln_bose_einstein(omega_ev: f64, temperature_k: f64) -> Result<f64> {
    check_temperature("bose_einstein", temperature_k)?;
    if !(omega_ev >= MIN_PHONON_ENERGY_EV) {
        return Err(domain(
            "bose_einstein",
            format!("phonon energy must be at least {MIN_PHONON_ENERGY_EV:e} eV, got {omega_ev:e}"),
        ));
    }
    Ok(ln_bose_reduced(omega_ev, boltzmann_ev() * temperature_k))
}

/// Squared coherence factors for scattering (L²) and pair processes (M²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceFactors {
    pub scattering: f64,
    pub pair: f64,
}

/// Coherence factors between quasiparticle energies x and y (both ≥ 1).
pub fn coherence_factors(x: f64, y: f64) -> Result<CoherenceFactors> {
    if !(x >= 1.0 && y >= 1.0) {
        return Err(domain("coherence_factors", format!("requires x, y >= 1, got ({x}, {y})")));
    }
    Ok(coherence_unchecked(x, y))
}

pub(crate) fn coherence_unchecked(x: f64, y: f64) -> CoherenceFactors {
    let c = (1.0 - gap_edge_sqrt(x) * gap_edge_sqrt(y)) / (x * y);
    CoherenceFactors {
        scattering: 0.5 * (1.0 - c),
        pair: 0.5 * (1.0 + c),
    }
}

/// Thermal quasiparticle density per Cooper pair, √(2π k_B T/Δ) e^{−Δ/k_B T}.
pub fn thermal_xqp(material: &MaterialParams, temperature_k: f64) -> Result<f64> {
    Ok(ln_thermal_xqp(material, temperature_k)?.exp())
}

pub fn ln_thermal_xqp(material: &MaterialParams, temperature_k: f64) -> Result<f64> {
    check_temperature("thermal_xqp", temperature_k)?;
    let t = material.reduced_temperature(temperature_k);
    if t >= MAX_LOW_T_REDUCED {
        return Err(domain(
            "thermal_xqp",
            format!("k_B T / Δ = {t:.3} is outside the low-temperature regime (< {MAX_LOW_T_REDUCED})"),
        ));
    }
    Ok(0.5 * (2.0 * std::f64::consts::PI * t).ln() - 1.0 / t)
}

/// Gap suppressed by a quasiparticle density: Δ(0)(1 − x_qp) [eV].
pub fn gap_correction(material: &MaterialParams, xqp: f64) -> Result<f64> {
    if !(xqp >= 0.0 && xqp < MAX_GAP_CORRECTION_XQP) {
        return Err(invalid(
            "xqp",
            format!("must lie in [0, {MAX_GAP_CORRECTION_XQP}), got {xqp}"),
        ));
    }
    Ok(material.gap0_ev * (1.0 - xqp))
}

/// A quasiparticle occupation as a function of reduced energy.
pub trait Occupation: Sync {
    /// ln f(x); `-inf` where the occupation vanishes.
    fn ln_occupation(&self, x: f64) -> f64;

    fn occupation(&self, x: f64) -> f64 {
        self.ln_occupation(x).exp()
    }

    /// ln(1 − f(x)).
    fn ln_vacancy(&self, x: f64) -> f64 {
        (-self.ln_occupation(x).exp_m1()).ln()
    }
}

/// Fermi-Dirac occupation at a fixed reduced temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalOccupation {
    pub reduced_temperature: f64,
}

impl ThermalOccupation {
    pub fn new(material: &MaterialParams, temperature_k: f64) -> Result<Self> {
        check_temperature("ThermalOccupation", temperature_k)?;
        Ok(Self {
            reduced_temperature: material.reduced_temperature(temperature_k),
        })
    }
}

impl Occupation for ThermalOccupation {
    fn ln_occupation(&self, x: f64) -> f64 {
        ln_fermi_reduced(x, self.reduced_temperature)
    }

    fn ln_vacancy(&self, x: f64) -> f64 {
        ln_fermi_vacancy_reduced(x, self.reduced_temperature)
    }
}

/// No quasiparticles at all; every state is free.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmptyOccupation;

impl Occupation for EmptyOccupation {
    fn ln_occupation(&self, _x: f64) -> f64 {
        f64::NEG_INFINITY
    }

    fn ln_vacancy(&self, _x: f64) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dos_values() {
        assert!((dos(2.0).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(dos(1.0).is_err());
        assert!(dos(0.5).is_err());
        // Near the edge ρ ≈ 1/√(2δ).
        let d = 1e-10;
        assert!((dos(1.0 + d).unwrap() * (2.0 * d).sqrt() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fermi_dirac_at_fermi_level_is_half() {
        assert_eq!(fermi_dirac(0.0, 0.05).unwrap(), 0.5);
        assert!(fermi_dirac(1e-4, 0.0).is_err());
    }

    #[test]
    fn fermi_tail_stays_finite_in_log_space() {
        // 4Δ at 10 mK for Al is about e^-1578, far below f64 range.
        let ln_f = ln_fermi_dirac(4.0 * 3.4e-4, 0.01).unwrap();
        let expected = -4.0 * 3.4e-4 / (boltzmann_ev() * 0.01);
        assert!((ln_f - expected).abs() < 1e-12 * expected.abs());
        assert_eq!(fermi_dirac(4.0 * 3.4e-4, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn bose_einstein_limits() {
        let kt = boltzmann_ev() * 0.1;
        // Classical limit N ≈ k_B T / Ω.
        let n = bose_einstein(1e-4 * kt, 0.1).unwrap();
        assert!((n * 1e-4 - 1.0).abs() < 1e-3);
        assert!(bose_einstein(0.0, 0.1).is_err());
        assert!(bose_einstein(1e-20, 0.1).is_err());
        let ln_n = ln_bose_einstein(50.0 * kt, 0.1).unwrap();
        assert!((ln_n + 50.0).abs() < 1e-12);
    }

    #[test]
    fn coherence_factor_examples() {
        let c = coherence_factors(1.0, 2.0).unwrap();
        assert!((c.scattering - 0.25).abs() < 1e-15);
        let c = coherence_factors(2.0, 2.0).unwrap();
        assert!((c.pair - 0.25).abs() < 1e-15);
        assert!(coherence_factors(0.9, 2.0).is_err());
        let c = coherence_factors(1e8, 1e8).unwrap();
        assert!((c.scattering - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_xqp_closed_form() {
        let al = MaterialParams::aluminum();
        // Oracle: mpmath evaluation of √(2πt)·exp(−1/t) with t = k_B·0.02/3.4e-4.
        let x = thermal_xqp(&al, 0.02).unwrap();
        assert!((x / 3.761_168_301e-87 - 1.0).abs() < 1e-8, "{x:e}");
        assert!(thermal_xqp(&al, 1.0).is_err());
        assert!(thermal_xqp(&al, -0.1).is_err());
    }

    #[test]
    fn gap_correction_bounds() {
        let al = MaterialParams::aluminum();
        assert!((gap_correction(&al, 0.01).unwrap() - 3.366e-4).abs() < 1e-15);
        assert!(gap_correction(&al, 0.2).is_err());
        assert!(gap_correction(&al, -1e-3).is_err());
    }

    #[test]
    fn thermal_occupation_vacancy_consistent() {
        let occ = ThermalOccupation { reduced_temperature: 0.3 };
        for x in [1.0, 1.5, 3.0] {
            let sum = occ.occupation(x) + occ.ln_vacancy(x).exp();
            assert!((sum - 1.0).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn coherence_factors_sum_to_one(x in 1.0f64..1e3, y in 1.0f64..1e3) {
            let c = coherence_factors(x, y).unwrap();
            prop_assert!((c.scattering + c.pair - 1.0).abs() < 1e-12);
            prop_assert!(c.scattering >= -1e-15 && c.pair >= -1e-15);
        }

        #[test]
        fn coherence_factors_symmetric(x in 1.0f64..50.0, y in 1.0f64..50.0) {
            let a = coherence_factors(x, y).unwrap();
            let b = coherence_factors(y, x).unwrap();
            prop_assert!((a.scattering - b.scattering).abs() < 1e-15);
        }

        #[test]
        fn fermi_dirac_in_unit_interval(e in -1e-2f64..1e-2, t in 1e-3f64..10.0) {
            let f = fermi_dirac(e, t).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            let g = fermi_dirac(-e, t).unwrap();
            prop_assert!((f + g - 1.0).abs() < 1e-14);
        }

        #[test]
        fn bose_detailed_balance(w in 1e-3f64..5.0, t in 1e-3f64..1.0) {
            let ratio = ln_bose_plus_one_reduced(w, t) - ln_bose_reduced(w, t);
            prop_assert!((ratio - w / t).abs() < 1e-9 * (w / t).max(1.0));
        }
    }
}
