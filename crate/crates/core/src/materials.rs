//! Physical constants, material records, collapse-model parameters and the
//! dimensionless scales derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Elementary charge [C]; also the joule value of one electronvolt.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Electron rest mass [kg].
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Proton rest mass [kg], used as the reference nucleon mass.
pub const PROTON_MASS: f64 = 1.672_621_923_69e-27;

/// BCS weak-coupling ratio between the zero-temperature gap and k_B T_c.
pub const BCS_GAP_RATIO: f64 = 1.764;

/// Relative tolerance when checking a stated T_c against the gap.
const GAP_TC_TOLERANCE: f64 = 0.01;

/// Smallest accepted ratio between Fermi energy and gap.
const MIN_FERMI_TO_GAP: f64 = 1e3;

/// Set of physical constants in SI units, recorded with every result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub boltzmann: f64,
    pub elementary_charge: f64,
    pub electron_mass: f64,
    pub nucleon_mass: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: Self = Self {
        hbar: HBAR,
        boltzmann: BOLTZMANN,
        elementary_charge: ELEMENTARY_CHARGE,
        electron_mass: ELECTRON_MASS,
        nucleon_mass: PROTON_MASS,
    };

    /// Boltzmann constant in eV/K.
    pub fn boltzmann_ev(&self) -> f64 {
        self.boltzmann / self.elementary_charge
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Boltzmann constant in eV/K.
pub fn boltzmann_ev() -> f64 {
    BOLTZMANN / ELEMENTARY_CHARGE
}

pub fn ev_to_joule(energy_ev: f64) -> f64 {
    energy_ev * ELEMENTARY_CHARGE
}

/// Validated description of a superconducting film.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: String,
    /// Zero-temperature gap Δ(0) [eV].
    pub gap0_ev: f64,
    /// Fermi energy [eV].
    pub fermi_energy_ev: f64,
    /// Characteristic electron-phonon time τ0 [s].
    pub tau0_s: f64,
    /// Critical temperature [K], optional.
    pub critical_temperature_k: Option<f64>,
}

/// Unvalidated material record, as read from configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialRecord {
    pub name: String,
    pub gap0_ev: f64,
    pub fermi_energy_ev: f64,
    pub tau0_s: f64,
    #[serde(default)]
    pub critical_temperature_k: Option<f64>,
}

/// Where a material comes from: a built-in preset or an explicit record.
#[derive(Debug, Clone, PartialEq)]
pub enum MaterialSource {
    Preset(String),
    Record(MaterialRecord),
}

/// Names accepted by [`load_material`] as presets.
pub const MATERIAL_PRESETS: [&str; 2] = ["aluminum", "aluminum-bulk"];

impl MaterialParams {
    pub fn new(
        name: impl Into<String>,
        gap0_ev: f64,
        fermi_energy_ev: f64,
        tau0_s: f64,
        critical_temperature_k: Option<f64>,
    ) -> Result<Self> {
        check_positive("gap0_ev", gap0_ev)?;
        check_positive("fermi_energy_ev", fermi_energy_ev)?;
        check_positive("tau0_s", tau0_s)?;
        if fermi_energy_ev / gap0_ev <= MIN_FERMI_TO_GAP {
            return Err(invalid(
                "fermi_energy_ev",
                format!(
                    "Fermi energy must exceed {MIN_FERMI_TO_GAP:e} times the gap (ratio {:.3e})",
                    fermi_energy_ev / gap0_ev
                ),
            ));
        }
        if let Some(tc) = critical_temperature_k {
            check_positive("critical_temperature_k", tc)?;
            let expected = BCS_GAP_RATIO * boltzmann_ev() * tc;
            let mismatch = (gap0_ev - expected).abs() / gap0_ev;
            if mismatch > GAP_TC_TOLERANCE {
                return Err(invalid(
                    "critical_temperature_k",
                    format!(
                        "gap {gap0_ev:e} eV inconsistent with {BCS_GAP_RATIO} k_B T_c = {expected:e} eV"
                    ),
                ));
            }
        }
        Ok(Self {
            name: name.into(),
            gap0_ev,
            fermi_energy_ev,
            tau0_s,
            critical_temperature_k,
        })
    }

    /// Aluminum film with the gap used throughout the default scenario.
    pub fn aluminum() -> Self {
        Self::new("aluminum", 3.4e-4, 11.6, 438e-9, None).expect("valid preset")
    }

    /// Aluminum with the bulk weak-coupling gap of a 1.2 K film.
    pub fn aluminum_bulk() -> Self {
        let tc = 1.2;
        let gap = BCS_GAP_RATIO * boltzmann_ev() * tc;
        Self::new("aluminum-bulk", gap, 11.6, 438e-9, Some(tc)).expect("valid preset")
    }

    pub fn gap_joule(&self) -> f64 {
        ev_to_joule(self.gap0_ev)
    }

    pub fn fermi_energy_joule(&self) -> f64 {
        ev_to_joule(self.fermi_energy_ev)
    }

    /// Electron-phonon rate scale γ0 = 1/τ0 [1/s].
    pub fn gamma0(&self) -> f64 {
        1.0 / self.tau0_s
    }

    /// Reduced temperature k_B T / Δ.
    pub fn reduced_temperature(&self, temperature_k: f64) -> f64 {
        boltzmann_ev() * temperature_k / self.gap0_ev
    }
}

/// Resolve a material preset or validate an explicit record.
pub fn load_material(source: &MaterialSource) -> Result<MaterialParams> {
    match source {
        MaterialSource::Preset(name) => match name.as_str() {
            "aluminum" => Ok(MaterialParams::aluminum()),
            "aluminum-bulk" => Ok(MaterialParams::aluminum_bulk()),
            other => Err(Error::UnknownMaterial(other.to_string())),
        },
        MaterialSource::Record(r) => MaterialParams::new(
            r.name.clone(),
            r.gap0_ev,
            r.fermi_energy_ev,
            r.tau0_s,
            r.critical_temperature_k,
        ),
    }
}

/// Collapse-model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CslParams {
    /// Collapse rate λ [1/s]; zero switches the noise off.
    pub lambda: f64,
    /// Localization length r_c [m].
    pub r_c: f64,
    /// Ratio of the carrier mass to the reference nucleon mass.
    pub mass_ratio: f64,
}

impl CslParams {
    /// Parameters for electrons as the noisy carriers.
    pub fn new(lambda: f64, r_c: f64) -> Result<Self> {
        Self::with_mass_ratio(lambda, r_c, ELECTRON_MASS / PROTON_MASS)
    }

    pub fn with_mass_ratio(lambda: f64, r_c: f64, mass_ratio: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be finite and non-negative, got {lambda}")));
        }
        check_positive("r_c", r_c)?;
        if !(mass_ratio > 0.0 && mass_ratio < 1.0) {
            return Err(invalid("mass_ratio", format!("must lie in (0, 1), got {mass_ratio}")));
        }
        Ok(Self {
            lambda,
            r_c,
            mass_ratio,
        })
    }

    /// λ = 1e-10 1/s, r_c = 1e-7 m, electron carriers.
    pub fn baseline() -> Self {
        Self::new(1e-10, 1e-7).expect("valid preset")
    }

    /// Carrier mass [kg].
    pub fn carrier_mass(&self) -> f64 {
        self.mass_ratio * PROTON_MASS
    }
}

/// Dimensionless scales controlling the collapse-noise integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    /// Fermi energy over gap.
    pub beta: f64,
    /// Collapse temperature ħ²/(2 m r_c² k_B) [K].
    pub t_csl: f64,
    /// Δ / (k_B T_CSL).
    pub gap_over_tcsl: f64,
    /// T_F / T_CSL.
    pub fermi_over_tcsl: f64,
    /// Width parameter 2 m Δ r_c² / ħ² of the momentum-transfer Gaussian.
    pub gauss_width: f64,
}

pub fn derived_scales(material: &MaterialParams, csl: &CslParams) -> ScaleSet {
    let m = csl.carrier_mass();
    let t_csl = HBAR * HBAR / (2.0 * m * csl.r_c * csl.r_c * BOLTZMANN);
    let gauss_width = 2.0 * m * material.gap_joule() * csl.r_c * csl.r_c / (HBAR * HBAR);
    ScaleSet {
        beta: material.fermi_energy_ev / material.gap0_ev,
        t_csl,
        gap_over_tcsl: material.gap_joule() / (BOLTZMANN * t_csl),
        fermi_over_tcsl: material.fermi_energy_joule() / (BOLTZMANN * t_csl),
        gauss_width,
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be finite and positive, got {value}")))
    }
}
