//! Electron-phonon kernels, thermal pair-breaking and recombination rates,
//! and the temperatures at which collapse-noise generation overtakes them.

use serde::{Deserialize, Serialize};

use crate::bcs::{coherence_unchecked, dos_unchecked, ln_bose_plus_one_reduced, ln_bose_reduced, Occupation, ThermalOccupation};
use crate::csl_rates::CslGeneration;
use crate::error::{domain, invalid, Error, Result};
use crate::kinetic::{analytic_steady_state, EnergyGrid, GridSpec, OccupationFunction};
use crate::materials::{CslParams, MaterialParams};
use crate::quadrature::GaussLegendre;

/// Scattering kernel S(x, y) = (x − y)² ρ(y) L²(x, y).
pub fn kernel_scattering(x: f64, y: f64) -> Result<f64> {
    if !(x >= 1.0 && y > 1.0) {
        return Err(domain("kernel_scattering", format!("requires x >= 1, y > 1, got ({x}, {y})")));
    }
    Ok((x - y).powi(2) * dos_unchecked(y) * coherence_unchecked(x, y).scattering)
}

/// Pair kernel G(x, y) = (x + y)² ρ(y) M²(x, y).
pub fn kernel_pair(x: f64, y: f64) -> Result<f64> {
    if !(x >= 1.0 && y > 1.0) {
        return Err(domain("kernel_pair", format!("requires x >= 1, y > 1, got ({x}, {y})")));
    }
    Ok((x + y).powi(2) * dos_unchecked(y) * coherence_unchecked(x, y).pair)
}

/// Quadrature resolution of the thermal rate integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateQuadrature {
    /// Upper energy cutoff in units of the gap.
    pub y_max: f64,
    /// Equal panels in u = acosh y.
    pub panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for RateQuadrature {
    fn default() -> Self {
        Self {
            y_max: 4.0,
            panels: 128,
            nodes_per_panel: 8,
        }
    }
}

/// A rate together with its logarithm and a bound on the truncated tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Rate [1/s].
    pub value: f64,
    /// Natural log of the rate, finite even when the value underflows.
    pub ln_value: f64,
    /// Upper bound on the part of the integral above the cutoff [1/s].
    pub tail_bound: f64,
}

/// ∫₁^{y_max} exp(ln_integrand(y)) ρ(y) dy, summed in log space.
fn ln_gap_edge_sum(ln_integrand: &dyn Fn(f64) -> f64, q: &RateQuadrature) -> f64 {
    let rule = GaussLegendre::new(q.nodes_per_panel);
    let points = rule.composite_points(0.0, q.y_max.acosh(), q.panels);
    let logs: Vec<f64> = points
        .iter()
        .map(|&(u, w)| ln_integrand(u.cosh()) + (w * u.cosh()).ln())
        .collect();
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    peak + logs.iter().map(|l| (l - peak).exp()).sum::<f64>().ln()
}

fn check_rate_inputs(x: f64, temperature_k: f64, q: &RateQuadrature) -> Result<()> {
    if !(x >= 1.0 && x.is_finite()) {
        return Err(domain("phonon rate", format!("requires x >= 1, got {x}")));
    }
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(invalid("temperature", format!("must be positive, got {temperature_k}")));
    }
    if !(q.y_max > 1.0 && q.panels > 0 && q.nodes_per_panel > 0) {
        return Err(invalid("quadrature", "need y_max > 1 and at least one node"));
    }
    Ok(())
}

/// Rate at which a quasiparticle at energy x recombines with partners
/// distributed as `occupation`, emitting a phonon at temperature T.
pub fn recombination_rate(
    x: f64,
    temperature_k: f64,
    occupation: &dyn Occupation,
    material: &MaterialParams,
    quadrature: &RateQuadrature,
) -> Result<RateEstimate> {
    check_rate_inputs(x, temperature_k, quadrature)?;
    let t = material.reduced_temperature(temperature_k);
    let ln_kernel = |y: f64| (x + y).powi(2).ln() + (1.0 + 1.0 / (x * y)).ln() + ln_bose_plus_one_reduced(x + y, t);
    let ln_integrand = |y: f64| ln_kernel(y) + occupation.ln_occupation(y);
    let ln_sum = ln_gap_edge_sum(&ln_integrand, quadrature);
    let ln_rate = ln_sum + material.gamma0().ln();
    // Beyond the cutoff the occupation falls at least as fast as a thermal one.
    let y = quadrature.y_max;
    let tail = (ln_integrand(y) + dos_unchecked(y).ln()).exp() * material.gamma0() * 2.0 * t;
    Ok(RateEstimate {
        value: ln_rate.exp(),
        ln_value: ln_rate,
        tail_bound: tail,
    })
}

/// Rate at which thermal phonons break pairs and create a quasiparticle at
/// energy x, with Pauli blocking of the partner from `occupation`.
pub fn eph_generation_rate(
    x: f64,
    temperature_k: f64,
    occupation: &dyn Occupation,
    material: &MaterialParams,
    quadrature: &RateQuadrature,
) -> Result<RateEstimate> {
    check_rate_inputs(x, temperature_k, quadrature)?;
    let t = material.reduced_temperature(temperature_k);
    let ln_integrand = |y: f64| {
        (x + y).powi(2).ln() + (1.0 + 1.0 / (x * y)).ln() + ln_bose_reduced(x + y, t) + occupation.ln_vacancy(y)
    };
    let ln_sum = ln_gap_edge_sum(&ln_integrand, quadrature);
    let ln_rate = ln_sum + material.gamma0().ln();
    let y = quadrature.y_max;
    let tail = (ln_integrand(y) + dos_unchecked(y).ln()).exp() * material.gamma0() * 2.0 * t;
    Ok(RateEstimate {
        value: ln_rate.exp(),
        ln_value: ln_rate,
        tail_bound: tail,
    })
}

/// Kind of quantity stored in a [`RateCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    Recombination,
    EphGeneration,
    CslGeneration,
    Difference,
}

impl RateKind {
    pub fn label(&self) -> &'static str {
        match self {
            RateKind::Recombination => "recombination",
            RateKind::EphGeneration => "eph_generation",
            RateKind::CslGeneration => "csl_generation",
            RateKind::Difference => "difference",
        }
    }
}

/// A rate sampled against temperature [K] or reduced energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurve {
    pub kind: RateKind,
    pub label: String,
    pub abscissa: Vec<f64>,
    /// Rate or rate difference [1/s].
    pub values: Vec<f64>,
}

/// Which occupation the crossover search uses for partners and blocking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossoverOccupation {
    /// Fermi-Dirac at the phonon temperature.
    #[default]
    Equilibrium,
    /// Fermi-Dirac plus the linearised collapse-driven excess.
    DrivenSteadyState,
}

/// Settings for [`crossover_temperatures`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverOptions {
    pub t_min_k: f64,
    pub t_max_k: f64,
    /// Bisection stops when the bracket is narrower than this [K].
    pub tolerance_k: f64,
    /// Reduced energy at which rates are compared.
    pub energy: f64,
    /// Points of the diagnostic curves.
    pub curve_points: usize,
    pub occupation: CrossoverOccupation,
    pub quadrature: RateQuadrature,
}

impl Default for CrossoverOptions {
    fn default() -> Self {
        Self {
            t_min_k: 0.01,
            t_max_k: 0.2,
            tolerance_k: 1e-5,
            energy: 1.0,
            curve_points: 100,
            occupation: CrossoverOccupation::Equilibrium,
            quadrature: RateQuadrature::default(),
        }
    }
}

/// The three rates at one temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSample {
    pub temperature_k: f64,
    pub csl_generation: f64,
    pub eph_generation: RateEstimate,
    pub recombination: RateEstimate,
}

impl RateSample {
    /// ln γ_CSL − ln γ_g^eph; positive while collapse generation dominates.
    pub fn generation_log_margin(&self) -> f64 {
        self.csl_generation.ln() - self.eph_generation.ln_value
    }

    /// ln γ_CSL − ln γ_r^eph.
    pub fn recombination_log_margin(&self) -> f64 {
        self.csl_generation.ln() - self.recombination.ln_value
    }
}

/// Evaluates the competing rates for one material and parameter set.
pub struct RateComparison {
    material: MaterialParams,
    csl: CslGeneration,
    options: CrossoverOptions,
    driven: Option<DrivenExcess>,
}

struct DrivenExcess {
    grid: EnergyGrid,
    rates: crate::csl_rates::CslGenerationCurve,
}

impl RateComparison {
    pub fn new(material: &MaterialParams, csl: &CslParams, options: &CrossoverOptions) -> Result<Self> {
        if !(options.t_min_k > 0.0 && options.t_max_k > options.t_min_k) {
            return Err(invalid("temperature range", format!("need 0 < t_min < t_max, got [{}, {}]", options.t_min_k, options.t_max_k)));
        }
        if !(options.tolerance_k > 0.0) || options.curve_points < 2 {
            return Err(invalid("crossover options", "need positive tolerance and at least two curve points"));
        }
        let model = CslGeneration::new(material, csl);
        let driven = match options.occupation {
            CrossoverOccupation::Equilibrium => None,
            CrossoverOccupation::DrivenSteadyState => {
                let grid = EnergyGrid::build(&GridSpec::default())?;
                let rates = model.curve(&grid, &crate::bcs::EmptyOccupation)?;
                Some(DrivenExcess { grid, rates })
            }
        };
        Ok(Self {
            material: material.clone(),
            csl: model,
            options: *options,
            driven,
        })
    }

    pub fn sample(&self, temperature_k: f64) -> Result<RateSample> {
        let x = self.options.energy;
        let q = &self.options.quadrature;
        let thermal = ThermalOccupation::new(&self.material, temperature_k)?;
        let driven: Option<OccupationFunction> = match &self.driven {
            None => None,
            Some(d) => Some(analytic_steady_state(&d.grid, &self.material, temperature_k, &d.rates)?.occupation),
        };
        let occupation: &dyn Occupation = match &driven {
            Some(f) => f,
            None => &thermal,
        };
        Ok(RateSample {
            temperature_k,
            csl_generation: self.csl.rate(x, occupation)?,
            eph_generation: eph_generation_rate(x, temperature_k, occupation, &self.material, q)?,
            recombination: recombination_rate(x, temperature_k, occupation, &self.material, q)?,
        })
    }

    /// Rates on an even temperature grid spanning the search range.
    pub fn curves(&self) -> Result<Vec<RateCurve>> {
        let o = &self.options;
        let temps: Vec<f64> = (0..o.curve_points)
            .map(|k| o.t_min_k + (o.t_max_k - o.t_min_k) * k as f64 / (o.curve_points - 1) as f64)
            .collect();
        let samples = temps.iter().map(|&t| self.sample(t)).collect::<Result<Vec<_>>>()?;
        let curve = |kind, label: &str, f: &dyn Fn(&RateSample) -> f64| RateCurve {
            kind,
            label: label.to_string(),
            abscissa: temps.clone(),
            values: samples.iter().map(f).collect(),
        };
        Ok(vec![
            curve(RateKind::CslGeneration, "csl_generation", &|s| s.csl_generation),
            curve(RateKind::EphGeneration, "eph_generation", &|s| s.eph_generation.value),
            curve(RateKind::Recombination, "recombination", &|s| s.recombination.value),
            curve(RateKind::Difference, "d1", &|s| s.csl_generation - s.eph_generation.value),
            curve(RateKind::Difference, "d2", &|s| s.csl_generation - s.recombination.value),
        ])
    }

    fn bisect(&self, label: &'static str, margin: &dyn Fn(&RateSample) -> f64) -> Result<f64> {
        let o = &self.options;
        let (mut lo, mut hi) = (o.t_min_k, o.t_max_k);
        let (m_lo, m_hi) = (margin(&self.sample(lo)?), margin(&self.sample(hi)?));
        if m_lo.signum() == m_hi.signum() || m_lo.is_nan() || m_hi.is_nan() {
            let curves = self.curves()?;
            let which = if label == "D1" { 3 } else { 4 };
            return Err(Error::Bracketing {
                label,
                lo,
                hi,
                curve: Box::new(curves[which].clone()),
            });
        }
        let rising = m_lo < 0.0;
        while hi - lo > o.tolerance_k {
            let mid = 0.5 * (lo + hi);
            let m = margin(&self.sample(mid)?);
            if (m < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Temperatures at which collapse generation equals thermal pair breaking
/// (`generation_k`) and equals recombination (`recombination_k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub generation_k: f64,
    pub recombination_k: f64,
    pub tolerance_k: f64,
}

pub fn crossover_temperatures(material: &MaterialParams, csl: &CslParams, options: &CrossoverOptions) -> Result<Crossover> {
    let cmp = RateComparison::new(material, csl, options)?;
    let generation_k = cmp.bisect("D1", &|s| s.generation_log_margin())?;
    let recombination_k = cmp.bisect("D2", &|s| s.recombination_log_margin())?;
    Ok(Crossover {
        generation_k,
        recombination_k,
        tolerance_k: options.tolerance_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcs::ThermalOccupation;

    #[test]
    fn kernel_examples() {
        // (2/√3)·¼ = 1/(2√3).
        let s = kernel_scattering(1.0, 2.0).unwrap();
        assert!((s - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        // 16·(2/√3)·¼.
        let g = kernel_pair(2.0, 2.0).unwrap();
        assert!((g - 8.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(kernel_scattering(2.0, 1.0).is_err());
        assert!(kernel_pair(0.5, 2.0).is_err());
    }

    fn thermal(t: f64) -> ThermalOccupation {
        ThermalOccupation::new(&MaterialParams::aluminum(), t).unwrap()
    }

    #[test]
    fn recombination_small_at_low_temperature() {
        let al = MaterialParams::aluminum();
        let r = recombination_rate(1.0, 0.02, &thermal(0.02), &al, &RateQuadrature::default()).unwrap();
        assert!(r.value < 1e-70 && r.value > 0.0);
        assert!(r.tail_bound < 1e-6 * r.value);
    }

    #[test]
    fn rates_converge_under_refinement() {
        let al = MaterialParams::aluminum();
        for temperature in [0.02, 0.05, 0.1] {
            let q = RateQuadrature::default();
            let fine = RateQuadrature { panels: 2 * q.panels, ..q };
            let occ = thermal(temperature);
            for f in [eph_generation_rate, recombination_rate] {
                let a = f(1.0, temperature, &occ, &al, &q).unwrap();
                let b = f(1.0, temperature, &occ, &al, &fine).unwrap();
                assert!((a.ln_value - b.ln_value).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn thermal_rates_obey_detailed_balance() {
        // For equilibrium partners γ_g(x)(1 − f(x)) = γ_r(x) f(x) pointwise in y.
        let al = MaterialParams::aluminum();
        let q = RateQuadrature::default();
        for temperature in [0.03, 0.08] {
            let occ = thermal(temperature);
            let x = 1.3;
            let g = eph_generation_rate(x, temperature, &occ, &al, &q).unwrap();
            let r = recombination_rate(x, temperature, &occ, &al, &q).unwrap();
            let lhs = g.ln_value + occ.ln_vacancy(x);
            let rhs = r.ln_value + occ.ln_occupation(x);
            assert!((lhs - rhs).abs() < 1e-9 * lhs.abs());
        }
    }

    #[test]
    fn rate_oracle_at_high_temperature() {
        // Independent midpoint sum with y = 1 + s², where ρ dy = 2y/√(s² + 2) ds.
        let al = MaterialParams::aluminum();
        let temperature = 0.3;
        let t = al.reduced_temperature(temperature);
        let m = 200_000;
        let h = 3f64.sqrt() / m as f64;
        let sum: f64 = (0..m)
            .map(|k| {
                let s = (k as f64 + 0.5) * h;
                let y = 1.0 + s * s;
                let n = 1.0 / ((1.0 + y) / t).exp_m1();
                let vac = 1.0 - 1.0 / ((y / t).exp() + 1.0);
                (1.0 + y).powi(2) * 2.0 * y / (s * s + 2.0).sqrt() * (1.0 + 1.0 / y) * n * vac * h
            })
            .sum::<f64>()
            * al.gamma0();
        let r = eph_generation_rate(1.0, temperature, &thermal(temperature), &al, &RateQuadrature::default()).unwrap();
        assert!((r.value / sum - 1.0).abs() < 1e-6, "{} vs {sum}", r.value);
    }

    #[test]
    fn rejects_bad_inputs() {
        let al = MaterialParams::aluminum();
        let q = RateQuadrature::default();
        assert!(recombination_rate(0.5, 0.02, &thermal(0.02), &al, &q).is_err());
        assert!(eph_generation_rate(1.0, -1.0, &thermal(0.02), &al, &q).is_err());
        let bad = CrossoverOptions { t_min_k: 0.1, t_max_k: 0.05, ..CrossoverOptions::default() };
        assert!(crossover_temperatures(&al, &CslParams::baseline(), &bad).is_err());
    }

    #[test]
    fn bracketing_failure_carries_curve() {
        let al = MaterialParams::aluminum();
        let options = CrossoverOptions { t_min_k: 0.01, t_max_k: 0.03, curve_points: 5, ..CrossoverOptions::default() };
        match crossover_temperatures(&al, &CslParams::baseline(), &options) {
            Err(Error::Bracketing { curve, .. }) => assert_eq!(curve.values.len(), 5),
            other => panic!("expected bracketing failure, got {other:?}"),
        }
    }
}
