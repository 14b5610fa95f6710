//! Scenario configuration: TOML schema, built-in presets and validation.
//!
//! A configuration is parsed strictly (unknown keys are fatal) and then
//! checked against the preconditions of every physics module before any
//! analysis runs. Failures name the offending field.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use cslqp_core::kinetic::{EnergyGrid, GapEdgeBoundary, GridSpec, SolverOptions};
use cslqp_core::materials::{load_material, CslParams, MaterialParams, MaterialRecord, MaterialSource};
use cslqp_core::observables::{
    gate_budget, workload_catalog, CurrentNormalization, JunctionParams, QubitParams, Workload,
};
use cslqp_core::phonon_kernels::{CrossoverOccupation, CrossoverOptions};

use crate::error::{CliError, Result};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 1] = ["paper-baseline"];

/// Full description of one scenario, as written in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Phonon bath temperatures [K] for the steady-state analysis.
    pub temperatures: Vec<f64>,
    pub material: MaterialConfig,
    pub csl: CslConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub qubit: QubitConfig,
    #[serde(default)]
    pub junction: JunctionConfig,
    /// Algorithms to check against the gate budget. When the key is absent
    /// the built-in catalog is used; an explicit empty list disables verdicts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workloads: Option<Vec<Workload>>,
    #[serde(default)]
    pub rates: RatesConfig,
    #[serde(default)]
    pub crossover: CrossoverConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Either `preset = "<name>"` or an inline material record.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap0_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fermi_energy_ev: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical_temperature_k: Option<f64>,
}

impl MaterialConfig {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Self::default()
        }
    }

    fn source(&self, path: &str) -> Result<MaterialSource> {
        let inline = self.name.is_some()
            || self.gap0_ev.is_some()
            || self.fermi_energy_ev.is_some()
            || self.tau0_s.is_some()
            || self.critical_temperature_k.is_some();
        match (&self.preset, inline) {
            (Some(_), true) => Err(CliError::config(path, "give either `preset` or an inline record, not both")),
            (Some(name), false) => Ok(MaterialSource::Preset(name.clone())),
            (None, false) => Err(CliError::config(path, "needs `preset` or an inline record")),
            (None, true) => {
                let missing = |field: &str| CliError::config(format!("{path}.{field}"), "missing field of inline record");
                Ok(MaterialSource::Record(MaterialRecord {
                    name: self.name.clone().ok_or_else(|| missing("name"))?,
                    gap0_ev: self.gap0_ev.ok_or_else(|| missing("gap0_ev"))?,
                    fermi_energy_ev: self.fermi_energy_ev.ok_or_else(|| missing("fermi_energy_ev"))?,
                    tau0_s: self.tau0_s.ok_or_else(|| missing("tau0_s"))?,
                    critical_temperature_k: self.critical_temperature_k,
                }))
            }
        }
    }

    fn load(&self, path: &str) -> Result<MaterialParams> {
        let source = self.source(path)?;
        let field = if matches!(source, MaterialSource::Preset(_)) { "preset" } else { "" };
        load_material(&source).map_err(physics_at(path, field))
    }
}

/// Collapse-model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CslConfig {
    /// Collapse rate [1/s].
    pub lambda: f64,
    /// Localization length [m].
    pub r_c: f64,
    /// Carrier to nucleon mass ratio; electrons when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_ratio: Option<f64>,
}

/// Energy grid and time-marching settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub convergence_tol: f64,
    pub max_steps: usize,
    /// First step in units of τ0.
    pub dt_initial: f64,
    pub boundary: GapEdgeBoundary,
    /// Extra gap-edge offsets at which the lowest-temperature steady state
    /// is recomputed to report grid sensitivity.
    pub sensitivity_epsilons: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let grid = GridSpec::default();
        let solver = SolverOptions::default();
        Self {
            epsilon: grid.epsilon,
            x_max: grid.x_max,
            n_nodes: grid.n_nodes,
            convergence_tol: solver.convergence_tol,
            max_steps: solver.max_steps,
            dt_initial: solver.dt_initial,
            boundary: GapEdgeBoundary::default(),
            sensitivity_epsilons: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            epsilon: self.epsilon,
            x_max: self.x_max,
            n_nodes: self.n_nodes,
        }
    }

    pub fn options(&self) -> SolverOptions {
        SolverOptions {
            convergence_tol: self.convergence_tol,
            max_steps: self.max_steps,
            dt_initial: self.dt_initial,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitConfig {
    /// Angular frequency [rad/s].
    pub omega_q: f64,
    /// Gate duration [s].
    pub t_gate: f64,
}

impl Default for QubitConfig {
    fn default() -> Self {
        let q = QubitParams::baseline();
        Self {
            omega_q: q.omega_q,
            t_gate: q.t_gate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JunctionConfig {
    /// Critical current [A].
    pub i_c: f64,
    pub normalization: CurrentNormalization,
}

impl Default for JunctionConfig {
    fn default() -> Self {
        Self {
            i_c: 1e-4,
            normalization: CurrentNormalization::default(),
        }
    }
}

/// Superposition used for the reduction-rate example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatesConfig {
    pub nucleons_per_group: u64,
    pub groups: u64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        Self {
            nucleons_per_group: 4,
            groups: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrossoverConfig {
    pub t_min_k: f64,
    pub t_max_k: f64,
    pub tolerance_k: f64,
    /// Reduced energy at which the rates are compared.
    pub energy: f64,
    pub curve_points: usize,
    pub occupation: CrossoverOccupation,
    /// Material for this analysis only; the scenario material when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub material: Option<MaterialConfig>,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        let o = CrossoverOptions::default();
        Self {
            t_min_k: o.t_min_k,
            t_max_k: o.t_max_k,
            tolerance_k: o.tolerance_k,
            energy: o.energy,
            curve_points: o.curve_points,
            occupation: o.occupation,
            material: None,
        }
    }
}

impl CrossoverConfig {
    pub fn options(&self) -> CrossoverOptions {
        CrossoverOptions {
            t_min_k: self.t_min_k,
            t_max_k: self.t_max_k,
            tolerance_k: self.tolerance_k,
            energy: self.energy,
            curve_points: self.curve_points,
            occupation: self.occupation,
            ..CrossoverOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetConfig {
    /// Relaxation time [s]. When absent it is derived from the steady state
    /// at the lowest configured temperature.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_s: Option<f64>,
    /// Fraction of T1/N available for gates.
    pub safety: f64,
    pub qubit_counts: Vec<u64>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            t1_s: None,
            safety: 1e-3,
            qubit_counts: (0..8).map(|k| 10u64.pow(k)).collect(),
        }
    }
}

/// File formats written for each analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("results"),
            formats: vec![Format::Csv, Format::Json],
        }
    }
}

/// Built-in scenario by name.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "paper-baseline" => Ok(paper_baseline()),
        other => Err(CliError::config(
            "--preset",
            format!("unknown preset `{other}`, expected one of {PRESETS:?}"),
        )),
    }
}

fn paper_baseline() -> ScenarioConfig {
    let csl = CslParams::baseline();
    ScenarioConfig {
        temperatures: vec![0.020, 0.025, 0.045, 0.065],
        material: MaterialConfig::preset("aluminum"),
        csl: CslConfig {
            lambda: csl.lambda,
            r_c: csl.r_c,
            mass_ratio: None,
        },
        solver: SolverConfig {
            sensitivity_epsilons: vec![1e-5, 1e-3],
            ..SolverConfig::default()
        },
        qubit: QubitConfig::default(),
        junction: JunctionConfig::default(),
        workloads: None,
        rates: RatesConfig::default(),
        crossover: CrossoverConfig {
            material: Some(MaterialConfig::preset("aluminum-bulk")),
            ..CrossoverConfig::default()
        },
        budget: BudgetConfig {
            t1_s: Some(1e6),
            ..BudgetConfig::default()
        },
        output: OutputConfig::default(),
    }
}

/// Parse a TOML scenario; errors carry the path of the offending key.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let deserializer = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(deserializer).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let location = inner
            .span()
            .map(|span| format!(" (line {})", text[..span.start].matches('\n').count() + 1))
            .unwrap_or_default();
        CliError::config(path, format!("{}{location}", inner.message()))
    })
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

pub fn to_toml(config: &ScenarioConfig) -> Result<String> {
    toml::to_string_pretty(config).map_err(|e| CliError::Encode {
        what: "configuration".into(),
        reason: e.to_string(),
    })
}

/// A configuration that has passed every module's precondition checks.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub material: MaterialParams,
    pub crossover_material: MaterialParams,
    pub csl: CslParams,
    pub grid: GridSpec,
    pub solver: SolverOptions,
    pub qubit: QubitParams,
    pub junction: JunctionParams,
    pub workloads: Vec<Workload>,
    pub crossover: CrossoverOptions,
    /// Hash of every physics setting (the output section excluded).
    pub hash: String,
}

impl Scenario {
    pub fn validate(config: ScenarioConfig) -> Result<Self> {
        let material = config.material.load("material")?;
        let crossover_material = match &config.crossover.material {
            Some(m) => m.load("crossover.material")?,
            None => material.clone(),
        };

        let c = &config.csl;
        let csl = match c.mass_ratio {
            Some(ratio) => CslParams::with_mass_ratio(c.lambda, c.r_c, ratio),
            None => CslParams::new(c.lambda, c.r_c),
        }
        .map_err(physics_at("csl", ""))?;

        if config.temperatures.is_empty() {
            return Err(CliError::config("temperatures", "list must not be empty"));
        }
        for (i, &t) in config.temperatures.iter().enumerate() {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config(format!("temperatures[{i}]"), format!("must be positive, got {t}")));
            }
        }

        let grid = config.solver.grid_spec();
        EnergyGrid::build(&grid).map_err(physics_at("solver", ""))?;
        for (i, &eps) in config.solver.sensitivity_epsilons.iter().enumerate() {
            EnergyGrid::build(&GridSpec { epsilon: eps, ..grid })
                .map_err(|e| CliError::config(format!("solver.sensitivity_epsilons[{i}]"), e.to_string()))?;
        }
        let solver = config.solver.options();
        solver.validate().map_err(physics_at("solver", ""))?;
        if !(solver.convergence_tol < 1.0) {
            return Err(CliError::config("solver.convergence_tol", "must be below 1"));
        }
        if solver.max_steps == 0 {
            return Err(CliError::config("solver.max_steps", "must be at least 1"));
        }

        let qubit = QubitParams::new(config.qubit.omega_q, config.qubit.t_gate).map_err(physics_at("qubit", ""))?;
        let junction = JunctionParams::new(config.junction.i_c).map_err(physics_at("junction", ""))?;

        let r = &config.rates;
        if r.nucleons_per_group == 0 {
            return Err(CliError::config("rates.nucleons_per_group", "must be at least 1"));
        }
        if r.groups == 0 {
            return Err(CliError::config("rates.groups", "must be at least 1"));
        }

        let x = &config.crossover;
        if !(x.t_min_k > 0.0 && x.t_max_k > x.t_min_k && x.t_max_k.is_finite()) {
            return Err(CliError::config(
                "crossover.t_max_k",
                format!("need 0 < t_min_k < t_max_k, got [{}, {}]", x.t_min_k, x.t_max_k),
            ));
        }
        if !(x.tolerance_k > 0.0) {
            return Err(CliError::config("crossover.tolerance_k", "must be positive"));
        }
        if !(x.energy >= 1.0 && x.energy < grid.x_max) {
            return Err(CliError::config("crossover.energy", "must lie in [1, x_max)"));
        }
        if x.curve_points < 2 {
            return Err(CliError::config("crossover.curve_points", "need at least two points"));
        }

        let b = &config.budget;
        if let Some(t1) = b.t1_s {
            if !(t1 > 0.0 && t1.is_finite()) {
                return Err(CliError::config("budget.t1_s", format!("must be positive, got {t1}")));
            }
        }
        if b.qubit_counts.is_empty() {
            return Err(CliError::config("budget.qubit_counts", "list must not be empty"));
        }
        for (i, &n) in b.qubit_counts.iter().enumerate() {
            gate_budget(1.0, n, qubit.t_gate, b.safety).map_err(|e| {
                let field = match &e {
                    cslqp_core::Error::InvalidParameter { name: "n_qubits", .. } => format!("budget.qubit_counts[{i}]"),
                    cslqp_core::Error::InvalidParameter { name, .. } => format!("budget.{name}"),
                    _ => "budget".to_string(),
                };
                CliError::config(field, e.to_string())
            })?;
        }

        let workloads = config.workloads.clone().unwrap_or_else(workload_catalog);
        for (i, w) in workloads.iter().enumerate() {
            if w.name.is_empty() {
                return Err(CliError::config(format!("workloads[{i}].name"), "must not be empty"));
            }
            if w.n_qubits == 0 {
                return Err(CliError::config(format!("workloads[{i}].n_qubits"), "must be at least 1"));
            }
            if !(w.n_gates > 0.0 && w.n_gates.is_finite()) {
                return Err(CliError::config(format!("workloads[{i}].n_gates"), "must be positive"));
            }
        }

        if config.output.formats.is_empty() {
            return Err(CliError::config("output.formats", "list must not be empty"));
        }

        let hash = scenario_hash(&config)?;
        Ok(Self {
            crossover: config.crossover.options(),
            config,
            material,
            crossover_material,
            csl,
            grid,
            solver,
            qubit,
            junction,
            workloads,
            hash,
        })
    }
}

/// First 16 hex digits of SHA-256 over the canonical JSON of the physics settings.
pub fn scenario_hash(config: &ScenarioConfig) -> Result<String> {
    let mut value = serde_json::to_value(config).map_err(encode_error)?;
    if let Value::Object(map) = &mut value {
        map.remove("output");
    }
    let bytes = serde_json::to_vec(&value).map_err(encode_error)?;
    Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
}

/// Replace the numeric leaf at a dotted path such as `csl.lambda` or
/// `temperatures[1]`. The alias `temperature` replaces the whole
/// temperature list with the single value.
pub fn set_numeric(config: &ScenarioConfig, axis: &str, value: f64) -> Result<ScenarioConfig> {
    let mut root = serde_json::to_value(config).map_err(encode_error)?;
    if axis == "temperature" {
        root["temperatures"] = Value::from(vec![value]);
    } else {
        let leaf = locate(&mut root, axis)?;
        *leaf = match &*leaf {
            Value::Number(n) if n.is_f64() => Value::from(value),
            Value::Number(_) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(CliError::config(axis, format!("integer field cannot take {value}")));
                }
                Value::from(value as u64)
            }
            other => {
                return Err(CliError::config(axis, format!("not a numeric field (holds {other})")));
            }
        };
    }
    serde_json::from_value(root).map_err(|e| CliError::config(axis, e.to_string()))
}

fn locate<'a>(root: &'a mut Value, axis: &str) -> Result<&'a mut Value> {
    let mut node = root;
    for part in axis.split('.') {
        let (key, index) = match part.split_once('[') {
            Some((k, rest)) => {
                let idx = rest
                    .strip_suffix(']')
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| CliError::config(axis, format!("malformed index in `{part}`")))?;
                (k, Some(idx))
            }
            None => (part, None),
        };
        node = node
            .get_mut(key)
            .ok_or_else(|| CliError::config(axis, format!("no field `{key}`")))?;
        if let Some(i) = index {
            node = node
                .get_mut(i)
                .ok_or_else(|| CliError::config(axis, format!("index {i} out of range")))?;
        }
    }
    Ok(node)
}

fn encode_error(e: serde_json::Error) -> CliError {
    CliError::Encode {
        what: "configuration".into(),
        reason: e.to_string(),
    }
}

/// Map a physics validation error to a configuration error under `section`.
fn physics_at(section: &str, field: &'static str) -> impl Fn(cslqp_core::Error) -> CliError {
    let section = section.to_string();
    move |e| {
        let path = match (&e, field) {
            (cslqp_core::Error::InvalidParameter { name, .. }, _) => format!("{section}.{name}"),
            (_, "") => section.clone(),
            (_, f) => format!("{section}.{f}"),
        };
        CliError::config(path, e.to_string())
    }
}
