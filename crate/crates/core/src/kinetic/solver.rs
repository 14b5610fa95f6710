//! Time marching of the kinetic equation to its driven steady state.
//!
//! The collision operator spans more than fifteen decades of rates
//! (fast relaxation high above the gap, very slow emission right at the gap
//! edge), so steps are linearly implicit: each step solves
//! (I/Δτ − J) δf = F(f) with the exact Jacobian J, in scaled time τ = γ0 t.
//! The step grows geometrically while states stay physical.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::csl_rates::CslGenerationCurve;
use crate::error::{invalid, Error, Result};
use crate::kinetic::grid::OccupationFunction;
use crate::kinetic::rhs::KineticModel;

/// Settings for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold on the net rate relative to the gross flux at every node.
    pub convergence_tol: f64,
    /// Occupations below this floor are treated as empty in the convergence test.
    pub occupation_floor: f64,
    pub max_steps: usize,
    /// First step in units of τ0.
    pub dt_initial: f64,
    pub dt_growth: f64,
    /// Step reduction after a rejected step.
    pub dt_shrink: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Stop at this physical time [s] instead of running to convergence.
    pub t_end: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            convergence_tol: 1e-8,
            occupation_floor: 1e-40,
            max_steps: 10_000,
            dt_initial: 1e-3,
            dt_growth: 3.0,
            dt_shrink: 0.25,
            dt_min: 1e-12,
            dt_max: 1e40,
            t_end: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_tol > 0.0) {
            return Err(invalid("convergence_tol", "must be positive"));
        }
        if !(self.dt_initial > 0.0 && self.dt_min > 0.0 && self.dt_max >= self.dt_initial) {
            return Err(invalid("dt_initial", "need 0 < dt_min, 0 < dt_initial <= dt_max"));
        }
        if !(self.dt_growth >= 1.0 && self.dt_shrink > 0.0 && self.dt_shrink < 1.0) {
            return Err(invalid("dt_growth", "need growth >= 1 and shrink in (0, 1)"));
        }
        if self.max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// Final state and diagnostics of a time-marching run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutput {
    pub occupation: OccupationFunction,
    pub converged: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Physical time covered [s].
    pub evolved_time_s: f64,
    /// Final convergence measure.
    pub residual: f64,
    /// Convergence measure after every accepted step.
    pub residual_history: Vec<f64>,
}

/// Net rate over gross flux, maximised over nodes.
fn residual(model: &KineticModel, f: &[f64], ln_f: &[f64], drive: Option<&[f64]>, floor: f64) -> f64 {
    let b = model.scaled_breakdown(f, ln_f, drive);
    (0..f.len())
        .map(|i| {
            let gross = b.gross_flux(i);
            if f[i] < floor && b.total[i].abs() <= floor {
                0.0
            } else if gross > 0.0 {
                b.total[i].abs() / gross
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

/// March the kinetic equation from `initial` and return the final state
/// whether or not it converged.
pub fn evolve_with_report(
    model: &KineticModel,
    initial: &OccupationFunction,
    drive: Option<&CslGenerationCurve>,
    options: &SolverOptions,
) -> Result<SolverOutput> {
    options.validate()?;
    if !initial.grid().same_nodes(model.grid()) {
        return Err(Error::GridMismatch("initial occupation grid differs from kernel grid".into()));
    }
    let drive = drive.map(|d| d.rates.as_slice());
    if drive.is_some_and(|d| d.len() != model.grid().len()) {
        return Err(Error::GridMismatch("generation curve length differs from grid".into()));
    }
    let n = model.grid().len();
    let mut f = initial.values().to_vec();
    let mut ln_f = initial.ln_values().to_vec();
    let mut dt = options.dt_initial;
    let mut tau = 0.0;
    let tau_end = options.t_end.map(|t| t * model.gamma0());
    let (mut accepted, mut rejected) = (0, 0);
    let mut history = Vec::new();
    let mut res = f64::INFINITY;
    let mut converged = false;

    while accepted + rejected < options.max_steps {
        if let Some(end) = tau_end {
            if tau >= end {
                break;
            }
            dt = dt.min(end - tau);
        }
        let rhs = model.scaled_breakdown(&f, &ln_f, drive).total;
        let jac = model.scaled_jacobian(&f);
        let mut system = DMatrix::from_row_slice(n, n, &jac);
        system.neg_mut();
        for i in 0..n {
            system[(i, i)] += 1.0 / dt;
        }
        let step = system
            .lu()
            .solve(&DVector::from_vec(rhs))
            .ok_or(Error::SingularSystem)?;
        let candidate: Vec<f64> = f.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
        if candidate.iter().any(|v| !(*v >= 0.0 && *v <= 1.0)) {
            rejected += 1;
            dt *= options.dt_shrink;
            if dt < options.dt_min {
                return Err(Error::StepUnderflow {
                    time: tau / model.gamma0(),
                    dt: dt / model.gamma0(),
                });
            }
            continue;
        }
        f = candidate;
        ln_f = f.iter().map(|v| v.ln()).collect();
        tau += dt;
        accepted += 1;
        res = residual(model, &f, &ln_f, drive, options.occupation_floor);
        history.push(res);
        if tau_end.is_none() && res < options.convergence_tol {
            converged = true;
            break;
        }
        dt = (dt * options.dt_growth).min(options.dt_max);
    }
    if tau_end.is_some() {
        converged = res < options.convergence_tol;
    }
    Ok(SolverOutput {
        occupation: OccupationFunction::from_values(model.grid(), f)?,
        converged,
        accepted_steps: accepted,
        rejected_steps: rejected,
        evolved_time_s: tau / model.gamma0(),
        residual: res,
        residual_history: history,
    })
}

/// March to steady state; fails if the run does not converge.
pub fn evolve(
    model: &KineticModel,
    initial: &OccupationFunction,
    drive: Option<&CslGenerationCurve>,
    options: &SolverOptions,
) -> Result<SolverOutput> {
    let out = evolve_with_report(model, initial, drive, options)?;
    if !out.converged && options.t_end.is_none() {
        return Err(Error::NonConvergence {
            steps: out.accepted_steps + out.rejected_steps,
            residual: out.residual,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::grid::{EnergyGrid, GridSpec};
    use crate::kinetic::rhs::GapEdgeBoundary;
    use crate::materials::MaterialParams;

    fn setup(n_nodes: usize, temperature: f64) -> (KineticModel, EnergyGrid, MaterialParams) {
        let grid = EnergyGrid::build(&GridSpec { n_nodes, ..GridSpec::default() }).unwrap();
        let al = MaterialParams::aluminum();
        let model = KineticModel::new(&grid, &al, temperature, GapEdgeBoundary::Absorbing).unwrap();
        (model, grid, al)
    }

    #[test]
    fn thermal_state_without_drive_stays_put() {
        let (model, grid, al) = setup(60, 0.05);
        let f0 = OccupationFunction::thermal(&grid, al.reduced_temperature(0.05)).unwrap();
        let out = evolve(&model, &f0, None, &SolverOptions::default()).unwrap();
        assert_eq!(out.accepted_steps, 1);
        for (a, b) in out.occupation.values().iter().zip(f0.values()) {
            assert!((a - b).abs() <= 1e-10 * b.abs());
        }
    }

    #[test]
    fn relaxes_to_thermal_from_hot_start() {
        let (model, grid, al) = setup(60, 0.1);
        let hot = OccupationFunction::thermal(&grid, al.reduced_temperature(0.3)).unwrap();
        let out = evolve(&model, &hot, None, &SolverOptions::default()).unwrap();
        assert!(out.converged);
        let cold = OccupationFunction::thermal(&grid, al.reduced_temperature(0.1)).unwrap();
        // The absorbing edge drains a little; away from it the state is thermal.
        for i in 10..grid.len() {
            let r = out.occupation.values()[i] / cold.values()[i];
            assert!((r - 1.0).abs() < 0.05, "node {i}: ratio {r}");
        }
    }

    #[test]
    fn step_limit_reports_non_convergence() {
        let (model, grid, al) = setup(40, 0.02);
        let f0 = OccupationFunction::thermal(&grid, al.reduced_temperature(0.02)).unwrap();
        let drive = CslGenerationCurve::uniform(&grid, 1e-12);
        let options = SolverOptions { max_steps: 3, ..SolverOptions::default() };
        let err = evolve(&model, &f0, Some(&drive), &options).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
        let report = evolve_with_report(&model, &f0, Some(&drive), &options).unwrap();
        assert!(!report.converged);
    }

    #[test]
    fn fixed_end_time_is_respected() {
        let (model, grid, al) = setup(40, 0.02);
        let f0 = OccupationFunction::thermal(&grid, al.reduced_temperature(0.02)).unwrap();
        let drive = CslGenerationCurve::uniform(&grid, 1e-12);
        let options = SolverOptions { t_end: Some(1e-3), ..SolverOptions::default() };
        let out = evolve(&model, &f0, Some(&drive), &options).unwrap();
        assert!((out.evolved_time_s - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_options() {
        let options = SolverOptions { dt_growth: 0.5, ..SolverOptions::default() };
        assert!(options.validate().is_err());
    }
}
