//! Energy grid above the gap and occupation functions sampled on it.

use serde::{Deserialize, Serialize};

use crate::bcs::{ln_fermi_reduced, Occupation};
use crate::error::{invalid, Result};

/// Smallest node count; the fourth-order end weights need six nodes.
pub const MIN_NODES: usize = 8;

/// Overshoot below zero that is silently clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

/// Shape of an energy grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Distance of the first node from the gap edge, in units of the gap.
    pub epsilon: f64,
    /// Last node, in units of the gap.
    pub x_max: f64,
    pub n_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            x_max: 4.0,
            n_nodes: 200,
        }
    }
}

/// Nodes uniform in u with x = cosh u, so they cluster at the gap edge.
///
/// Two weight vectors are kept. `weights` integrate plain functions of x,
/// and `rho_weights` integrate functions multiplied by the density of
/// states, Σ ρw_i g(x_i) ≈ ∫ g ρ dx over [x_0, x_max].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    spec: GridSpec,
    nodes: Vec<f64>,
    u_nodes: Vec<f64>,
    du: f64,
    weights: Vec<f64>,
    rho_weights: Vec<f64>,
}

impl EnergyGrid {
    pub fn build(spec: &GridSpec) -> Result<Self> {
        if spec.n_nodes < MIN_NODES {
            return Err(invalid("n_nodes", format!("need at least {MIN_NODES}, got {}", spec.n_nodes)));
        }
        if !(spec.epsilon > 0.0 && spec.epsilon < 0.5) {
            return Err(invalid("epsilon", format!("must lie in (0, 0.5), got {}", spec.epsilon)));
        }
        if !(spec.x_max > 1.0 + 2.0 * spec.epsilon && spec.x_max.is_finite()) {
            return Err(invalid("x_max", format!("must exceed 1 + 2ε, got {}", spec.x_max)));
        }
        let n = spec.n_nodes;
        let u_lo = (1.0 + spec.epsilon).acosh();
        let u_hi = spec.x_max.acosh();
        let du = (u_hi - u_lo) / (n - 1) as f64;
        let u_nodes: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { u_hi } else { u_lo + i as f64 * du })
            .collect();
        let mut nodes: Vec<f64> = u_nodes.iter().map(|u| u.cosh()).collect();
        nodes[0] = 1.0 + spec.epsilon;
        nodes[n - 1] = spec.x_max;
        let coefficients = end_corrected_coefficients(n);
        let weights = u_nodes
            .iter()
            .zip(&coefficients)
            .map(|(u, c)| du * c * u.sinh())
            .collect();
        let rho_weights = u_nodes
            .iter()
            .zip(&coefficients)
            .map(|(u, c)| du * c * u.cosh())
            .collect();
        Ok(Self {
            spec: *spec,
            nodes,
            u_nodes,
            du,
            weights,
            rho_weights,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.u_nodes
    }

    pub fn du(&self) -> f64 {
        self.du
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rho_weights(&self) -> &[f64] {
        &self.rho_weights
    }

    /// Same nodes to within rounding.
    pub fn same_nodes(&self, other: &EnergyGrid) -> bool {
        self.len() == other.len()
            && self
                .nodes
                .iter()
                .zip(&other.nodes)
                .all(|(a, b)| (a - b).abs() <= 1e-14 * a.abs())
    }

    /// Bracketing interval and fractional position of x in u, if inside the grid.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let n = self.len();
        if !(x >= self.nodes[0] && x <= self.nodes[n - 1]) {
            return None;
        }
        let u = x.acosh().max(self.u_nodes[0]);
        let k = (((u - self.u_nodes[0]) / self.du) as usize).min(n - 2);
        let frac = ((u - self.u_nodes[k]) / (self.u_nodes[k + 1] - self.u_nodes[k])).clamp(0.0, 1.0);
        Some((k, frac))
    }
}

/// Extended trapezoid weights with fourth-order end corrections.
fn end_corrected_coefficients(n: usize) -> Vec<f64> {
    let mut c = vec![1.0; n];
    let ends = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
    for (k, w) in ends.iter().enumerate() {
        c[k] = *w;
        c[n - 1 - k] = *w;
    }
    c
}

/// Where a node sits with respect to the validity of the approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeFlag {
    Regular,
    /// First node next to the gap edge, excluded from comparisons.
    GapEdge,
}

impl NodeFlag {
    pub fn label(&self) -> &'static str {
        match self {
            NodeFlag::Regular => "regular",
            NodeFlag::GapEdge => "gap_edge",
        }
    }
}

/// Occupation values on an energy grid, with their logarithms.
///
/// Between nodes, ln f is interpolated linearly in u. Outside the grid the
/// occupation is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationFunction {
    grid: EnergyGrid,
    values: Vec<f64>,
    ln_values: Vec<f64>,
    flags: Vec<NodeFlag>,
    clamped: usize,
}

impl OccupationFunction {
    pub fn from_values(grid: &EnergyGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(crate::Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let mut clamped = 0;
        let mut clean = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v > 1.0 + CLAMP_TOLERANCE || v < -CLAMP_TOLERANCE {
                return Err(invalid(
                    "occupation",
                    format!("value {v:e} at node {i} outside [0, 1]"),
                ));
            }
            if !(0.0..=1.0).contains(&v) {
                clamped += 1;
            }
            clean.push(v.clamp(0.0, 1.0));
        }
        let ln_values = clean.iter().map(|v| v.ln()).collect();
        Ok(Self {
            grid: grid.clone(),
            values: clean,
            ln_values,
            flags: vec![NodeFlag::Regular; grid.len()],
            clamped,
        })
    }

    /// Build from logarithms, which keeps values below the f64 range exact.
    pub fn from_ln_values(grid: &EnergyGrid, ln_values: Vec<f64>) -> Result<Self> {
        if ln_values.len() != grid.len() {
            return Err(crate::Error::GridMismatch(format!(
                "{} values for {} nodes",
                ln_values.len(),
                grid.len()
            )));
        }
        if let Some(i) = ln_values.iter().position(|l| l.is_nan() || *l > CLAMP_TOLERANCE) {
            return Err(invalid("occupation", format!("ln value {} at node {i} above zero", ln_values[i])));
        }
        let ln_values: Vec<f64> = ln_values.into_iter().map(|l| l.min(0.0)).collect();
        Ok(Self {
            grid: grid.clone(),
            values: ln_values.iter().map(|l| l.exp()).collect(),
            ln_values,
            flags: vec![NodeFlag::Regular; grid.len()],
            clamped: 0,
        })
    }

    /// Fermi-Dirac occupation at reduced temperature t = k_B T / Δ.
    pub fn thermal(grid: &EnergyGrid, reduced_temperature: f64) -> Result<Self> {
        if !(reduced_temperature > 0.0) {
            return Err(invalid("temperature", "must be positive"));
        }
        let ln = grid
            .nodes()
            .iter()
            .map(|&x| ln_fermi_reduced(x, reduced_temperature))
            .collect();
        Self::from_ln_values(grid, ln)
    }

    pub fn with_flags(mut self, flags: Vec<NodeFlag>) -> Result<Self> {
        if flags.len() != self.values.len() {
            return Err(crate::Error::GridMismatch("flag count differs from node count".into()));
        }
        self.flags = flags;
        Ok(self)
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ln_values(&self) -> &[f64] {
        &self.ln_values
    }

    pub fn flags(&self) -> &[NodeFlag] {
        &self.flags
    }

    /// Number of slightly negative or above-one values that were clamped.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

impl Occupation for OccupationFunction {
    fn ln_occupation(&self, x: f64) -> f64 {
        let Some((k, frac)) = self.grid.locate(x) else {
            return f64::NEG_INFINITY;
        };
        let (a, b) = (self.ln_values[k], self.ln_values[k + 1]);
        if a.is_finite() && b.is_finite() {
            a + frac * (b - a)
        } else {
            ((1.0 - frac) * self.values[k] + frac * self.values[k + 1]).ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_grid_shape() {
        let g = EnergyGrid::build(&GridSpec::default()).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g.nodes()[0], 1.0 + 1e-4);
        assert_eq!(g.nodes()[199], 4.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        // Spacing grows away from the gap edge.
        assert!(g.nodes()[1] - g.nodes()[0] < g.nodes()[199] - g.nodes()[198]);
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            GridSpec { n_nodes: 3, ..GridSpec::default() },
            GridSpec { epsilon: 0.0, ..GridSpec::default() },
            GridSpec { x_max: 1.0, ..GridSpec::default() },
        ] {
            assert!(EnergyGrid::build(&spec).is_err());
        }
    }

    #[test]
    fn dos_weights_reproduce_closed_form() {
        for x_max in [1.5, 2.0, 4.0] {
            let g = EnergyGrid::build(&GridSpec { x_max, ..GridSpec::default() }).unwrap();
            let sum: f64 = g.rho_weights().iter().sum();
            let x0 = g.nodes()[0];
            let exact = (x_max * x_max - 1.0f64).sqrt() - (x0 * x0 - 1.0f64).sqrt();
            assert!((sum / exact - 1.0).abs() < 1e-8, "x_max={x_max}: {sum} vs {exact}");
        }
    }

    #[test]
    fn interpolation_exact_at_nodes_and_zero_outside() {
        let g = EnergyGrid::build(&GridSpec { n_nodes: 30, ..GridSpec::default() }).unwrap();
        let f = OccupationFunction::thermal(&g, 0.05).unwrap();
        for (i, &x) in g.nodes().iter().enumerate() {
            assert!((f.ln_occupation(x) - f.ln_values()[i]).abs() < 1e-9 * f.ln_values()[i].abs());
        }
        assert_eq!(f.occupation(1.0), 0.0);
        assert_eq!(f.occupation(5.0), 0.0);
    }

    #[test]
    fn clamps_tiny_overshoot_only() {
        let g = EnergyGrid::build(&GridSpec { n_nodes: 10, ..GridSpec::default() }).unwrap();
        let mut v = vec![1e-3; 10];
        v[2] = -1e-14;
        let f = OccupationFunction::from_values(&g, v.clone()).unwrap();
        assert_eq!(f.clamped(), 1);
        assert_eq!(f.values()[2], 0.0);
        v[2] = -1e-6;
        assert!(OccupationFunction::from_values(&g, v).is_err());
    }

    proptest! {
        #[test]
        fn interpolated_thermal_tracks_exact(x in 1.001f64..3.99, t in 0.01f64..0.5) {
            let g = EnergyGrid::build(&GridSpec::default()).unwrap();
            let f = OccupationFunction::thermal(&g, t).unwrap();
            let exact = ln_fermi_reduced(x, t);
            prop_assert!((f.ln_occupation(x) - exact).abs() < 1e-3 * exact.abs().max(1.0));
        }
    }
}
