//! Gauss-Legendre quadrature and integrals over the gap-edge singularity.
//!
//! Integrals of the form ∫₁^X g(x) ρ(x) dx are taken in the variable
//! x = cosh u, for which ρ(x) dx = cosh u du and the inverse square-root
//! divergence at the gap edge disappears.

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            // Tricomi's initial guess, then Newton on P_n.
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, z);
                derivative = dp;
                let step = p / dp;
                z -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, z);
            if dp != 0.0 {
                derivative = dp;
            }
            let w = 2.0 / ((1.0 - z * z) * derivative * derivative);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫ₐᵇ f with this rule on a single panel.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(mid + half * z))
            .sum::<f64>()
            * half
    }

    /// ∫ₐᵇ f on `panels` equal panels.
    pub fn composite<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| self.integrate(f, a + k as f64 * h, a + (k + 1) as f64 * h))
            .sum()
    }

    /// Physical abscissae and weights of the composite rule on [a, b].
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (&z, &w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * h * z, 0.5 * h * w));
            }
        }
        out
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Settings for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest number of subintervals before giving up.
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn panel<F: Fn(f64) -> f64>(rule: &GaussLegendre, f: &F, a: f64, b: f64) -> Panel {
    let whole = rule.integrate(f, a, b);
    let mid = 0.5 * (a + b);
    let value = rule.integrate(f, a, mid) + rule.integrate(f, mid, b);
    Panel {
        a,
        b,
        value,
        error: (value - whole).abs(),
    }
}

/// Globally adaptive bisection: the panel with the largest error estimate
/// (10-point rule against its two half-panel refinements) is split until
/// the summed estimate meets the tolerance.
pub fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    options: AdaptiveOptions,
    context: &'static str,
) -> Result<Estimate> {
    let rule = GaussLegendre::new(10);
    let mut panels = vec![panel(&rule, f, a, b)];
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let magnitude: f64 = panels.iter().map(|p| p.value.abs()).sum();
        let tol = options
            .abs_tol
            .max(options.rel_tol * value.abs())
            .max(50.0 * f64::EPSILON * magnitude);
        if !value.is_finite() {
            return Err(Error::Quadrature { context, estimate: value, error });
        }
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        if panels.len() >= options.max_intervals {
            return Err(Error::Quadrature { context, estimate: value, error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(panel(&rule, f, p.a, mid));
        panels.push(panel(&rule, f, mid, p.b));
    }
}

/// ∫₁^{x_hi} g(x) ρ(x) dx through the substitution x = cosh u.
pub fn gap_edge_integral<G: Fn(f64) -> f64>(
    g: &G,
    x_hi: f64,
    options: AdaptiveOptions,
    context: &'static str,
) -> Result<Estimate> {
    gap_edge_integral_between(g, 1.0, x_hi, options, context)
}

/// ∫_{x_lo}^{x_hi} g(x) ρ(x) dx with x_lo ≥ 1, through x = cosh u.
pub fn gap_edge_integral_between<G: Fn(f64) -> f64>(
    g: &G,
    x_lo: f64,
    x_hi: f64,
    options: AdaptiveOptions,
    context: &'static str,
) -> Result<Estimate> {
    if !(x_lo >= 1.0 && x_hi >= x_lo) {
        return Err(crate::error::domain(
            "gap_edge_integral",
            format!("requires 1 <= x_lo <= x_hi, got [{x_lo}, {x_hi}]"),
        ));
    }
    let u_lo = x_lo.acosh();
    let u_hi = x_hi.acosh();
    adaptive(&|u: f64| g(u.cosh()) * u.cosh(), u_lo, u_hi, options, context)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = GaussLegendre::new(5);
        // Degree 9 is integrated exactly by 5 nodes.
        let v = rule.integrate(&|x: f64| x.powi(8) + x.powi(9), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn odd_rule_has_zero_node() {
        let rule = GaussLegendre::new(7);
        assert!(rule.nodes()[3].abs() < 1e-16);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let est = adaptive(
            &|x: f64| (-(x - 0.3).powi(2) / 1e-6).exp(),
            0.0,
            1.0,
            AdaptiveOptions::default(),
            "test",
        )
        .unwrap();
        let exact = (std::f64::consts::PI * 1e-6).sqrt();
        assert!((est.value - exact).abs() / exact < 1e-9);
    }

    #[test]
    fn dos_integral_matches_closed_form() {
        for x_hi in [1.5, 2.0, 4.0] {
            let est = gap_edge_integral(&|_| 1.0, x_hi, AdaptiveOptions::default(), "test").unwrap();
            let exact = ((x_hi - 1.0) * (x_hi + 1.0) as f64).sqrt();
            assert!((est.value - exact).abs() / exact < 1e-8);
        }
    }

    #[test]
    fn gap_edge_rejects_bad_range() {
        assert!(gap_edge_integral(&|_| 1.0, 0.5, AdaptiveOptions::default(), "test").is_err());
    }
}
