//! Composite Gauss-Legendre rule used for the backbone position integrals.
//!
//! The integrands are smooth Fresnel-type oscillations (`sin`/`cos` of a
//! quadratic phase), so a fixed rule is accurate to machine precision at
//! realistic bending magnitudes and keeps every Jacobian evaluation
//! deterministic.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest total node count accepted by [`QuadratureRule::new`].
pub const MIN_NODES: usize = 8;

/// User-facing description of the rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Number of equal-width panels over `[0, l]`.
    pub panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 32,
            panels: 1,
        }
    }
}

impl QuadratureSpec {
    pub fn total_nodes(&self) -> usize {
        self.nodes * self.panels
    }

    /// Same rule with twice as many nodes per panel.
    pub fn doubled(&self) -> Self {
        Self {
            nodes: self.nodes * 2,
            panels: self.panels,
        }
    }
}

/// A prepared rule: reference nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    spec: QuadratureSpec,
    reference: Vec<(f64, f64)>,
}

impl QuadratureRule {
    pub fn new(spec: QuadratureSpec) -> Result<Self> {
        if spec.panels == 0 {
            return Err(Error::InvalidQuadrature("panel count must be >= 1".into()));
        }
        if spec.total_nodes() < MIN_NODES {
            return Err(Error::InvalidQuadrature(format!(
                "{} nodes requested, at least {MIN_NODES} required",
                spec.total_nodes()
            )));
        }
        let rule =
            GaussLegendre::new(spec.nodes).map_err(|e| Error::InvalidQuadrature(e.to_string()))?;
        Ok(Self {
            spec,
            reference: rule.as_node_weight_pairs().to_vec(),
        })
    }

    pub fn spec(&self) -> QuadratureSpec {
        self.spec
    }

    /// Nodes and weights mapped onto `[0, upper]`, panel by panel.
    pub fn points(&self, upper: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let width = upper / self.spec.panels as f64;
        let half = 0.5 * width;
        (0..self.spec.panels).flat_map(move |p| {
            let mid = (p as f64 + 0.5) * width;
            self.reference
                .iter()
                .map(move |&(x, w)| (mid + half * x, half * w))
        })
    }

    /// Integrate a scalar function over `[0, upper]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, upper: f64, mut f: F) -> f64 {
        self.points(upper).map(|(s, w)| w * f(s)).sum()
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::new(QuadratureSpec::default()).expect("default quadrature spec is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_degenerate_specs() {
        assert!(QuadratureRule::new(QuadratureSpec {
            nodes: 4,
            panels: 1
        })
        .is_err());
        assert!(QuadratureRule::new(QuadratureSpec {
            nodes: 16,
            panels: 0
        })
        .is_err());
        assert!(QuadratureRule::new(QuadratureSpec {
            nodes: 4,
            panels: 2
        })
        .is_ok());
    }

    #[test]
    fn integrates_polynomials_exactly() {
        let rule = QuadratureRule::new(QuadratureSpec {
            nodes: 8,
            panels: 3,
        })
        .unwrap();
        let got = rule.integrate(2.0, |s| s.powi(5) - 3.0 * s * s + 1.0);
        assert_relative_eq!(got, 64.0 / 6.0 - 8.0 + 2.0, epsilon = 1e-13);
    }

    #[test]
    fn weights_sum_to_interval_length() {
        let rule = QuadratureRule::default();
        let total: f64 = rule.points(60.0).map(|(_, w)| w).sum();
        assert_relative_eq!(total, 60.0, epsilon = 1e-12);
        assert!(rule.points(60.0).all(|(s, _)| (0.0..=60.0).contains(&s)));
    }

    #[test]
    fn fresnel_integrand_matches_fine_trapezoid() {
        let rule = QuadratureRule::default();
        let phase = |s: f64| -0.01 * s - 0.0025 * s * s / 2.0;
        let got = rule.integrate(60.0, |s| phase(s).sin());
        // composite trapezoid, 2e5 panels
        let n = 200_000;
        let h = 60.0 / n as f64;
        let mut trap = 0.5 * (phase(0.0).sin() + phase(60.0).sin());
        for i in 1..n {
            trap += phase(i as f64 * h).sin();
        }
        trap *= h;
        assert!((got - trap).abs() < 1e-7, "{got} vs {trap}");
    }
}
