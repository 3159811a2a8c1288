//! Randomized comparison of every analytic Jacobian against its
//! finite-difference counterpart.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{finite_difference as fd, Coupling};
use crate::error::Result;
use crate::kinematics::{
    bending_angle_interp, boundary_angles, ConfigState, SegmentGeometry, ShapeParams,
};
use crate::quadrature::QuadratureRule;

/// Pass threshold for the direct Jacobians.
pub const ANALYTIC_TOL: f64 = 1e-5;
/// Pass threshold for the composite parameter measurement matrix.
pub const COMPOSITE_TOL: f64 = 1e-4;

/// Deliberate corruption of the analytic path, used to check that the
/// validation actually detects errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Use `[−cos θ, +sin θ]` for the position rows of the modal blocks.
    FlipPositionSign,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub trials: usize,
    pub ident: f64,
    pub geom: f64,
    pub sensitivity: f64,
    pub composite: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.ident <= ANALYTIC_TOL
            && self.geom <= ANALYTIC_TOL
            && self.sensitivity <= ANALYTIC_TOL
            && self.composite <= COMPOSITE_TOL
    }

    /// `(name, max deviation, threshold)` rows.
    pub fn rows(&self) -> [(&'static str, f64, f64); 4] {
        [
            ("ident_jacobian", self.ident, ANALYTIC_TOL),
            ("geom_jacobian", self.geom, ANALYTIC_TOL),
            ("state_param_sensitivity", self.sensitivity, ANALYTIC_TOL),
            ("measurement_matrix_param", self.composite, COMPOSITE_TOL),
        ]
    }
}

/// Draw a state in `[0, 1]` and parameters within ±50% of the nominal
/// magnitudes (sensor length in `[L/2, L)`).
pub fn random_point<R: Rng>(rng: &mut R, geometry: &SegmentGeometry) -> (ConfigState, ShapeParams) {
    let n = ShapeParams::nominal(geometry.length);
    let mut f = || rng.random_range(0.5..1.5);
    let w = ShapeParams::new(
        geometry.length * (0.5 + 0.49 * (f() - 0.5)),
        [n.a[0] * f(), n.a[1] * f()],
        [n.b[0] * f(), n.b[1] * f()],
    );
    (ConfigState(rng.random_range(0.0..=1.0)), w)
}

pub fn validate(
    trials: usize,
    seed: u64,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
    fault: Option<Fault>,
) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ValidationReport {
        trials,
        ident: 0.0,
        geom: 0.0,
        sensitivity: 0.0,
        composite: 0.0,
    };
    for _ in 0..trials {
        let (t, w) = random_point(&mut rng, geometry);

        let mut jw = super::ident_jacobian(t, &w, geometry, q)?;
        let mut hw = super::measurement_matrix_param(t, &w, geometry, q, Coupling::Total)?;
        if fault == Some(Fault::FlipPositionSign) {
            for c in 1..5 {
                jw[(0, c)] = -jw[(0, c)];
                hw[(0, c)] = -hw[(0, c)];
            }
        }
        let jx = super::geom_jacobian(t, &w, geometry, q)?;
        let (ea, eb) = boundary_angles(&w, geometry);
        let theta = bending_angle_interp(t, ea, eb);
        let dxdw = super::state_param_sensitivity(theta, &w, geometry)?;

        let dev = [
            fd::relative_deviation(&jw, &fd::ident_jacobian(t, &w, geometry, q)?),
            fd::relative_deviation(&jx, &fd::geom_jacobian(t, &w, geometry, q)?),
            fd::relative_deviation(&dxdw, &fd::state_param_sensitivity(theta, &w, geometry)?),
            fd::relative_deviation(&hw, &fd::param_matrix(t, &w, geometry, q)?),
        ];
        report.ident = report.ident.max(dev[0]);
        report.geom = report.geom.max(dev[1]);
        report.sensitivity = report.sensitivity.max(dev[2]);
        report.composite = report.composite.max(dev[3]);
    }
    Ok(report)
}
