//! Analytic derivatives of the measurement model.
//!
//! * identification Jacobian `J_w = ∂h_p/∂w` (3×5)
//! * geometric Jacobian `J_x = ∂h_p/∂t` (3×1)
//! * state–parameter sensitivity `dt/dw` with the measured tip angle held fixed
//! * the two filter measurement matrices built from them
//!
//! Position rows follow from differentiating `p = ∫ [sin θ, cos θ] ds`, so
//! `∂p_x/∂θ = +cos θ` and `∂p_z/∂θ = −sin θ`. The [`finite_difference`]
//! module provides the independent oracle every analytic form is checked
//! against.

pub mod finite_difference;
pub mod validation;

use nalgebra::{Matrix3x5, RowVector5, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    bending_angle_interp, bending_angle_raw, boundary_angles, curvature_raw, integrated_basis,
    ConfigState, SegmentGeometry, ShapeParams,
};
use crate::quadrature::QuadratureRule;

/// Minimum separation of the boundary bending angles (rad).
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Rows `(p_x, p_z, θ)`, columns `(l, a₁, a₂, b₁, b₂)`.
pub type IdentificationJacobian = Matrix3x5<f64>;

/// `(∂p_x/∂t, ∂p_z/∂t, ∂θ/∂t)` at the sensor.
pub type GeometricJacobian = Vector3<f64>;

/// How the parameter-filter measurement matrix accounts for the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `J_w + J_x · dt/dw`: the state follows the parameters so that the
    /// realized tip bending angle is preserved.
    #[default]
    Total,
    /// `J_w` alone (diagnostic).
    IdentificationOnly,
}

/// Weighted backbone moments `∫₀ˡ cos θ_s ν ds` and `−∫₀ˡ sin θ_s ν ds`.
struct Moments {
    cos_nu: Vector2<f64>,
    neg_sin_nu: Vector2<f64>,
}

fn moments(t: f64, w: &ShapeParams, q: &QuadratureRule) -> Moments {
    let mut m = Moments {
        cos_nu: Vector2::zeros(),
        neg_sin_nu: Vector2::zeros(),
    };
    for (s, wt) in q.points(w.l) {
        let (sin, cos) = bending_angle_raw(s, t, w).sin_cos();
        let nu = integrated_basis(s);
        m.cos_nu += nu * (wt * cos);
        m.neg_sin_nu -= nu * (wt * sin);
    }
    m
}

/// Identification Jacobian `∂h_p/∂w` at `(t, w)`.
pub fn ident_jacobian(
    t: ConfigState,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<IdentificationJacobian> {
    w.validate(geometry)?;
    let t = t.t();
    let m = moments(t, w, q);
    let nu_l = integrated_basis(w.l);
    let (sin_l, cos_l) = bending_angle_raw(w.l, t, w).sin_cos();

    let mut jac = IdentificationJacobian::zeros();
    jac.set_column(0, &Vector3::new(sin_l, cos_l, curvature_raw(w.l, t, w)));
    for (offset, weight) in [(1, 1.0 - t), (3, t)] {
        for k in 0..2 {
            jac[(0, offset + k)] = weight * m.cos_nu[k];
            jac[(1, offset + k)] = weight * m.neg_sin_nu[k];
            jac[(2, offset + k)] = weight * nu_l[k];
        }
    }
    Ok(jac)
}

/// Geometric Jacobian `∂h_p/∂t` at `(t, w)`. Zero when `a = b`.
pub fn geom_jacobian(
    t: ConfigState,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<GeometricJacobian> {
    w.validate(geometry)?;
    let m = moments(t.t(), w, q);
    // ∂θ_s/∂t = (b − a)ᵀν(s)
    let db = w.b_vec() - w.a_vec();
    Ok(Vector3::new(
        db.dot(&m.cos_nu),
        db.dot(&m.neg_sin_nu),
        db.dot(&integrated_basis(w.l)),
    ))
}

/// `dt/dw` for `t = (θ_e − θ_ea)/(θ_eb − θ_ea)` with `θ_e` treated as an
/// exogenous measurement. Boundary angles are taken at `s = L`.
pub fn state_param_sensitivity(
    theta_e: f64,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
) -> Result<RowVector5<f64>> {
    let (ea, eb) = boundary_angles(w, geometry);
    let span = eb - ea;
    if span.abs() < DEGENERACY_TOL || !span.is_finite() {
        return Err(Error::DegenerateHomotopy { separation: span });
    }
    let d_ea = (theta_e - eb) / (span * span);
    let d_eb = -(theta_e - ea) / (span * span);
    let nu = integrated_basis(geometry.length);
    Ok(RowVector5::new(
        0.0,
        d_ea * nu[0],
        d_ea * nu[1],
        d_eb * nu[0],
        d_eb * nu[1],
    ))
}

/// State-filter measurement matrix: `J_x` at the predicted state and the
/// previous parameter estimate.
pub fn measurement_matrix_state(
    t_pred: ConfigState,
    w_prev: &ShapeParams,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<GeometricJacobian> {
    geom_jacobian(t_pred, w_prev, geometry, q)
}

/// Parameter-filter measurement matrix at `(x, w_pred)`.
///
/// With [`Coupling::Total`] the tip angle anchoring `dt/dw` is the one the
/// state realizes on the current homotopy, so `t(w_pred) = x` at the
/// linearization point.
pub fn measurement_matrix_param(
    x: ConfigState,
    w_pred: &ShapeParams,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
    coupling: Coupling,
) -> Result<IdentificationJacobian> {
    let jw = ident_jacobian(x, w_pred, geometry, q)?;
    match coupling {
        Coupling::IdentificationOnly => Ok(jw),
        Coupling::Total => {
            let (ea, eb) = boundary_angles(w_pred, geometry);
            let theta_e = bending_angle_interp(x, ea, eb);
            let dxdw = state_param_sensitivity(theta_e, w_pred, geometry)?;
            let jx = geom_jacobian(x, w_pred, geometry, q)?;
            Ok(jw + jx * dxdw)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::finite_difference as fd;
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const G: SegmentGeometry = SegmentGeometry { length: 60.0 };

    fn rule() -> QuadratureRule {
        QuadratureRule::default()
    }

    #[test]
    fn straight_backbone_length_column() {
        let w = ShapeParams::new(50.0, [0.0; 2], [0.0; 2]);
        let j = ident_jacobian(ConfigState(0.3), &w, &G, &rule()).unwrap();
        assert_eq!(j.column(0).clone_owned(), Vector3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn theta_row_of_a_block_at_t0() {
        let w = ShapeParams::nominal(60.0);
        let j = ident_jacobian(ConfigState(0.0), &w, &G, &rule()).unwrap();
        assert_abs_diff_eq!(j[(2, 1)], 60.0, epsilon = 1e-12);
        assert_abs_diff_eq!(j[(2, 2)], 1800.0, epsilon = 1e-9);
        assert_eq!(j[(2, 3)], 0.0);
        assert_eq!(j[(2, 4)], 0.0);
    }

    #[test]
    fn geometric_jacobian_examples() {
        let w = ShapeParams::new(60.0, [0.01, 0.002], [0.01, 0.002]);
        assert_eq!(
            geom_jacobian(ConfigState(0.4), &w, &G, &rule()).unwrap(),
            Vector3::zeros()
        );

        // straight at t = 0: cos θ = 1, sin θ = 0
        let k0 = 0.02;
        let w = ShapeParams::new(40.0, [0.0, 0.0], [k0, 0.0]);
        let jx = geom_jacobian(ConfigState(0.0), &w, &G, &rule()).unwrap();
        assert_abs_diff_eq!(jx[0], k0 * 40.0 * 40.0 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(jx[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jx[2], k0 * 40.0, epsilon = 1e-15);
    }

    #[test]
    fn sensitivity_boundary_and_midpoint() {
        let w = ShapeParams::nominal(60.0);
        let (ea, eb) = boundary_angles(&w, &G);
        let at_a = state_param_sensitivity(ea, &w, &G).unwrap();
        assert_eq!(at_a[3], 0.0);
        assert_eq!(at_a[4], 0.0);

        let mid = state_param_sensitivity(0.5 * (ea + eb), &w, &G).unwrap();
        let expected = 0.5 / (eb - ea).abs();
        // ∂t/∂θ_ea and ∂t/∂θ_eb multiply ν(L)[0] = L
        assert_abs_diff_eq!(mid[1].abs() / 60.0, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(mid[3].abs() / 60.0, expected, epsilon = 1e-12);
        assert_eq!(mid[0], 0.0);
    }

    #[test]
    fn degenerate_homotopy_is_signalled() {
        let w = ShapeParams::new(60.0, [0.01, 0.0], [0.01, 0.0]);
        assert!(matches!(
            state_param_sensitivity(0.3, &w, &G),
            Err(Error::DegenerateHomotopy { .. })
        ));
        assert!(matches!(
            measurement_matrix_param(ConfigState(0.5), &w, &G, &rule(), Coupling::Total),
            Err(Error::DegenerateHomotopy { .. })
        ));
    }

    #[test]
    fn measurement_matrices_reduce_to_components() {
        let w = ShapeParams::nominal(60.0);
        let q = rule();
        let hx = measurement_matrix_state(ConfigState(0.4), &w, &G, &q).unwrap();
        assert_eq!(hx, geom_jacobian(ConfigState(0.4), &w, &G, &q).unwrap());
        let hw =
            measurement_matrix_param(ConfigState(0.4), &w, &G, &q, Coupling::IdentificationOnly)
                .unwrap();
        assert_eq!(hw, ident_jacobian(ConfigState(0.4), &w, &G, &q).unwrap());
    }

    #[test]
    fn total_coupling_cancels_tip_angle_sensitivity_at_tip() {
        // sensor at L: t re-adjusts to keep θ_e, so a/b columns of the θ row vanish
        let w = ShapeParams::nominal(60.0);
        let hw =
            measurement_matrix_param(ConfigState(0.35), &w, &G, &rule(), Coupling::Total).unwrap();
        for c in 1..5 {
            assert!(hw[(2, c)].abs() < 1e-9, "column {c}: {}", hw[(2, c)]);
        }
    }

    fn sample() -> impl Strategy<Value = (f64, ShapeParams)> {
        let n = ShapeParams::nominal(60.0);
        (
            0.0f64..=1.0,
            0.5f64..0.99,
            0.5f64..1.5,
            0.5f64..1.5,
            0.5f64..1.5,
            0.5f64..1.5,
        )
            .prop_map(move |(t, l, a1, a2, b1, b2)| {
                (
                    t,
                    ShapeParams::new(
                        60.0 * l,
                        [n.a[0] * a1, n.a[1] * a2],
                        [n.b[0] * b1, n.b[1] * b2],
                    ),
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ident_matches_finite_differences((t, w) in sample()) {
            let q = rule();
            let a = ident_jacobian(ConfigState(t), &w, &G, &q).unwrap();
            let n = fd::ident_jacobian(ConfigState(t), &w, &G, &q).unwrap();
            prop_assert!(fd::relative_deviation(&a, &n) <= 1e-5);
        }

        #[test]
        fn geom_matches_finite_differences((t, w) in sample()) {
            let q = rule();
            let a = geom_jacobian(ConfigState(t), &w, &G, &q).unwrap();
            let n = fd::geom_jacobian(ConfigState(t), &w, &G, &q).unwrap();
            prop_assert!(fd::relative_deviation(&a, &n) <= 1e-5);
        }

        #[test]
        fn composite_matches_finite_differences((t, w) in sample()) {
            let q = rule();
            let a = measurement_matrix_param(ConfigState(t), &w, &G, &q, Coupling::Total).unwrap();
            let n = fd::param_matrix(ConfigState(t), &w, &G, &q).unwrap();
            prop_assert!(fd::relative_deviation(&a, &n) <= 1e-4);
        }

        #[test]
        fn swap_symmetry((t, w) in sample()) {
            let q = rule();
            let j = ident_jacobian(ConfigState(t), &w, &G, &q).unwrap();
            let js = ident_jacobian(ConfigState(1.0 - t), &w.swapped(), &G, &q).unwrap();
            let a_block = j.fixed_columns::<2>(1).clone_owned();
            let b_block_swapped = js.fixed_columns::<2>(3).clone_owned();
            prop_assert!((a_block - b_block_swapped).amax() <= 1e-9 * a_block.amax().max(1.0));
        }

        #[test]
        fn entries_finite_on_extended_range(t in -0.5f64..=1.5, (_, w) in sample()) {
            let q = rule();
            prop_assert!(ident_jacobian(ConfigState(t), &w, &G, &q).unwrap().iter().all(|v| v.is_finite()));
            prop_assert!(geom_jacobian(ConfigState(t), &w, &G, &q).unwrap().iter().all(|v| v.is_finite()));
            prop_assert!(measurement_matrix_param(ConfigState(t), &w, &G, &q, Coupling::Total)
                .unwrap().iter().all(|v| v.is_finite()));
        }
    }
}
