//! Central finite-difference counterparts of the analytic Jacobians.
//!
//! Everything here goes through [`measure`](crate::kinematics::measure) and
//! the boundary-angle relation only, never through the analytic Jacobian
//! code. Steps are `1e-6·max(1, |v|)` per coordinate for parameters and
//! `1e-7` for the state. When a central stencil would leave the valid
//! domain (the sensor length at `L`), a second-order one-sided stencil is
//! used instead.

use nalgebra::{Matrix3x5, RowVector5, SMatrix, SVector, Vector3, Vector5};

use crate::error::Result;
use crate::kinematics::{
    bending_angle_interp, boundary_angles, measure, ConfigState, SegmentGeometry, ShapeParams,
};
use crate::quadrature::QuadratureRule;

pub const PARAM_REL_STEP: f64 = 1e-6;
pub const STATE_STEP: f64 = 1e-7;

fn step(v: f64, rel: f64) -> f64 {
    rel * v.abs().max(1.0)
}

/// Derivative of a scalar-argument vector function at `x`.
fn derivative<const R: usize, F>(f: &F, x: f64, h: f64) -> Result<SVector<f64, R>>
where
    F: Fn(f64) -> Result<SVector<f64, R>>,
{
    match (f(x + h), f(x - h)) {
        (Ok(fp), Ok(fm)) => Ok((fp - fm) / (2.0 * h)),
        (Ok(fp), Err(_)) => {
            let f0 = f(x)?;
            let fpp = f(x + 2.0 * h)?;
            Ok((fp * 4.0 - f0 * 3.0 - fpp) / (2.0 * h))
        }
        (Err(_), Ok(fm)) => {
            let f0 = f(x)?;
            let fmm = f(x - 2.0 * h)?;
            Ok((f0 * 3.0 - fm * 4.0 + fmm) / (2.0 * h))
        }
        (Err(e), Err(_)) => Err(e),
    }
}

/// Jacobian of `f: R⁵ → Rᴿ` at `at`.
pub fn jacobian5<const R: usize, F>(
    f: F,
    at: &Vector5<f64>,
    rel_step: f64,
) -> Result<SMatrix<f64, R, 5>>
where
    F: Fn(&Vector5<f64>) -> Result<SVector<f64, R>>,
{
    let mut out = SMatrix::<f64, R, 5>::zeros();
    for j in 0..5 {
        let along = |v: f64| {
            let mut p = *at;
            p[j] = v;
            f(&p)
        };
        out.set_column(j, &derivative(&along, at[j], step(at[j], rel_step))?);
    }
    Ok(out)
}

fn measure_vec(
    t: f64,
    w: &Vector5<f64>,
    g: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<Vector3<f64>> {
    Ok(measure(ConfigState(t), &ShapeParams::from_vector(w), g, q)?.to_vector())
}

/// Numerical `∂h_p/∂w`.
pub fn ident_jacobian(
    t: ConfigState,
    w: &ShapeParams,
    g: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<Matrix3x5<f64>> {
    jacobian5(
        |v| measure_vec(t.t(), v, g, q),
        &w.to_vector(),
        PARAM_REL_STEP,
    )
}

/// Numerical `∂h_p/∂t`.
pub fn geom_jacobian(
    t: ConfigState,
    w: &ShapeParams,
    g: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<Vector3<f64>> {
    let wv = w.to_vector();
    derivative(&|x: f64| measure_vec(x, &wv, g, q), t.t(), STATE_STEP)
}

fn state_of(theta_e: f64, w: &Vector5<f64>, g: &SegmentGeometry) -> f64 {
    let (ea, eb) = boundary_angles(&ShapeParams::from_vector(w), g);
    (theta_e - ea) / (eb - ea)
}

/// Numerical `dt/dw` with `θ_e` held constant.
pub fn state_param_sensitivity(
    theta_e: f64,
    w: &ShapeParams,
    g: &SegmentGeometry,
) -> Result<RowVector5<f64>> {
    let jac: SMatrix<f64, 1, 5> = jacobian5(
        |v| Ok(SVector::<f64, 1>::new(state_of(theta_e, v, g))),
        &w.to_vector(),
        STATE_STEP,
    )?;
    Ok(jac)
}

/// Numerical total derivative of `h_p(t(w), w)` where `t(w)` keeps the tip
/// angle realized by `x` on the homotopy of `w` fixed.
pub fn param_matrix(
    x: ConfigState,
    w: &ShapeParams,
    g: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<Matrix3x5<f64>> {
    let (ea, eb) = boundary_angles(w, g);
    let theta_e = bending_angle_interp(x, ea, eb);
    jacobian5(
        |v| measure_vec(state_of(theta_e, v, g), v, g, q),
        &w.to_vector(),
        PARAM_REL_STEP,
    )
}

/// Column-wise relative deviation `max_j ‖A_j − N_j‖∞ / ‖N_j‖∞`.
///
/// Columns whose reference is (numerically) zero contribute their absolute
/// deviation instead.
pub fn relative_deviation<const R: usize, const C: usize>(
    analytic: &SMatrix<f64, R, C>,
    numeric: &SMatrix<f64, R, C>,
) -> f64 {
    (0..C)
        .map(|j| {
            let scale = numeric.column(j).amax();
            let diff = (analytic.column(j) - numeric.column(j)).amax();
            if scale > 1e-12 {
                diff / scale
            } else {
                diff
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_sided_stencil_at_domain_edge() {
        let f = |x: f64| {
            if x > 1.0 {
                Err(crate::error::Error::InvalidParams("edge".into()))
            } else {
                Ok(SVector::<f64, 1>::new(x * x * x))
            }
        };
        let d = derivative(&f, 1.0, 1e-4).unwrap();
        assert_relative_eq!(d[0], 3.0, epsilon = 1e-7);
    }

    #[test]
    fn deviation_uses_column_scale() {
        let a = SMatrix::<f64, 2, 2>::new(1000.0, 1e-3, 0.0, 2e-3);
        let n = SMatrix::<f64, 2, 2>::new(1001.0, 1e-3, 0.0, 2.002e-3);
        assert_relative_eq!(relative_deviation(&a, &n), 1.0 / 1001.0, epsilon = 1e-9);
    }

    #[test]
    fn sensitivity_matches_analytic() {
        let g = SegmentGeometry::default();
        let w = ShapeParams::nominal(60.0);
        let (ea, eb) = boundary_angles(&w, &g);
        let theta = bending_angle_interp(ConfigState(0.37), ea, eb);
        let a = super::super::state_param_sensitivity(theta, &w, &g).unwrap();
        let n = state_param_sensitivity(theta, &w, &g).unwrap();
        assert!(relative_deviation(&a, &n) <= 1e-5, "{a} vs {n}");
    }
}
