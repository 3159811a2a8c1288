//! Planar modal kinematics of a single continuum segment.
//!
//! The curvature along the backbone is a blend of two boundary curves
//! (shape generators) with first-order modal expansions
//!
//! ```text
//! κ(s, t) = t·bᵀη(s) + (1 − t)·aᵀη(s),   η(s) = [1, s]ᵀ
//! ```
//!
//! and the tip pose follows by integrating the bending angle and the unit
//! tangent `[sin θ, 0, cos θ]ᵀ` from the base. Lengths are millimetres and
//! angles radians throughout; the base bending angle is zero.

use nalgebra::{Vector2, Vector3, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Distance of `t` from the middle of the homotopy beyond which the state is
/// flagged as extrapolated.
pub const EXTRAPOLATION_LIMIT: f64 = 1.5;

/// Shape parameters `w = [l, a₁, a₂, b₁, b₂]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeParams {
    /// Arc-length of the sensor location (mm).
    pub l: f64,
    /// Modal factors of boundary curve `κ_a` (1/mm, 1/mm²).
    pub a: [f64; 2],
    /// Modal factors of boundary curve `κ_b` (1/mm, 1/mm²).
    pub b: [f64; 2],
}

impl ShapeParams {
    pub const DIM: usize = 5;

    pub fn new(l: f64, a: [f64; 2], b: [f64; 2]) -> Self {
        Self { l, a, b }
    }

    /// Nominal parameters for a 60 mm segment, sensor at the tip.
    pub fn nominal(length: f64) -> Self {
        Self {
            l: length,
            a: [-0.05 / length, -0.01 / length],
            b: [-0.5 / length, -0.15 / length],
        }
    }

    pub fn to_vector(&self) -> Vector5<f64> {
        Vector5::new(self.l, self.a[0], self.a[1], self.b[0], self.b[1])
    }

    pub fn from_vector(v: &Vector5<f64>) -> Self {
        Self {
            l: v[0],
            a: [v[1], v[2]],
            b: [v[3], v[4]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite())
    }

    /// Same parameters with the boundary curves exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            l: self.l,
            a: self.b,
            b: self.a,
        }
    }

    pub fn validate(&self, geometry: &SegmentGeometry) -> Result<()> {
        if !self.is_finite() {
            return Err(Error::InvalidParams(format!(
                "non-finite entry in {self:?}"
            )));
        }
        check_arc_length("l", self.l, geometry)
    }

    pub(crate) fn a_vec(&self) -> Vector2<f64> {
        Vector2::from(self.a)
    }

    pub(crate) fn b_vec(&self) -> Vector2<f64> {
        Vector2::from(self.b)
    }
}

/// Interpolation state `t` selecting one curve of the homotopy.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct ConfigState(pub f64);

impl ConfigState {
    pub fn t(self) -> f64 {
        self.0
    }

    /// `t` is allowed outside `[0, 1]` while filtering; far outside it is suspicious.
    pub fn is_extrapolated(self) -> bool {
        (self.0 - 0.5).abs() > EXTRAPOLATION_LIMIT
    }
}

impl From<f64> for ConfigState {
    fn from(t: f64) -> Self {
        Self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentGeometry {
    /// Maximum segment length (mm).
    pub length: f64,
}

impl SegmentGeometry {
    /// Base bending angle. Fixed at zero: the base tangent is ẑ of the bending-plane frame.
    pub const THETA0: f64 = 0.0;

    pub fn new(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParams(format!(
                "segment length must be positive, got {length}"
            )));
        }
        Ok(Self { length })
    }
}

impl Default for SegmentGeometry {
    fn default() -> Self {
        Self { length: 60.0 }
    }
}

/// In-plane pose `(p_x, p_z, θ)` of the sensor, in the bending-plane frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarPose {
    pub px: f64,
    pub pz: f64,
    pub theta: f64,
}

impl PlanarPose {
    pub fn new(px: f64, pz: f64, theta: f64) -> Self {
        Self { px, pz, theta }
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.px, self.pz, self.theta)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.px.is_finite() && self.pz.is_finite() && self.theta.is_finite()
    }
}

/// Modal basis `η(s) = [1, s]ᵀ`.
pub fn modal_basis(s: f64) -> Vector2<f64> {
    Vector2::new(1.0, s)
}

/// Integrated basis `ν(s) = ∫₀ˢ η(τ) dτ = [s, s²/2]ᵀ`.
pub fn integrated_basis(s: f64) -> Vector2<f64> {
    Vector2::new(s, 0.5 * s * s)
}

fn check_arc_length(what: &'static str, s: f64, geometry: &SegmentGeometry) -> Result<()> {
    if s.is_finite() && (0.0..=geometry.length).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            what,
            value: s,
            min: 0.0,
            max: geometry.length,
        })
    }
}

// Unchecked kernels shared with the Jacobian code.

#[inline]
pub(crate) fn curvature_raw(s: f64, t: f64, w: &ShapeParams) -> f64 {
    let eta = modal_basis(s);
    t * w.b_vec().dot(&eta) + (1.0 - t) * w.a_vec().dot(&eta)
}

#[inline]
pub(crate) fn bending_angle_raw(s: f64, t: f64, w: &ShapeParams) -> f64 {
    let nu = integrated_basis(s);
    SegmentGeometry::THETA0 + (1.0 - t) * w.a_vec().dot(&nu) + t * w.b_vec().dot(&nu)
}

/// Curvature `κ(s, t)` in 1/mm, for `s ∈ [0, L]`.
pub fn curvature(
    s: f64,
    t: ConfigState,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
) -> Result<f64> {
    check_arc_length("s", s, geometry)?;
    Ok(curvature_raw(s, t.0, w))
}

/// Bending angle `θ_s(s)` in closed form (the curvature is polynomial).
pub fn bending_angle(
    s: f64,
    t: ConfigState,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
) -> Result<f64> {
    check_arc_length("s", s, geometry)?;
    Ok(bending_angle_raw(s, t.0, w))
}

/// Bending angles `(θ_ea, θ_eb)` of the two boundary curves at `s = L`.
pub fn boundary_angles(w: &ShapeParams, geometry: &SegmentGeometry) -> (f64, f64) {
    let nu = integrated_basis(geometry.length);
    (
        SegmentGeometry::THETA0 + w.a_vec().dot(&nu),
        SegmentGeometry::THETA0 + w.b_vec().dot(&nu),
    )
}

/// Affine interpolation between the boundary bending angles.
pub fn bending_angle_interp(t: ConfigState, theta_ea: f64, theta_eb: f64) -> f64 {
    theta_ea + t.0 * (theta_eb - theta_ea)
}

/// Inverse of [`bending_angle_interp`].
pub fn interp_state(theta_e: f64, theta_ea: f64, theta_eb: f64) -> Result<ConfigState> {
    let span = theta_eb - theta_ea;
    if span.abs() < crate::jacobians::DEGENERACY_TOL {
        return Err(Error::DegenerateHomotopy { separation: span });
    }
    Ok(ConfigState((theta_e - theta_ea) / span))
}

pub(crate) fn position_raw(l: f64, t: f64, w: &ShapeParams, q: &QuadratureRule) -> (f64, f64) {
    q.points(l).fold((0.0, 0.0), |(px, pz), (s, wt)| {
        let (sin, cos) = bending_angle_raw(s, t, w).sin_cos();
        (px + wt * sin, pz + wt * cos)
    })
}

/// Backbone position `(p_x, p_z)` at arc-length `l`.
pub fn position(
    l: f64,
    t: ConfigState,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<(f64, f64)> {
    check_arc_length("l", l, geometry)?;
    Ok(position_raw(l, t.0, w, q))
}

/// Measurement model `h_p(x, w) = [p_x(l), p_z(l), θ_e(l)]ᵀ` at the sensor.
pub fn measure(
    t: ConfigState,
    w: &ShapeParams,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<PlanarPose> {
    w.validate(geometry)?;
    let (px, pz) = position_raw(w.l, t.0, w, q);
    Ok(PlanarPose::new(px, pz, bending_angle_raw(w.l, t.0, w)))
}
