//! Online shape estimation for a planar continuum-robot segment.
//!
//! The backbone curvature is a convex combination of two modal curves,
//! `κ(s, t) = (1 − t)·aᵀη(s) + t·bᵀη(s)` with `η(s) = [1, s]`. The scalar
//! configuration `t` selects a curve within this homotopy, and the shape
//! parameters `w = [l, a1, a2, b1, b2]` fix the homotopy and the sensor
//! position `l` along the backbone. A dual extended Kalman filter tracks
//! `t` and `w` jointly from noisy tip pose measurements `[p_x, p_z, θ]`.
//!
//! * [`kinematics`]: curvature, bending angle, position and the measurement model.
//! * [`jacobians`]: analytic Jacobians with finite-difference counterparts.
//! * [`estimator`]: the dual EKF.
//! * [`simulator`]: synthetic datasets, the estimation workflow and error metrics.
//! * [`io`], [`config`], [`cli`]: CSV files, TOML configuration and the command line.
//!
//! Lengths are millimetres and angles are radians throughout.
//!
//! ```
//! use shape_dekf::kinematics::{measure, ConfigState, SegmentGeometry, ShapeParams};
//! use shape_dekf::quadrature::QuadratureRule;
//!
//! let g = SegmentGeometry::default();
//! let w = ShapeParams::nominal(g.length);
//! let pose = measure(ConfigState(0.5), &w, &g, &QuadratureRule::default()).unwrap();
//! assert!((pose.theta + 2.675).abs() < 1e-12);
//! ```

pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod io;
pub mod jacobians;
pub mod kinematics;
pub mod quadrature;
pub mod simulator;

pub use error::{Error, Result};
pub use estimator::{DualEkf, DualEstimate, EstimatorConfig, MeasurementSample};
pub use kinematics::{ConfigState, PlanarPose, SegmentGeometry, ShapeParams};
pub use quadrature::{QuadratureRule, QuadratureSpec};
