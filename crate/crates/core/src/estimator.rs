//! Dual extended Kalman filter over the configuration state and the shape
//! parameters.
//!
//! Each tick runs a time update for both filters, then a state measurement
//! update that uses the previous parameter estimate, then a parameter
//! measurement update that uses the state estimate. Both corrections use
//! the nonlinear innovation `y − h_p(·, ·)`; covariances use `(I − KH)P̌`
//! followed by symmetrization.

use nalgebra::{
    DMatrix, Matrix1x3, Matrix3, Matrix5, Matrix5x3, SMatrix, SVector, Vector1, Vector3, Vector5,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobians::{measurement_matrix_param, measurement_matrix_state, Coupling};
use crate::kinematics::{measure, ConfigState, PlanarPose, SegmentGeometry, ShapeParams};
use crate::quadrature::QuadratureRule;

/// Eigenvalue floor below which a covariance is treated as indefinite.
pub const PSD_TOL: f64 = -1e-10;
/// Innovation covariances above this condition number raise a flag.
pub const CONDITION_WARN: f64 = 1e12;

/// Mean and covariance of an `N`-dimensional Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief<const N: usize> {
    pub mean: SVector<f64, N>,
    pub cov: SMatrix<f64, N, N>,
}

impl<const N: usize> GaussianBelief<N> {
    /// Validated constructor; rejects asymmetric or indefinite covariances.
    pub fn new(
        mean: SVector<f64, N>,
        cov: SMatrix<f64, N, N>,
        which: &'static str,
    ) -> Result<Self> {
        check_psd(&cov, which)?;
        Ok(Self { mean, cov })
    }

    /// `‖P − Pᵀ‖_max`.
    pub fn asymmetry(&self) -> f64 {
        (self.cov - self.cov.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.cov)
    }

    pub fn is_finite(&self) -> bool {
        self.mean
            .iter()
            .chain(self.cov.iter())
            .all(|v| v.is_finite())
    }
}

fn symmetrize<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

fn min_eigenvalue<const N: usize>(m: &SMatrix<f64, N, N>) -> f64 {
    if N == 1 {
        return m[(0, 0)];
    }
    let s = symmetrize(m);
    DMatrix::from_column_slice(N, N, s.as_slice())
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Reject covariances that are non-finite, asymmetric or indefinite.
pub fn check_psd<const N: usize>(cov: &SMatrix<f64, N, N>, which: &'static str) -> Result<()> {
    if !cov.iter().all(|v| v.is_finite()) {
        return Err(Error::NotPositiveSemiDefinite {
            which,
            min_eigenvalue: f64::NAN,
        });
    }
    let scale = cov.amax().max(1.0);
    if (cov - cov.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidParams(format!(
            "{which} covariance is not symmetric"
        )));
    }
    let min_eig = min_eigenvalue(cov);
    if min_eig < PSD_TOL {
        return Err(Error::NotPositiveSemiDefinite {
            which,
            min_eigenvalue: min_eig,
        });
    }
    Ok(())
}

/// Process and measurement noise covariances (zero-mean noise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    /// State process covariance.
    pub qv: f64,
    /// Parameter process covariance.
    pub qr: Matrix5<f64>,
    /// State-filter measurement covariance.
    pub rn: Matrix3<f64>,
    /// Parameter-filter measurement covariance.
    pub re: Matrix3<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            qv: 1e-4,
            qr: Matrix5::from_diagonal(&Vector5::new(0.01, 0.0, 0.0, 0.0, 0.0)),
            rn: Matrix3::from_diagonal(&Vector3::new(0.5, 0.5, 0.0006)),
            re: Matrix3::from_diagonal(&Vector3::new(0.25, 0.25, 0.0003)),
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        check_psd(&SMatrix::<f64, 1, 1>::new(self.qv), "Qv")?;
        check_psd(&self.qr, "Qr")?;
        check_psd(&self.rn, "Rn")?;
        check_psd(&self.re, "Re")
    }

    /// Both measurement covariances multiplied by `factor`.
    pub fn with_measurement_scale(mut self, factor: f64) -> Self {
        self.rn *= factor;
        self.re *= factor;
        self
    }
}

/// Which state estimate the parameter filter linearizes and predicts at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamStateSource {
    /// The state posterior of the current tick.
    #[default]
    Updated,
    /// The state posterior of the previous tick.
    Previous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub x0: f64,
    pub px0: f64,
    pub w0: ShapeParams,
    pub pw0: Matrix5<f64>,
    pub noise: NoiseConfig,
    pub param_state: ParamStateSource,
    pub coupling: Coupling,
}

impl EstimatorConfig {
    /// Defaults for a segment of the given length: state at the first
    /// boundary, nominal modal factors, and a parameter prior whose modal
    /// variances are specified for the factors scaled by the length.
    pub fn nominal(length: f64) -> Self {
        let l2 = length * length;
        Self {
            x0: 0.0,
            px0: 1e-4,
            w0: ShapeParams::nominal(length),
            pw0: Matrix5::from_diagonal(&Vector5::new(
                0.1,
                4e-7 / l2,
                4e-7 / l2,
                0.01 / l2,
                0.0009 / l2,
            )),
            noise: NoiseConfig::default(),
            param_state: ParamStateSource::default(),
            coupling: Coupling::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x0.is_finite() || !self.w0.is_finite() {
            return Err(Error::InvalidParams("non-finite initial mean".into()));
        }
        check_psd(&SMatrix::<f64, 1, 1>::new(self.px0), "Px0")?;
        check_psd(&self.pw0, "Pw0")?;
        self.noise.validate()
    }
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self::nominal(SegmentGeometry::default().length)
    }
}

/// One tick of input data: measurement `y_k` and the process input applied
/// in the time update leading to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSample {
    pub k: u64,
    pub y: PlanarPose,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimateFlags {
    /// `|t̂ − 0.5| > 1.5`.
    pub state_extrapolated: bool,
    /// An innovation covariance had condition number above [`CONDITION_WARN`].
    pub ill_conditioned: bool,
    /// The sensor length left `[0, L]` and was clamped.
    pub length_clamped: bool,
}

/// Joint output of both filters after a tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualEstimate {
    pub k: u64,
    pub state: GaussianBelief<1>,
    pub params: GaussianBelief<5>,
    pub state_innovation: Vector3<f64>,
    pub param_innovation: Vector3<f64>,
    pub state_gain: Matrix1x3<f64>,
    pub param_gain: Matrix5x3<f64>,
    /// `h_p(x̂, ŵ)`.
    pub pose: PlanarPose,
    pub flags: EstimateFlags,
}

impl DualEstimate {
    pub fn x(&self) -> ConfigState {
        ConfigState(self.state.mean[0])
    }

    pub fn w(&self) -> ShapeParams {
        ShapeParams::from_vector(&self.params.mean)
    }

    pub fn is_finite(&self) -> bool {
        self.state.is_finite() && self.params.is_finite() && self.pose.is_finite()
    }
}

struct Correction<const N: usize> {
    belief: GaussianBelief<N>,
    gain: SMatrix<f64, N, 3>,
    ill_conditioned: bool,
}

/// Linearized Kalman correction of `prior` by an innovation with
/// measurement matrix `h` and noise `r`.
fn kalman_correct<const N: usize>(
    prior: &GaussianBelief<N>,
    h: &SMatrix<f64, 3, N>,
    innovation: &Vector3<f64>,
    r: &Matrix3<f64>,
    filter: &'static str,
) -> Result<Correction<N>> {
    let s = symmetrize(&(h * prior.cov * h.transpose() + r));
    let sv = s.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0 && smax.is_finite()) {
        return Err(Error::SingularInnovation { filter });
    }
    // K = P Hᵀ S⁻¹  ⇔  S Kᵀ = H P  (S, P symmetric)
    let kt = s
        .lu()
        .solve(&(h * prior.cov))
        .ok_or(Error::SingularInnovation { filter })?;
    let gain = kt.transpose();
    let cov = symmetrize(&((SMatrix::<f64, N, N>::identity() - gain * h) * prior.cov));
    Ok(Correction {
        belief: GaussianBelief {
            mean: prior.mean + gain * innovation,
            cov,
        },
        gain,
        ill_conditioned: smax / smin > CONDITION_WARN,
    })
}

/// The filter pair bound to a configuration, geometry and quadrature rule.
#[derive(Debug, Clone)]
pub struct DualEkf {
    pub config: EstimatorConfig,
    pub geometry: SegmentGeometry,
    pub quadrature: QuadratureRule,
}

impl DualEkf {
    pub fn new(
        config: EstimatorConfig,
        geometry: SegmentGeometry,
        quadrature: QuadratureRule,
    ) -> Result<Self> {
        config.validate()?;
        config.w0.validate(&geometry)?;
        Ok(Self {
            config,
            geometry,
            quadrature,
        })
    }

    /// Prior beliefs at tick 0.
    pub fn initialize(&self) -> Result<DualEstimate> {
        let c = &self.config;
        let state =
            GaussianBelief::new(Vector1::new(c.x0), SMatrix::<f64, 1, 1>::new(c.px0), "Px0")?;
        let params = GaussianBelief::new(c.w0.to_vector(), c.pw0, "Pw0")?;
        let pose = measure(ConfigState(c.x0), &c.w0, &self.geometry, &self.quadrature)?;
        Ok(DualEstimate {
            k: 0,
            state,
            params,
            state_innovation: Vector3::zeros(),
            param_innovation: Vector3::zeros(),
            state_gain: Matrix1x3::zeros(),
            param_gain: Matrix5x3::zeros(),
            pose,
            flags: EstimateFlags {
                state_extrapolated: ConfigState(c.x0).is_extrapolated(),
                ..Default::default()
            },
        })
    }

    /// Additive state model and random-walk parameter model.
    pub fn time_update(&self, est: &DualEstimate, u: f64) -> DualEstimate {
        let noise = &self.config.noise;
        let mut pred = *est;
        pred.state.mean[0] += u;
        pred.state.cov[(0, 0)] += noise.qv;
        pred.params.cov = symmetrize(&(est.params.cov + noise.qr));
        pred
    }

    /// Correct the predicted state with `y`, linearizing at `(x̌, w_prev)`.
    pub fn state_measurement_update(
        &self,
        pred: &DualEstimate,
        y: &PlanarPose,
        w_prev: &ShapeParams,
    ) -> Result<DualEstimate> {
        let (g, q) = (&self.geometry, &self.quadrature);
        let x_pred = pred.x();
        let hx = measurement_matrix_state(x_pred, w_prev, g, q)?;
        let innovation = y.to_vector() - measure(x_pred, w_prev, g, q)?.to_vector();
        let c = kalman_correct(
            &pred.state,
            &hx,
            &innovation,
            &self.config.noise.rn,
            "state",
        )?;
        let mut out = *pred;
        out.state = c.belief;
        out.state_gain = c.gain;
        out.state_innovation = innovation;
        out.flags.ill_conditioned |= c.ill_conditioned;
        out.flags.state_extrapolated = out.x().is_extrapolated();
        Ok(out)
    }

    /// Correct the predicted parameters with `y`, linearizing at `(x, w̌)`.
    pub fn param_measurement_update(
        &self,
        pred: &DualEstimate,
        y: &PlanarPose,
        x: ConfigState,
    ) -> Result<DualEstimate> {
        let (g, q) = (&self.geometry, &self.quadrature);
        let w_pred = pred.w();
        let hw = measurement_matrix_param(x, &w_pred, g, q, self.config.coupling)?;
        let innovation = y.to_vector() - measure(x, &w_pred, g, q)?.to_vector();
        let c = kalman_correct(
            &pred.params,
            &hw,
            &innovation,
            &self.config.noise.re,
            "parameter",
        )?;
        let mut out = *pred;
        out.params = c.belief;
        out.param_gain = c.gain;
        out.param_innovation = innovation;
        out.flags.ill_conditioned |= c.ill_conditioned;
        let l = out.params.mean[0];
        if l.is_finite() && !(0.0..=g.length).contains(&l) {
            out.params.mean[0] = l.clamp(0.0, g.length);
            out.flags.length_clamped = true;
        }
        Ok(out)
    }

    /// One full tick: time update, state update, parameter update.
    pub fn step(&self, est: &DualEstimate, sample: &MeasurementSample) -> Result<DualEstimate> {
        if sample.k <= est.k {
            return Err(Error::InvalidParams(format!(
                "tick {} does not follow tick {}",
                sample.k, est.k
            )));
        }
        if !sample.y.is_finite() || !sample.u.is_finite() {
            return Err(Error::InvalidParams(format!(
                "non-finite sample at tick {}",
                sample.k
            )));
        }
        let diverged = || Error::Divergence { tick: sample.k };

        let mut pred = self.time_update(est, sample.u);
        pred.flags = EstimateFlags::default();
        let w_prev = est.w();
        let after_state = self
            .state_measurement_update(&pred, &sample.y, &w_prev)
            .map_err(|e| guard(e, sample.k))?;
        if !after_state.state.is_finite() {
            return Err(diverged());
        }
        let x_ref = match self.config.param_state {
            ParamStateSource::Updated => after_state.x(),
            ParamStateSource::Previous => est.x(),
        };
        let mut post = self
            .param_measurement_update(&after_state, &sample.y, x_ref)
            .map_err(|e| guard(e, sample.k))?;
        if !post.params.is_finite() {
            return Err(diverged());
        }
        post.k = sample.k;
        post.pose = measure(post.x(), &post.w(), &self.geometry, &self.quadrature)
            .map_err(|e| guard(e, sample.k))?;
        if !post.is_finite() {
            return Err(diverged());
        }
        Ok(post)
    }

    /// Run [`step`](Self::step) over a sample stream from the initial belief.
    pub fn run<'a, I>(&self, samples: I) -> Result<Vec<DualEstimate>>
    where
        I: IntoIterator<Item = &'a MeasurementSample>,
    {
        let mut est = self.initialize()?;
        samples
            .into_iter()
            .map(|s| {
                est = self.step(&est, s)?;
                Ok(est)
            })
            .collect()
    }
}

/// Non-finite intermediate values surface as domain errors in the
/// kinematics; report them as divergence of the filter.
fn guard(e: Error, tick: u64) -> Error {
    match e {
        Error::OutOfDomain { value, .. } if !value.is_finite() => Error::Divergence { tick },
        Error::InvalidParams(_) => Error::Divergence { tick },
        other => other,
    }
}
