//! TOML run configuration.
//!
//! Every key is optional; missing keys take the built-in defaults. Unknown
//! keys are rejected. Covariance matrices are given as diagonals. Angles
//! are degrees only in keys ending in `_deg`.
//!
//! ```toml
//! [geometry]
//! length = 60.0
//!
//! [sim]
//! seed = 7
//! noise_ang_deg = 1.0
//!
//! [estimator]
//! Qv = 1e-4
//! Rn = [0.5, 0.5, 0.0006]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Matrix5, Vector3, Vector5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, NoiseConfig, ParamStateSource};
use crate::jacobians::Coupling;
use crate::kinematics::{SegmentGeometry, ShapeParams};
use crate::quadrature::{QuadratureRule, QuadratureSpec};
use crate::simulator::{InputMode, SimConfig, WorkflowConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub length: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            length: SegmentGeometry::default().length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// `[l, a1, a2, b1, b2]`; nominal for the segment length when absent.
    pub w_nominal: Option<[f64; 5]>,
    pub offset_fraction: Option<f64>,
    pub n_samples: Option<usize>,
    pub noise_pos: Option<f64>,
    pub noise_ang_deg: Option<f64>,
    pub seed: Option<u64>,
    pub drift: Option<[f64; 5]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct EstimatorSection {
    pub x0: Option<f64>,
    pub Px0: Option<f64>,
    /// Initial parameter mean; `sim.w_nominal` when absent.
    pub w0: Option<[f64; 5]>,
    pub Pw0: Option<[f64; 5]>,
    pub Qv: Option<f64>,
    pub Qr: Option<[f64; 5]>,
    pub Rn: Option<[f64; 3]>,
    pub Re: Option<[f64; 3]>,
    pub param_state: Option<ParamStateSource>,
    pub coupling: Option<Coupling>,
    pub input_mode: Option<InputMode>,
    pub truth_init: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dataset: PathBuf,
    pub estimates: PathBuf,
    pub metrics: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dataset: "dataset.csv".into(),
            estimates: "estimates.csv".into(),
            metrics: "metrics.json".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    /// Maxima are taken over ticks after this one.
    pub burn_in: u64,
    /// Convergence threshold for state error and relative errors.
    pub threshold: f64,
}

impl Default for ReportSection {
    fn default() -> Self {
        Self {
            burn_in: 100,
            threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub quadrature: QuadratureSpec,
    pub sim: SimSection,
    pub estimator: EstimatorSection,
    pub output: OutputSection,
    pub report: ReportSection,
}

fn diag5(v: [f64; 5]) -> Matrix5<f64> {
    Matrix5::from_diagonal(&Vector5::from(v))
}

fn diag3(v: [f64; 3]) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::from(v))
}

fn params(v: [f64; 5]) -> ShapeParams {
    ShapeParams::from_vector(&Vector5::from(v))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Read a config file. I/O failures are reported as config errors, since
    /// a missing config is a configuration problem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn geometry(&self) -> Result<SegmentGeometry> {
        SegmentGeometry::new(self.geometry.length).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn quadrature(&self) -> Result<QuadratureRule> {
        QuadratureRule::new(self.quadrature).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn sim(&self) -> Result<SimConfig> {
        let g = self.geometry()?;
        let d = SimConfig::nominal(g.length);
        let s = &self.sim;
        let cfg = SimConfig {
            w_nominal: s.w_nominal.map(params).unwrap_or(d.w_nominal),
            offset_fraction: s.offset_fraction.unwrap_or(d.offset_fraction),
            n_samples: s.n_samples.unwrap_or(d.n_samples),
            noise_pos: s.noise_pos.unwrap_or(d.noise_pos),
            noise_ang: s.noise_ang_deg.map(f64::to_radians).unwrap_or(d.noise_ang),
            seed: s.seed.unwrap_or(d.seed),
            drift: s.drift,
        };
        cfg.validate()?;
        cfg.w_nominal
            .validate(&g)
            .map_err(|e| Error::InvalidConfig(format!("sim.w_nominal: {e}")))?;
        Ok(cfg)
    }

    pub fn estimator(&self) -> Result<EstimatorConfig> {
        let g = self.geometry()?;
        let d = EstimatorConfig::nominal(g.length);
        let e = &self.estimator;
        let n = NoiseConfig::default();
        let cfg = EstimatorConfig {
            x0: e.x0.unwrap_or(d.x0),
            px0: e.Px0.unwrap_or(d.px0),
            w0: e.w0.map(params).unwrap_or(self.sim()?.w_nominal),
            pw0: e.Pw0.map(diag5).unwrap_or(d.pw0),
            noise: NoiseConfig {
                qv: e.Qv.unwrap_or(n.qv),
                qr: e.Qr.map(diag5).unwrap_or(n.qr),
                rn: e.Rn.map(diag3).unwrap_or(n.rn),
                re: e.Re.map(diag3).unwrap_or(n.re),
            },
            param_state: e.param_state.unwrap_or_default(),
            coupling: e.coupling.unwrap_or_default(),
        };
        cfg.validate()
            .map_err(|e| Error::InvalidConfig(format!("estimator: {e}")))?;
        cfg.w0
            .validate(&g)
            .map_err(|e| Error::InvalidConfig(format!("estimator.w0: {e}")))?;
        Ok(cfg)
    }

    pub fn workflow(&self) -> Result<WorkflowConfig> {
        Ok(WorkflowConfig {
            geometry: self.geometry()?,
            quadrature: self.quadrature()?,
            sim: self.sim()?,
            estimator: self.estimator()?,
            input_mode: self.estimator.input_mode.unwrap_or_default(),
            truth_init: self.estimator.truth_init.unwrap_or(false),
        })
    }

    /// Apply a seed override.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if seed.is_some() {
            self.sim.seed = seed;
        }
        self
    }
}
