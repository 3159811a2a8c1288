//! Synthetic datasets and the end-to-end estimation workflow.
//!
//! Truth parameters are the nominal ones with a uniform relative offset per
//! component. The configuration sweeps `t_k = (k−1)/(N−1)` and every
//! measurement gets zero-mean Gaussian noise. Offsets and noise come from two
//! independent streams of one seeded generator, so changing the noise level
//! never changes the drawn offsets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{DualEkf, DualEstimate, EstimatorConfig, MeasurementSample};
use crate::jacobians::DEGENERACY_TOL;
use crate::kinematics::{
    bending_angle, measure, ConfigState, PlanarPose, SegmentGeometry, ShapeParams,
};
use crate::quadrature::QuadratureRule;

const OFFSET_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub w_nominal: ShapeParams,
    /// Truth parameters are `w_nominal·(1 + U[−f, f])` per component.
    pub offset_fraction: f64,
    pub n_samples: usize,
    /// Position noise std (mm).
    pub noise_pos: f64,
    /// Angle noise std (rad).
    pub noise_ang: f64,
    pub seed: u64,
    /// Per-tick additive drift of the truth parameters. `None` keeps them
    /// constant.
    pub drift: Option<[f64; 5]>,
}

impl SimConfig {
    pub fn nominal(length: f64) -> Self {
        Self {
            w_nominal: ShapeParams::nominal(length),
            offset_fraction: 0.2,
            n_samples: 500,
            noise_pos: 0.5,
            noise_ang: 1f64.to_radians(),
            seed: 42,
            drift: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_samples = {} (need at least 2)",
                self.n_samples
            )));
        }
        if !(self.offset_fraction >= 0.0 && self.offset_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "offset_fraction = {} (need [0, 1))",
                self.offset_fraction
            )));
        }
        for (name, v) in [("noise_pos", self.noise_pos), ("noise_ang", self.noise_ang)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} = {v}")));
            }
        }
        if !self.w_nominal.is_finite() {
            return Err(Error::InvalidConfig("non-finite nominal parameters".into()));
        }
        Ok(())
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::nominal(SegmentGeometry::default().length)
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Independent uniform relative offset per component, with the sensor
/// length clamped to `[0, L]`.
pub fn perturb_params<R: Rng>(
    nominal: &ShapeParams,
    fraction: f64,
    geometry: &SegmentGeometry,
    rng: &mut R,
) -> ShapeParams {
    let mut v = nominal.to_vector();
    for x in v.iter_mut() {
        let r = if fraction > 0.0 {
            rng.random_range(-fraction..=fraction)
        } else {
            0.0
        };
        *x *= 1.0 + r;
    }
    v[0] = v[0].clamp(0.0, geometry.length);
    ShapeParams::from_vector(&v)
}

/// `u_k = (θ_k − θ_{k−1}) / (θ_eb − θ_ea)`.
pub fn process_input(theta_k: f64, theta_km1: f64, theta_eb: f64, theta_ea: f64) -> Result<f64> {
    let den = theta_eb - theta_ea;
    if den.abs() < DEGENERACY_TOL {
        return Err(Error::ZeroInputDenominator);
    }
    Ok((theta_k - theta_km1) / den)
}

/// Measured bending extremes `(θ_ea, θ_eb)`: the extreme of larger magnitude
/// is the most-bent one, the opposite extreme the least-bent one.
pub fn measured_extremes<I: IntoIterator<Item = f64>>(angles: I) -> Result<(f64, f64)> {
    let (lo, hi) = angles
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a), hi.max(a))
        });
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::ZeroInputDenominator);
    }
    Ok(if lo.abs() > hi.abs() {
        (hi, lo)
    } else {
        (lo, hi)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetRow {
    pub k: u64,
    pub t_true: f64,
    pub y: PlanarPose,
    pub truth: PlanarPose,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Samples carrying the dataset's own input column.
    pub fn samples(&self) -> Vec<MeasurementSample> {
        self.rows
            .iter()
            .map(|r| MeasurementSample {
                k: r.k,
                y: r.y,
                u: r.u,
            })
            .collect()
    }

    pub fn measured_extremes(&self) -> Result<(f64, f64)> {
        measured_extremes(self.rows.iter().map(|r| r.y.theta))
    }
}

/// Truth parameters at each tick, plus the generated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub truth_params: Vec<ShapeParams>,
    pub dataset: Dataset,
}

impl Simulation {
    pub fn initial_truth(&self) -> ShapeParams {
        self.truth_params[0]
    }
}

pub fn generate_dataset(
    cfg: &SimConfig,
    geometry: &SegmentGeometry,
    q: &QuadratureRule,
) -> Result<Simulation> {
    cfg.validate()?;
    let n = cfg.n_samples;
    let w0 = perturb_params(
        &cfg.w_nominal,
        cfg.offset_fraction,
        geometry,
        &mut stream(cfg.seed, OFFSET_STREAM),
    );
    let mut noise_rng = stream(cfg.seed, NOISE_STREAM);
    let pos = Normal::new(0.0, cfg.noise_pos).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let ang = Normal::new(0.0, cfg.noise_ang).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let mut truth_params = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let w = match cfg.drift {
            None => w0,
            Some(d) => {
                let mut v = w0.to_vector() + nalgebra::Vector5::from(d) * i as f64;
                v[0] = v[0].clamp(0.0, geometry.length);
                ShapeParams::from_vector(&v)
            }
        };
        let t = i as f64 / (n - 1) as f64;
        let truth = measure(ConfigState(t), &w, geometry, q)?;
        let y = PlanarPose::new(
            truth.px + pos.sample(&mut noise_rng),
            truth.pz + pos.sample(&mut noise_rng),
            truth.theta + ang.sample(&mut noise_rng),
        );
        truth_params.push(w);
        rows.push(DatasetRow {
            k: i as u64 + 1,
            t_true: t,
            y,
            truth,
            u: 0.0,
        });
    }

    // Commanded input at the nominal parameters, scaled by the measured span.
    let (ea, eb) = measured_extremes(rows.iter().map(|r| r.y.theta))?;
    let nom = &cfg.w_nominal;
    let cmd = |t: f64| {
        bending_angle(
            nom.l.clamp(0.0, geometry.length),
            ConfigState(t),
            nom,
            geometry,
        )
    };
    for i in 1..n {
        let u = process_input(cmd(rows[i].t_true)?, cmd(rows[i - 1].t_true)?, eb, ea)?;
        rows[i].u = u;
    }
    Ok(Simulation {
        truth_params,
        dataset: Dataset { rows },
    })
}

/// Source of the process input fed to the state time update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputMode {
    /// Bending increment of the desired configuration sequence, predicted
    /// with the current parameter estimate.
    #[default]
    Commanded,
    /// Increment of the last two posterior bending angles.
    Posterior,
    /// The dataset's `u` column.
    Dataset,
}

/// Run the filter over a dataset, generating inputs according to `mode`.
///
/// The desired configuration sequence for [`InputMode::Commanded`] is the
/// dataset's `t_true` column.
pub fn run_estimator(
    ekf: &DualEkf,
    dataset: &Dataset,
    mode: InputMode,
) -> Result<Vec<DualEstimate>> {
    let (ea, eb) = dataset.measured_extremes()?;
    let g = &ekf.geometry;
    let angle_at =
        |t: f64, w: &ShapeParams| bending_angle(w.l.clamp(0.0, g.length), ConfigState(t), w, g);

    let mut est = ekf.initialize()?;
    let mut out = Vec::with_capacity(dataset.len());
    for (i, row) in dataset.rows.iter().enumerate() {
        let u = match mode {
            _ if i == 0 => 0.0,
            InputMode::Dataset => row.u,
            InputMode::Commanded => {
                let w = est.w();
                let prev = dataset.rows[i - 1].t_true;
                process_input(angle_at(row.t_true, &w)?, angle_at(prev, &w)?, eb, ea)?
            }
            InputMode::Posterior if i == 1 => 0.0,
            InputMode::Posterior => {
                let (a, b) = (&out[i - 2], &out[i - 1]);
                let theta = |e: &DualEstimate| angle_at(e.x().t(), &e.w());
                process_input(theta(b)?, theta(a)?, eb, ea)?
            }
        };
        est = ekf.step(
            &est,
            &MeasurementSample {
                k: row.k,
                y: row.y,
                u,
            },
        )?;
        out.push(est);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowConfig {
    pub geometry: SegmentGeometry,
    pub quadrature: QuadratureRule,
    pub sim: SimConfig,
    pub estimator: EstimatorConfig,
    pub input_mode: InputMode,
    /// Start the filter at the truth parameters instead of `estimator.w0`.
    pub truth_init: bool,
}

impl Default for WorkflowConfig {
    fn default() -> Self {
        let geometry = SegmentGeometry::default();
        Self {
            geometry,
            quadrature: QuadratureRule::default(),
            sim: SimConfig::nominal(geometry.length),
            estimator: EstimatorConfig::nominal(geometry.length),
            input_mode: InputMode::default(),
            truth_init: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorkflowResult {
    pub simulation: Simulation,
    pub estimates: Vec<DualEstimate>,
    pub metrics: Metrics,
}

/// Simulate, estimate and score in one pass.
pub fn run_workflow(cfg: &WorkflowConfig) -> Result<WorkflowResult> {
    let simulation = generate_dataset(&cfg.sim, &cfg.geometry, &cfg.quadrature)?;
    let mut est_cfg = cfg.estimator;
    if cfg.truth_init {
        est_cfg.w0 = simulation.initial_truth();
        est_cfg.x0 = simulation.dataset.rows[0].t_true;
    }
    let ekf = DualEkf::new(est_cfg, cfg.geometry, cfg.quadrature.clone())?;
    let estimates = run_estimator(&ekf, &simulation.dataset, cfg.input_mode)?;
    let floors = [cfg.sim.noise_pos, cfg.sim.noise_pos, cfg.sim.noise_ang];
    let metrics = score_estimates(
        &simulation.dataset,
        &estimates,
        Some(&simulation.truth_params),
        floors,
    )?;
    Ok(WorkflowResult {
        simulation,
        estimates,
        metrics,
    })
}

/// Error series of an estimate run against its dataset.
///
/// Relative errors are `|v̂ − v| / |v|`. Entries whose truth is exactly zero,
/// or whose magnitude is below the channel floor, are `None` and counted as
/// excluded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub ticks: Vec<u64>,
    /// `|t̂_k − t_k|`.
    pub t_error: Vec<f64>,
    pub t_rel_error: Vec<Option<f64>>,
    /// Per pose channel `[p_x, p_z, θ]`, predicted pose `h_p(x̂, ŵ)` against truth.
    pub pose_rel_error: Vec<[Option<f64>; 3]>,
    /// Per parameter, when truth parameters are known.
    pub param_rel_error: Option<Vec<[Option<f64>; 5]>>,
    pub pose_floor: [f64; 3],
}

fn rel(est: f64, truth: f64, floor: f64) -> Option<f64> {
    (truth != 0.0 && truth.abs() >= floor).then(|| (est - truth).abs() / truth.abs())
}

pub fn score_estimates(
    dataset: &Dataset,
    estimates: &[DualEstimate],
    truth_params: Option<&[ShapeParams]>,
    pose_floor: [f64; 3],
) -> Result<Metrics> {
    if estimates.len() != dataset.len() {
        return Err(Error::LengthMismatch {
            expected: dataset.len(),
            found: estimates.len(),
        });
    }
    if let Some(tp) = truth_params {
        if tp.len() != dataset.len() {
            return Err(Error::LengthMismatch {
                expected: dataset.len(),
                found: tp.len(),
            });
        }
    }
    let n = estimates.len();
    let mut m = Metrics {
        ticks: Vec::with_capacity(n),
        t_error: Vec::with_capacity(n),
        t_rel_error: Vec::with_capacity(n),
        pose_rel_error: Vec::with_capacity(n),
        param_rel_error: truth_params.map(|_| Vec::with_capacity(n)),
        pose_floor,
    };
    for (i, (row, e)) in dataset.rows.iter().zip(estimates).enumerate() {
        m.ticks.push(row.k);
        m.t_error.push((e.x().t() - row.t_true).abs());
        m.t_rel_error.push(rel(e.x().t(), row.t_true, 0.0));
        let (p, h) = (e.pose.to_vector(), row.truth.to_vector());
        m.pose_rel_error
            .push(std::array::from_fn(|c| rel(p[c], h[c], pose_floor[c])));
        if let (Some(series), Some(tp)) = (m.param_rel_error.as_mut(), truth_params) {
            let (w, wt) = (e.params.mean, tp[i].to_vector());
            series.push(std::array::from_fn(|c| rel(w[c], wt[c], 0.0)));
        }
    }
    Ok(m)
}

/// First tick from which every defined entry stays within `threshold`.
fn stable_from(
    ticks: &[u64],
    series: impl DoubleEndedIterator<Item = Option<f64>> + ExactSizeIterator,
    threshold: f64,
) -> Option<u64> {
    let n = series.len();
    let last_bad = series
        .rev()
        .position(|e| e.is_some_and(|v| v > threshold || v.is_nan()))
        .map(|p| n - 1 - p);
    match last_bad {
        None => ticks.first().copied(),
        Some(i) => ticks.get(i + 1).copied(),
    }
}

fn max_defined(series: impl Iterator<Item = Option<f64>>) -> (f64, usize) {
    series.fold((0.0, 0), |(m, excluded), e| match e {
        Some(v) => (if v > m || v.is_nan() { v } else { m }, excluded),
        None => (m, excluded + 1),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTicks {
    pub threshold: f64,
    /// On the absolute state error.
    pub t: Option<u64>,
    pub pose: [Option<u64>; 3],
    pub params: Option<[Option<u64>; 5]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub after_tick: u64,
    pub scored_ticks: usize,
    pub max_t_error: f64,
    pub max_pose_rel_error: [f64; 3],
    pub excluded_pose_entries: [usize; 3],
    pub final_t_error: Option<f64>,
    pub final_pose_rel_error: Option<[Option<f64>; 3]>,
    pub final_param_rel_error: Option<[Option<f64>; 5]>,
    pub convergence: ConvergenceTicks,
}

impl Metrics {
    /// First tick from which the absolute state error stays within `threshold`.
    pub fn convergence_tick(&self, threshold: f64) -> Option<u64> {
        stable_from(
            &self.ticks,
            self.t_error.iter().map(|e| Some(*e)),
            threshold,
        )
    }

    pub fn convergence(&self, threshold: f64) -> ConvergenceTicks {
        ConvergenceTicks {
            threshold,
            t: self.convergence_tick(threshold),
            pose: std::array::from_fn(|c| {
                stable_from(
                    &self.ticks,
                    self.pose_rel_error.iter().map(|e| e[c]),
                    threshold,
                )
            }),
            params: self.param_rel_error.as_ref().map(|s| {
                std::array::from_fn(|c| stable_from(&self.ticks, s.iter().map(|e| e[c]), threshold))
            }),
        }
    }

    /// Maxima over ticks strictly after `after_tick`, final values, and
    /// convergence ticks at `threshold`.
    pub fn summary(&self, after_tick: u64, threshold: f64) -> MetricsSummary {
        let idx: Vec<usize> = (0..self.ticks.len())
            .filter(|&i| self.ticks[i] > after_tick)
            .collect();
        let mut max_pose = [0.0; 3];
        let mut excluded = [0; 3];
        for c in 0..3 {
            (max_pose[c], excluded[c]) =
                max_defined(idx.iter().map(|&i| self.pose_rel_error[i][c]));
        }
        MetricsSummary {
            after_tick,
            scored_ticks: idx.len(),
            max_t_error: max_defined(idx.iter().map(|&i| Some(self.t_error[i]))).0,
            max_pose_rel_error: max_pose,
            excluded_pose_entries: excluded,
            final_t_error: self.t_error.last().copied(),
            final_pose_rel_error: self.pose_rel_error.last().copied(),
            final_param_rel_error: self
                .param_rel_error
                .as_ref()
                .and_then(|s| s.last().copied()),
            convergence: self.convergence(threshold),
        }
    }
}

#[cfg(test)]
#[allow(clippy::field_reassign_with_default)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g() -> SegmentGeometry {
        SegmentGeometry::default()
    }

    #[test]
    fn same_seed_same_dataset() {
        let q = QuadratureRule::default();
        let a = generate_dataset(&SimConfig::default(), &g(), &q).unwrap();
        let b = generate_dataset(&SimConfig::default(), &g(), &q).unwrap();
        assert_eq!(a, b);
        let mut other = SimConfig::default();
        other.seed = 43;
        assert_ne!(
            generate_dataset(&other, &g(), &q).unwrap().initial_truth(),
            a.initial_truth()
        );
    }

    #[test]
    fn noise_level_does_not_change_offsets() {
        let q = QuadratureRule::default();
        let mut quiet = SimConfig::default();
        quiet.noise_pos = 0.0;
        quiet.noise_ang = 0.0;
        let a = generate_dataset(&SimConfig::default(), &g(), &q).unwrap();
        let b = generate_dataset(&quiet, &g(), &q).unwrap();
        assert_eq!(a.initial_truth(), b.initial_truth());
        assert!(b.dataset.rows.iter().all(|r| r.y == r.truth));
    }

    #[test]
    fn offsets_stay_in_band() {
        let nom = ShapeParams::nominal(60.0);
        let mut rng = stream(9, OFFSET_STREAM);
        for _ in 0..1000 {
            let w = perturb_params(&nom, 0.2, &g(), &mut rng);
            let (v, n) = (w.to_vector(), nom.to_vector());
            for c in 1..5 {
                let r = v[c] / n[c] - 1.0;
                assert!(r.abs() <= 0.2 + 1e-12, "{r}");
            }
            assert!((48.0..=60.0).contains(&w.l));
        }
    }

    #[test]
    fn zero_fraction_is_identity() {
        let nom = ShapeParams::nominal(60.0);
        assert_eq!(perturb_params(&nom, 0.0, &g(), &mut stream(1, 0)), nom);
    }

    #[test]
    fn noise_statistics() {
        let q = QuadratureRule::default();
        let mut cfg = SimConfig::default();
        cfg.n_samples = 10_000;
        cfg.offset_fraction = 0.0;
        let sim = generate_dataset(&cfg, &g(), &q).unwrap();
        let std = |f: &dyn Fn(&DatasetRow) -> f64| {
            let e: Vec<f64> = sim.dataset.rows.iter().map(f).collect();
            let mean = e.iter().sum::<f64>() / e.len() as f64;
            (e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (e.len() - 1) as f64).sqrt()
        };
        let sx = std(&|r| r.y.px - r.truth.px);
        let sz = std(&|r| r.y.pz - r.truth.pz);
        let st = std(&|r| r.y.theta - r.truth.theta);
        assert!((sx / 0.5 - 1.0).abs() < 0.05, "{sx}");
        assert!((sz / 0.5 - 1.0).abs() < 0.05, "{sz}");
        assert!((st / 1f64.to_radians() - 1.0).abs() < 0.05, "{st}");
    }

    #[test]
    fn configuration_sweep_is_even() {
        let q = QuadratureRule::default();
        let sim = generate_dataset(&SimConfig::default(), &g(), &q).unwrap();
        let r = &sim.dataset.rows;
        assert_eq!(r[0].t_true, 0.0);
        assert_eq!(r[r.len() - 1].t_true, 1.0);
        for p in r.windows(2) {
            assert!((p[1].t_true - p[0].t_true - 1.0 / 499.0).abs() <= 1e-15);
            assert_eq!(p[1].k, p[0].k + 1);
        }
        assert_eq!(r[0].u, 0.0);
    }

    #[test]
    fn inputs_telescope() {
        let thetas: Vec<f64> = (0..=50)
            .map(|i| -0.1 - 1.3 * (i as f64 / 50.0).powi(2))
            .collect();
        let (ea, eb) = measured_extremes(thetas.iter().copied()).unwrap();
        assert_eq!(ea, thetas[0]);
        assert_eq!(eb, thetas[50]);
        let sum: f64 = thetas
            .windows(2)
            .map(|p| process_input(p[1], p[0], eb, ea).unwrap())
            .sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn input_arithmetic() {
        assert_abs_diff_eq!(
            process_input(0.5, 0.45, 1.0, 0.0).unwrap(),
            0.05,
            epsilon = 1e-15
        );
        assert_eq!(process_input(0.3, 0.3, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn input_denominator_must_be_nonzero() {
        assert!(matches!(
            process_input(1.0, 0.5, 0.3, 0.3),
            Err(Error::ZeroInputDenominator)
        ));
    }

    #[test]
    fn constant_offset_gives_constant_relative_error() {
        let q = QuadratureRule::default();
        let mut cfg = SimConfig::default();
        cfg.n_samples = 20;
        cfg.offset_fraction = 0.0;
        let sim = generate_dataset(&cfg, &g(), &q).unwrap();
        let ekf = DualEkf::new(EstimatorConfig::default(), g(), q).unwrap();
        let mut est = ekf.initialize().unwrap();
        let mut ests = Vec::new();
        for r in &sim.dataset.rows {
            est.k = r.k;
            est.params.mean = sim.truth_params[0].to_vector() * 1.1;
            est.pose = PlanarPose::new(r.truth.px * 1.1, r.truth.pz * 1.1, r.truth.theta * 1.1);
            est.state.mean[0] = r.t_true;
            ests.push(est);
        }
        let m = score_estimates(&sim.dataset, &ests, Some(&sim.truth_params), [0.0; 3]).unwrap();
        for e in m
            .param_rel_error
            .as_ref()
            .unwrap()
            .iter()
            .flatten()
            .flatten()
        {
            assert_abs_diff_eq!(*e, 0.1, epsilon = 1e-12);
        }
        for e in m.pose_rel_error.iter().flatten().flatten() {
            assert_abs_diff_eq!(*e, 0.1, epsilon = 1e-12);
        }
        assert_eq!(m.convergence_tick(1e-12), Some(1));
    }

    #[test]
    fn convergence_tick_finds_last_crossing() {
        let m = Metrics {
            ticks: vec![1, 2, 3, 4, 5],
            t_error: vec![0.3, 0.01, 0.2, 0.02, 0.01],
            t_rel_error: vec![None; 5],
            pose_rel_error: vec![[None, Some(0.5), Some(0.01)]; 5],
            param_rel_error: None,
            pose_floor: [0.0; 3],
        };
        assert_eq!(m.convergence_tick(0.05), Some(4));
        assert_eq!(m.convergence_tick(0.001), None);
        let s = m.summary(2, 0.05);
        assert_eq!(s.max_t_error, 0.2);
        assert_eq!(s.excluded_pose_entries, [3, 0, 0]);
        assert_eq!(s.convergence.pose, [Some(1), None, Some(1)]);
    }

    #[test]
    fn noise_free_exact_replay() {
        let mut cfg = WorkflowConfig::default();
        cfg.sim.noise_pos = 0.0;
        cfg.sim.noise_ang = 0.0;
        cfg.sim.n_samples = 60;
        cfg.truth_init = true;
        cfg.estimator.noise.qv = 0.0;
        cfg.estimator.noise.qr = nalgebra::Matrix5::zeros();
        let r = run_workflow(&cfg).unwrap();
        let s = r.metrics.summary(0, 1e-6);
        assert!(s.max_t_error <= 1e-6, "{s:?}");
    }

    #[test]
    fn drift_moves_truth() {
        let q = QuadratureRule::default();
        let mut cfg = SimConfig::default();
        cfg.n_samples = 10;
        cfg.drift = Some([0.0, 1e-6, 0.0, 0.0, 0.0]);
        let sim = generate_dataset(&cfg, &g(), &q).unwrap();
        assert_abs_diff_eq!(
            sim.truth_params[9].a[0] - sim.truth_params[0].a[0],
            9e-6,
            epsilon = 1e-15
        );
    }
}
