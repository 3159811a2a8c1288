//! Drive the dual EKF tick by tick over noise-free measurements of a curve
//! whose parameters differ from the filter's initial guess.

use shape_dekf::estimator::{DualEkf, EstimatorConfig, MeasurementSample};
use shape_dekf::kinematics::{measure, ConfigState, SegmentGeometry, ShapeParams};
use shape_dekf::quadrature::QuadratureRule;

fn main() -> Result<(), shape_dekf::error::Error> {
    let g = SegmentGeometry::default();
    let q = QuadratureRule::default();
    let cfg = EstimatorConfig::nominal(g.length);
    let ekf = DualEkf::new(cfg, g, q.clone())?;

    let n = 200;
    let truth = ShapeParams::new(57.0, [-9e-4, -1.8e-4], [-9.5e-3, -2.2e-3]);
    let step = 1.0 / (n - 1) as f64;

    let mut est = ekf.initialize()?;
    println!(
        "{:>4} {:>7} {:>7} {:>8} {:>10} {:>10}",
        "k", "t", "t_hat", "l_hat", "b1_hat", "b2_hat"
    );
    for k in 1..=n {
        let t = (k - 1) as f64 * step;
        let y = measure(ConfigState(t), &truth, &g, &q)?;
        let u = if k == 1 { 0.0 } else { step };
        est = ekf.step(&est, &MeasurementSample { k, y, u })?;
        if k % 25 == 0 || k == 1 {
            let w = est.w();
            println!(
                "{k:>4} {t:>7.3} {:>7.3} {:>8.3} {:>10.3e} {:>10.3e}",
                est.x().t(),
                w.l,
                w.b[0],
                w.b[1]
            );
        }
    }
    println!("truth: l = {}, b = {:?}", truth.l, truth.b);
    Ok(())
}
