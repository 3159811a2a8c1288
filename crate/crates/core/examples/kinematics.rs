//! Evaluate curvature, bending angle and backbone pose across the homotopy.

use shape_dekf::kinematics::{
    bending_angle, boundary_angles, curvature, measure, position, ConfigState, SegmentGeometry,
    ShapeParams,
};
use shape_dekf::quadrature::QuadratureRule;

fn main() -> Result<(), shape_dekf::error::Error> {
    let g = SegmentGeometry::default();
    let q = QuadratureRule::default();
    let w = ShapeParams::nominal(g.length);

    let (ea, eb) = boundary_angles(&w, &g);
    println!("boundary tip angles: theta_ea = {ea:.4} rad, theta_eb = {eb:.4} rad");

    println!(
        "{:>5} {:>10} {:>10} {:>10} {:>10}",
        "t", "kappa(L)", "theta(L)", "px", "pz"
    );
    for i in 0..=4 {
        let t = ConfigState(i as f64 / 4.0);
        let pose = measure(t, &w, &g, &q)?;
        println!(
            "{:>5.2} {:>10.5} {:>10.4} {:>10.3} {:>10.3}",
            t.t(),
            curvature(g.length, t, &w, &g)?,
            pose.theta,
            pose.px,
            pose.pz
        );
    }

    // Backbone samples of the most bent curve.
    let t = ConfigState(1.0);
    println!("\nbackbone at t = 1:");
    for i in 0..=6 {
        let s = g.length * i as f64 / 6.0;
        let (px, pz) = position(s, t, &w, &g, &q)?;
        println!(
            "  s = {s:>4.0} mm  theta = {:>7.4}  p = ({px:>8.3}, {pz:>7.3})",
            bending_angle(s, t, &w, &g)?
        );
    }
    Ok(())
}
