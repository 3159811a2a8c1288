//! Compare the analytic Jacobians with central finite differences at one
//! point, then run the randomized validation used by the CLI.

use shape_dekf::jacobians::{
    finite_difference as fd, geom_jacobian, ident_jacobian, measurement_matrix_param, validation,
    Coupling,
};
use shape_dekf::kinematics::{ConfigState, SegmentGeometry, ShapeParams};
use shape_dekf::quadrature::QuadratureRule;

fn main() -> Result<(), shape_dekf::error::Error> {
    let g = SegmentGeometry::default();
    let q = QuadratureRule::default();
    let w = ShapeParams::new(55.0, [-9e-4, -1.8e-4], [-8e-3, -2.4e-3]);
    let t = ConfigState(0.6);

    let jw = ident_jacobian(t, &w, &g, &q)?;
    println!("J_w (analytic):{jw}");
    println!(
        "J_w deviation: {:.2e}",
        fd::relative_deviation(&jw, &fd::ident_jacobian(t, &w, &g, &q)?)
    );

    let jx = geom_jacobian(t, &w, &g, &q)?;
    println!("J_x (analytic):{jx}");
    println!(
        "J_x deviation: {:.2e}",
        fd::relative_deviation(&jx, &fd::geom_jacobian(t, &w, &g, &q)?)
    );

    let hw = measurement_matrix_param(t, &w, &g, &q, Coupling::Total)?;
    println!(
        "H_w deviation: {:.2e}",
        fd::relative_deviation(&hw, &fd::param_matrix(t, &w, &g, &q)?)
    );

    let report = validation::validate(100, 42, &g, &q, None)?;
    for (name, dev, tol) in report.rows() {
        println!("{name:<26} {dev:.2e} (threshold {tol:.0e})");
    }
    println!("passed: {}", report.passed());
    Ok(())
}
