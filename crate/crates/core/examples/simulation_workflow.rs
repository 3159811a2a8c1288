//! Simulate a noisy sweep with offset parameters, run the dual EKF and print
//! the error summary after the burn-in window.

use shape_dekf::simulator::{run_workflow, WorkflowConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = WorkflowConfig::default();
    let start = std::time::Instant::now();
    let result = run_workflow(&cfg)?;
    let elapsed = start.elapsed();

    let truth = result.simulation.initial_truth();
    let last = result.estimates.last().expect("non-empty run");
    println!("truth     w = {:?}", truth.to_vector().as_slice());
    println!("estimated w = {:?}", last.params.mean.as_slice());

    let s = result.metrics.summary(100, 0.05);
    println!(
        "after tick {} ({} ticks scored):",
        s.after_tick, s.scored_ticks
    );
    println!("  max |t_hat - t|       = {:.4}", s.max_t_error);
    println!(
        "  max pose rel. error   = [{:.4}, {:.4}, {:.4}]",
        s.max_pose_rel_error[0], s.max_pose_rel_error[1], s.max_pose_rel_error[2]
    );
    println!("  excluded pose entries = {:?}", s.excluded_pose_entries);
    println!("  convergence tick      = {:?}", s.convergence.t);
    println!(
        "{} ticks in {:.1} ms",
        result.estimates.len(),
        elapsed.as_secs_f64() * 1e3
    );
    Ok(())
}
