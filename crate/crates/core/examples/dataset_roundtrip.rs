//! Write a simulated dataset and its estimates to CSV, read them back and
//! check that a second write is byte-identical.

use shape_dekf::io;
use shape_dekf::simulator::{run_workflow, WorkflowConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = WorkflowConfig::default();
    cfg.sim.n_samples = 50;
    let result = run_workflow(&cfg)?;

    let dir = std::env::temp_dir().join("shape-dekf-roundtrip");
    std::fs::create_dir_all(&dir)?;
    let data_path = dir.join("dataset.csv");
    let est_path = dir.join("estimates.csv");
    io::save_dataset(&data_path, &result.simulation.dataset)?;
    io::save_estimates(&est_path, &result.estimates)?;

    let data = io::load_dataset(&data_path)?;
    let rows = io::load_estimates(&est_path)?;
    println!(
        "{} dataset rows, {} estimate rows in {}",
        data.len(),
        rows.len(),
        dir.display()
    );

    let mut again = Vec::new();
    io::write_dataset(&mut again, &data)?;
    println!("rewrite identical: {}", again == std::fs::read(&data_path)?);

    let last = rows.last().expect("non-empty");
    println!(
        "final x_hat = {}, w = {:?}",
        io::fmt_num(last.x_hat),
        last.w.map(io::fmt_num)
    );
    Ok(())
}
