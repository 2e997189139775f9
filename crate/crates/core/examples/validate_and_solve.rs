//! Validate a compartmental system, report violations, and solve for the
//! steady state.
//!
//! cargo run --example validate_and_solve

use compartmental_entropy::system::{validate, CompartmentalSystem, DEFAULT_TOL};
use nalgebra::{DMatrix, DVector};

fn main() -> compartmental_entropy::Result<()> {
    // a broken matrix: positive diagonal and a column that gains mass
    let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.1, -1.0]);
    let u = DVector::from_vec(vec![1.0, 0.0]);
    let report = validate(&bad, &u, DEFAULT_TOL);
    println!("broken system:");
    for v in &report.violations {
        println!("  {v}");
    }

    let sys = CompartmentalSystem::from_rows(&[1.0, 0.0], &[&[-1.0, 0.5], &[1.0, -1.0]])?;
    let ss = sys.steady_state()?;
    println!("feedback system x* = {:?}", ss.x_star.as_slice());
    println!("release flux      = {:?}", ss.release_flux.as_slice());
    println!("output rates z    = {:?}", sys.output_rates().as_slice());
    Ok(())
}
