//! Closed-form maximum-entropy systems under a mean-transit-time constraint
//! and under a steady-state constraint, compared with random competitors.
//!
//! cargo run --example maxent_closed_forms

use compartmental_entropy::entropy::path_entropy;
use compartmental_entropy::maxent::{
    maxent_fixed_steady_state, maxent_fixed_transit, SteadyStateConstraintProblem, TransitConstraintProblem,
};
use compartmental_entropy::random::{random_with_mean_transit, random_with_steady_state};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> compartmental_entropy::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);

    let u = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let best = maxent_fixed_transit(&TransitConstraintProblem::new(u.clone(), 1.0)?)?;
    let h = path_entropy(&best)?;
    let mut runner_up = f64::NEG_INFINITY;
    for _ in 0..200 {
        runner_up = runner_up.max(path_entropy(&random_with_mean_transit(&mut rng, &u, 1.0)?)?);
    }
    println!("fixed E[T] = 1, d = 3:\n{}", best.matrix());
    println!("H = {h:.6}, best of 200 random competitors {runner_up:.6}\n");

    let x = DVector::from_vec(vec![4.0, 1.0]);
    let best = maxent_fixed_steady_state(&SteadyStateConstraintProblem::new(x.clone())?)?;
    let h = path_entropy(&best)?;
    let mut runner_up = f64::NEG_INFINITY;
    for _ in 0..200 {
        let c = random_with_steady_state(&mut rng, best.matrix(), &x, best.input(), 0.9);
        runner_up = runner_up.max(path_entropy(&c)?);
    }
    println!(
        "fixed x* = (4, 1), driven by u = {:?}:\n{}",
        best.input().as_slice(),
        best.matrix()
    );
    println!("H = {h:.6}, best of 200 random competitors {runner_up:.6}");
    Ok(())
}
