//! Mean statistics of the one-particle chain: entry distribution, jump
//! probabilities, visits, occupation and transit times.
//!
//! cargo run --example chain_statistics

use compartmental_entropy::chain::{expected_visits_fundamental, ChainStats};
use compartmental_entropy::zoo::emanuel;

fn main() -> compartmental_entropy::Result<()> {
    let sys = emanuel(1.0)?;
    let stats = ChainStats::new(&sys)?;
    println!("beta            {:.4?}", stats.beta.as_slice());
    println!("lambda          {:.4?}", stats.lambda.as_slice());
    println!("x*              {:.2?}", stats.x_star.as_slice());
    println!("E[N_i]          {:.4?}", stats.expected_visits.as_slice());
    println!("  (fundamental) {:.4?}", expected_visits_fundamental(&sys)?.as_slice());
    println!("E[N]            {:.4}", stats.expected_jumps);
    println!("E[O_j]          {:.4?}", stats.mean_occupation.as_slice());
    println!("E[T]            {:.4} yr", stats.mean_transit);
    println!("P(exit from j)  {:.4?}", stats.exit_distribution.as_slice());
    println!("jump matrix (last row = exit):\n{:.4}", stats.jumps.probabilities);
    Ok(())
}
