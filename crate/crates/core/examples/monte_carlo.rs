//! Seeded parallel Monte Carlo check of the exact chain statistics and path
//! entropy. Results depend only on the seed, never on the worker count.
//!
//! cargo run --release --example monte_carlo -- [seed] [paths]

use compartmental_entropy::chain::ChainStats;
use compartmental_entropy::entropy::path_entropy;
use compartmental_entropy::sampler::{estimate, path_rng, sample_path};
use compartmental_entropy::zoo::emanuel;

fn main() -> compartmental_entropy::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let paths: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);

    let sys = emanuel(1.0)?;
    let stats = ChainStats::new(&sys)?;

    let path = sample_path(&sys, &mut path_rng(seed, 0))?;
    println!("path 0 visits:");
    for v in &path.visits {
        println!("  pool {} for {:.3} yr", v.compartment + 1, v.sojourn);
    }
    println!(
        "  left from pool {} after {:.3} yr\n",
        path.exit_from + 1,
        path.transit_time
    );

    let one = estimate(&sys, paths, seed, 1)?;
    let many = estimate(&sys, paths, seed, 8)?;
    assert_eq!(one, many, "worker count changed the result");

    let show = |name: &str, e: compartmental_entropy::sampler::Estimate, exact: f64| {
        println!(
            "{name:<8} {:>10.4} +- {:<8.4} exact {:>10.4}  z {:>6.2}",
            e.estimate,
            e.std_error,
            exact,
            e.z_score(exact)
        );
    };
    show("E[T]", one.mean_transit, stats.mean_transit);
    show("E[N]", one.mean_jumps, stats.expected_jumps);
    for (j, e) in one.mean_occupation.iter().enumerate() {
        show(&format!("E[O{}]", j + 1), *e, stats.mean_occupation[j]);
    }
    show("H", one.entropy, path_entropy(&sys)?);
    Ok(())
}
