//! Path entropy, entropy rates and the one-pool comparison for the seven
//! small reference structures.
//!
//! cargo run --example table1

use compartmental_entropy::chain::ChainStats;
use compartmental_entropy::entropy::EntropyReport;
use compartmental_entropy::zoo::table1_systems;

fn main() -> compartmental_entropy::Result<()> {
    println!(
        "{:>3} {:>7} {:>7} {:>7} {:>7} {:>7}",
        "row", "thetaJ", "E[N]", "theta", "E[T]", "H"
    );
    for (k, sys) in table1_systems().iter().enumerate() {
        let stats = ChainStats::new(sys)?;
        let r = EntropyReport::from_stats(sys, &stats)?;
        println!(
            "{:>3} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
            k + 1,
            r.rate_per_jump,
            stats.expected_jumps,
            r.rate_per_time,
            stats.mean_transit,
            r.path_entropy
        );
    }

    // decomposition for the feedback structure
    let sys = &table1_systems()[4];
    let r = EntropyReport::new(sys)?;
    let d = r.decomposition;
    println!(
        "\nrow 5: H = {:.6} = {:.6} (entry) + {:.6} (jumps) + {:.6} (sojourns)",
        r.path_entropy, d.entry, d.jump, d.sojourn
    );
    println!(
        "one-pool equivalent: H = {:.4}, theta = {:.4}",
        r.one_pool.path_entropy, r.one_pool.rate_per_time
    );
    Ok(())
}
