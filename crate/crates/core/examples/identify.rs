//! Pick one two-pool model out of the family matching three transfer
//! function coefficients, by maximising an entropy objective.
//!
//! cargo run --release --example identify

use compartmental_entropy::maxent::{feasible_interval, identify, GammaConstraints, IdentifyOptions, Objective};

fn main() -> compartmental_entropy::Result<()> {
    let g = GammaConstraints::new(3.0, 5.0, 4.0);
    let interval = feasible_interval(&g)?;
    println!(
        "feasible B12 in [{}, {}], B21 * B12 = {}",
        interval.lo,
        interval.hi,
        g.product()
    );

    for objective in [Objective::RatePerTime, Objective::PathEntropy, Objective::RatePerJump] {
        let options = IdentifyOptions {
            objective,
            workers: 4,
            ..IdentifyOptions::default()
        };
        let r = identify(&g, &options)?;
        let p = r.best.parameters;
        println!(
            "{objective:<14} max {:.5}  B12 {:.5} B21 {:.5} z1 {:.5} z2 {:.5}  theta {:.5}  scan {:.5}",
            r.best.value, p.b12, p.b21, p.z1, p.z2, r.best.theta, r.scan.value
        );
    }
    Ok(())
}
