//! Linearised substrate/microbe soil model swept over carbon use
//! efficiency.
//!
//! cargo run --release --example wang_sweep > wang.csv

use std::io::{self, Write};

use compartmental_entropy::io::write_sweep_csv;
use compartmental_entropy::zoo::{range_values, sweep, Family, Features, WangParameters};

fn main() -> compartmental_entropy::Result<()> {
    let p = WangParameters::default();
    eprintln!(
        "eps = {}: Cs* = {:.1}, Cb* = {:.3}",
        p.epsilon,
        p.substrate_equilibrium(),
        p.biomass_equilibrium()
    );

    let family = Family::Wang(p);
    let values = range_values(0.1, 0.99, 0.01)?;
    let mut rows = Vec::new();
    for (v, r) in values.iter().zip(sweep(&family, &values)) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => eprintln!("skip eps = {v}: {e}"),
        }
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_sweep_csv(&mut out, 2, &rows).expect("stdout");
    out.flush().expect("stdout");

    let f = Features::extract(&family, &rows);
    eprintln!("-B11 = 1 at eps = {:?}", f.unit_rate);
    Ok(())
}
