//! Entropy of the five-pool global carbon model as all rates are scaled by
//! xi, with the break-even point against the one-pool equivalent and the
//! location of the entropy-rate peak.
//!
//! cargo run --release --example emanuel_sweep > emanuel.csv

use std::io::{self, Write};

use compartmental_entropy::io::write_sweep_csv;
use compartmental_entropy::zoo::{range_values, sweep, Family, Features};

fn main() -> compartmental_entropy::Result<()> {
    let values = range_values(0.5, 10.0, 0.05)?;
    let rows: Vec<_> = sweep(&Family::Emanuel, &values).into_iter().collect::<Result<_, _>>()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    write_sweep_csv(&mut out, 5, &rows).expect("stdout");
    out.flush().expect("stdout");

    let f = Features::extract(&Family::Emanuel, &rows);
    eprintln!("break-even xi  {:?}", f.break_even);
    eprintln!("theta peak xi  {:?}", f.theta_peak);
    Ok(())
}
