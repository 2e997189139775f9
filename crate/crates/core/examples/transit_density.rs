//! Transit-time density f(t) = z' exp(tB) beta by two routes: the Padé
//! matrix exponential and an RK4 solve of w' = Bw.
//!
//! cargo run --example transit_density

use compartmental_entropy::chain::{transit_time_density_with, DensityMethod};
use compartmental_entropy::zoo::table1_system;

fn main() -> compartmental_entropy::Result<()> {
    let sys = table1_system(5, 1.0)?;
    println!("{:>6} {:>14} {:>14} {:>10}", "t", "expm", "rk4", "diff");
    for k in 0..=20 {
        let t = 0.5 * k as f64;
        let a = transit_time_density_with(&sys, t, DensityMethod::MatrixExponential)?;
        let b = transit_time_density_with(&sys, t, DensityMethod::Ode)?;
        println!("{t:>6.2} {a:>14.10} {b:>14.10} {:>10.2e}", (a - b).abs());
    }
    Ok(())
}
