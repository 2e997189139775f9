//! Random valid systems for property checks and competitor sampling.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::chain::mean_transit_time;
use crate::error::Result;
use crate::system::CompartmentalSystem;

/// Off-diagonals uniform on `[0, 1]` and zero with probability 1/2, outflow
/// rates uniform on `[0.1, 1]`, input uniform on `[0, 1]` renormalised to
/// unit mass.
pub fn random_system<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CompartmentalSystem {
    loop {
        let mut b = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut col_sum = 0.0;
            for i in 0..d {
                if i != j && rng.random_bool(0.5) {
                    b[(i, j)] = rng.random::<f64>();
                    col_sum += b[(i, j)];
                }
            }
            let z = rng.random_range(0.1..=1.0);
            b[(j, j)] = -(col_sum + z);
        }
        let u = DVector::from_fn(d, |_, _| rng.random::<f64>());
        let total = u.sum();
        if total <= 0.0 {
            continue;
        }
        if let Ok(sys) = CompartmentalSystem::new(u / total, b) {
            return sys;
        }
    }
}

/// A random system with input `u`, scaled so its mean transit time equals
/// `target`. Scaling `B` by `s` divides `E[T]` by `s`.
pub fn random_with_mean_transit<R: Rng + ?Sized>(
    rng: &mut R,
    input: &DVector<f64>,
    target: f64,
) -> Result<CompartmentalSystem> {
    let d = input.len();
    let shape = random_system(rng, d);
    let sys = CompartmentalSystem::new(input.clone(), shape.matrix().clone())?;
    let factor = mean_transit_time(&sys)? / target;
    sys.scaled(factor)
}

/// A random system with steady state `x_star` under input `input`.
///
/// Off-diagonals are `reference` entries multiplied by factors uniform on
/// `[1 - spread, 1 + spread]`; outflow rates then follow from mass balance
/// `B x* = -u`. Draws with a negative outflow rate are rejected.
pub fn random_with_steady_state<R: Rng + ?Sized>(
    rng: &mut R,
    reference: &DMatrix<f64>,
    x_star: &DVector<f64>,
    input: &DVector<f64>,
    spread: f64,
) -> CompartmentalSystem {
    let d = x_star.len();
    loop {
        let mut b = DMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                if i != j {
                    b[(i, j)] = reference[(i, j)] * rng.random_range(1.0 - spread..=1.0 + spread);
                }
            }
        }
        // row i of B x* = -u fixes the diagonal B_ii
        let mut ok = true;
        for i in 0..d {
            let inflow: f64 = (0..d).filter(|&j| j != i).map(|j| b[(i, j)] * x_star[j]).sum();
            let lambda = (input[i] + inflow) / x_star[i];
            let internal: f64 = (0..d).filter(|&k| k != i).map(|k| b[(k, i)]).sum();
            if lambda - internal < 0.0 {
                ok = false;
                break;
            }
            b[(i, i)] = -lambda;
        }
        if !ok {
            continue;
        }
        if let Ok(sys) = CompartmentalSystem::new(input.clone(), b) {
            return sys;
        }
    }
}
