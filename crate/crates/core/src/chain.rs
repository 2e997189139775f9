//! One-particle view of an equilibrium compartmental system.
//!
//! A single particle enters pool `j` with probability `beta_j = u_j / |u|_1`,
//! stays an exponentially distributed time with rate `lambda_j = -B_jj`, then
//! jumps to pool `i` with probability `B_ij / lambda_j` or leaves the system
//! with probability `z_j / lambda_j`. The full transition-rate matrix of this
//! absorbing chain is never formed; `(B, z)` carries the same information.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

/// `u / |u|_1`.
pub fn entry_distribution(sys: &CompartmentalSystem) -> Result<DVector<f64>> {
    let total = sys.total_input();
    if total <= 0.0 {
        return Err(Error::ZeroInput);
    }
    Ok(sys.input() / total)
}

/// One-step transition probabilities of the embedded jump chain.
///
/// Rows `0..d` are the pools and row `d` is the absorbing "outside" state.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMatrix {
    pub probabilities: DMatrix<f64>,
    /// Columns whose total exit rate is zero; they are left all-zero.
    pub zero_rate_columns: Vec<usize>,
}

impl JumpMatrix {
    pub fn dimension(&self) -> usize {
        self.probabilities.ncols()
    }

    pub fn exit_probability(&self, j: usize) -> f64 {
        self.probabilities[(self.dimension(), j)]
    }

    /// Restriction to the transient pools, `P|_S`.
    pub fn transient_block(&self) -> DMatrix<f64> {
        let d = self.dimension();
        self.probabilities.rows(0, d).into_owned()
    }
}

pub fn jump_probabilities(sys: &CompartmentalSystem) -> JumpMatrix {
    let d = sys.dimension();
    let b = sys.matrix();
    let z = sys.output_rates();
    let mut p = DMatrix::zeros(d + 1, d);
    let mut zero_rate_columns = Vec::new();
    for j in 0..d {
        let lambda = -b[(j, j)];
        if lambda <= 0.0 {
            zero_rate_columns.push(j);
            continue;
        }
        for i in 0..d {
            if i != j {
                p[(i, j)] = b[(i, j)] / lambda;
            }
        }
        p[(d, j)] = z[j] / lambda;
    }
    JumpMatrix {
        probabilities: p,
        zero_rate_columns,
    }
}

/// Expected visits per pool via the fundamental matrix `(I - P|_S)^{-1} beta`.
///
/// Independent of the steady state; used to cross-check the closed form in
/// [`ChainStats::expected_visits`].
pub fn expected_visits_fundamental(sys: &CompartmentalSystem) -> Result<DVector<f64>> {
    let beta = entry_distribution(sys)?;
    let jumps = jump_probabilities(sys);
    let d = sys.dimension();
    let m = DMatrix::<f64>::identity(d, d) - jumps.transient_block();
    m.lu()
        .solve(&beta)
        .ok_or(Error::SingularMatrix("I - P restricted to the pools"))
}

/// Mean statistics of the absorbing chain, computed once per system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStats {
    pub beta: DVector<f64>,
    /// Total exit rates `lambda_j = -B_jj`.
    pub lambda: DVector<f64>,
    /// Output rates `z_j`.
    pub z: DVector<f64>,
    pub x_star: DVector<f64>,
    pub jumps: JumpMatrix,
    /// `E[N_i]`, the expected number of visits to pool `i`.
    pub expected_visits: DVector<f64>,
    /// `E[N]`: visits plus the final jump out of the system.
    pub expected_jumps: f64,
    /// `E[O_j]`, mean total time spent in pool `j`.
    pub mean_occupation: DVector<f64>,
    pub mean_transit: f64,
    /// `P(E = j)`, probability that the particle leaves from pool `j`.
    pub exit_distribution: DVector<f64>,
}

impl ChainStats {
    pub fn new(sys: &CompartmentalSystem) -> Result<Self> {
        let beta = entry_distribution(sys)?;
        let total = sys.total_input();
        let x_star = sys.steady_state()?.x_star;
        let lambda = sys.exit_rates();
        let z = sys.output_rates();
        let jumps = jump_probabilities(sys);

        let mean_occupation = &x_star / total;
        let expected_visits = lambda.component_mul(&mean_occupation);
        let expected_jumps = expected_visits.sum() + 1.0;
        let mean_transit = x_star.sum() / total;
        let exit_distribution = z.component_mul(&mean_occupation);

        Ok(ChainStats {
            beta,
            lambda,
            z,
            x_star,
            jumps,
            expected_visits,
            expected_jumps,
            mean_occupation,
            mean_transit,
            exit_distribution,
        })
    }

    pub fn dimension(&self) -> usize {
        self.beta.len()
    }
}

pub fn expected_visits(sys: &CompartmentalSystem) -> Result<DVector<f64>> {
    Ok(ChainStats::new(sys)?.expected_visits)
}

/// `E[T] = |x*|_1 / |u|_1`.
pub fn mean_transit_time(sys: &CompartmentalSystem) -> Result<f64> {
    Ok(sys.steady_state()?.x_star.sum() / sys.total_input())
}

pub fn mean_occupation_times(sys: &CompartmentalSystem) -> Result<DVector<f64>> {
    Ok(sys.steady_state()?.x_star / sys.total_input())
}

pub fn exit_pool_distribution(sys: &CompartmentalSystem) -> Result<DVector<f64>> {
    Ok(ChainStats::new(sys)?.exit_distribution)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DensityMethod {
    /// Padé scaling-and-squaring matrix exponential.
    #[default]
    MatrixExponential,
    /// Classical RK4 on `w' = B w`, `w(0) = beta`.
    Ode,
}

/// Phase-type density of the transit time, `f(t) = z^T exp(t B) beta`.
pub fn transit_time_density(sys: &CompartmentalSystem, t: f64) -> Result<f64> {
    transit_time_density_with(sys, t, DensityMethod::default())
}

pub fn transit_time_density_with(sys: &CompartmentalSystem, t: f64, method: DensityMethod) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    let beta = entry_distribution(sys)?;
    let z = sys.output_rates();
    let w = match method {
        DensityMethod::MatrixExponential => (sys.matrix() * t).exp() * &beta,
        DensityMethod::Ode => integrate_linear(sys.matrix(), &beta, t),
    };
    Ok(z.dot(&w))
}

/// Integrates `w' = B w` from 0 to `t` with fixed-step RK4, step `h` chosen so
/// that `h * |B|_inf <= 0.01`.
fn integrate_linear(b: &DMatrix<f64>, w0: &DVector<f64>, t: f64) -> DVector<f64> {
    let norm = b
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = ((t * norm / 0.01).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut w = w0.clone();
    for _ in 0..steps {
        let k1 = b * &w;
        let k2 = b * (&w + &k1 * (h / 2.0));
        let k3 = b * (&w + &k2 * (h / 2.0));
        let k4 = b * (&w + &k3 * h);
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    w
}
