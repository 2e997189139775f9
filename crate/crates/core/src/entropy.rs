//! Exact path entropy and entropy rates of the one-particle chain.
//!
//! All quantities are in nats. For a valid system with steady state `x*`,
//!
//! ```text
//! H = H(beta) + sum_j (x*_j / |u|_1) [ sum_{i != j} B_ij (1 - log B_ij) + z_j (1 - log z_j) ]
//! ```
//!
//! which splits into the entry entropy, the jump-target uncertainty
//! `sum_j E[N_j] H(P_{.,j})` and the sojourn uncertainty
//! `sum_j E[N_j] (1 - log lambda_j)`.

use nalgebra::{DMatrix, DVector};

use crate::chain::ChainStats;
use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

/// Below this rate `x (1 - log x)` is taken as its limit 0.
const RATE_FLOOR: f64 = 1e-300;

/// `x (1 - log x)` with the continuous extension 0 at `x = 0`.
pub fn poisson_entropy_rate(lambda: f64) -> f64 {
    if lambda < RATE_FLOOR {
        0.0
    } else {
        lambda * (1.0 - lambda.ln())
    }
}

/// Differential entropy of an exponential distribution with rate `lambda`.
pub fn exponential_entropy(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonpositiveRate(lambda));
    }
    Ok(1.0 - lambda.ln())
}

/// Shannon entropy `-sum p log p` with `0 log 0 = 0`.
pub fn discrete_entropy(p: &[f64]) -> Result<f64> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&x| x < 0.0 || !x.is_finite()) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotADistribution { sum });
    }
    Ok(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum())
}

/// Path entropy from its ingredients, with stocks held fixed.
///
/// `occupation[j]` is `x*_j / |u|_1`. Exposed so the entropy can be
/// differentiated in `B_ij` and `z_j` for frozen stocks.
pub fn path_entropy_from_parts(
    beta: &DVector<f64>,
    occupation: &DVector<f64>,
    b: &DMatrix<f64>,
    z: &DVector<f64>,
) -> f64 {
    let d = beta.len();
    let h_beta: f64 = beta.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    let flows: f64 = (0..d)
        .map(|j| {
            let out: f64 = (0..d)
                .filter(|&i| i != j)
                .map(|i| poisson_entropy_rate(b[(i, j)]))
                .sum::<f64>()
                + poisson_entropy_rate(z[j]);
            occupation[j] * out
        })
        .sum();
    h_beta + flows
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub entry: f64,
    pub jump: f64,
    pub sojourn: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.entry + self.jump + self.sojourn
    }
}

/// Entropy measures of a one-pool system with rate `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnePoolEquivalent {
    pub lambda: f64,
    pub path_entropy: f64,
    pub rate_per_time: f64,
    pub rate_per_jump: f64,
}

impl OnePoolEquivalent {
    pub fn from_mean_transit(mean_transit: f64) -> Result<Self> {
        if !(mean_transit > 0.0) {
            return Err(Error::NonpositiveTarget(format!("mean transit time {mean_transit}")));
        }
        let lambda = 1.0 / mean_transit;
        let h = 1.0 - lambda.ln();
        Ok(OnePoolEquivalent {
            lambda,
            path_entropy: h,
            rate_per_time: lambda * h,
            rate_per_jump: h / 2.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub path_entropy: f64,
    pub decomposition: Decomposition,
    /// Entropy rate per unit time, `H / E[T]`.
    pub rate_per_time: f64,
    /// Entropy rate per jump, `H / E[N]`.
    pub rate_per_jump: f64,
    pub one_pool: OnePoolEquivalent,
    /// Pools with zero total exit rate, whose jump entropy was taken as 0.
    pub zero_rate_pools: Vec<usize>,
}

impl EntropyReport {
    pub fn new(sys: &CompartmentalSystem) -> Result<Self> {
        Self::from_stats(sys, &ChainStats::new(sys)?)
    }

    pub fn from_stats(sys: &CompartmentalSystem, stats: &ChainStats) -> Result<Self> {
        let path_entropy = path_entropy_from_parts(&stats.beta, &stats.mean_occupation, sys.matrix(), &stats.z);
        let decomposition = decompose(stats);
        Ok(EntropyReport {
            path_entropy,
            decomposition,
            rate_per_time: path_entropy / stats.mean_transit,
            rate_per_jump: path_entropy / stats.expected_jumps,
            one_pool: OnePoolEquivalent::from_mean_transit(stats.mean_transit)?,
            zero_rate_pools: stats.jumps.zero_rate_columns.clone(),
        })
    }
}

fn decompose(stats: &ChainStats) -> Decomposition {
    let d = stats.dimension();
    let entry: f64 = stats.beta.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum();
    let mut jump = 0.0;
    let mut sojourn = 0.0;
    for j in 0..d {
        let visits = stats.expected_visits[j];
        let lambda = stats.lambda[j];
        if visits == 0.0 || lambda <= 0.0 {
            continue;
        }
        let column_entropy: f64 = stats
            .jumps
            .probabilities
            .column(j)
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        jump += visits * column_entropy;
        sojourn += visits * (1.0 - lambda.ln());
    }
    Decomposition { entry, jump, sojourn }
}

pub fn path_entropy(sys: &CompartmentalSystem) -> Result<f64> {
    Ok(EntropyReport::new(sys)?.path_entropy)
}

pub fn path_entropy_decomposition(sys: &CompartmentalSystem) -> Result<Decomposition> {
    Ok(decompose(&ChainStats::new(sys)?))
}

pub fn entropy_rate_per_time(sys: &CompartmentalSystem) -> Result<f64> {
    Ok(EntropyReport::new(sys)?.rate_per_time)
}

pub fn entropy_rate_per_jump(sys: &CompartmentalSystem) -> Result<f64> {
    Ok(EntropyReport::new(sys)?.rate_per_jump)
}

pub fn one_pool_equivalent(sys: &CompartmentalSystem) -> Result<OnePoolEquivalent> {
    OnePoolEquivalent::from_mean_transit(crate::chain::mean_transit_time(sys)?)
}
