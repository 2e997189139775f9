//! Monte Carlo single-particle paths.
//!
//! Every path `k` draws from its own ChaCha8 stream keyed by `(seed, k)`, so a
//! run is a function of `(seed, n_paths)` alone. Paths are grouped in fixed
//! blocks of [`BLOCK_SIZE`] and block accumulators are merged in block order,
//! which makes the floating-point result independent of the worker count.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{entry_distribution, jump_probabilities};
use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

pub const DEFAULT_MAX_JUMPS: usize = 10_000_000;
pub const BLOCK_SIZE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    /// Zero-based pool index.
    pub compartment: usize,
    pub sojourn: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub visits: Vec<Visit>,
    pub exit_from: usize,
    pub transit_time: f64,
}

impl PathSample {
    /// Number of jumps including entry and exit, `visits + 1`.
    pub fn jumps(&self) -> usize {
        self.visits.len() + 1
    }
}

/// The RNG stream of path `index` under `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Precomputed sampling tables for one system.
#[derive(Debug, Clone)]
pub struct PathSampler {
    dim: usize,
    entry_cdf: Vec<f64>,
    /// Column `j` holds the cumulative jump distribution out of pool `j`;
    /// entry `d` is the exit.
    jump_cdf: DMatrix<f64>,
    lambda: Vec<f64>,
    beta: Vec<f64>,
    rates: DMatrix<f64>,
    z: Vec<f64>,
    max_jumps: usize,
}

fn cumulative(p: impl Iterator<Item = f64>) -> Vec<f64> {
    p.scan(0.0, |acc, x| {
        *acc += x;
        Some(*acc)
    })
    .collect()
}

/// First index whose cumulative weight exceeds `u`; falls back to the last
/// index with positive weight when round-off leaves the total below `u`.
fn pick(cdf: impl Iterator<Item = f64> + Clone, u: f64) -> usize {
    let mut prev = 0.0;
    let mut last_positive = 0;
    for (k, c) in cdf.enumerate() {
        if c > prev {
            last_positive = k;
        }
        if u < c {
            return k;
        }
        prev = c;
    }
    last_positive
}

impl PathSampler {
    pub fn new(sys: &CompartmentalSystem) -> Result<Self> {
        let beta = entry_distribution(sys)?;
        let jumps = jump_probabilities(sys);
        let d = sys.dimension();
        let mut jump_cdf = DMatrix::zeros(d + 1, d);
        for j in 0..d {
            let col = cumulative(jumps.probabilities.column(j).iter().cloned());
            for (i, c) in col.into_iter().enumerate() {
                jump_cdf[(i, j)] = c;
            }
        }
        Ok(PathSampler {
            dim: d,
            entry_cdf: cumulative(beta.iter().cloned()),
            jump_cdf,
            lambda: sys.exit_rates().iter().cloned().collect(),
            beta: beta.iter().cloned().collect(),
            rates: sys.matrix().clone(),
            z: sys.output_rates().iter().cloned().collect(),
            max_jumps: DEFAULT_MAX_JUMPS,
        })
    }

    pub fn with_max_jumps(mut self, cap: usize) -> Self {
        self.max_jumps = cap;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PathSample> {
        let d = self.dim;
        let mut current = pick(self.entry_cdf.iter().cloned(), rng.random::<f64>());
        let mut visits = Vec::new();
        let mut transit_time = 0.0;
        loop {
            if visits.len() >= self.max_jumps {
                return Err(Error::MaxJumpsExceeded { cap: self.max_jumps });
            }
            let lambda = self.lambda[current];
            let sojourn = -(1.0 - rng.random::<f64>()).ln() / lambda;
            visits.push(Visit {
                compartment: current,
                sojourn,
            });
            transit_time += sojourn;
            let next = pick(self.jump_cdf.column(current).iter().cloned(), rng.random::<f64>());
            if next == d {
                return Ok(PathSample {
                    visits,
                    exit_from: current,
                    transit_time,
                });
            }
            current = next;
        }
    }

    /// `log f(path)`: entry probability, one rate factor per transition
    /// (exit via `z`), and `exp(-lambda t)` survival per sojourn.
    pub fn log_path_density(&self, path: &PathSample) -> Result<f64> {
        let first = path.visits.first().ok_or(Error::ZeroProbabilityPath)?;
        if path.visits.iter().any(|v| v.compartment >= self.dim) {
            return Err(Error::DimensionMismatch(format!(
                "path visits a pool outside 1..={}",
                self.dim
            )));
        }
        let log_pos = |x: f64| {
            if x > 0.0 {
                Ok(x.ln())
            } else {
                Err(Error::ZeroProbabilityPath)
            }
        };
        let mut log_f = log_pos(self.beta[first.compartment])?;
        for pair in path.visits.windows(2) {
            let (from, to) = (pair[0].compartment, pair[1].compartment);
            if from == to {
                return Err(Error::ZeroProbabilityPath);
            }
            log_f += log_pos(self.rates[(to, from)])?;
        }
        log_f += log_pos(self.z[path.exit_from])?;
        for v in &path.visits {
            log_f -= self.lambda[v.compartment] * v.sojourn;
        }
        Ok(log_f)
    }
}

pub fn sample_path<R: Rng + ?Sized>(sys: &CompartmentalSystem, rng: &mut R) -> Result<PathSample> {
    PathSampler::new(sys)?.sample_path(rng)
}

pub fn log_path_density(sys: &CompartmentalSystem, path: &PathSample) -> Result<f64> {
    PathSampler::new(sys)?.log_path_density(path)
}

/// Welford mean/variance with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Running {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Running) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> Estimate {
        let var = if self.n > 1 { self.m2 / (self.n - 1) as f64 } else { 0.0 };
        Estimate {
            estimate: self.mean,
            std_error: (var / self.n as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Accumulator {
    transit: Running,
    jumps: Running,
    neg_log_density: Running,
    occupation: Vec<Running>,
    exits: Vec<u64>,
}

impl Accumulator {
    fn new(d: usize) -> Self {
        Accumulator {
            transit: Running::default(),
            jumps: Running::default(),
            neg_log_density: Running::default(),
            occupation: vec![Running::default(); d],
            exits: vec![0; d],
        }
    }

    fn push(&mut self, path: &PathSample, log_density: f64, scratch: &mut [f64]) {
        self.transit.push(path.transit_time);
        self.jumps.push(path.jumps() as f64);
        self.neg_log_density.push(-log_density);
        scratch.iter_mut().for_each(|x| *x = 0.0);
        for v in &path.visits {
            scratch[v.compartment] += v.sojourn;
        }
        for (acc, &t) in self.occupation.iter_mut().zip(scratch.iter()) {
            acc.push(t);
        }
        self.exits[path.exit_from] += 1;
    }

    fn merge(&mut self, other: &Accumulator) {
        self.transit.merge(&other.transit);
        self.jumps.merge(&other.jumps);
        self.neg_log_density.merge(&other.neg_log_density);
        for (a, b) in self.occupation.iter_mut().zip(&other.occupation) {
            a.merge(b);
        }
        for (a, b) in self.exits.iter_mut().zip(&other.exits) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `(estimate - truth) / std_error`; 0 when both the error and the
    /// deviation vanish, infinite when only the error does.
    pub fn z_score(&self, truth: f64) -> f64 {
        let dev = self.estimate - truth;
        if self.std_error > 0.0 {
            dev / self.std_error
        } else if dev.abs() <= 1e-12 * truth.abs().max(1.0) {
            0.0
        } else {
            dev.signum() * f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloEstimates {
    pub n_paths: u64,
    pub seed: u64,
    pub mean_transit: Estimate,
    pub mean_jumps: Estimate,
    pub mean_occupation: Vec<Estimate>,
    /// Exit-pool frequencies with binomial standard errors.
    pub exit_distribution: Vec<Estimate>,
    /// `-mean log f(path)`.
    pub entropy: Estimate,
}

fn run_block(sampler: &PathSampler, seed: u64, start: u64, end: u64) -> Result<Accumulator> {
    let mut acc = Accumulator::new(sampler.dimension());
    let mut scratch = vec![0.0; sampler.dimension()];
    for k in start..end {
        let mut rng = path_rng(seed, k);
        let path = sampler.sample_path(&mut rng)?;
        let log_density = sampler.log_path_density(&path)?;
        acc.push(&path, log_density, &mut scratch);
    }
    Ok(acc)
}

/// Runs `n_paths` independent paths on `workers` threads.
pub fn estimate(sys: &CompartmentalSystem, n_paths: u64, seed: u64, workers: usize) -> Result<MonteCarloEstimates> {
    estimate_with(&PathSampler::new(sys)?, n_paths, seed, workers)
}

pub fn estimate_with(sampler: &PathSampler, n_paths: u64, seed: u64, workers: usize) -> Result<MonteCarloEstimates> {
    if n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
    }
    let blocks = n_paths.div_ceil(BLOCK_SIZE);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let partials: Vec<Accumulator> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let start = b * BLOCK_SIZE;
                run_block(sampler, seed, start, (start + BLOCK_SIZE).min(n_paths))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut total = Accumulator::new(sampler.dimension());
    for p in &partials {
        total.merge(p);
    }

    let n = n_paths as f64;
    let exit_distribution = total
        .exits
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            Estimate {
                estimate: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
            }
        })
        .collect();
    Ok(MonteCarloEstimates {
        n_paths,
        seed,
        mean_transit: total.transit.estimate(),
        mean_jumps: total.jumps.estimate(),
        mean_occupation: total.occupation.iter().map(Running::estimate).collect(),
        exit_distribution,
        entropy: total.neg_log_density.estimate(),
    })
}

/// One row of the per-path table.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub index: u64,
    pub jumps: usize,
    pub transit_time: f64,
    pub exit_from: usize,
    pub log_density: f64,
}

/// Regenerates path `index` exactly as [`estimate`] drew it.
pub fn path_record(sampler: &PathSampler, seed: u64, index: u64) -> Result<PathRecord> {
    let path = sampler.sample_path(&mut path_rng(seed, index))?;
    Ok(PathRecord {
        index,
        jumps: path.jumps(),
        transit_time: path.transit_time,
        exit_from: path.exit_from,
        log_density: sampler.log_path_density(&path)?,
    })
}
