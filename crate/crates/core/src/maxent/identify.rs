//! Two-pool identification from the transfer function
//! `(s + g1) / (s^2 + g2 s + g3)` with `u = (1, 0)`, `A = I`, `C = (1, 0)`.
//!
//! The measurement equations
//!
//! ```text
//! g1 = B12 + z2
//! g2 = B21 + z1 + B12 + z2
//! g3 = z1 B12 + z1 z2 + B21 z2
//! ```
//!
//! eliminate to `z2 = g1 - B12`, `z1 = g2 - g1 - B21` and
//! `B21 B12 = (g2 - g1) g1 - g3`, so every admissible model is fixed by `B12`
//! alone. Both diagonal entries are then constant (`B11 = -(g2 - g1)`,
//! `B22 = -g1`) and `det B = g3`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::Objective;
use crate::chain::ChainStats;
use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConstraints {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

impl GammaConstraints {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64) -> Self {
        GammaConstraints { gamma1, gamma2, gamma3 }
    }

    /// `B21 * B12` forced by the measurement equations.
    pub fn product(&self) -> f64 {
        let c = (self.gamma2 - self.gamma1) * self.gamma1 - self.gamma3;
        let scale = self
            .gamma3
            .abs()
            .max((self.gamma2 - self.gamma1).abs() * self.gamma1.abs());
        if c.abs() <= 1e-14 * scale {
            0.0
        } else {
            c
        }
    }

    /// Left-hand minus right-hand side of each measurement equation.
    pub fn residuals(&self, p: &Parameters) -> [f64; 3] {
        [
            p.b12 + p.z2 - self.gamma1,
            p.b21 + p.z1 + p.b12 + p.z2 - self.gamma2,
            p.z1 * p.b12 + p.z1 * p.z2 + p.b21 * p.z2 - self.gamma3,
        ]
    }
}

/// `p = (B12, B21, z1, z2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub b12: f64,
    pub b21: f64,
    pub z1: f64,
    pub z2: f64,
}

impl Parameters {
    pub fn as_array(&self) -> [f64; 4] {
        [self.b12, self.b21, self.z1, self.z2]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(
            2,
            2,
            &[-(self.b21 + self.z1), self.b12, self.b21, -(self.b12 + self.z2)],
        )
    }

    pub fn system(&self, input: &DVector<f64>) -> Result<CompartmentalSystem> {
        CompartmentalSystem::new(input.clone(), self.matrix())
    }
}

/// Admissible range of `B12`; every point maps to one model via [`Self::member`].
///
/// When `B21 B12 = 0` only the `B21 = 0` branch is parameterised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
    pub constraints: GammaConstraints,
}

impl FeasibleInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, b12: f64) -> bool {
        let slack = 1e-12 * self.hi.abs().max(1.0);
        b12 >= self.lo - slack && b12 <= self.hi + slack
    }

    pub fn member(&self, b12: f64) -> Parameters {
        let g = &self.constraints;
        let b12 = b12.clamp(self.lo, self.hi);
        let c = g.product();
        let b21 = if c == 0.0 { 0.0 } else { c / b12 };
        Parameters {
            b12,
            b21,
            z1: (g.gamma2 - g.gamma1 - b21).max(0.0),
            z2: (g.gamma1 - b12).max(0.0),
        }
    }
}

pub fn feasible_interval(g: &GammaConstraints) -> Result<FeasibleInterval> {
    let empty = |why: String| Err(Error::EmptyFeasibleSet(why));
    if ![g.gamma1, g.gamma2, g.gamma3].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidParameter("gamma values must be finite".into()));
    }
    let c = g.product();
    if c < 0.0 {
        return empty(format!("B21*B12 = (g2-g1)*g1 - g3 = {c} < 0"));
    }
    if g.gamma3 <= 0.0 {
        return empty(format!("det B = g3 = {} must be positive", g.gamma3));
    }
    if g.gamma1 <= 0.0 {
        return empty(format!("B12 + z2 = g1 = {} must be positive", g.gamma1));
    }
    let free = g.gamma2 - g.gamma1;
    if free < 0.0 {
        return empty(format!("B21 + z1 = g2 - g1 = {free} < 0"));
    }
    let (lo, hi) = if c == 0.0 {
        (0.0, g.gamma1)
    } else {
        if free == 0.0 {
            return empty("B21 + z1 = 0 but B21*B12 > 0".into());
        }
        (c / free, g.gamma1)
    };
    if lo > hi * (1.0 + 1e-12) {
        return empty(format!("B12 must lie in [{lo}, {hi}]"));
    }
    Ok(FeasibleInterval {
        lo: lo.min(hi),
        hi,
        constraints: *g,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyOptions {
    pub input: DVector<f64>,
    pub mesh: f64,
    pub bounds: (f64, f64),
    pub objective: Objective,
    pub scan_points: usize,
    /// Termination width of the golden-section search on `B12`.
    pub tolerance: f64,
    pub workers: usize,
    /// Keep the outcome of every grid start, not just distinct maxima.
    pub record_starts: bool,
}

impl Default for IdentifyOptions {
    fn default() -> Self {
        IdentifyOptions {
            input: DVector::from_vec(vec![1.0, 0.0]),
            mesh: 0.2,
            bounds: (0.0, 5.0),
            objective: Objective::RatePerTime,
            scan_points: 100_001,
            tolerance: 1e-10,
            workers: 1,
            record_starts: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalMaximum {
    pub parameters: Parameters,
    /// Objective value at the maximum.
    pub value: f64,
    pub theta: f64,
    pub path_entropy: f64,
    pub mean_transit: f64,
    /// First grid start (lexicographic order) that reached this maximum.
    pub start: [f64; 4],
    pub n_starts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub b12: f64,
    pub value: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartOutcome {
    pub start: [f64; 4],
    /// Index into `local_maxima`.
    pub maximum: usize,
}

#[derive(Debug, Clone)]
pub struct IdentificationResult {
    pub objective: Objective,
    pub interval: FeasibleInterval,
    pub best: LocalMaximum,
    pub best_system: CompartmentalSystem,
    pub local_maxima: Vec<LocalMaximum>,
    pub scan: ScanResult,
    pub starts_total: usize,
    pub starts_feasible: usize,
    pub starts_converged: usize,
    pub start_outcomes: Vec<StartOutcome>,
}

impl IdentificationResult {
    /// Entropy rate per unit time of the selected model.
    pub fn best_rate(&self) -> f64 {
        self.best.theta
    }
}

struct Evaluated {
    value: f64,
    report: EntropyReport,
    mean_transit: f64,
}

fn evaluate(interval: &FeasibleInterval, input: &DVector<f64>, objective: Objective, b12: f64) -> Result<Evaluated> {
    let sys = interval.member(b12).system(input)?;
    let stats = ChainStats::new(&sys)?;
    let report = EntropyReport::from_stats(&sys, &stats)?;
    Ok(Evaluated {
        value: objective.of(&report),
        report,
        mean_transit: stats.mean_transit,
    })
}

fn value_at(interval: &FeasibleInterval, input: &DVector<f64>, objective: Objective, b12: f64) -> f64 {
    evaluate(interval, input, objective, b12)
        .map(|e| e.value)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Brute-force oracle: evaluates the objective on `points` evenly spaced
/// values of `B12` (endpoints included) and returns the first best one.
pub fn dense_scan(
    interval: &FeasibleInterval,
    input: &DVector<f64>,
    objective: Objective,
    points: usize,
) -> ScanResult {
    let points = if interval.width() == 0.0 { 1 } else { points.max(2) };
    let mut best = ScanResult {
        b12: interval.lo,
        value: f64::NEG_INFINITY,
        points,
    };
    for k in 0..points {
        let b12 = if points == 1 {
            interval.lo
        } else {
            interval.lo + interval.width() * k as f64 / (points - 1) as f64
        };
        let v = value_at(interval, input, objective, b12);
        if v > best.value {
            best.b12 = b12;
            best.value = v;
        }
    }
    best
}

struct Ascent {
    b12: f64,
    converged: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITERATIONS: usize = 500;

/// Walks uphill from `start` with doubling steps until the objective drops,
/// then golden-section searches the bracket. Tracks the best point seen so a
/// maximum on the boundary is returned exactly.
fn local_ascent(f: impl Fn(f64) -> f64, lo: f64, hi: f64, start: f64, tol: f64) -> Ascent {
    let mut best = (start.clamp(lo, hi), f64::NEG_INFINITY);
    let mut eval = |x: f64| {
        let v = f(x);
        if v > best.1 || (v == best.1 && x < best.0) {
            best = (x, v);
        }
        v
    };
    let x0 = start.clamp(lo, hi);
    let f0 = eval(x0);
    let mut step = ((hi - lo) * 1e-3).max(tol);
    let right = (x0 + step).min(hi);
    let left = (x0 - step).max(lo);
    let fr = if right > x0 { eval(right) } else { f64::NEG_INFINITY };
    let fl = if left < x0 { eval(left) } else { f64::NEG_INFINITY };

    let (mut a, mut b) = if fr <= f0 && fl <= f0 {
        (left, right)
    } else {
        let dir = if fr >= fl { 1.0 } else { -1.0 };
        let (mut prev, mut cur, mut fcur) = (x0, if dir > 0.0 { right } else { left }, fr.max(fl));
        loop {
            if cur == if dir > 0.0 { hi } else { lo } {
                break (prev.min(cur), prev.max(cur));
            }
            step *= 2.0;
            let next = (cur + dir * step).clamp(lo, hi);
            let fnext = eval(next);
            if fnext <= fcur {
                break (prev.min(next), prev.max(next));
            }
            prev = cur;
            cur = next;
            fcur = fnext;
        }
    };

    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut iterations = 0;
    while b - a > tol && iterations < MAX_GOLDEN_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(d);
        }
        iterations += 1;
    }
    Ascent {
        b12: best.0,
        converged: b - a <= tol,
    }
}

fn grid(bounds: (f64, f64), mesh: f64) -> Vec<f64> {
    let n = ((bounds.1 - bounds.0) / mesh + 1e-9).floor() as usize + 1;
    (0..n).map(|k| bounds.0 + k as f64 * mesh).collect()
}

fn local_maximum(
    interval: &FeasibleInterval,
    options: &IdentifyOptions,
    b12: f64,
    start: [f64; 4],
) -> Result<LocalMaximum> {
    let e = evaluate(interval, &options.input, options.objective, b12)?;
    Ok(LocalMaximum {
        parameters: interval.member(b12),
        value: e.value,
        theta: e.report.rate_per_time,
        path_entropy: e.report.path_entropy,
        mean_transit: e.mean_transit,
        start,
        n_starts: 1,
    })
}

/// Selects the member of the admissible family maximising the objective.
///
/// Local ascents start from every point of a `mesh` grid over
/// `bounds^4` in `(B12, B21, z1, z2)`. A start is projected onto the family
/// by keeping its `B12` coordinate; starts outside the feasible `B12` range
/// are discarded. A dense 1-D scan over the range runs alongside as a
/// brute-force check.
pub fn identify(constraints: &GammaConstraints, options: &IdentifyOptions) -> Result<IdentificationResult> {
    if !(options.mesh > 0.0) || !(options.bounds.1 >= options.bounds.0) {
        return Err(Error::InvalidParameter(format!(
            "mesh {} over bounds {:?}",
            options.mesh, options.bounds
        )));
    }
    if options.input.len() != 2 {
        return Err(Error::DimensionMismatch("identification needs a two-pool input".into()));
    }
    let interval = feasible_interval(constraints)?;
    let scan = dense_scan(&interval, &options.input, options.objective, options.scan_points);
    let values = grid(options.bounds, options.mesh);
    let per_axis = values.len();
    let starts_total = per_axis.pow(4);

    if interval.width() == 0.0 {
        let only = local_maximum(&interval, options, interval.lo, [interval.lo, 0.0, 0.0, 0.0])?;
        return Ok(IdentificationResult {
            objective: options.objective,
            interval,
            best_system: only.parameters.system(&options.input)?,
            best: only.clone(),
            local_maxima: vec![only],
            scan,
            starts_total,
            starts_feasible: 0,
            starts_converged: 0,
            start_outcomes: Vec::new(),
        });
    }

    let projected: Vec<f64> = values.iter().cloned().filter(|&b| interval.contains(b)).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let f = |b: f64| value_at(&interval, &options.input, options.objective, b);
    let ascents: Vec<Ascent> = pool.install(|| {
        projected
            .par_iter()
            .map(|&b0| local_ascent(f, interval.lo, interval.hi, b0, options.tolerance))
            .collect()
    });
    let by_start: BTreeMap<u64, &Ascent> = projected.iter().zip(&ascents).map(|(b, a)| (b.to_bits(), a)).collect();

    let mut local_maxima: Vec<LocalMaximum> = Vec::new();
    let mut start_outcomes = Vec::new();
    let mut starts_feasible = 0;
    let mut starts_converged = 0;
    let merge_tol = (options.tolerance * 1e3).max(1e-9);
    for &b12 in &values {
        let Some(ascent) = by_start.get(&b12.to_bits()) else {
            continue;
        };
        for &b21 in &values {
            for &z1 in &values {
                for &z2 in &values {
                    starts_feasible += 1;
                    starts_converged += usize::from(ascent.converged);
                    let start = [b12, b21, z1, z2];
                    let index = match local_maxima
                        .iter()
                        .position(|m| (m.parameters.b12 - ascent.b12).abs() <= merge_tol)
                    {
                        Some(i) => {
                            local_maxima[i].n_starts += 1;
                            i
                        }
                        None => {
                            local_maxima.push(local_maximum(&interval, options, ascent.b12, start)?);
                            local_maxima.len() - 1
                        }
                    };
                    if options.record_starts {
                        start_outcomes.push(StartOutcome { start, maximum: index });
                    }
                }
            }
        }
    }
    if local_maxima.is_empty() {
        return Err(Error::EmptyFeasibleSet(format!(
            "no grid start with B12 in [{}, {}]",
            interval.lo, interval.hi
        )));
    }

    let best = local_maxima
        .iter()
        .fold(None::<&LocalMaximum>, |acc, m| match acc {
            Some(a) if a.value > m.value || (a.value == m.value && a.parameters.b12 <= m.parameters.b12) => Some(a),
            _ => Some(m),
        })
        .cloned()
        .expect("nonempty");
    Ok(IdentificationResult {
        objective: options.objective,
        interval,
        best_system: best.parameters.system(&options.input)?.labeled("identified"),
        best,
        local_maxima,
        scan,
        starts_total,
        starts_feasible,
        starts_converged,
        start_outcomes,
    })
}
