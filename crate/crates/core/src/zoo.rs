//! Named models and parameter sweeps.
//!
//! * [`emanuel`]: five-pool global carbon cycle with a rate modifier `xi`.
//! * [`wang`]: two-pool substrate/microbe soil model linearised at its
//!   equilibrium for a carbon use efficiency `epsilon`.
//! * [`table1_systems`]: seven small reference structures.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::chain::ChainStats;
use crate::entropy::EntropyReport;
use crate::error::{Error, Result};
use crate::system::CompartmentalSystem;

/// Emanuel input in PgC/yr.
pub const EMANUEL_INPUT: [f64; 5] = [77.0, 0.0, 36.0, 0.0, 0.0];

/// `(row, col, numerator, denominator)` of the non-zero entries of the
/// Emanuel matrix at `xi = 1`, in 1/yr.
const EMANUEL_RATES: [(usize, usize, i32, i32); 12] = [
    (0, 0, -77, 37),
    (1, 0, 31, 37),
    (3, 0, 21, 37),
    (1, 1, -31, 452),
    (3, 1, 15, 452),
    (4, 1, 2, 452),
    (2, 2, -36, 69),
    (3, 2, 12, 69),
    (4, 2, 6, 69),
    (3, 3, -48, 81),
    (4, 3, 3, 81),
    (4, 4, -11, 1121),
];

pub fn emanuel(xi: f64) -> Result<CompartmentalSystem> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")));
    }
    let mut b = DMatrix::zeros(5, 5);
    for &(i, j, num, den) in &EMANUEL_RATES {
        b[(i, j)] = xi * (f64::from(num) / f64::from(den));
    }
    Ok(CompartmentalSystem::new(DVector::from_column_slice(&EMANUEL_INPUT), b)?.labeled(format!("emanuel xi={xi}")))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WangParameters {
    /// Microbial turnover rate, 1/yr.
    pub mu_b: f64,
    /// Carbon influx, gC/m^2/yr.
    pub f_npp: f64,
    /// Half-saturation constant, gC/m^2.
    pub k_s: f64,
    /// Maximum assimilation rate per unit biomass, 1/yr.
    pub v_s: f64,
    pub epsilon: f64,
}

impl Default for WangParameters {
    fn default() -> Self {
        WangParameters {
            mu_b: 4.38,
            f_npp: 345.0,
            k_s: 53_954.83,
            v_s: 59.13,
            epsilon: 0.39,
        }
    }
}

impl WangParameters {
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        WangParameters { epsilon, ..self }
    }

    pub fn check(&self) -> Result<()> {
        let all_positive = [self.mu_b, self.f_npp, self.k_s, self.v_s]
            .iter()
            .all(|&x| x > 0.0 && x.is_finite());
        if !all_positive {
            return Err(Error::InvalidParameter("Wang parameters must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        let ratio = self.v_s * self.epsilon / self.mu_b;
        if ratio <= 1.0 {
            return Err(Error::InvalidEfficiency { ratio });
        }
        Ok(())
    }

    /// Equilibrium substrate carbon `C_s*`.
    pub fn substrate_equilibrium(&self) -> f64 {
        self.k_s / (self.v_s * self.epsilon / self.mu_b - 1.0)
    }

    /// Equilibrium microbial biomass `C_b*`.
    pub fn biomass_equilibrium(&self) -> f64 {
        self.f_npp / (self.mu_b * (1.0 / self.epsilon - 1.0))
    }

    /// Substrate uptake rate `lambda(x) = C_b V_s / (C_s + K_s)`.
    pub fn uptake_rate(&self, substrate: f64, biomass: f64) -> f64 {
        biomass * self.v_s / (substrate + self.k_s)
    }
}

/// The Wang model frozen at its equilibrium: `B = [[-l, mu_b], [eps l, -mu_b]]`
/// with `l = lambda(x*)` and `u = (F_NPP, 0)`. The microbial pool has no
/// direct outflow.
pub fn wang(params: &WangParameters) -> Result<CompartmentalSystem> {
    params.check()?;
    let cs = params.substrate_equilibrium();
    let cb = params.biomass_equilibrium();
    let l = params.uptake_rate(cs, cb);
    let b = DMatrix::from_row_slice(2, 2, &[-l, params.mu_b, params.epsilon * l, -params.mu_b]);
    Ok(CompartmentalSystem::new(DVector::from_vec(vec![params.f_npp, 0.0]), b)?
        .labeled(format!("wang epsilon={}", params.epsilon)))
}

/// Row `1..=7` of the reference table; `lambda` is used only by row 1.
pub fn table1_system(row: usize, lambda: f64) -> Result<CompartmentalSystem> {
    let (u, b): (Vec<f64>, Vec<f64>) = match row {
        1 => (vec![1.0], vec![-lambda]),
        2 => (vec![1.0, 0.0], vec![-1.0, 0.0, 1.0, -1.0]),
        3 => (vec![1.0, 1.0], vec![-1.0, 0.0, 0.0, -1.0]),
        4 => (vec![1.0, 0.0], vec![-1.0, 0.5, 1.0, -1.0]),
        5 => (vec![1.0, 1.0], vec![-1.0, 0.5, 0.5, -1.0]),
        6 => (
            vec![1.0, 0.0, 0.0],
            vec![-1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0],
        ),
        7 => (
            vec![1.0, 1.0, 1.0],
            vec![-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0],
        ),
        _ => return Err(Error::InvalidParameter(format!("table row must be 1..=7, got {row}"))),
    };
    let d = u.len();
    Ok(
        CompartmentalSystem::new(DVector::from_vec(u), DMatrix::from_row_slice(d, d, &b))?
            .labeled(format!("table1 row {row}")),
    )
}

/// All seven reference systems, row 1 at `lambda = 1`.
pub fn table1_systems() -> Vec<CompartmentalSystem> {
    (1..=7)
        .map(|row| table1_system(row, 1.0).expect("reference systems are valid"))
        .collect()
}

#[derive(Debug, Clone)]
pub enum Family {
    /// Emanuel model at rate modifier `xi`.
    Emanuel,
    /// Wang model with every parameter but `epsilon` held fixed.
    Wang(WangParameters),
    /// A user system whose matrix is multiplied by the swept value.
    Custom(CompartmentalSystem),
}

impl Family {
    pub fn system(&self, value: f64) -> Result<CompartmentalSystem> {
        match self {
            Family::Emanuel => emanuel(value),
            Family::Wang(base) => wang(&base.with_epsilon(value)),
            Family::Custom(sys) => {
                if !(value > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "rate factor must be positive, got {value}"
                    )));
                }
                sys.scaled(value)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub stocks: DVector<f64>,
    /// `lambda_j = -B_jj`; not part of the CSV schema.
    pub exit_rates: DVector<f64>,
    pub mean_transit: f64,
    pub expected_jumps: f64,
    pub report: EntropyReport,
}

pub fn sweep_row(family: &Family, value: f64) -> Result<SweepRow> {
    let sys = family.system(value)?;
    let stats = ChainStats::new(&sys)?;
    let report = EntropyReport::from_stats(&sys, &stats)?;
    Ok(SweepRow {
        param: value,
        stocks: stats.x_star.clone(),
        exit_rates: stats.lambda.clone(),
        mean_transit: stats.mean_transit,
        expected_jumps: stats.expected_jumps,
        report,
    })
}

/// One independent row per value, in input order. A failing value yields an
/// `Err` in its slot and the sweep carries on.
pub fn sweep(family: &Family, values: &[f64]) -> Vec<Result<SweepRow>> {
    values.par_iter().map(|&v| sweep_row(family, v)).collect()
}

/// Characteristic points of a swept curve, refined on the continuous model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Features {
    /// Where the path entropy crosses its one-pool-equivalent value.
    pub break_even: Option<f64>,
    /// Location of the interior maximum of the entropy rate per unit time.
    pub theta_peak: Option<f64>,
    /// Where the exit rate of pool 1 crosses 1.
    pub unit_rate: Option<f64>,
}

fn bisect(f: impl Fn(f64) -> Option<f64>, mut a: f64, mut b: f64) -> Option<f64> {
    let mut fa = f(a)?;
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * a.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    const G: f64 = 0.618_033_988_749_894_9;
    let mut c = b - G * (b - a);
    let mut d = a + G * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > 1e-10 * a.abs().max(1.0) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - G * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + G * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// First sign change of `g` between consecutive rows, refined by bisection.
fn crossing(family: &Family, rows: &[SweepRow], g: impl Fn(&SweepRow) -> f64 + Copy) -> Option<f64> {
    rows.windows(2).find_map(|w| {
        let (ga, gb) = (g(&w[0]), g(&w[1]));
        if ga == 0.0 {
            return Some(w[0].param);
        }
        if (ga < 0.0) == (gb < 0.0) {
            return None;
        }
        bisect(|x| sweep_row(family, x).ok().map(|r| g(&r)), w[0].param, w[1].param)
    })
}

impl Features {
    /// Needs at least two rows; rows must be sorted by parameter.
    pub fn extract(family: &Family, rows: &[SweepRow]) -> Features {
        if rows.len() < 2 {
            return Features::default();
        }
        let break_even = crossing(family, rows, |r| r.report.path_entropy - r.report.one_pool.path_entropy);
        let unit_rate = crossing(family, rows, |r| r.exit_rates[0] - 1.0);
        let theta_peak = rows
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.report.rate_per_time.total_cmp(&b.1.report.rate_per_time))
            .and_then(|(k, _)| {
                if k == 0 || k + 1 == rows.len() {
                    return None;
                }
                let theta = |x: f64| {
                    sweep_row(family, x)
                        .map(|r| r.report.rate_per_time)
                        .unwrap_or(f64::NEG_INFINITY)
                };
                Some(golden_max(theta, rows[k - 1].param, rows[k + 1].param))
            });
        Features {
            break_even,
            theta_peak,
            unit_rate,
        }
    }
}

/// `start, start + step, ...` up to `stop`, including `stop` when it is
/// within half a step of the last point.
pub fn range_values(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParameter(format!("bad range {start}:{stop}:{step}")));
    }
    if stop < start {
        return Err(Error::InvalidParameter(format!(
            "range stop {stop} is below start {start}"
        )));
    }
    let n = ((stop - start) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}
