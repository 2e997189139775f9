//! Acceptance criteria, one PASS/FAIL line each.
//!
//! cargo test --release --test acceptance

use std::process::ExitCode;
use std::time::{Duration, Instant};

use compartmental_entropy::chain::{mean_transit_time, ChainStats};
use compartmental_entropy::cli;
use compartmental_entropy::entropy::{path_entropy, EntropyReport};
use compartmental_entropy::maxent::{
    identify, maxent_fixed_steady_state, maxent_fixed_transit, GammaConstraints, IdentifyOptions,
    SteadyStateConstraintProblem, TransitConstraintProblem,
};
use compartmental_entropy::random::{random_system, random_with_mean_transit, random_with_steady_state};
use compartmental_entropy::sampler::estimate;
use compartmental_entropy::system::CompartmentalSystem;
use compartmental_entropy::zoo::{
    emanuel, range_values, sweep, table1_systems, wang, Family, Features, WangParameters,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

// (thetaJ, E[N], theta, E[T], H)
const TABLE1: [[f64; 5]; 7] = [
    [0.50, 2.00, 1.00, 1.00, 1.00],
    [0.67, 3.00, 1.00, 2.00, 2.00],
    [0.85, 2.00, 1.69, 1.00, 1.69],
    [1.08, 5.00, 1.35, 4.00, 5.39],
    [1.36, 3.00, 2.04, 2.00, 4.08],
    [0.75, 4.00, 1.00, 3.00, 3.00],
    [1.05, 2.00, 2.10, 1.00, 2.10],
];

fn table1() -> Outcome {
    let mut worst: f64 = 0.0;
    for (k, sys) in table1_systems().iter().enumerate() {
        let s = ChainStats::new(sys).unwrap();
        let r = EntropyReport::from_stats(sys, &s).unwrap();
        let got = [
            r.rate_per_jump,
            s.expected_jumps,
            r.rate_per_time,
            s.mean_transit,
            r.path_entropy,
        ];
        for (g, want) in got.iter().zip(TABLE1[k]) {
            worst = worst.max((g - want).abs());
        }
    }
    outcome(worst <= 0.005, format!("max |diff| {worst:.4} over 35 entries"))
}

fn decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let (mut worst_sum, mut worst_rate): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let d = rng.random_range(1..=8);
        let sys = random_system(&mut rng, d);
        let s = ChainStats::new(&sys).unwrap();
        let r = EntropyReport::from_stats(&sys, &s).unwrap();
        let h = r.path_entropy;
        worst_sum = worst_sum.max((h - r.decomposition.total()).abs() / h.abs().max(1.0));
        worst_rate = worst_rate
            .max(rel(r.rate_per_time * s.mean_transit, h))
            .max(rel(r.rate_per_jump * s.expected_jumps, h));
    }
    outcome(
        worst_sum <= 1e-10 && worst_rate <= 1e-12,
        format!("500 systems: decomposition {worst_sum:.1e}, rates {worst_rate:.1e}"),
    )
}

fn monte_carlo() -> Outcome {
    let mut systems = table1_systems();
    systems.push(emanuel(1.0).unwrap());
    systems.push(wang(&WangParameters::default()).unwrap());
    let mut zs = Vec::new();
    for sys in &systems {
        let s = ChainStats::new(sys).unwrap();
        let h = EntropyReport::from_stats(sys, &s).unwrap().path_entropy;
        let mc = estimate(sys, 100_000, 42, workers()).unwrap();
        zs.push(mc.mean_transit.z_score(s.mean_transit));
        zs.push(mc.mean_jumps.z_score(s.expected_jumps));
        zs.push(mc.entropy.z_score(h));
        for j in 0..sys.dimension() {
            zs.push(mc.mean_occupation[j].z_score(s.mean_occupation[j]));
            zs.push(mc.exit_distribution[j].z_score(s.exit_distribution[j]));
        }
    }
    let above3 = zs.iter().filter(|z| z.abs() > 3.0).count();
    let worst = zs.iter().map(|z| z.abs()).fold(0.0, f64::max);
    outcome(
        above3 <= 1 && worst <= 4.0,
        format!("{} checks, {above3} beyond 3 SE, max |z| {worst:.2}", zs.len()),
    )
}

fn assemble(o: &DMatrix<f64>, z: &DVector<f64>) -> DMatrix<f64> {
    let d = z.len();
    DMatrix::from_fn(d, d, |i, j| {
        if i != j {
            o[(i, j)]
        } else {
            -((0..d).filter(|&k| k != j).map(|k| o[(k, j)]).sum::<f64>() + z[j])
        }
    })
}

fn maxent() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut min_margin = f64::INFINITY;
    let mut max_second = f64::NEG_INFINITY;
    let mut exact_z = true;
    let step = 1e-3;

    for d in [2, 3] {
        let mut u = DVector::zeros(d);
        u[0] = 1.0;
        let target = 1.0;
        let best = maxent_fixed_transit(&TransitConstraintProblem::new(u.clone(), target).unwrap()).unwrap();
        exact_z &= best
            .output_rates()
            .iter()
            .all(|&z| z == 1.0 / mean_transit_time(&best).unwrap());
        let h0 = path_entropy(&best).unwrap();
        for _ in 0..200 {
            let c = random_with_mean_transit(&mut rng, &u, target).unwrap();
            min_margin = min_margin.min(h0 - path_entropy(&c).unwrap());
        }
        let o0 = best.matrix().clone();
        let z0 = best.output_rates();
        let h = |t: f64, dox: &DMatrix<f64>, dz: &DVector<f64>| {
            let sys = CompartmentalSystem::new(u.clone(), assemble(&(&o0 + dox * t), &(&z0 + dz * t))).unwrap();
            let s = mean_transit_time(&sys).unwrap() / target;
            path_entropy(&sys.scaled(s).unwrap()).unwrap()
        };
        for _ in 0..50 {
            let dox = DMatrix::from_fn(d, d, |i, j| if i == j { 0.0 } else { rng.random_range(-1.0..1.0) });
            let dz = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            max_second = max_second.max(h(step, &dox, &dz) + h(-step, &dox, &dz) - 2.0 * h(0.0, &dox, &dz));
        }
    }

    let x = DVector::from_vec(vec![4.0, 1.0]);
    let best = maxent_fixed_steady_state(&SteadyStateConstraintProblem::new(x.clone()).unwrap()).unwrap();
    let h0 = path_entropy(&best).unwrap();
    for _ in 0..200 {
        let c = random_with_steady_state(&mut rng, best.matrix(), &x, best.input(), 0.95);
        min_margin = min_margin.min(h0 - path_entropy(&c).unwrap());
    }
    let u = best.input().clone();
    let o0 = best.matrix().clone();
    let h = |t: f64, dox: &DMatrix<f64>| {
        let o = &o0 + dox * t;
        let z = DVector::from_fn(2, |i, _| {
            let k = 1 - i;
            (u[i] + o[(i, k)] * x[k]) / x[i] - o[(k, i)]
        });
        path_entropy(&CompartmentalSystem::new(u.clone(), assemble(&o, &z)).unwrap()).unwrap()
    };
    for _ in 0..50 {
        let dox = DMatrix::from_fn(2, 2, |i, j| if i == j { 0.0 } else { rng.random_range(-1.0..1.0) });
        max_second = max_second.max(h(step, &dox) + h(-step, &dox) - 2.0 * h(0.0, &dox));
    }

    outcome(
        min_margin > 0.0 && max_second < 0.0 && exact_z,
        format!("min margin {min_margin:.2e}, max second difference {max_second:.2e}, z_j == 1/E[T]: {exact_z}"),
    )
}

fn identification() -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(
        [
            "compent", "identify", "--gamma", "3,5,4", "--mesh", "0.2", "--bounds", "0:5",
        ],
        &mut out,
        &mut err,
    );
    let printed: Option<f64> = String::from_utf8_lossy(&out)
        .lines()
        .find_map(|l| l.strip_prefix("theta_max").and_then(|v| v.trim().parse().ok()));
    let r = identify(
        &GammaConstraints::new(3.0, 5.0, 4.0),
        &IdentifyOptions {
            workers: workers(),
            ..IdentifyOptions::default()
        },
    )
    .unwrap();
    let p = r.best.parameters;
    let theta = r.best.theta;
    let product = p.b12 * p.b21;
    let agree = (r.scan.value - r.best.value).abs();
    let pass = code == 0
        && printed.is_some_and(|t| (t - 1.916).abs() <= 0.02)
        && (theta - 1.916).abs() <= 0.02
        && (product - 2.0).abs() <= 1e-6
        && agree <= 1e-4;
    outcome(
        pass,
        format!("theta_max {theta:.5} (cli {printed:?}), B21*B12 {product:.9}, scan vs multistart {agree:.1e}"),
    )
}

fn emanuel_features() -> Outcome {
    let family = Family::Emanuel;
    let rows: Vec<_> = sweep(&family, &range_values(0.5, 10.0, 0.01).unwrap())
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let f = Features::extract(&family, &rows);
    let en0 = rows[0].expected_jumps;
    let drift = rows.iter().map(|r| (r.expected_jumps - en0).abs()).fold(0.0, f64::max);
    let be = f.break_even.unwrap_or(f64::NAN);
    let peak = f.theta_peak.unwrap_or(f64::NAN);
    let be_ok = (be - 4.31).abs() <= 0.05;
    let peak_ok = (5.5..=6.5).contains(&peak);
    outcome(
        be_ok && peak_ok && drift <= 1e-12,
        format!(
            "break-even xi {be:.4} (target 4.31 +- 0.05: {}), theta peak {peak:.4} ({}), E[N] drift {drift:.1e}",
            if be_ok { "ok" } else { "MISS" },
            if peak_ok { "ok" } else { "MISS" }
        ),
    )
}

fn wang_features() -> Outcome {
    let p = WangParameters::default();
    let (cs, cb) = (p.substrate_equilibrium(), p.biomass_equilibrium());
    let family = Family::Wang(p);
    let values = range_values(0.1, 0.99, 0.001).unwrap();
    let rows: Vec<_> = sweep(&family, &values).into_iter().filter_map(Result::ok).collect();
    let f = Features::extract(&family, &rows);
    let eps = f.unit_rate.unwrap_or(f64::NAN);
    let mut z2_zero = true;
    let mut finite = true;
    for row in &rows {
        let sys = wang(&p.with_epsilon(row.param)).unwrap();
        z2_zero &= sys.output_rates()[1] == 0.0;
        let r = &row.report;
        finite &= r.path_entropy.is_finite() && r.rate_per_time.is_finite() && r.rate_per_jump.is_finite();
    }
    let pass = (cs / 12650.0 - 1.0).abs() <= 0.005
        && (cb / 50.36 - 1.0).abs() <= 0.005
        && (eps - 0.926).abs() <= 0.005
        && z2_zero
        && finite;
    outcome(
        pass,
        format!(
            "x* ({cs:.1}, {cb:.3}), -B11 = 1 at eps {eps:.4}, z2 == 0: {z2_zero}, finite: {finite} ({} rows)",
            rows.len()
        ),
    )
}

fn determinism() -> Outcome {
    let run = |w: &str| {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cli::run(
            [
                "compent",
                "simulate",
                "--builtin",
                "emanuel",
                "--seed",
                "42",
                "--paths",
                "100000",
                "--workers",
                w,
            ],
            &mut out,
            &mut err,
        );
        (code, out)
    };
    let (c1, a) = run("1");
    let (_, b) = run("1");
    let (c8, c) = run("8");
    outcome(
        c1 == 0 && c8 == 0 && a == b && a == c,
        format!("repeat identical: {}, workers 1 vs 8 identical: {}", a == b, a == c),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("reference table", Duration::from_secs(1), table1),
        ("decomposition identity", Duration::from_secs(5), decomposition),
        ("monte carlo oracle", Duration::from_secs(60), monte_carlo),
        ("maxent closed forms", Duration::from_secs(30), maxent),
        ("identification", Duration::from_secs(60), identification),
        ("emanuel features", Duration::from_secs(30), emanuel_features),
        ("wang features", Duration::from_secs(30), wang_features),
        ("determinism", Duration::from_secs(30), determinism),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} {}. {name}: {} [{:.2}s / {}s{}]",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
