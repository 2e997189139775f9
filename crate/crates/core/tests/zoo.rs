//! Reference models and sweep features.

use compartmental_entropy::chain::ChainStats;
use compartmental_entropy::entropy::EntropyReport;
use compartmental_entropy::zoo::{
    emanuel, range_values, sweep, table1_system, table1_systems, wang, Family, Features, WangParameters,
};
use compartmental_entropy::Error;

// reference (thetaJ, E[N], theta, E[T], H), two decimals
const TABLE1: [[f64; 5]; 7] = [
    [0.50, 2.00, 1.00, 1.00, 1.00],
    [0.67, 3.00, 1.00, 2.00, 2.00],
    [0.85, 2.00, 1.69, 1.00, 1.69],
    [1.08, 5.00, 1.35, 4.00, 5.39],
    [1.36, 3.00, 2.04, 2.00, 4.08],
    [0.75, 4.00, 1.00, 3.00, 3.00],
    [1.05, 2.00, 2.10, 1.00, 2.10],
];

#[test]
fn table1_matches_reference_values() {
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
            assert!((g - want).abs() <= 0.005, "row {}: {got:?}", k + 1);
        }
    }
}

#[test]
fn table1_exact_values() {
    let ln2 = std::f64::consts::LN_2;
    let h = |row| {
        EntropyReport::new(&table1_system(row, 1.0).unwrap())
            .unwrap()
            .path_entropy
    };
    assert!((h(3) - (1.0 + ln2)).abs() < 1e-14);
    assert!((h(4) - (3.0 + 2.0 * ln2 + 1.0)).abs() < 1e-12);
    assert!((h(5) - (2.0 + 3.0 * ln2)).abs() < 1e-12);
    assert!((h(7) - (1.0 + 3f64.ln())).abs() < 1e-14);
    // row 1 is a single pool with rate lambda
    for lambda in [0.5, 2.0] {
        let r = EntropyReport::new(&table1_system(1, lambda).unwrap()).unwrap();
        assert!((r.path_entropy - (1.0 - f64::ln(lambda))).abs() < 1e-14);
    }
}

#[test]
fn emanuel_steady_state_and_invariants() {
    let x = ChainStats::new(&emanuel(1.0).unwrap()).unwrap().x_star;
    for (got, want) in x.iter().zip([37.0, 452.0, 69.0, 81.0, 1121.0]) {
        assert!((got - want).abs() < 1e-9 * want);
    }
    let base = ChainStats::new(&emanuel(1.0).unwrap()).unwrap();
    for xi in range_values(0.5, 10.0, 0.25).unwrap() {
        let s = ChainStats::new(&emanuel(xi).unwrap()).unwrap();
        assert!((s.expected_jumps - base.expected_jumps).abs() <= 1e-12);
        assert!((s.mean_transit * xi - base.mean_transit).abs() <= 1e-10 * base.mean_transit);
    }
}

#[test]
fn emanuel_entropy_decreases_with_xi() {
    let rows: Vec<_> = sweep(&Family::Emanuel, &range_values(0.5, 10.0, 0.1).unwrap())
        .into_iter()
        .map(Result::unwrap)
        .collect();
    for w in rows.windows(2) {
        assert!(w[1].report.path_entropy < w[0].report.path_entropy);
        assert!(w[1].report.one_pool.path_entropy < w[0].report.one_pool.path_entropy);
    }
}

#[test]
fn emanuel_features() {
    let rows: Vec<_> = sweep(&Family::Emanuel, &range_values(0.5, 10.0, 0.01).unwrap())
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let f = Features::extract(&Family::Emanuel, &rows);
    // H(xi) = H1 - (EN-1) ln xi and H_op(xi) = 1 + ln ET1 - ln xi cross at
    // exp((H1 - 1 - ln ET1) / (EN - 2))
    let s = ChainStats::new(&emanuel(1.0).unwrap()).unwrap();
    let h1 = EntropyReport::from_stats(&emanuel(1.0).unwrap(), &s)
        .unwrap()
        .path_entropy;
    let oracle = ((h1 - 1.0 - s.mean_transit.ln()) / (s.expected_jumps - 2.0)).exp();
    assert!((oracle - 4.4936).abs() < 1e-4);
    assert!((f.break_even.unwrap() - oracle).abs() < 1e-8);
    let peak = f.theta_peak.unwrap();
    assert!((5.5..=6.5).contains(&peak));
    assert!((peak - 5.7617).abs() < 1e-3);
    // -B11 = 2.08 xi is above 1 over the whole range
    assert!(f.unit_rate.is_none());
}

#[test]
fn wang_reference_point() {
    let p = WangParameters::default();
    assert!((p.substrate_equilibrium() / 12650.0 - 1.0).abs() < 0.005);
    assert!((p.biomass_equilibrium() / 50.36 - 1.0).abs() < 0.005);
    let sys = wang(&p).unwrap();
    let z = sys.output_rates();
    assert_eq!(z[1], 0.0);
    let r = EntropyReport::new(&sys).unwrap();
    assert!(r.path_entropy.is_finite() && r.rate_per_time.is_finite() && r.rate_per_jump.is_finite());
}

#[test]
fn wang_sweep_features_and_domain() {
    let family = Family::Wang(WangParameters::default());
    let values = range_values(0.1, 0.99, 0.001).unwrap();
    let results = sweep(&family, &values);
    let rows: Vec<_> = results.into_iter().filter_map(Result::ok).collect();
    for row in &rows {
        let sys = wang(&WangParameters::default().with_epsilon(row.param)).unwrap();
        assert_eq!(sys.output_rates()[1], 0.0);
        assert!(row.report.path_entropy.is_finite());
    }
    let f = Features::extract(&family, &rows);
    assert!((f.unit_rate.unwrap() - 0.926).abs() <= 0.005);
    // V_s * eps <= mu_b has no positive equilibrium
    let low = WangParameters::default().with_epsilon(0.001);
    assert!(matches!(wang(&low), Err(Error::InvalidEfficiency { .. })));
}

#[test]
fn single_point_sweep_has_no_features() {
    let rows: Vec<_> = sweep(&Family::Emanuel, &range_values(5.0, 5.0, 1.0).unwrap())
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(Features::extract(&Family::Emanuel, &rows), Features::default());
}

#[test]
fn custom_family_scales_rates() {
    let base = table1_system(5, 1.0).unwrap();
    let rows: Vec<_> = sweep(&Family::Custom(base), &[1.0, 2.0])
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert!((rows[1].mean_transit - rows[0].mean_transit / 2.0).abs() < 1e-12);
}
