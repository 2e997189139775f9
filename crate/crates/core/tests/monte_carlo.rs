//! Sampler against the exact chain statistics.

use compartmental_entropy::chain::ChainStats;
use compartmental_entropy::entropy::EntropyReport;
use compartmental_entropy::sampler::{estimate, log_path_density, path_rng, sample_path, MonteCarloEstimates};
use compartmental_entropy::system::CompartmentalSystem;
use compartmental_entropy::zoo::{emanuel, table1_system, table1_systems};

/// Largest |z| over every check.
fn worst_z(sys: &CompartmentalSystem, mc: &MonteCarloEstimates) -> f64 {
    let s = ChainStats::new(sys).unwrap();
    let h = EntropyReport::from_stats(sys, &s).unwrap().path_entropy;
    let mut z = vec![
        mc.mean_transit.z_score(s.mean_transit),
        mc.mean_jumps.z_score(s.expected_jumps),
        mc.entropy.z_score(h),
    ];
    for j in 0..sys.dimension() {
        z.push(mc.mean_occupation[j].z_score(s.mean_occupation[j]));
        z.push(mc.exit_distribution[j].z_score(s.exit_distribution[j]));
    }
    z.into_iter().map(f64::abs).fold(0.0, f64::max)
}

#[test]
fn estimates_bracket_exact_values() {
    for (k, sys) in table1_systems().iter().enumerate() {
        let mc = estimate(sys, 20_000, 7 + k as u64, 2).unwrap();
        let z = worst_z(sys, &mc);
        assert!(z < 4.5, "row {}: |z| = {z}", k + 1);
    }
}

#[test]
fn single_pool_log_density_is_exponential() {
    let lambda = 2.5;
    let sys = CompartmentalSystem::from_rows(&[1.0], &[&[-lambda]]).unwrap();
    let mut rng = path_rng(3, 0);
    for _ in 0..100 {
        let p = sample_path(&sys, &mut rng).unwrap();
        // entry and exit
        assert_eq!(p.jumps(), 2);
        let want = lambda.ln() - lambda * p.transit_time;
        assert!((log_path_density(&sys, &p).unwrap() - want).abs() < 1e-12);
    }
}

#[test]
fn serial_paths_visit_both_pools_in_order() {
    let sys = table1_system(2, 1.0).unwrap();
    let mut rng = path_rng(1, 0);
    for _ in 0..100 {
        let p = sample_path(&sys, &mut rng).unwrap();
        let pools: Vec<usize> = p.visits.iter().map(|v| v.compartment).collect();
        assert_eq!(pools, vec![0, 1]);
        assert_eq!(p.exit_from, 1);
        let total: f64 = p.visits.iter().map(|v| v.sojourn).sum();
        assert!((total - p.transit_time).abs() < 1e-12);
    }
}

#[test]
fn results_depend_only_on_seed() {
    let sys = emanuel(1.0).unwrap();
    let a = estimate(&sys, 10_000, 42, 1).unwrap();
    let b = estimate(&sys, 10_000, 42, 8).unwrap();
    let c = estimate(&sys, 10_000, 43, 1).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn zero_paths_is_an_error() {
    assert!(estimate(&table1_system(1, 1.0).unwrap(), 0, 1, 1).is_err());
}
