use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cavity_mems::analytic::{recurrence_concurrences, rho_s_dephased};
use cavity_mems::evolution::{reduce_to_atoms, SpectralPropagator};
use cavity_mems::frontier::{
    bell_frontier, classify_ratio, mems_curve, random_state, Rationality, MIN_BELL_SAMPLES, TSIRELSON,
};
use cavity_mems::metrics::{bell_max_general, linear_entropy};
use cavity_mems::model::SystemParams;
use cavity_mems::trajectory::{mirror_symmetry_check, sweep, uniform_grid, Source};

#[test]
fn bell_frontier_dominates_samples_and_trajectories() {
    let envelope = bell_frontier(101, MIN_BELL_SAMPLES, 7).unwrap();
    let pts = envelope.points();
    assert_eq!(pts[0], (0.0, TSIRELSON));
    assert!(pts.windows(2).all(|w| w[1].1 <= w[0].1));

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100_000 {
        let s = random_state(&mut rng);
        let bound = envelope.step_value_at(linear_entropy(&s)).unwrap();
        assert!(bell_max_general(&s).unwrap() <= bound + 1e-3);
    }

    // Beyond the entropy where the envelope drops below 2 nothing violates.
    let crossing = pts.iter().find(|p| p.1 <= 2.0).unwrap().0;
    for (delta, lambda) in [(0.01, 1.0), (0.5, 1.0), (5.0, 1.0), (0.5, 0.7), (1.0, 0.9)] {
        let t = sweep(&SystemParams::scaled(delta, lambda, 0.0).unwrap(), 500.0, 20_001, Source::Analytic).unwrap();
        for q in &t.points {
            assert!(q.bell_max <= envelope.step_value_at(q.linear_entropy).unwrap() + 1e-3);
            if q.linear_entropy >= crossing {
                assert!(q.bell_max <= 2.0 + 1e-9);
            }
        }
    }
}

#[test]
fn bell_frontier_is_reproducible() {
    let a = bell_frontier(21, MIN_BELL_SAMPLES, 3).unwrap();
    let b = bell_frontier(21, MIN_BELL_SAMPLES, 3).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trajectories_stay_below_mems() {
    for (delta, lambda) in [(0.0, 1.0), (0.5, 1.0), (5.0, 1.0), (0.5, 0.6), (0.5, 0.9)] {
        let t = sweep(&SystemParams::scaled(delta, lambda, 0.0).unwrap(), 500.0, 20_001, Source::Analytic).unwrap();
        for q in &t.points {
            assert!(q.concurrence <= cavity_mems::frontier::mems_concurrence_at(q.linear_entropy) + 1e-9);
        }
    }
}

#[test]
fn dephased_reduced_state_matches_master_equation() {
    for delta in [0.0, 0.5, 1.0] {
        for lambda in [0.7, 1.0] {
            let p = SystemParams::scaled(delta, lambda, 0.01).unwrap();
            let prop = SpectralPropagator::new(&p).unwrap();
            for gt in uniform_grid(300.0, 301).unwrap() {
                let numeric = reduce_to_atoms(&p, &prop.state_at(gt).unwrap()).unwrap();
                let closed = rho_s_dephased(&p, gt).unwrap();
                assert!(closed.matrix().max_abs_diff(numeric.matrix()) < 1e-10);
            }
        }
    }
}

#[test]
fn rational_ratio_gives_finitely_many_recurrence_values() {
    // Δ² = 8g²/3 gives Δ/Ω = 1/2.
    let p = SystemParams::scaled((8.0f64 / 3.0).sqrt(), 1.0, 0.0).unwrap();
    let report = classify_ratio(&p, 1e-9, 1000).unwrap();
    assert_eq!(report.classification, Rationality::EffectivelyRational);
    let q = report.best_q.unwrap();
    let mut values: Vec<i64> = recurrence_concurrences(&p, 10_000)
        .unwrap()
        .iter()
        .map(|r| (r.concurrence * 1e9).round() as i64)
        .collect();
    values.sort_unstable();
    values.dedup();
    assert!(values.len() as u64 <= 2 * q);
}

#[test]
fn mirror_score_for_partial_excitation() {
    let curve = mems_curve(2001).unwrap();
    let t = sweep(&SystemParams::scaled(0.5, 0.7, 0.0).unwrap(), 500.0, 50_001, Source::Analytic).unwrap();
    let score = mirror_symmetry_check(&t, &curve).unwrap();
    println!("mirror asymmetry score, λ=0.7 Δ=0.5g: {score:.6}");
    assert!(score.is_finite() && score >= 0.0);
}
