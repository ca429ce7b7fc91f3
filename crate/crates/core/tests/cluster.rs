use proptest::prelude::*;
use seqcode::cluster::{order_stat_mean, sample_round, simulate_wait, LatencyModel, SeededRng};

#[test]
fn analytic_means_round_to_known_values() {
    let exp = LatencyModel::exponential(1.0).unwrap();
    let rounded = [0.25, 0.58, 1.08, 2.08];
    for (l, want) in (1..=4).zip(rounded) {
        let got = order_stat_mean(&exp, 4, l).unwrap();
        assert_eq!((got * 100.0).round() / 100.0, want, "l={l}");
    }
    assert!((order_stat_mean(&exp, 4, 3).unwrap() - 13.0 / 12.0).abs() < 1e-15);
    assert!((order_stat_mean(&exp, 4, 4).unwrap() - 25.0 / 12.0).abs() < 1e-15);
    let slow = LatencyModel::exponential(2.0).unwrap();
    assert!((order_stat_mean(&slow, 4, 4).unwrap() - 25.0 / 24.0).abs() < 1e-15);
    assert!(order_stat_mean(&LatencyModel::deterministic(1.0).unwrap(), 4, 1).is_err());
    assert!(order_stat_mean(&exp, 4, 0).is_err());
}

#[test]
fn monte_carlo_within_three_standard_errors() {
    let exp = LatencyModel::exponential(1.0).unwrap();
    let mut rng = SeededRng::new(0x5eed);
    let rounds = 100_000;
    let mut sum = [0.0f64; 4];
    let mut sq = [0.0f64; 4];
    for _ in 0..rounds {
        let r = sample_round(&exp, 4, &mut rng);
        for l in 0..4 {
            let t = r.elapsed(l + 1);
            sum[l] += t;
            sq[l] += t * t;
        }
    }
    let n = rounds as f64;
    for l in 0..4 {
        let mean = sum[l] / n;
        let var = (sq[l] - n * mean * mean) / (n - 1.0);
        let se = (var / n).sqrt();
        let want = order_stat_mean(&exp, 4, l + 1).unwrap();
        assert!(
            (mean - want).abs() <= 3.0 * se,
            "l={} mean={mean} want={want} se={se}",
            l + 1
        );
    }
    // the 2% form of the same check, for T_(3)
    assert!((sum[2] / n - 13.0 / 12.0).abs() <= 0.02 * 13.0 / 12.0);
}

#[test]
fn deterministic_rounds_are_flat() {
    let m = LatencyModel::deterministic(1.0).unwrap();
    let r = sample_round(&m, 4, &mut SeededRng::new(1));
    assert!(r.finish_times.iter().all(|&t| t == 1.0));
    let w = simulate_wait(&m, 4, 4, &mut SeededRng::new(1));
    assert_eq!(w.elapsed, 1.0);
    assert_eq!(w.responders, vec![1, 2, 3, 4]);
}

#[test]
fn wait_excludes_the_slowest() {
    let exp = LatencyModel::exponential(1.0).unwrap();
    let mut rng = SeededRng::new(77);
    for _ in 0..100 {
        let w = simulate_wait(&exp, 4, 3, &mut rng);
        let t = &w.round.finish_times;
        let argmax = (0..4).max_by(|&a, &b| t[a].total_cmp(&t[b])).unwrap() + 1;
        assert!(!w.responders.contains(&argmax));
        let mut sorted = t.clone();
        sorted.sort_by(f64::total_cmp);
        assert_eq!(w.elapsed, sorted[2]);
        let first = simulate_wait(&exp, 4, 1, &mut rng.clone());
        let min = first.round.finish_times.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(first.elapsed, min);
    }
}

proptest! {
    #[test]
    fn order_statistics_are_sorted(seed in any::<u64>(), workers in 1usize..12, rate in 0.1f64..10.0) {
        let m = LatencyModel::exponential(rate).unwrap();
        let r = sample_round(&m, workers, &mut SeededRng::new(seed));
        for l in 1..workers {
            prop_assert!(r.elapsed(l) <= r.elapsed(l + 1));
        }
        prop_assert!(r.finish_times.iter().all(|&t| t >= 0.0));
        let mut a = r.sorted_times();
        let mut b = r.finish_times.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn same_seed_same_draws(seed in any::<u64>(), rounds in 1usize..20) {
        let m = LatencyModel::shifted_exponential(0.5, 2.0).unwrap();
        let mut a = SeededRng::new(seed);
        let mut b = SeededRng::new(seed);
        for _ in 0..rounds {
            let ra = sample_round(&m, 5, &mut a);
            let rb = sample_round(&m, 5, &mut b);
            prop_assert_eq!(ra.finish_times.iter().map(|t| t.to_bits()).collect::<Vec<_>>(),
                            rb.finish_times.iter().map(|t| t.to_bits()).collect::<Vec<_>>());
            prop_assert!(ra.finish_times.iter().all(|&t| t >= 0.5));
        }
    }
}
