use proptest::prelude::*;
use seqcode::feasibility::{
    check_feasible, feasible_configs, min_rows_oracle, min_rows_oracle_with, row_count, Configuration, OracleLimits,
    RankTarget,
};

/// Naive minimum: every allocation in `0..=k` per worker, every subset checked.
fn naive_min_rows(workers: usize, level: usize, rows: usize) -> usize {
    let mut best = usize::MAX;
    let mut alloc = vec![0usize; workers];
    loop {
        let covers = (0u32..(1 << workers))
            .filter(|m| m.count_ones() as usize == level)
            .all(|m| {
                (0..workers)
                    .filter(|w| m & (1 << w) != 0)
                    .map(|w| alloc[w])
                    .sum::<usize>()
                    >= rows
            });
        if covers {
            best = best.min(alloc.iter().sum());
        }
        let mut i = 0;
        while i < workers && alloc[i] == rows {
            alloc[i] = 0;
            i += 1;
        }
        if i == workers {
            return best;
        }
        alloc[i] += 1;
    }
}

#[test]
fn sorted_oracle_matches_naive_search() {
    for workers in 1..=4 {
        for level in 1..=workers {
            for rows in 0..=5 {
                assert_eq!(
                    min_rows_oracle(workers, level, rows).unwrap(),
                    naive_min_rows(workers, level, rows),
                    "L={workers} i={level} k={rows}"
                );
            }
        }
    }
}

#[test]
fn formula_equals_oracle_exhaustively() {
    for workers in 1..=5 {
        for level in 1..=workers {
            for rows in 0..=12 {
                assert_eq!(
                    row_count(level, rows, workers).unwrap(),
                    min_rows_oracle(workers, level, rows).unwrap(),
                    "L={workers} i={level} k={rows}"
                );
            }
        }
    }
}

#[test]
fn oracle_allocations_cover() {
    for (l, i, k) in [(4, 2, 3), (5, 3, 6), (6, 4, 7), (4, 4, 1)] {
        let inst = min_rows_oracle_with(l, i, k, OracleLimits::default()).unwrap();
        assert!(inst.covers());
        assert_eq!(inst.allocation.iter().sum::<usize>(), inst.objective);
    }
    assert_eq!(min_rows_oracle(4, 2, 3).unwrap(), 7);
    assert_eq!(min_rows_oracle(4, 4, 1).unwrap(), 1);
    assert_eq!(min_rows_oracle(5, 3, 6).unwrap(), 10);
    assert!(min_rows_oracle(7, 2, 3).is_err());
    assert!(min_rows_oracle(4, 2, 25).is_err());
    assert!(min_rows_oracle(4, 5, 1).is_err());
}

proptest! {
    #[test]
    fn divisible_counts_scale((workers, level, mult) in (1usize..=16).prop_flat_map(|l| (Just(l), 1..=l, 0usize..50))) {
        prop_assert_eq!(row_count(level, level * mult, workers).unwrap(), mult * workers);
    }

    #[test]
    fn count_is_monotone_in_rows((workers, level, rows) in (1usize..=16).prop_flat_map(|l| (Just(l), 1..=l, 0usize..200))) {
        prop_assert!(row_count(level, rows, workers).unwrap() <= row_count(level, rows + 1, workers).unwrap());
    }

    #[test]
    fn verdict_matches_budget(k in prop::collection::vec(0usize..12, 1..=6), n in 1usize..12) {
        let cfg = Configuration::new(k.len(), n, k.clone()).unwrap();
        let (budget, ok) = check_feasible(&cfg);
        prop_assert_eq!(budget.total, budget.per_level.iter().sum::<usize>());
        prop_assert_eq!(budget.capacity, n * k.len());
        prop_assert_eq!(ok, budget.total <= budget.capacity);
    }
}

#[test]
fn example_configurations_are_tight() {
    for (l, n, k, s) in [
        (4, 3, vec![0, 3, 3, 1], vec![0, 7, 4, 1]),
        (4, 10, vec![0, 0, 6, 32], vec![0, 0, 8, 32]),
        (4, 10, vec![5, 10, 0, 0], vec![20, 20, 0, 0]),
    ] {
        let cfg = Configuration::new(l, n, k).unwrap();
        let (budget, ok) = check_feasible(&cfg);
        assert!(ok && budget.is_tight());
        assert_eq!(budget.per_level, s);
    }
    let single = Configuration::new(4, 3, vec![0, 0, 9, 0]).unwrap();
    assert_eq!(check_feasible(&single).0.per_level[2], 12);
    assert!(check_feasible(&single).1);
    let over = Configuration::new(4, 3, vec![4, 0, 0, 0]).unwrap();
    assert_eq!(check_feasible(&over).0.total, 16);
    assert!(!check_feasible(&over).1);
}

#[test]
fn configuration_search_finds_preset_choices() {
    let t = |rank, responders| RankTarget { rank, responders };
    let ex1 = feasible_configs(4, 10, &[t(6, 3), t(38, 4)]).unwrap();
    assert!(ex1.iter().any(|c| c.k() == [0, 0, 6, 32]));
    let ex2 = feasible_configs(4, 10, &[t(5, 1), t(15, 2)]).unwrap();
    assert!(ex2.iter().any(|c| c.k() == [5, 10, 0, 0]));
    for c in ex1.iter().chain(&ex2) {
        assert!(check_feasible(c).1);
    }
    assert!(feasible_configs(1, 1, &[t(2, 1)]).unwrap().is_empty());
}
