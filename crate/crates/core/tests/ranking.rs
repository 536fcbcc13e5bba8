mod common;

use proptest::prelude::*;

use common::ranking::{any_table, order, phase_of, table, transform};
use masonry_core::optimizer::{rank_objective, Phase};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ordering_survives_increasing_transforms(
        t in any_table(true),
        crit in 0usize..5,
        a in 0.0f64..2.0,
        b in 0.1f64..10.0,
        c in -50.0f64..50.0,
    ) {
        let (post, mut values) = t;
        let k = phase_of(post).criteria_count();
        let before = order(&values, post);
        transform(&mut values, crit % k, a, b, c);
        prop_assert_eq!(before, order(&values, post));
    }

    #[test]
    fn ranks_are_mean_rank_permutations(t in any_table(false)) {
        let (post, values) = t;
        let evals = rank_objective(&values, phase_of(post)).unwrap();
        let n = values.len() as f64;
        let horizon = values[0].steps.len();
        let k = phase_of(post).criteria_count();
        for s in 0..horizon {
            for c in 0..k {
                let ranks: Vec<f64> = evals.iter().map(|e| e.ranks[s][c]).collect();
                prop_assert!((ranks.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
                prop_assert!(ranks.iter().all(|r| *r >= 1.0 && *r <= n));
            }
        }
        for e in &evals {
            prop_assert!(e.objective >= horizon as f64 - 1e-12);
            let mean: f64 = e.mean_ranks.iter().sum();
            prop_assert!((mean - e.objective).abs() < 1e-9);
        }
        for w in evals.windows(2) {
            prop_assert!(w[0].objective < w[1].objective + 1e-12);
            if (w[0].objective - w[1].objective).abs() < 1e-12 {
                prop_assert!(w[0].node < w[1].node);
            }
        }
    }

    #[test]
    fn singular_steps_rank_last(t in table(true, true)) {
        let evals = rank_objective(&t, Phase::PostCrown).unwrap();
        let n = t.len() as f64;
        for e in &evals {
            for (s, v) in e.values.iter().enumerate() {
                if v.is_none() {
                    prop_assert!(e.ranks[s].iter().all(|r| *r == n));
                }
            }
        }
    }
}
