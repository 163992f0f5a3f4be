//! Randomized invariant checks.

use proptest::prelude::*;

use dupchan_core::embed::{build_embedded_chain, stationary_distribution};
use dupchan_core::model::{DurationDistribution, MarkovSource, NoiseModel};
use dupchan_core::sim::sample_trajectory;

/// Strategy for a small row-stochastic matrix with strictly positive entries
/// (hence irreducible), plus a matching positive initial vector.
fn arb_source() -> impl Strategy<Value = MarkovSource> {
    (2usize..=4)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(prop::collection::vec(0.05f64..1.0, n), n),
                prop::collection::vec(0.05f64..1.0, n),
            )
        })
        .prop_map(|(mut rows, mut init)| {
            for row in rows.iter_mut() {
                let s: f64 = row.iter().sum();
                for x in row.iter_mut() {
                    *x /= s;
                }
            }
            let s: f64 = init.iter().sum();
            for x in init.iter_mut() {
                *x /= s;
            }
            MarkovSource::new(rows, init).unwrap()
        })
}

fn arb_duration() -> impl Strategy<Value = DurationDistribution> {
    prop_oneof![
        (0.0f64..=1.0).prop_map(|pd| DurationDistribution::bernoulli(pd).unwrap()),
        (0.0f64..0.95, 2usize..=6)
            .prop_map(|(pd, km)| DurationDistribution::geometric(pd, km).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn source_rows_are_stochastic_and_entropy_rate_bounded(source in arb_source()) {
        let n = source.num_symbols();
        for i in 0..n {
            let sum: f64 = source.transition_row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }
        let h = source.entropy_rate().unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (n as f64).log2() + 1e-12);
    }

    #[test]
    fn duration_pmf_is_normalized_with_consistent_mean(dur in arb_duration()) {
        let total: f64 = dur.pmf().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        let mean: f64 = dur.support().iter().zip(dur.pmf())
            .map(|(&k, &p)| k as f64 * p).sum();
        prop_assert!((mean - dur.mean()).abs() < 1e-12);
        prop_assert!(dur.mean() >= 1.0);
    }

    #[test]
    fn geometric_pmf_is_decreasing_for_small_pd(pd in 0.01f64..0.5, km in 2usize..=8) {
        let dur = DurationDistribution::geometric(pd, km).unwrap();
        let pmf = dur.pmf();
        for w in pmf.windows(2) {
            prop_assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn embedded_chain_invariants(
        source in arb_source(),
        dur in arb_duration(),
        p in 0.0f64..=0.5,
    ) {
        let noise_rows: Vec<Vec<f64>> = (0..source.num_symbols())
            .map(|s| {
                (0..source.num_symbols())
                    .map(|y| if y == s { 1.0 - p } else { p / (source.num_symbols() - 1) as f64 })
                    .collect()
            })
            .collect();
        let noise = NoiseModel::new(noise_rows).unwrap();
        let chain = build_embedded_chain(&source, &dur, &noise).unwrap();
        for i in 0..chain.num_states() {
            let sum: f64 = chain.transition_row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "row {} sums to {}", i, sum);
        }
        prop_assert!(chain.is_irreducible());
        let st = stationary_distribution(&chain).unwrap();
        prop_assert!((st.segment_start_mass * dur.mean() - 1.0).abs() < 1e-8);
        prop_assert!(st.residual(&chain) < 1e-9);
    }

    #[test]
    fn trajectory_invariants(
        pd in 0.0f64..=1.0,
        p in 0.0f64..=0.5,
        m in 1usize..200,
        seed in any::<u64>(),
    ) {
        let source = MarkovSource::ber_half();
        let dur = DurationDistribution::bernoulli(pd).unwrap();
        let noise = NoiseModel::bsc(p).unwrap();
        let tr = sample_trajectory(&source, &dur, &noise, m, seed).unwrap();
        prop_assert_eq!(tr.states.len(), m);
        prop_assert_eq!(tr.durations.len(), m);
        let total: usize = tr.durations.iter().sum();
        prop_assert_eq!(total, tr.total_length());
        prop_assert_eq!(tr.outputs.len(), total);
        prop_assert!(tr.durations.iter().all(|&k| k >= 1 && k <= 2));
        // Re-sampling with the same seed reproduces the trajectory.
        let again = sample_trajectory(&source, &dur, &noise, m, seed).unwrap();
        prop_assert_eq!(tr, again);
    }
}
