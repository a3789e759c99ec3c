//! Property tests over arbitrary small streams.

mod common;

use proptest::prelude::*;

use pps_core::estimators::{count_coincidences, pair_counts_range};
use pps_core::transforms::{
    delay_insert, gap_insert, gap_remove, gap_remove_probabilistic, DelaySpec, GapSpec,
    RemovalProbability,
};
use pps_core::{EventStream, Seed};

fn arb_stream() -> impl Strategy<Value = EventStream> {
    prop::collection::vec(0.0f64..100.0, 0..200).prop_map(|mut ts| {
        ts.sort_unstable_by(f64::total_cmp);
        ts.dedup();
        EventStream::new(ts, 100.0, String::new()).unwrap()
    })
}

fn min_gap(times: &[f64]) -> f64 {
    times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn gap_remove_enforces_min_gap(s in arb_stream(), t_gap in 0.0f64..5.0) {
        let out = gap_remove(&s, GapSpec::new(t_gap).unwrap());
        prop_assert!(out.validate().is_empty());
        prop_assert!(min_gap(out.times()) >= t_gap);
    }

    #[test]
    fn gap_remove_is_idempotent(s in arb_stream(), t_gap in 0.0f64..5.0) {
        let gap = GapSpec::new(t_gap).unwrap();
        let once = gap_remove(&s, gap);
        let twice = gap_remove(&once, gap);
        prop_assert_eq!(once.times(), twice.times());
    }

    #[test]
    fn gap_remove_wider_gap_dominates(s in arb_stream(), t1 in 0.0f64..3.0, extra in 0.0f64..3.0) {
        // A wider removal leaves gaps the narrower one cannot touch, so
        // narrow-after-wide is the identity. (The converse does not hold for
        // last-kept-reference dead time: a narrow pass can drop an event and
        // thereby move the reference the wide pass would have tested.)
        let narrow = GapSpec::new(t1).unwrap();
        let wide = GapSpec::new(t1 + extra).unwrap();
        let wide_only = gap_remove(&s, wide);
        let chained = gap_remove(&wide_only, narrow);
        prop_assert_eq!(chained.times(), wide_only.times());
    }

    #[test]
    fn gap_insert_preserves_count_and_enforces_gap(s in arb_stream(), t_gap in 0.0f64..5.0) {
        let out = gap_insert(&s, GapSpec::new(t_gap).unwrap());
        prop_assert!(out.validate().is_empty());
        prop_assert_eq!(out.len(), s.len());
        prop_assert!(min_gap(out.times()) >= t_gap);
    }

    #[test]
    fn probabilistic_limits_are_bit_exact(s in arb_stream(), t_gap in 0.0f64..5.0, seed in any::<u64>()) {
        let gap = GapSpec::new(t_gap).unwrap();
        let always = gap_remove_probabilistic(&s, gap, RemovalProbability::new(1.0).unwrap(), Seed(seed));
        let never = gap_remove_probabilistic(&s, gap, RemovalProbability::new(0.0).unwrap(), Seed(seed));
        let plain = gap_remove(&s, gap);
        prop_assert_eq!(always.times(), plain.times());
        prop_assert_eq!(never.times(), s.times());
        prop_assert!(always.validate().is_empty());
    }

    #[test]
    fn delay_insert_shifts_monotonically(s in arb_stream(), rate in 0.1f64..10.0, seed in any::<u64>()) {
        let out = delay_insert(&s, &DelaySpec::Exponential { rate }, Seed(seed)).unwrap();
        prop_assert!(out.validate().is_empty());
        prop_assert_eq!(out.len(), s.len());
        let mut prev_shift = 0.0f64;
        for (a, b) in s.times().iter().zip(out.times()) {
            let shift = b - a;
            prop_assert!(shift >= prev_shift - 1e-9);
            prev_shift = shift;
        }
    }

    #[test]
    fn maxwell_delay_preserves_validity(s in arb_stream(), scale in 0.1f64..5.0, seed in any::<u64>()) {
        let out = delay_insert(&s, &DelaySpec::MaxwellType { scale }, Seed(seed)).unwrap();
        prop_assert!(out.validate().is_empty());
        prop_assert_eq!(out.len(), s.len());
    }

    #[test]
    fn sweep_matches_brute_force(s in arb_stream(), bin_width in 0.01f64..1.0, n_bins in 1usize..64) {
        let sweep = pair_counts_range(s.times(), 0..s.len(), bin_width, n_bins);
        let brute = common::brute_force_pair_counts(s.times(), bin_width, n_bins);
        prop_assert_eq!(sweep, brute);
    }

    #[test]
    fn shard_partition_is_exact(s in arb_stream(), split in 0usize..200) {
        let n = s.len();
        let mid = split.min(n);
        let full = pair_counts_range(s.times(), 0..n, 0.1, 32);
        let a = pair_counts_range(s.times(), 0..mid, 0.1, 32);
        let b = pair_counts_range(s.times(), mid..n, 0.1, 32);
        let summed: Vec<u64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert_eq!(full, summed);
    }

    #[test]
    fn coincidences_match_direct_enumeration(s in arb_stream(), window in 0.01f64..2.0) {
        let fast = count_coincidences(&s, window, 2).unwrap();
        let times = s.times();
        let mut slow = 0u64;
        for i in 0..times.len() {
            for j in i + 1..times.len() {
                if times[j] <= times[i] + window {
                    slow += 1;
                }
            }
        }
        prop_assert_eq!(fast, slow);
    }
}
