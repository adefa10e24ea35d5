use std::collections::BTreeSet;

use proptest::prelude::*;

use ppgraph::dataset::{assign_splits, split_sizes, DEFAULT_FRACTIONS};
use ppgraph::image::segment_to_image;
use ppgraph::metrics::absolute_errors;
use ppgraph::peaks::detect_peaks;
use ppgraph::segment::has_plateau;
use ppgraph::tensor::{read_tensor, write_tensor};
use ppgraph::{
    build_channel_stack, build_vg_fast, build_vg_oracle, build_vg_slope_weighted, extract_sbp_dbp,
    grade_bhs, invert_series, mean_absolute_error, segment_pulses, segment_windows, stack_to_image,
    AgeGroup, ImageTensor, PeakList, PeakParams, Provenance, Record, TimeSeries,
};

fn ts(y: Vec<f64>, rate: f64) -> TimeSeries {
    TimeSeries::new(y, rate).unwrap()
}

fn continuous(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-100.0f64..100.0, 2..max_len)
}

/// Small integers produce ties, plateaus and collinear triples.
fn integers(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-4i32..=4).prop_map(f64::from), 1..max_len)
}

fn any_series(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![continuous(max_len), integers(max_len)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn fast_equals_oracle(y in any_series(80), rate in prop_oneof![Just(1.0), 0.5f64..500.0]) {
        let s = ts(y, rate);
        prop_assert_eq!(build_vg_fast(&s), build_vg_oracle(&s));
    }

    #[test]
    fn graph_is_symmetric_loop_free_and_contains_the_chain(y in any_series(80)) {
        let g = build_vg_fast(&ts(y, 1.0));
        prop_assert!(g.is_symmetric());
        for i in 0..g.n() {
            prop_assert_eq!(g.get(i, i), 0.0);
            if i + 1 < g.n() {
                prop_assert!(g.has_edge(i, i + 1));
            }
        }
    }

    #[test]
    fn affine_invariance(
        y in continuous(64),
        a in 0.01f64..100.0,
        b in -1000.0f64..1000.0,
        tau in 0.01f64..100.0,
        rate in 1.0f64..500.0,
    ) {
        let s = ts(y.clone(), rate);
        let moved = ts(y.iter().map(|v| a * v + b).collect(), rate / tau);
        prop_assert_eq!(build_vg_fast(&s), build_vg_fast(&moved));
        let img = stack_to_image(&build_channel_stack(&s).unwrap(), None).unwrap();
        prop_assert_eq!(img, segment_to_image(&moved, None).unwrap());
    }

    #[test]
    fn inverting_is_negating_and_shift_free(y in continuous(64), c in -50.0f64..50.0) {
        let s = ts(y.clone(), 1.0);
        let negated = ts(y.iter().map(|v| -v).collect(), 1.0);
        let shifted = ts(y.iter().map(|v| c - v).collect(), 1.0);
        prop_assert_eq!(build_vg_fast(&invert_series(&s)), build_vg_oracle(&negated));
        prop_assert_eq!(build_vg_fast(&negated), build_vg_fast(&shifted));
    }

    #[test]
    fn convex_is_complete_and_linear_is_a_chain(n in 2usize..40, slope in -5i32..=5, offset in -9i32..=9) {
        let convex = ts((0..n).map(|i| (i * i) as f64 + f64::from(offset)).collect(), 1.0);
        prop_assert_eq!(build_vg_fast(&convex).edge_count(), n * (n - 1) / 2);
        let line = ts((0..n).map(|i| f64::from(slope) * i as f64 + f64::from(offset)).collect(), 1.0);
        let chain: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        prop_assert_eq!(build_vg_fast(&line).edges(), chain);
    }

    #[test]
    fn slope_weights_support_the_edges_of_untied_data(y in continuous(64), rate in 1.0f64..200.0) {
        let distinct: BTreeSet<u64> = y.iter().map(|v| v.to_bits()).collect();
        prop_assume!(distinct.len() == y.len());
        let s = ts(y, rate);
        let binary = build_vg_fast(&s);
        let weighted = build_vg_slope_weighted(&s);
        prop_assert!(weighted.is_symmetric());
        for (w, e) in weighted.weights().iter().zip(binary.weights()) {
            prop_assert!(*w >= 0.0);
            prop_assert_eq!(*w > 0.0, *e != 0.0);
        }
    }

    #[test]
    fn image_paths_agree(y in any_series(40), up in prop_oneof![Just(None), (40usize..90).prop_map(Some)]) {
        prop_assume!(y.len() >= 2);
        let s = ts(y, 25.0);
        let dense = stack_to_image(&build_channel_stack(&s).unwrap(), up).unwrap();
        prop_assert_eq!(segment_to_image(&s, up).unwrap(), dense);
    }

    #[test]
    fn peaks_are_affine_invariant(
        y in proptest::collection::vec(-1000i32..1000, 3..200),
        a in 1i32..10,
        b in -1000i32..1000,
        prominence in 0i32..500,
        distance in 1usize..20,
    ) {
        // Integer data keeps every operation exact.
        let s = ts(y.iter().map(|v| f64::from(*v)).collect(), 50.0);
        let moved = ts(y.iter().map(|v| f64::from(a * v + b)).collect(), 50.0);
        let p = detect_peaks(&s, f64::from(prominence), distance).unwrap();
        let q = detect_peaks(&moved, f64::from(a * prominence), distance).unwrap();
        prop_assert_eq!(&p.indices, &q.indices);
        for w in p.indices.windows(2) {
            prop_assert!(w[1] - w[0] >= distance);
        }
    }

    #[test]
    fn pulses_have_the_target_length(
        y in continuous(400),
        peaks in proptest::collection::btree_set(0usize..400, 0..20),
        target in 1usize..80,
    ) {
        let record = Record { id: "r".into(), series: ts(y.clone(), 50.0) };
        let indices: Vec<usize> = peaks.into_iter().filter(|p| *p < y.len()).collect();
        let list = PeakList {
            indices: indices.clone(),
            params: PeakParams { min_prominence: 0.0, min_distance: 1 },
        };
        let segments = segment_pulses(&record, &list, target).unwrap();
        prop_assert_eq!(segments.len(), indices.len().saturating_sub(1));
        for (seg, w) in segments.iter().zip(indices.windows(2)) {
            prop_assert_eq!(seg.samples.len(), target);
            prop_assert_eq!(seg.source_range.start, w[0]);
            let span = w[1] - w[0];
            let expected = match span.cmp(&target) {
                std::cmp::Ordering::Less => Provenance::ZeroPadded,
                std::cmp::Ordering::Equal => Provenance::Exact,
                std::cmp::Ordering::Greater => Provenance::Truncated,
            };
            prop_assert_eq!(seg.provenance, expected);
            let kept = span.min(target);
            prop_assert_eq!(&seg.samples[..kept], &y[w[0]..w[0] + kept]);
            prop_assert!(seg.samples[kept..].iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn windows_tile_the_record(y in continuous(600), window in 1usize..100, stride in 1usize..100) {
        let record = Record { id: "r".into(), series: ts(y.clone(), 50.0) };
        let windows = segment_windows(&record, window, stride).unwrap();
        let expected = if y.len() < window { 0 } else { (y.len() - window) / stride + 1 };
        prop_assert_eq!(windows.len(), expected);
        for (k, w) in windows.iter().enumerate() {
            prop_assert_eq!(w.provenance, Provenance::Window(k));
            prop_assert_eq!(w.source_range.clone(), k * stride..k * stride + window);
            prop_assert_eq!(&w.samples[..], &y[w.source_range.clone()]);
        }
    }

    #[test]
    fn constant_segments_are_plateaus_and_ramps_are_not(
        level in -100.0f64..100.0,
        len in 1usize..300,
        steps in proptest::collection::vec(0.01f64..1.0, 5..300),
    ) {
        prop_assert!(has_plateau(&vec![level; len], 5, 1e-6).unwrap());
        let ramp: Vec<f64> = steps.iter().scan(level, |acc, s| { *acc += s; Some(*acc) }).collect();
        prop_assert!(!has_plateau(&ramp, 5, 1e-6).unwrap());
    }

    #[test]
    fn bhs_grade_is_monotone(errors in proptest::collection::vec(0.0f64..40.0, 1..200)) {
        let base = grade_bhs(&errors).unwrap();
        let mut better = errors.clone();
        better.push(0.0);
        let mut worse = errors.clone();
        worse.push(100.0);
        // Grades order A < B < C < D.
        prop_assert!(grade_bhs(&better).unwrap().grade <= base.grade);
        prop_assert!(grade_bhs(&worse).unwrap().grade >= base.grade);
        prop_assert!(0.0 <= base.pct_le_5);
        prop_assert!(base.pct_le_5 <= base.pct_le_10);
        prop_assert!(base.pct_le_10 <= base.pct_le_15);
        prop_assert!(base.pct_le_15 <= 100.0);
    }

    #[test]
    fn sbp_is_at_least_dbp(wave in proptest::collection::vec(30.0f64..250.0, 2..300)) {
        let (sbp, dbp) = extract_sbp_dbp(&wave).unwrap();
        prop_assert!(sbp >= dbp);
        prop_assert!(wave.contains(&sbp) && wave.contains(&dbp));
    }

    #[test]
    fn mae_matches_an_independent_sum(
        pairs in proptest::collection::vec((-300.0f64..300.0, -300.0f64..300.0), 1..500),
    ) {
        let (pred, truth): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let mut total = 0.0;
        for k in (0..pred.len()).rev() {
            total += if pred[k] > truth[k] { pred[k] - truth[k] } else { truth[k] - pred[k] };
        }
        let expected = total / pred.len() as f64;
        let mae = mean_absolute_error(&pred, &truth).unwrap();
        prop_assert!((mae - expected).abs() <= 1e-12 * expected.max(1.0));
        prop_assert_eq!(absolute_errors(&pred, &truth).unwrap().len(), pred.len());
    }

    #[test]
    fn splits_partition_the_rows(n in 0usize..3000, seed in any::<u64>()) {
        let splits = assign_splits(n, &DEFAULT_FRACTIONS, seed);
        prop_assert_eq!(splits.len(), n);
        let mut counts = [0usize; 3];
        for s in &splits {
            counts[*s as usize] += 1;
        }
        prop_assert_eq!(counts, split_sizes(n, &DEFAULT_FRACTIONS));
        for (c, f) in counts.iter().zip(DEFAULT_FRACTIONS) {
            prop_assert!((*c as f64 - f * n as f64).abs() <= 1.0);
        }
    }

    #[test]
    fn age_groups_cover_non_negative_ages(age in 0.0f64..130.0) {
        let group = AgeGroup::from_age(age).unwrap();
        let (lo, hi) = match group {
            AgeGroup::Under20 => (0.0, 20.0),
            AgeGroup::From20To30 => (20.0, 30.0),
            AgeGroup::From30To40 => (30.0, 40.0),
            AgeGroup::From40 => (40.0, f64::INFINITY),
        };
        prop_assert!(lo <= age && age < hi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_files_round_trip(
        (w, h, c, px) in (0u32..40, 0u32..40, prop_oneof![Just(1u32), Just(3u32)])
            .prop_flat_map(|(w, h, c)| {
                (Just(w), Just(h), Just(c), proptest::collection::vec(any::<u8>(), (w * h * c) as usize))
            }),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.vgt");
        let img = ImageTensor::new(w, h, c, px).unwrap();
        write_tensor(&img, &path).unwrap();
        prop_assert_eq!(read_tensor(&path).unwrap(), img);
    }
}
