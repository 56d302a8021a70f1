mod common;

use fogmind::fuzzy::{
    defuzzify_cog, infer, make_gaussian, AggregatedOutput, InferenceOptions, MembershipFunction,
    Universe,
};
use fogmind::rulebook::{default_rulebook, parse_rulebook, serialize, DEFAULT_RULEBOOK_SOURCE};
use proptest::prelude::*;

use common::{random_rulebook, random_snapshot, rng, INTERACTION_TABLE};

/// Center of gravity of the linear interpolant of `agg`, by trapezoid on a
/// much finer grid.
fn fine_cog(agg: &AggregatedOutput, points: usize) -> f64 {
    let (x0, x1) = (agg.grid[0], agg.grid[agg.grid.len() - 1]);
    let h = (x1 - x0) / (points - 1) as f64;
    let mut j = 0;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..points {
        let x = if i == points - 1 {
            x1
        } else {
            x0 + h * i as f64
        };
        while j + 2 < agg.grid.len() && agg.grid[j + 1] < x {
            j += 1;
        }
        let (a, b) = (agg.grid[j], agg.grid[j + 1]);
        let t = ((x - a) / (b - a)).clamp(0.0, 1.0);
        let m = agg.membership[j] * (1.0 - t) + agg.membership[j + 1] * t;
        let w = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
        num += w * x * m;
        den += w * m;
    }
    num / den
}

#[test]
fn default_rulebook_text_is_canonical() {
    let rb = default_rulebook();
    assert_eq!(rb.rules.len(), 20);
    let text = serialize(&rb);
    let again = parse_rulebook(&text).unwrap();
    assert_eq!(again, rb);
    assert_eq!(serialize(&again), text);
    assert_ne!(text, DEFAULT_RULEBOOK_SOURCE, "comments are not preserved");
}

#[test]
fn table_labels_match() {
    let rb = default_rulebook();
    let distance = rb.variable("distance").unwrap();
    let heading = rb.variable("heading").unwrap();
    for r in &INTERACTION_TABLE {
        assert_eq!(
            distance.classify(r.distance, 0.25),
            r.distance_label,
            "experiment {}",
            r.experiment
        );
        assert_eq!(
            heading.classify(r.heading, 0.25),
            r.heading_label,
            "experiment {}",
            r.experiment
        );
    }
}

#[test]
fn cog_of_a_single_point_grid() {
    let agg = AggregatedOutput {
        variable: "x".into(),
        grid: vec![4.0],
        membership: vec![0.3],
    };
    assert_eq!(defuzzify_cog(&agg).unwrap(), 4.0);
    let empty = AggregatedOutput::zeros("x", vec![0.0, 1.0]);
    assert!(defuzzify_cog(&empty).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_rulebooks_round_trip(seed in any::<u64>()) {
        let rb = random_rulebook(seed);
        let text = serialize(&rb);
        let back = parse_rulebook(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &rb);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn decomposition_keeps_aggregates(seed in any::<u64>(), snap_seed in any::<u64>()) {
        let rb = random_rulebook(seed);
        let split = rb.decomposed();
        let inputs = random_snapshot(&rb, &mut rng(snap_seed));
        let opts = InferenceOptions::default();
        let a = infer(&rb, &inputs, &opts);
        let b = infer(&split, &inputs, &opts);
        for (name, agg) in &a.outputs {
            let bits = |o: &AggregatedOutput| o.membership.iter().map(|m| m.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(agg), bits(&b.outputs[name]), "{}", name);
        }
    }

    #[test]
    fn cog_matches_fine_quadrature(
        lo in -50.0f64..50.0,
        span in 0.5f64..100.0,
        shapes in prop::collection::vec((0.0f64..1.0, 0.01f64..0.6, 0.05f64..1.0), 1..4),
    ) {
        let u = Universe::new(lo, lo + span, "u").unwrap();
        let mut agg = AggregatedOutput::zeros("y", u.grid(1001));
        for (c, w, strength) in shapes {
            let lower = lo + span * (c - w / 2.0);
            let mf = make_gaussian(lower, lower + span * w).unwrap();
            agg.absorb(&mf.sample(&agg.grid), strength);
        }
        let got = defuzzify_cog(&agg).unwrap();
        prop_assert!((got - fine_cog(&agg, 100_001)).abs() < 1e-6);
        prop_assert!(got >= lo && got <= lo + span);
    }

    #[test]
    fn symmetric_aggregates_land_on_the_center(
        lo in -50.0f64..50.0,
        span in 0.5f64..100.0,
        offset in 0.0f64..0.3,
        width in 0.02f64..0.4,
        strength in 0.05f64..1.0,
    ) {
        let u = Universe::new(lo, lo + span, "u").unwrap();
        let mid = lo + span / 2.0;
        let mut agg = AggregatedOutput::zeros("y", u.grid(1001));
        for sign in [-1.0, 1.0] {
            let c = mid + sign * offset * span;
            let mf = make_gaussian(c - width * span / 2.0, c + width * span / 2.0).unwrap();
            agg.absorb(&mf.sample(&agg.grid), strength);
        }
        prop_assert!((defuzzify_cog(&agg).unwrap() - mid).abs() < 1e-9);
    }

    #[test]
    fn gaussian_bounds_are_half_max(lower in -1000.0f64..1000.0, width in 1e-3f64..1000.0) {
        let mf = make_gaussian(lower, lower + width).unwrap();
        let MembershipFunction::Gaussian { center, .. } = mf else { unreachable!() };
        prop_assert!((mf.degree(lower) - 0.5).abs() < 1e-12);
        prop_assert!((mf.degree(lower + width) - 0.5).abs() < 1e-12);
        prop_assert_eq!(mf.degree(center), 1.0);
    }
}
