use olive_sim::analysis::{
    box_stats, build_stress_scenario, compare, deviations_in, spike_count, Span, StressKnobs,
    StressScenario,
};
use olive_sim::engine::TraceRecord;
use olive_sim::model::CellParameters;
use proptest::prelude::*;

fn traces() -> impl Strategy<Value = (TraceRecord, TraceRecord)> {
    (2usize..30, 1usize..6).prop_flat_map(|(samples, n)| {
        (
            prop::collection::vec(-80.0..40.0f64, samples * n),
            prop::collection::vec(-5.0..5.0f64, samples * n),
        )
            .prop_map(move |(a, noise)| {
                let times: Vec<f64> = (0..samples).map(|s| s as f64).collect();
                let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
                (
                    TraceRecord::from_rows(times.clone(), n, a).unwrap(),
                    TraceRecord::from_rows(times, n, b).unwrap(),
                )
            })
    })
}

proptest! {
    #[test]
    fn swapping_negates_the_median((a, b) in traces()) {
        let end = (a.samples() - 1) as f64;
        let spans = [Span::new(0.0, end)];
        let ab = compare(&a, &b, &spans).unwrap();
        let ba = compare(&b, &a, &spans).unwrap();
        prop_assert_eq!(ab.global_max_abs_mv, ba.global_max_abs_mv);
        let (x, y) = (ab.spans[0], ba.spans[0]);
        prop_assert_eq!(x.max_abs_mv, y.max_abs_mv);
        prop_assert_eq!(x.median, -y.median);
        prop_assert!((x.q1 + y.q3).abs() < 1e-12 && (x.q3 + y.q1).abs() < 1e-12);
    }

    #[test]
    fn max_abs_bounds_quartiles((a, b) in traces()) {
        let end = (a.samples() - 1) as f64;
        let r = compare(&a, &b, &[Span::new(0.0, end / 2.0), Span::new(end / 2.0, end)]).unwrap();
        for s in r.spans {
            for q in [s.q1, s.median, s.q3, s.lo_whisker, s.hi_whisker, s.mean_mv] {
                prop_assert!(s.max_abs_mv >= q.abs());
            }
            prop_assert!(s.lo_whisker <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.hi_whisker);
            prop_assert!(r.global_max_abs_mv >= s.max_abs_mv);
        }
    }

    #[test]
    fn disjoint_spans_pool_like_their_union((a, b) in traces(), cut in 0.0..1.0f64) {
        let end = (a.samples() - 1) as f64;
        let k = (cut * end).floor();
        let (left, right) = (Span::new(0.0, k), Span::new(k + 1.0, end));
        let mut pooled = deviations_in(&a, &b, &[left]);
        if k + 1.0 <= end {
            pooled.extend(deviations_in(&a, &b, &[right]));
        }
        let union = deviations_in(&a, &b, &[Span::new(0.0, end)]);
        let whole = Span::new(0.0, end);
        prop_assert_eq!(box_stats(whole, &pooled), box_stats(whole, &union));
    }

    #[test]
    fn scenarios_round_trip_bytewise(seed in any::<u64>(), sigma in 0.0..0.5f64, rate in 0.0..40.0f64) {
        let knobs = StressKnobs { neurons: 8, seed, jitter_sigma: sigma, pulse_rate_hz: rate, pulse_amp: 5.0, pulse_width_ms: 2.0, duration_ms: 200.0 };
        let s = build_stress_scenario(&CellParameters::uniform(8), &knobs).unwrap();
        let text = s.to_json().unwrap();
        prop_assert_eq!(StressScenario::from_json(&text).unwrap().to_json().unwrap(), text);
        for (_, g) in s.params().unwrap().conductances.fields() {
            prop_assert!(g.iter().all(|&g| g >= 0.0));
        }
    }

    #[test]
    fn spike_count_matches_a_direct_count(values in prop::collection::vec(-80.0..40.0f64, 2..200)) {
        let t = TraceRecord::from_rows((0..values.len()).map(|s| s as f64).collect(), 1, values.clone()).unwrap();
        let direct = values.windows(2).filter(|w| w[0] < 0.0 && w[1] >= 0.0).count();
        prop_assert_eq!(spike_count(&t, 0.0), vec![direct]);
    }
}

#[test]
fn f32_against_f64_on_a_small_network() {
    use olive_sim::engine::{run, SimulationConfig};
    use olive_sim::precision::Precision;
    let config = SimulationConfig {
        grid_dim: 4,
        duration_ms: 200.0,
        ..SimulationConfig::default()
    };
    let p = CellParameters::uniform(64);
    let topo = config.topology().unwrap();
    let reference = run(&config, &p, &topo).unwrap();
    let test = run(
        &SimulationConfig {
            precision: Precision::F32,
            ..config
        },
        &p,
        &topo,
    )
    .unwrap();
    let r = compare(
        &reference,
        &test,
        &[Span::new(0.0, 100.0), Span::new(100.0, 200.0)],
    )
    .unwrap();
    assert_eq!(r.spans.len(), 2);
    assert_eq!(r.nonfinite_count, 0);
    assert!(
        r.global_max_abs_mv > 0.0 && r.global_max_abs_mv < 0.1,
        "{}",
        r.global_max_abs_mv
    );
}
