mod common;

use common::*;
use cyic_core::synth;

#[test]
fn pipeline_matches_oracle_on_every_scenario() {
    let scenarios = oracle_scenarios();
    assert!(scenarios.len() >= 10);
    for (name, sc, params) in scenarios {
        let dir = tempfile::tempdir().unwrap();
        let (run, _) = run_scenario(&sc, params, dir.path());
        let got: Vec<EventKey> = run.events.iter().map(event_key).collect();
        let want: Vec<EventKey> = synth::expected_detections(&sc, &params)
            .unwrap()
            .iter()
            .map(oracle_key)
            .collect();
        assert_eq!(got, want, "scenario {name:?}");
    }
}

#[test]
fn six_year_fixture_has_one_event_at_the_surge() {
    let sc = synth::six_year_fixture();
    let dir = tempfile::tempdir().unwrap();
    let (run, _) = run_scenario(&sc, Default::default(), dir.path());
    assert_eq!(run.events.len(), 1);
    let e = &run.events[0];
    assert_eq!((e.pair.a(), e.pair.b(), e.year), ("A", "B", 2004));
    assert_eq!(e.z_value, 12.0);
    assert_eq!(e.slope, 12.0);
}

#[test]
fn flat_rates_give_no_events() {
    let (_, sc, params) = oracle_scenarios()
        .into_iter()
        .find(|s| s.0 == "flat mutual citation")
        .unwrap();
    assert!(synth::expected_detections(&sc, &params).unwrap().is_empty());
}

#[test]
fn disjoint_plants_are_found_at_their_years() {
    let (_, sc, params) = oracle_scenarios()
        .into_iter()
        .find(|s| s.0 == "two disjoint plants")
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (run, _) = run_scenario(&sc, params, dir.path());
    for p in &sc.planted_events {
        let (a, b) = if p.a < p.b { (&p.a, &p.b) } else { (&p.b, &p.a) };
        assert!(
            run.events
                .iter()
                .any(|e| e.pair.a() == a && e.pair.b() == b && e.year == p.year),
            "{a}-{b} at {} not detected",
            p.year
        );
    }
}

#[test]
fn stochastic_scenarios_have_no_ground_truth() {
    let mut sc = synth::six_year_fixture();
    sc.mode = synth::SynthMode::Stochastic;
    assert!(synth::expected_detections(&sc, &Default::default()).is_err());
}
