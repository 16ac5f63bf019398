use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::engine::GroundAtom;
use crate::npp_kb::{build_kb, KbConfig};

fn sample(time: i64, variable: &str, value: i64) -> SensorSample {
    SensorSample { time, variable: variable.to_string(), value }
}

#[test]
fn ingest_sensor_rows() {
    let s = ingest_sensors("time,variable,value\n1,condensate_pump_a_flow,0\n0,condensate_pump_a_flow,100\n".as_bytes()).unwrap();
    assert_eq!(s, vec![sample(0, "condensate_pump_a_flow", 100), sample(1, "condensate_pump_a_flow", 0)]);
    assert!(ingest_sensors("time,variable,value\n".as_bytes()).unwrap().is_empty());
    match ingest_sensors("time,variable,value\n0,foo,1\n".as_bytes()) {
        Err(ReplayError::UnknownVariable { line: 2, name }) => assert_eq!(name, "foo"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        ingest_sensors("time,variable,value\n0,reactor_power,1\n3,reactor_power,x\n".as_bytes()),
        Err(ReplayError::Csv { line: 3, .. })
    ));
    assert!(matches!(ingest_sensors("t,v\n".as_bytes()), Err(ReplayError::Csv { line: 1, .. })));
    assert!(matches!(
        ingest_sensors("time,variable,value\n-1,reactor_power,1\n".as_bytes()),
        Err(ReplayError::Csv { line: 2, .. })
    ));
}

#[test]
fn ingest_action_rows() {
    let a = ingest_actions("time,procedure,component\n7,open,pressurizer_pilot_operated_relief_valve\n".as_bytes()).unwrap();
    assert_eq!(a[0].time, 7);
    assert_eq!(a[0].component, "pressurizer_pilot_operated_relief_valve");
    assert!(ingest_actions("time,procedure,component\n".as_bytes()).unwrap().is_empty());
    assert!(matches!(
        ingest_actions("time,procedure,component\n1,open,warp_core\n".as_bytes()),
        Err(ReplayError::UnknownComponent { line: 2, .. })
    ));
    let csv = actions_to_csv(&a);
    assert_eq!(ingest_actions(csv.as_bytes()).unwrap(), a);
}

#[test]
fn zero_order_hold() {
    let st = SensorStore::new(&[sample(0, "reactor_power", 100), sample(10, "reactor_power", 0)]);
    assert_eq!(st.value_at("reactor_power", 9), Some(100));
    assert_eq!(st.value_at("reactor_power", 10), Some(0));
    assert_eq!(st.value_at("reactor_power", 5000), Some(0));
    assert_eq!(st.value_at("turbine_power", 5), None);
}

#[test]
fn slice_bounds() {
    let st = SensorStore::new(&[sample(0, "reactor_power", 100)]);
    let none = BTreeSet::new();
    let s = window_slice(&st, &[], &none, 60);
    assert_eq!((s.lo, s.hi), (1, 60));
    // The look-back sample at lo - 1 is included.
    assert_eq!(s.sensors.len(), 61);
    let s = window_slice(&st, &[], &none, 30);
    assert_eq!((s.lo, s.hi), (0, 30));
    let persisted: BTreeSet<GroundAtom> = ["it_happened(trip,condensate_pump_a,1)", "it_happened(trip,x,1250)"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let s = window_slice(&st, &[], &persisted, 1260);
    assert_eq!(s.lo, 1201);
    assert_eq!(s.persisted, vec!["it_happened(trip,condensate_pump_a,1)".parse().unwrap()]);
}

#[test]
fn schedule_shapes() {
    let w = schedule(60, 8521).unwrap();
    assert_eq!(w.len(), 142);
    assert_eq!(w[0], (1, 60));
    assert_eq!(w[141], (8461, 8521));
    assert!(schedule(60, 0).unwrap().is_empty());
    assert_eq!(schedule(60, 30).unwrap(), vec![(0, 30)]);
    assert!(matches!(schedule(0, 10), Err(ReplayError::BadStep(0))));
}

#[test]
fn all_zero_stream_is_quiet() {
    let samples: Vec<SensorSample> = crate::npp_kb::variable_bindings()
        .iter()
        .map(|b| sample(0, b.stream_name, 0))
        .collect();
    let kb = build_kb(&KbConfig::default());
    let outs = replay(&kb, &samples, &[], 60, 180).unwrap();
    assert_eq!(outs.len(), 3);
    for o in outs {
        assert!(o.inferred_actions.is_empty());
        assert!(o.recommendations.is_empty());
    }
    assert!(replay(&kb, &samples, &[], 60, 0).unwrap().is_empty());
}

/// Pump A trips at 70, pump B starts at 130; an attempt to open the relief
/// valve at 5 and pressure below the boundary produces close
/// recommendations.
fn small_scenario() -> (Vec<SensorSample>, Vec<AttemptedAction>) {
    let mut s = Vec::new();
    for b in crate::npp_kb::variable_bindings() {
        s.push(sample(0, b.stream_name, 100));
    }
    s.push(sample(0, "primary_loop_pressure", 2000));
    s.push(sample(0, "inlet_temperature_a", 560));
    s.push(sample(0, "inlet_temperature_b", 560));
    s.push(sample(0, "auxiliary_feedwater_pump_b_flow", 0));
    s.push(sample(70, "primary_pump_a_flow", 0));
    s.push(sample(130, "auxiliary_feedwater_pump_b_flow", 20));
    s.sort();
    s.dedup_by(|b, a| a.time == b.time && a.variable == b.variable);
    let a = vec![AttemptedAction {
        time: 5,
        procedure: "open".into(),
        component: "pressurizer_pilot_operated_relief_valve".into(),
    }];
    (s, a)
}

#[test]
fn events_persist_across_windows() {
    let (s, a) = small_scenario();
    let kb = build_kb(&KbConfig::default());
    let mut sess = Session::new(kb, &s, a, 60, 240).unwrap();
    let mut sizes = Vec::new();
    while sess.advance().unwrap().is_some() {
        sizes.push(sess.persisted().len());
    }
    assert_eq!(sizes, vec![0, 1, 2, 2]);
    let outs = sess.outputs();
    assert_eq!(outs[1].inferred_actions.iter().next().unwrap().component, "primary_pump_a");
    assert!(outs[0].recommendations.iter().any(|r| r.procedure == "close" && r.time == 5));
    // Every reported atom lies inside its own window.
    for o in outs {
        for a in o.significant_atoms() {
            let t = a.time().unwrap();
            assert!(o.window_start <= t && t <= o.window_end, "{a} in {}", o.window_end);
        }
    }
}

#[test]
fn concurrent_equals_sequential() {
    let (s, a) = small_scenario();
    let kb = build_kb(&KbConfig::default());
    assert_eq!(
        replay(&kb, &s, &a, 60, 300).unwrap(),
        replay_concurrent(&kb, &s, &a, 60, 300).unwrap()
    );
}

#[test]
fn injection_rethreads_and_finishing_locks() {
    let (s, a) = small_scenario();
    let kb = build_kb(&KbConfig::default());
    let mut sess = Session::new(kb, &s, Vec::new(), 60, 180).unwrap();
    sess.advance().unwrap();
    sess.advance().unwrap();
    assert!(sess.outputs()[0].recommendations.is_empty());
    sess.inject(a[0].clone()).unwrap();
    assert!(sess.outputs().is_empty());
    sess.run_to_end().unwrap();
    assert!(!sess.outputs()[0].recommendations.is_empty());
    assert!(matches!(sess.inject(a[0].clone()), Err(ReplayError::SessionFinished)));
}

#[test]
fn evaluation_matches_output() {
    let (s, a) = small_scenario();
    let kb = build_kb(&KbConfig::default());
    let mut sess = Session::new(kb, &s, a, 60, 180).unwrap();
    sess.run_to_end().unwrap();
    let ev = sess.evaluation(120).unwrap();
    assert_eq!(&ev.output, &sess.outputs()[1]);
    assert!(matches!(sess.evaluation(121), Err(ReplayError::UnknownWindow(121))));
}

#[test]
fn session_directory_round_trip() {
    let (s, a) = small_scenario();
    let kb = build_kb(&KbConfig::default());
    let outs = replay(&kb, &s, &a, 60, 180).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &outs, 60, 180).unwrap();
    let (m, back) = read_outputs(dir.path()).unwrap();
    assert_eq!(m.windows, vec![60, 120, 180]);
    assert_eq!(back, outs);
    let text = std::fs::read_to_string(dir.path().join("window_00060.txt")).unwrap();
    assert!(text.starts_with("% window 60 [1, 60]\n"));
    assert!(text.contains("recommendation(close,pressurizer_power_operated_relief_valve,5)\n"));
}

#[test]
fn verbose_keeps_other_atoms() {
    let (s, a) = small_scenario();
    let kb = build_kb(&KbConfig::default());
    let mut sess = Session::new(kb, &s, a, 60, 60).unwrap().verbose(true);
    sess.run_to_end().unwrap();
    let other = sess.outputs()[0].other_atoms.as_ref().unwrap();
    assert!(other.contains(&"time(60)".parse().unwrap()));
    assert!(!sess.outputs()[0].to_json().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn schedule_partitions_timeline(step in 1i64..200, horizon in 0i64..2000) {
        let w = schedule(step, horizon).unwrap();
        if horizon == 0 {
            prop_assert!(w.is_empty());
        } else {
            prop_assert_eq!(w.last().unwrap().1, horizon);
            let mut prev = 0;
            for (lo, hi) in &w {
                prop_assert!(lo <= hi);
                prop_assert!(*lo <= prev + 1);
                prop_assert!(*lo >= (hi - 59).max(0).min(prev + 1));
                prev = *hi;
            }
        }
    }

    #[test]
    fn sensor_csv_round_trip(rows in proptest::collection::vec((0i64..10_000, 0usize..16, -5000i64..5000), 0..40)) {
        let b = crate::npp_kb::variable_bindings();
        let mut s: Vec<SensorSample> = rows.iter().map(|&(t, i, v)| sample(t, b[i].stream_name, v)).collect();
        s.sort_by_key(|x| x.time);
        prop_assert_eq!(ingest_sensors(sensors_to_csv(&s).as_bytes()).unwrap(), s);
    }
}
