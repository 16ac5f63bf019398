//! The shipped TMI-2 fixtures against a fresh build.

use justify_core::engine::GroundAtom;
use justify_core::explain::GraphDocument;
use justify_core::npp_kb::{build_kb, load_kb_dir, KbConfig};
use justify_core::replay::{ingest_actions, ingest_sensors, replay, DEFAULT_STEP};
use justify_core::scenario::{
    check_fixtures, compare_outputs, default_fixture_dir, expected_outputs, explain_in_window, synthesize_tmi2,
    GRAPH_TARGETS, HORIZON,
};

#[test]
fn shipped_fixtures_pass() {
    let r = check_fixtures(&default_fixture_dir()).unwrap();
    assert!(r.ok(), "{:#?}", r.failures);
    assert_eq!(r.windows, 142);
    assert_eq!(r.checked_files, 10);
}

#[test]
fn shipped_streams_equal_the_synthesis() {
    let dir = default_fixture_dir();
    let s = ingest_sensors(std::fs::File::open(dir.join("sensors.csv")).unwrap()).unwrap();
    let a = ingest_actions(std::fs::File::open(dir.join("actions.csv")).unwrap()).unwrap();
    assert_eq!((s, a), synthesize_tmi2(&KbConfig::default()).unwrap());
}

#[test]
fn rules_directory_matches_the_embedded_kb() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("kb");
    let cfg = KbConfig::default();
    assert_eq!(load_kb_dir(&dir, &cfg).unwrap(), build_kb(&cfg));
    let (s, a) = synthesize_tmi2(&cfg).unwrap();
    let outs = replay(&load_kb_dir(&dir, &cfg).unwrap(), &s, &a, DEFAULT_STEP, HORIZON).unwrap();
    assert_eq!(compare_outputs(&expected_outputs(), &outs), Vec::<String>::new());
}

#[test]
fn graph_fixtures_are_reproduced() {
    for t in GRAPH_TARGETS {
        let cfg = t.profile.config();
        let (s, a) = synthesize_tmi2(&cfg).unwrap();
        let atom: GroundAtom = t.atom.parse().unwrap();
        let ex = explain_in_window(&cfg, &s, &a, t.window_end, &atom).unwrap();
        let path = default_fixture_dir().join(format!("expected/graphs/{}.json", t.name));
        let shipped: GraphDocument = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(ex.graphs[t.index].to_document(), shipped, "{}", t.name);
    }
}
