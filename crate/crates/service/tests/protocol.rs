use std::collections::BTreeSet;
use std::net::TcpListener;
use std::sync::{Mutex, MutexGuard};
use std::time::Duration;

use justify_core::npp_kb::{build_kb, KbConfig};
use justify_core::replay::{Session, DEFAULT_STEP};
use justify_core::scenario::{synthesize_tmi2, HORIZON};
use justify_service::{
    run_diagnosis_process, spawn_local, DiagnosisOptions, Endpoint, ExplainBackend, ExplainRequest, ExplainResponse,
    ExplanationOptions, SessionBackend,
};

/// Replay-heavy tests hold this so wall-clock comparisons are not skewed by
/// sibling tests competing for the same cores.
fn exclusive() -> MutexGuard<'static, ()> {
    static CPU: Mutex<()> = Mutex::new(());
    CPU.lock().unwrap_or_else(|e| e.into_inner())
}

fn tmi2_session(cfg: &KbConfig, horizon: i64) -> Session {
    let (s, a) = synthesize_tmi2(cfg).unwrap();
    Session::new(build_kb(cfg), &s, a, DEFAULT_STEP, horizon).unwrap()
}

fn request(id: u64, window_end: i64, atoms: &[&str]) -> ExplainRequest {
    ExplainRequest { id, window_end, atoms: atoms.iter().map(|s| s.to_string()).collect(), max_graphs: None }
}

#[test]
fn condensate_trip_has_one_graph() {
    let _cpu = exclusive();
    let mut b = SessionBackend::new(tmi2_session(&KbConfig::default(), HORIZON));
    let r = b.respond(&request(1, 60, &["it_happened(trip,condensate_pump_a,1)"]));
    assert_eq!(r.error, None);
    assert_eq!(r.results.len(), 1);
    assert_eq!(r.results[0].graphs.len(), 1);
    assert!(!r.results[0].truncated);
}

#[test]
fn unknown_atom_is_a_per_atom_error() {
    let _cpu = exclusive();
    let mut b = SessionBackend::new(tmi2_session(&KbConfig::default(), 120));
    let r = b.respond(&request(
        2,
        60,
        &["it_happened(trip,no_such_pump,1)", "it_happened(trip,condensate_pump_a,1)", "not an atom("],
    ));
    assert_eq!(r.error, None);
    assert_eq!(r.results.len(), 3);
    assert!(r.results[0].error.as_deref().unwrap().contains("does not occur"));
    assert_eq!(r.results[1].graphs.len(), 1);
    assert!(r.results[2].error.as_deref().unwrap().contains("parse"));
}

#[test]
fn unknown_window_fails_the_whole_request() {
    let _cpu = exclusive();
    let mut b = SessionBackend::new(tmi2_session(&KbConfig::default(), 120));
    let r = b.respond(&request(3, 90, &[]));
    assert!(r.results.is_empty());
    assert!(r.error.unwrap().contains("90"));
}

#[test]
fn default_atom_set_is_the_significant_atoms() {
    let _cpu = exclusive();
    let mut b = SessionBackend::new(tmi2_session(&KbConfig::default(), 120));
    let r = b.respond(&request(4, 60, &[]));
    let atoms: BTreeSet<&str> = r.results.iter().map(|x| x.atom.as_str()).collect();
    assert!(atoms.contains("it_happened(trip,reactor1,11)"));
    assert!(atoms.contains("recommendation(open,auxiliary_feedwater_a_block_valve,2)"));
    assert!(r.results.iter().all(|x| x.error.is_none() && !x.graphs.is_empty()));
}

#[test]
fn short_suppression_recommendation_has_two_graphs() {
    let _cpu = exclusive();
    let cfg = KbConfig::short_suppression();
    let mut b = SessionBackend::new(tmi2_session(&cfg, 1260));
    let r = b.respond(&request(1, 1260, &["recommendation(open,auxiliary_feedwater_a_block_valve,1201)"]));
    assert_eq!(r.results[0].graphs.len(), 2);
}

fn stub(delay: Duration) -> impl FnMut(&ExplainRequest) -> ExplainResponse + Send {
    move |req| {
        std::thread::sleep(delay);
        ExplainResponse { id: req.id, window_end: Some(req.window_end), results: vec![], error: None }
    }
}

#[test]
fn diagnosis_sends_one_request_per_window_in_order() {
    let _cpu = exclusive();
    let cfg = KbConfig::default();
    let local = spawn_local(stub(Duration::ZERO), ExplanationOptions { worker_delay: Duration::from_millis(5) }).unwrap();
    let rep = run_diagnosis_process(
        tmi2_session(&cfg, 1200),
        &Endpoint::Connect(local.addr),
        &DiagnosisOptions::default(),
    )
    .unwrap();
    let stats = local.join().unwrap();
    assert_eq!(rep.outputs.len(), 20);
    assert_eq!(rep.requests_sent, (1..=20).collect::<Vec<u64>>());
    let ids: Vec<u64> = rep.responses.iter().map(|r| r.id).collect();
    assert_eq!(ids, rep.requests_sent);
    let ends: Vec<i64> = rep.responses.iter().filter_map(|r| r.window_end).collect();
    assert_eq!(ends, rep.outputs.iter().map(|o| o.window_end).collect::<Vec<_>>());
    assert!(!rep.degraded);
    assert_eq!((stats.received, stats.answered), (20, 20));
}

#[test]
fn empty_stream_sends_no_requests() {
    let _cpu = exclusive();
    let local = spawn_local(stub(Duration::ZERO), ExplanationOptions::default()).unwrap();
    let s = Session::new(build_kb(&KbConfig::default()), &[], vec![], DEFAULT_STEP, 0).unwrap();
    let rep = run_diagnosis_process(s, &Endpoint::Connect(local.addr), &DiagnosisOptions::default()).unwrap();
    assert!(rep.outputs.is_empty() && rep.requests_sent.is_empty() && rep.responses.is_empty());
    assert_eq!(local.join().unwrap().received, 0);
}

#[test]
fn unreachable_peer_degrades_to_diagnosis_only() {
    let _cpu = exclusive();
    let addr = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let opts = DiagnosisOptions { retries: 2, backoff: Duration::from_millis(5), out_dir: None };
    let rep = run_diagnosis_process(tmi2_session(&KbConfig::default(), 180), &Endpoint::Connect(addr), &opts).unwrap();
    assert!(rep.degraded);
    assert_eq!(rep.outputs.len(), 3);
    assert!(rep.requests_sent.is_empty());
}

#[test]
fn diagnosis_does_not_wait_for_a_slow_peer() {
    let _cpu = exclusive();
    let cfg = KbConfig::default();
    let horizon = 1800;
    // Fastest of interleaved runs filters out scheduler noise. 30 requests at
    // 100 ms each would add 3 s if requests were blocking.
    let mut alone = Duration::MAX;
    let mut paired = Duration::MAX;
    for _ in 0..3 {
        let rep_alone =
            run_diagnosis_process(tmi2_session(&cfg, horizon), &Endpoint::DiagnosisOnly, &DiagnosisOptions::default())
                .unwrap();
        let local = spawn_local(stub(Duration::from_millis(100)), ExplanationOptions::default()).unwrap();
        let rep = run_diagnosis_process(
            tmi2_session(&cfg, horizon),
            &Endpoint::Connect(local.addr),
            &DiagnosisOptions::default(),
        )
        .unwrap();
        local.join().unwrap();
        assert_eq!(rep.responses.len(), 30);
        assert_eq!(rep_alone.outputs, rep.outputs);
        alone = alone.min(rep_alone.diagnosis_time);
        paired = paired.min(rep.diagnosis_time);
    }
    let limit = alone.mul_f64(1.10) + Duration::from_millis(150);
    assert!(paired <= limit, "with peer {paired:?}, alone {alone:?}");
}

#[test]
fn diagnosis_persists_a_session_directory() {
    let _cpu = exclusive();
    let dir = tempfile::tempdir().unwrap();
    let opts = DiagnosisOptions { out_dir: Some(dir.path().to_path_buf()), ..DiagnosisOptions::default() };
    let rep = run_diagnosis_process(tmi2_session(&KbConfig::default(), 180), &Endpoint::DiagnosisOnly, &opts).unwrap();
    let (m, outs) = justify_core::replay::read_outputs(dir.path()).unwrap();
    assert_eq!(m.windows, vec![60, 120, 180]);
    assert_eq!(outs, rep.outputs);
}
