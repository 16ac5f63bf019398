//! Inputs shared by the benchmarks.

use justify_core::npp_kb::{build_kb, KbConfig};
use justify_core::replay::{window_slice_range, Session, WindowSlice, DEFAULT_STEP};
use justify_core::rulelang::Program;
use justify_core::scenario::synthesize_tmi2;

/// A TMI-2 session under `cfg`, replayed up to and including `window_end`.
pub fn session_at(cfg: &KbConfig, window_end: i64) -> Session {
    let (s, a) = synthesize_tmi2(cfg).expect("thresholds are feasible");
    let mut session = Session::new(build_kb(cfg), &s, a, DEFAULT_STEP, window_end).expect("valid step");
    session.run_to_end().expect("replay succeeds");
    session
}

/// The knowledge base and the input slice of the window ending at
/// `window_end`.
pub fn window_input(cfg: &KbConfig, window_end: i64) -> (Program, WindowSlice) {
    let s = session_at(cfg, window_end);
    let (lo, hi) = *s.windows().last().expect("at least one window");
    let persisted: std::collections::BTreeSet<_> = s.outputs()[..s.outputs().len() - 1]
        .iter()
        .flat_map(|o| o.inferred_actions.iter().map(|a| a.atom(justify_core::npp_kb::INFERRED_ACTION)))
        .collect();
    let slice = window_slice_range(s.sensors(), s.actions(), &persisted, lo, hi);
    (s.kb().clone(), slice)
}
