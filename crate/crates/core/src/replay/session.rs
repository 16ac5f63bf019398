use std::collections::BTreeSet;

use rayon::prelude::*;

use super::window::{evaluate_window_full, window_slice_range, DiagnosisOutput, SensorStore, WindowEvaluation};
use super::{AttemptedAction, ReplayError, SensorSample, SessionManifest};
use crate::engine::GroundAtom;
use crate::npp_kb::INFERRED_ACTION;
use crate::rulelang::Program;

/// Window ends `step, 2·step, …, n·step` with `n = horizon / step`, the
/// last one moved to `horizon` so the off-grid remainder joins the final
/// window (a single window `[0, horizon]` when `horizon < step`). Window `k`
/// covers `[lo_k, end_k]` with `lo_k = min(max(0, end_k − 59), end_{k−1} + 1)`,
/// so consecutive windows leave no gap.
pub fn schedule(step: i64, horizon: i64) -> Result<Vec<(i64, i64)>, ReplayError> {
    if step < 1 {
        return Err(ReplayError::BadStep(step));
    }
    if horizon <= 0 {
        return Ok(Vec::new());
    }
    let n = (horizon / step).max(1);
    let ends = (1..=n).map(|k| if k == n { horizon } else { k * step });
    let mut prev = 0;
    Ok(ends
        .map(|hi| {
            let lo = (hi - 59).max(0).min(prev + 1);
            prev = hi;
            (lo, hi)
        })
        .collect())
}

fn events_of(out: &DiagnosisOutput) -> impl Iterator<Item = GroundAtom> + '_ {
    out.inferred_actions.iter().map(|a| a.atom(INFERRED_ACTION))
}

/// Replay state: inputs, the persisted event store and the outputs so far.
pub struct Session {
    kb: Program,
    sensors: SensorStore,
    actions: Vec<AttemptedAction>,
    windows: Vec<(i64, i64)>,
    outputs: Vec<DiagnosisOutput>,
    store: BTreeSet<GroundAtom>,
    verbose: bool,
    step: i64,
    horizon: i64,
}

impl Session {
    pub fn new(
        kb: Program,
        sensors: &[SensorSample],
        actions: Vec<AttemptedAction>,
        step: i64,
        horizon: i64,
    ) -> Result<Self, ReplayError> {
        Ok(Session {
            kb,
            sensors: SensorStore::new(sensors),
            actions,
            windows: schedule(step, horizon)?,
            outputs: Vec::new(),
            store: BTreeSet::new(),
            verbose: false,
            step,
            horizon,
        })
    }

    pub fn step(&self) -> i64 {
        self.step
    }

    pub fn horizon(&self) -> i64 {
        self.horizon
    }

    /// Manifest of the windows evaluated so far.
    pub fn manifest(&self) -> SessionManifest {
        SessionManifest {
            format_version: 1,
            step: self.step,
            horizon: self.horizon,
            windows: self.outputs.iter().map(|o| o.window_end).collect(),
        }
    }

    pub fn verbose(mut self, on: bool) -> Self {
        self.verbose = on;
        self
    }

    pub fn kb(&self) -> &Program {
        &self.kb
    }

    pub fn sensors(&self) -> &SensorStore {
        &self.sensors
    }

    pub fn actions(&self) -> &[AttemptedAction] {
        &self.actions
    }

    pub fn windows(&self) -> &[(i64, i64)] {
        &self.windows
    }

    pub fn outputs(&self) -> &[DiagnosisOutput] {
        &self.outputs
    }

    /// Inferred events persisted so far; only ever grows between
    /// injections.
    pub fn persisted(&self) -> &BTreeSet<GroundAtom> {
        &self.store
    }

    pub fn is_finished(&self) -> bool {
        self.outputs.len() == self.windows.len()
    }

    /// Evaluates the next window; `None` once every window is done.
    pub fn advance(&mut self) -> Result<Option<&DiagnosisOutput>, ReplayError> {
        let Some(&(lo, hi)) = self.windows.get(self.outputs.len()) else {
            return Ok(None);
        };
        let slice = window_slice_range(&self.sensors, &self.actions, &self.store, lo, hi);
        let ev = evaluate_window_full(&self.kb, &slice, self.verbose)?;
        self.store.extend(events_of(&ev.output));
        self.outputs.push(ev.output);
        Ok(self.outputs.last())
    }

    pub fn run_to_end(&mut self) -> Result<(), ReplayError> {
        while self.advance()?.is_some() {}
        Ok(())
    }

    /// Re-evaluates the window ending at `window_end` with the store as it
    /// stood before it, keeping the ground program for explanation.
    pub fn evaluation(&self, window_end: i64) -> Result<WindowEvaluation, ReplayError> {
        let k = self
            .windows
            .iter()
            .position(|&(_, hi)| hi == window_end)
            .filter(|&k| k < self.outputs.len())
            .ok_or(ReplayError::UnknownWindow(window_end))?;
        let (lo, hi) = self.windows[k];
        let store: BTreeSet<GroundAtom> = self.outputs[..k].iter().flat_map(events_of).collect();
        evaluate_window_full(&self.kb, &window_slice_range(&self.sensors, &self.actions, &store, lo, hi), false)
    }

    /// Adds an attempted action. Windows ending at or after its time are
    /// dropped and will be re-evaluated by later `advance` calls.
    pub fn inject(&mut self, action: AttemptedAction) -> Result<(), ReplayError> {
        if self.is_finished() {
            return Err(ReplayError::SessionFinished);
        }
        let keep = self.outputs.iter().take_while(|o| o.window_end < action.time).count();
        self.outputs.truncate(keep);
        self.store = self.outputs.iter().flat_map(events_of).collect();
        let at = self.actions.partition_point(|a| a.time <= action.time);
        self.actions.insert(at, action);
        Ok(())
    }
}

/// Sequential replay: the reference semantics.
pub fn replay(
    kb: &Program,
    sensors: &[SensorSample],
    actions: &[AttemptedAction],
    step: i64,
    horizon: i64,
) -> Result<Vec<DiagnosisOutput>, ReplayError> {
    let mut s = Session::new(kb.clone(), sensors, actions.to_vec(), step, horizon)?;
    s.run_to_end()?;
    Ok(s.outputs)
}

/// Window-parallel replay. A first pass evaluates every window without
/// persisted events to learn what each one infers; a second pass evaluates
/// every window against the events of the windows before it. If some
/// window's inferred events depend on the store, the result is recomputed
/// sequentially.
pub fn replay_concurrent(
    kb: &Program,
    sensors: &[SensorSample],
    actions: &[AttemptedAction],
    step: i64,
    horizon: i64,
) -> Result<Vec<DiagnosisOutput>, ReplayError> {
    let windows = schedule(step, horizon)?;
    let store = SensorStore::new(sensors);
    let eval = |(lo, hi): (i64, i64), persisted: &BTreeSet<GroundAtom>| {
        let slice = window_slice_range(&store, actions, persisted, lo, hi);
        evaluate_window_full(kb, &slice, false).map(|e| e.output)
    };
    let empty = BTreeSet::new();
    let first: Vec<DiagnosisOutput> = windows
        .par_iter()
        .map(|&w| eval(w, &empty))
        .collect::<Result<_, _>>()?;
    let mut prefixes = Vec::with_capacity(windows.len());
    let mut acc = BTreeSet::new();
    for o in &first {
        prefixes.push(acc.clone());
        acc.extend(events_of(o));
    }
    let second: Vec<DiagnosisOutput> = windows
        .par_iter()
        .zip(prefixes.par_iter())
        .map(|(&w, p)| eval(w, p))
        .collect::<Result<_, _>>()?;
    let stable = first
        .iter()
        .zip(&second)
        .all(|(a, b)| a.inferred_actions == b.inferred_actions);
    if stable {
        Ok(second)
    } else {
        log::info!("inferred events depend on persisted events; replaying sequentially");
        replay(kb, sensors, actions, step, horizon)
    }
}
