//! The TMI-2 scenario: synthetic input streams, the pinned expected outputs
//! and the fixture directory that freezes both.

mod fixtures;
mod trace;

pub use fixtures::{check_fixtures, default_fixture_dir, write_fixtures, FixtureReport};
pub use trace::{
    attempted_actions, check_waypoints, primary_pressure, steam_expected_a, synthesize_tmi2, value,
    HORIZON,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::engine::{AssumptionSet, GroundAtom};
use crate::explain::{ExplainError, Explainer, Explanation, DEFAULT_MAX_GRAPHS};
use crate::npp_kb::{build_kb, KbConfig};
use crate::replay::{AttemptedAction, DiagnosisOutput, ReplayError, SensorSample, Session, DEFAULT_STEP};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One row of the accident's key event sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScenarioEvent {
    pub time: i64,
    pub description: &'static str,
    /// Streams whose edge or threshold crossing marks the event; empty for
    /// events visible only in the operator log.
    pub streams: &'static [&'static str],
}

pub const EVENTS: [ScenarioEvent; 15] = [
    ScenarioEvent { time: 0, description: "Normal operation", streams: &[] },
    ScenarioEvent { time: 1, description: "Condensate pumps trip", streams: &["condensate_pump_a_flow", "condensate_pump_b_flow"] },
    ScenarioEvent { time: 2, description: "Feedwater pumps trip", streams: &["feedwater_pump_a_flow", "feedwater_pump_b_flow"] },
    ScenarioEvent { time: 2, description: "Turbine trips", streams: &["turbine_power"] },
    ScenarioEvent { time: 2, description: "Auxiliary feedwater pumps start", streams: &["auxiliary_feedwater_pump_a_flow", "auxiliary_feedwater_pump_b_flow"] },
    ScenarioEvent { time: 7, description: "Pressurizer PORV opens due to high primary loop pressure", streams: &["primary_loop_pressure"] },
    ScenarioEvent { time: 11, description: "Reactor trips", streams: &["reactor_power"] },
    ScenarioEvent { time: 11, description: "Primary loop pressure starts decreasing, but the PORV remains open", streams: &["primary_loop_pressure"] },
    ScenarioEvent { time: 122, description: "HPIS system starts", streams: &["high_pressure_injection_pump_flow"] },
    ScenarioEvent { time: 279, description: "Operators throttle HPIS pumps", streams: &["high_pressure_injection_pump_flow"] },
    ScenarioEvent { time: 499, description: "Auxiliary feedwater line block valve opened (loop A)", streams: &[] },
    ScenarioEvent { time: 500, description: "Auxiliary feedwater line block valve opened (loop B)", streams: &[] },
    ScenarioEvent { time: 4402, description: "Primary pump tripped (loop A)", streams: &["primary_pump_a_flow"] },
    ScenarioEvent { time: 6036, description: "Primary pump tripped (loop B)", streams: &["primary_pump_b_flow"] },
    ScenarioEvent { time: 8521, description: "Pressurizer block valve closed", streams: &[] },
];

/// Which configuration an expectation is evaluated under.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    Default,
    /// `action_execution_time_range = 600`.
    ShortSuppression,
}

impl Profile {
    pub fn config(self) -> KbConfig {
        match self {
            Profile::Default => KbConfig::default(),
            Profile::ShortSuppression => KbConfig::short_suppression(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Default => "default (action_execution_time_range=8521)",
            Profile::ShortSuppression => "short suppression (action_execution_time_range=600)",
        }
    }
}

/// An explanation graph frozen as a fixture.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GraphTarget {
    pub name: &'static str,
    pub atom: &'static str,
    pub window_end: i64,
    pub profile: Profile,
    /// Index into the atom's graphs in canonical order.
    pub index: usize,
}

pub const GRAPH_TARGETS: [GraphTarget; 4] = [
    GraphTarget { name: "condensate_trip", atom: "it_happened(trip,condensate_pump_a,1)", window_end: 60, profile: Profile::Default, index: 0 },
    GraphTarget { name: "loop_a_steam", atom: "steam(primary_loop_A,901)", window_end: 960, profile: Profile::Default, index: 0 },
    GraphTarget { name: "open_valve_first", atom: "recommendation(open,auxiliary_feedwater_a_block_valve,1201)", window_end: 1260, profile: Profile::ShortSuppression, index: 0 },
    GraphTarget { name: "open_valve_second", atom: "recommendation(open,auxiliary_feedwater_a_block_valve,1201)", window_end: 1260, profile: Profile::ShortSuppression, index: 1 },
];

/// Pinned atom sets keyed by the time argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expected {
    /// Recommendations at each listed instant, exactly.
    pub recommendations: BTreeMap<i64, BTreeSet<GroundAtom>>,
    /// Inferred variables of the families in [`PINNED_VARIABLE_FAMILIES`] at each
    /// listed instant, exactly.
    pub inferred_variables: BTreeMap<i64, BTreeSet<GroundAtom>>,
    /// Every inferred action of the replay, exactly.
    pub inferred_actions: BTreeSet<GroundAtom>,
}

pub const PINNED_VARIABLE_FAMILIES: [&str; 4] = ["closed", "lack_of_water_supply", "steam", "stuck_open"];

fn atoms(src: &[&str]) -> BTreeSet<GroundAtom> {
    src.iter().map(|s| s.parse().expect("pinned atoms parse")).collect()
}

fn by_time(set: BTreeSet<GroundAtom>) -> BTreeMap<i64, BTreeSet<GroundAtom>> {
    let mut m: BTreeMap<i64, BTreeSet<GroundAtom>> = BTreeMap::new();
    for a in set {
        m.entry(a.time().expect("timed atom")).or_default().insert(a);
    }
    m
}

pub fn expected_outputs() -> Expected {
    let rec = |p: &str, c: &str, t: i64| format!("recommendation({p},{c},{t})");
    let mut r = Vec::new();
    for t in [2, 16, 118] {
        r.push(rec("open", "auxiliary_feedwater_a_block_valve", t));
        r.push(rec("open", "auxiliary_feedwater_b_block_valve", t));
    }
    for t in [16, 118, 8521] {
        r.push(rec("close", "pressurizer_backup_block_valve", t));
        r.push(rec("close", "pressurizer_power_operated_relief_valve", t));
    }
    for t in [118, 8521] {
        r.push(rec("turn_on", "high_pressure_injection_pump", t));
    }
    let mut v = Vec::new();
    for t in [2, 18, 847] {
        v.push(format!("closed(auxiliary_feedwater_a_block_valve,{t})"));
        v.push(format!("closed(auxiliary_feedwater_b_block_valve,{t})"));
        v.push(format!("lack_of_water_supply(secondary_loop_A,{t})"));
        v.push(format!("lack_of_water_supply(secondary_loop_B,{t})"));
    }
    for t in [18, 847, 8521] {
        v.push(format!("stuck_open(pressurizer_power_operated_relief_valve,{t})"));
    }
    v.push("steam(primary_loop_A,847)".to_string());
    let refs = |v: &[String]| atoms(&v.iter().map(String::as_str).collect::<Vec<_>>());
    Expected {
        recommendations: by_time(refs(&r)),
        inferred_variables: by_time(refs(&v)),
        inferred_actions: atoms(&[
            "it_happened(trip,condensate_pump_a,1)",
            "it_happened(trip,condensate_pump_b,1)",
            "it_happened(trip,feedwater_pump_a,2)",
            "it_happened(trip,feedwater_pump_b,2)",
            "it_happened(trip,turbine1,2)",
            "it_happened(start,auxiliary_feedwater_pump_a,2)",
            "it_happened(start,auxiliary_feedwater_pump_b,2)",
            "it_happened(trip,reactor1,11)",
            "it_happened(start,high_pressure_injection_pump,122)",
            "it_happened(trip,high_pressure_injection_pump,278)",
            "it_happened(trip,primary_pump_a,4403)",
            "it_happened(trip,primary_pump_b,6037)",
        ]),
    }
}

/// Differences between a replay and the pinned sets; empty when they agree.
pub fn compare_outputs(expected: &Expected, outputs: &[DiagnosisOutput]) -> Vec<String> {
    let mut diffs = Vec::new();
    let mut recs: BTreeMap<i64, BTreeSet<GroundAtom>> = BTreeMap::new();
    let mut vars: BTreeMap<i64, BTreeSet<GroundAtom>> = BTreeMap::new();
    let mut actions = BTreeSet::new();
    for o in outputs {
        for r in &o.recommendations {
            recs.entry(r.time).or_default().insert(r.atom("recommendation"));
        }
        for v in &o.inferred_vars {
            if PINNED_VARIABLE_FAMILIES.contains(&&*v.predicate) {
                vars.entry(v.time().unwrap_or(-1)).or_default().insert(v.clone());
            }
        }
        actions.extend(o.inferred_actions.iter().map(|a| a.atom("it_happened")));
    }
    let mut cmp = |what: &str, t: Option<i64>, want: &BTreeSet<GroundAtom>, got: &BTreeSet<GroundAtom>| {
        let at = t.map(|t| format!(" at t={t}")).unwrap_or_default();
        for a in want.difference(got) {
            diffs.push(format!("{what}{at}: missing {a}"));
        }
        for a in got.difference(want) {
            diffs.push(format!("{what}{at}: unexpected {a}"));
        }
    };
    let empty = BTreeSet::new();
    for (t, want) in &expected.recommendations {
        cmp("recommendations", Some(*t), want, recs.get(t).unwrap_or(&empty));
    }
    for (t, want) in &expected.inferred_variables {
        cmp("inferred variables", Some(*t), want, vars.get(t).unwrap_or(&empty));
    }
    cmp("inferred actions", None, &expected.inferred_actions, &actions);
    diffs
}

/// Replays the scenario up to `window_end` under `cfg` and explains `atom`
/// in that window.
pub fn explain_in_window(
    cfg: &KbConfig,
    sensors: &[SensorSample],
    actions: &[AttemptedAction],
    window_end: i64,
    atom: &GroundAtom,
) -> Result<Explanation, ScenarioError> {
    let mut s = Session::new(build_kb(cfg), sensors, actions.to_vec(), DEFAULT_STEP, window_end)?;
    s.run_to_end()?;
    let ev = s.evaluation(window_end)?;
    let ex = Explainer::new(&ev.program, &ev.answer_set, &AssumptionSet::default())?;
    Ok(ex.explain(atom, DEFAULT_MAX_GRAPHS)?)
}
