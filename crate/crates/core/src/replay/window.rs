use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AttemptedAction, ReplayError, SensorSample};
use crate::engine::{answer_sets, ground, GroundAtom, GroundProgram, Interpretation, SolveOptions};
use crate::npp_kb::{variable_bindings, INFERRED_ACTION, NON_OBSERVED, RECOMMENDATION};
use crate::rulelang::{Atom, Program, Rule, Term, Value};

/// Per-variable sample series with zero-order hold between samples.
#[derive(Clone, Debug, Default)]
pub struct SensorStore {
    series: BTreeMap<String, BTreeMap<i64, i64>>,
}

impl SensorStore {
    pub fn new(samples: &[SensorSample]) -> Self {
        let mut s = SensorStore::default();
        for x in samples {
            s.series.entry(x.variable.clone()).or_default().insert(x.time, x.value);
        }
        s
    }

    /// The last sample at or before `t`.
    pub fn value_at(&self, variable: &str, t: i64) -> Option<i64> {
        self.series.get(variable)?.range(..=t).next_back().map(|(_, v)| *v)
    }

    /// Raw samples of one variable within `[from, to]`.
    pub fn samples(&self, variable: &str, from: i64, to: i64) -> Option<Vec<(i64, i64)>> {
        let s = self.series.get(variable)?;
        Some(s.range(from..=to.max(from)).map(|(t, v)| (*t, *v)).collect())
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    pub fn last_time(&self) -> Option<i64> {
        self.series.values().filter_map(|s| s.keys().next_back()).max().copied()
    }
}

/// Facts for one evaluation: sensor facts over `[lo, hi]` plus the sample
/// at `lo - 1` (edge rules look one second back), every attempt up to `hi`
/// and the persisted events before `lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowSlice {
    pub lo: i64,
    pub hi: i64,
    pub sensors: Vec<GroundAtom>,
    pub actions: Vec<AttemptedAction>,
    pub persisted: Vec<GroundAtom>,
}

pub fn window_slice(
    sensors: &SensorStore,
    actions: &[AttemptedAction],
    persisted: &BTreeSet<GroundAtom>,
    t: i64,
) -> WindowSlice {
    window_slice_range(sensors, actions, persisted, (t - 59).max(0), t)
}

pub fn window_slice_range(
    sensors: &SensorStore,
    actions: &[AttemptedAction],
    persisted: &BTreeSet<GroundAtom>,
    lo: i64,
    hi: i64,
) -> WindowSlice {
    let mut facts = Vec::new();
    for b in variable_bindings() {
        for t in (lo - 1).max(0)..=hi {
            if let Some(v) = sensors.value_at(b.stream_name, t) {
                facts.push(b.fact(v, t));
            }
        }
    }
    WindowSlice {
        lo,
        hi,
        sensors: facts,
        actions: actions.iter().filter(|a| a.time <= hi).cloned().collect(),
        persisted: persisted.iter().filter(|e| e.time().is_some_and(|t| t < lo)).cloned().collect(),
    }
}

fn fact(a: GroundAtom) -> Rule {
    Rule::fact(Atom {
        predicate: a.predicate,
        args: a.args.into_iter().map(Term::Const).collect(),
    })
}

impl WindowSlice {
    /// All facts of the slice, including `time/1` over the window and
    /// `anytime/1` over `[0, hi]`.
    pub fn facts(&self) -> Vec<GroundAtom> {
        let mut out = Vec::with_capacity(self.sensors.len() + self.hi as usize * 2);
        for t in 0..=self.hi {
            out.push(GroundAtom::new("anytime", vec![Value::Int(t)]));
        }
        for t in self.lo..=self.hi {
            out.push(GroundAtom::new("time", vec![Value::Int(t)]));
        }
        out.extend(self.sensors.iter().cloned());
        out.extend(self.actions.iter().map(|a| {
            GroundAtom::new(
                "attempted",
                vec![Value::sym(&a.procedure), Value::sym(&a.component), Value::Int(a.time)],
            )
        }));
        out.extend(self.persisted.iter().cloned());
        out
    }

    pub fn program(&self, kb: &Program) -> Program {
        let mut p = kb.clone();
        p.rules.extend(self.facts().into_iter().map(fact));
        p
    }
}

/// `(procedure, component, time)` of a recommendation or inferred action.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Action {
    pub time: i64,
    pub procedure: String,
    pub component: String,
}

impl Action {
    fn from_atom(a: &GroundAtom) -> Option<Action> {
        match a.args.as_slice() {
            [Value::Sym(p), Value::Sym(c), Value::Int(t)] => Some(Action {
                time: *t,
                procedure: p.to_string(),
                component: c.to_string(),
            }),
            _ => None,
        }
    }

    pub fn atom(&self, predicate: &str) -> GroundAtom {
        GroundAtom::new(
            predicate,
            vec![Value::sym(&self.procedure), Value::sym(&self.component), Value::Int(self.time)],
        )
    }
}

/// What one window reports. Only atoms whose time lies in `[window_start,
/// window_end]` are listed, so each instant is reported by exactly one
/// window of a replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosisOutput {
    pub window_end: i64,
    pub window_start: i64,
    pub recommendations: BTreeSet<Action>,
    pub inferred_vars: BTreeSet<GroundAtom>,
    pub inferred_actions: BTreeSet<Action>,
    /// Every other atom of the answer set; present only in verbose mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub other_atoms: Option<BTreeSet<GroundAtom>>,
}

impl DiagnosisOutput {
    /// Sorted lines: recommendations, inferred variables, inferred actions.
    pub fn to_text(&self) -> String {
        let mut s = format!("% window {} [{}, {}]\n", self.window_end, self.window_start, self.window_end);
        let mut block = |mut atoms: Vec<GroundAtom>| {
            atoms.sort();
            for a in atoms {
                s.push_str(&a.to_string());
                s.push('\n');
            }
        };
        block(self.recommendations.iter().map(|a| a.atom(RECOMMENDATION)).collect());
        block(self.inferred_vars.iter().cloned().collect());
        block(self.inferred_actions.iter().map(|a| a.atom(INFERRED_ACTION)).collect());
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("output serializes") + "\n"
    }

    /// Recommendation, inferred-variable and inferred-action atoms.
    pub fn significant_atoms(&self) -> Vec<GroundAtom> {
        let mut v: Vec<GroundAtom> = self.recommendations.iter().map(|a| a.atom(RECOMMENDATION)).collect();
        v.extend(self.inferred_vars.iter().cloned());
        v.extend(self.inferred_actions.iter().map(|a| a.atom(INFERRED_ACTION)));
        v
    }
}

/// A window's ground program, its answer set and the extracted output.
pub struct WindowEvaluation {
    pub program: GroundProgram,
    pub answer_set: Interpretation,
    pub output: DiagnosisOutput,
}

pub fn evaluate_window_full(
    kb: &Program,
    slice: &WindowSlice,
    verbose: bool,
) -> Result<WindowEvaluation, ReplayError> {
    let gp = ground(&slice.program(kb))?;
    let opts = SolveOptions { limit: 1, ..SolveOptions::default() };
    let a = answer_sets(&gp, &opts)?
        .into_iter()
        .next()
        .ok_or(ReplayError::NoAnswerSet { window_end: slice.hi })?;
    let mut out = DiagnosisOutput {
        window_end: slice.hi,
        window_start: slice.lo,
        recommendations: BTreeSet::new(),
        inferred_vars: BTreeSet::new(),
        inferred_actions: BTreeSet::new(),
        other_atoms: verbose.then(BTreeSet::new),
    };
    for x in a.iter() {
        let in_window = x.time().is_some_and(|t| slice.lo <= t && t <= slice.hi);
        let pred = &*x.predicate;
        let target = if !in_window {
            None
        } else if pred == RECOMMENDATION {
            Action::from_atom(x).map(|r| out.recommendations.insert(r))
        } else if pred == INFERRED_ACTION {
            Action::from_atom(x).map(|r| out.inferred_actions.insert(r))
        } else if NON_OBSERVED.contains(&pred) {
            Some(out.inferred_vars.insert(x.clone()))
        } else {
            None
        };
        if target.is_none() {
            if let Some(o) = out.other_atoms.as_mut() {
                o.insert(x.clone());
            }
        }
    }
    Ok(WindowEvaluation { program: gp, answer_set: a, output: out })
}

pub fn evaluate_window(kb: &Program, slice: &WindowSlice) -> Result<DiagnosisOutput, ReplayError> {
    Ok(evaluate_window_full(kb, slice, false)?.output)
}
