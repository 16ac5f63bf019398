use std::collections::BTreeSet;
use std::io::Read;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::ReplayError;
use crate::npp_kb::{binding, NPP_KB};
use crate::rulelang::parse_program;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SensorSample {
    pub time: i64,
    pub variable: String,
    pub value: i64,
}

/// An operator attempt as logged; `component` may be a logged alias of a
/// component name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AttemptedAction {
    pub time: i64,
    pub procedure: String,
    pub component: String,
}

/// Component names and logged aliases known to the knowledge base.
pub fn known_components() -> &'static BTreeSet<String> {
    static NAMES: OnceLock<BTreeSet<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let p = parse_program(NPP_KB).expect("embedded knowledge base parses");
        p.facts()
            .filter(|a| matches!(&*a.predicate, "component" | "command_name"))
            .filter_map(|a| a.args.first()?.eval(&|_| None))
            .filter_map(|v| v.as_sym().map(str::to_string))
            .collect()
    })
}

fn is_symbol(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn records<R: Read>(
    source: R,
    header: [&str; 3],
) -> Result<Vec<(usize, [String; 3])>, ReplayError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let h = rdr
        .headers()
        .map_err(|e| ReplayError::Csv { line: 1, message: e.to_string() })?;
    if h.iter().collect::<Vec<_>>() != header {
        return Err(ReplayError::Csv {
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    let mut out = Vec::new();
    for r in rdr.records() {
        let r = r.map_err(|e| ReplayError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = r.position().map_or(0, |p| p.line() as usize);
        if r.len() != 3 {
            return Err(ReplayError::Csv { line, message: format!("expected 3 fields, found {}", r.len()) });
        }
        out.push((line, [r[0].to_string(), r[1].to_string(), r[2].to_string()]));
    }
    Ok(out)
}

fn int(line: usize, field: &str, s: &str) -> Result<i64, ReplayError> {
    s.parse().map_err(|_| ReplayError::Csv {
        line,
        message: format!("{field} `{s}` is not an integer"),
    })
}

fn time(line: usize, s: &str) -> Result<i64, ReplayError> {
    let t = int(line, "time", s)?;
    if t < 0 {
        return Err(ReplayError::Csv { line, message: format!("negative time {t}") });
    }
    Ok(t)
}

/// Reads `time,variable,value` rows, sorted by time (stable).
pub fn ingest_sensors<R: Read>(source: R) -> Result<Vec<SensorSample>, ReplayError> {
    let mut out = Vec::new();
    for (line, [t, var, v]) in records(source, ["time", "variable", "value"])? {
        let time = time(line, &t)?;
        if binding(&var).is_none() {
            return Err(ReplayError::UnknownVariable { line, name: var });
        }
        let value = int(line, "value", &v)?;
        out.push(SensorSample { time, variable: var, value });
    }
    out.sort_by_key(|s| s.time);
    Ok(out)
}

/// Reads `time,procedure,component` rows, sorted by time (stable).
pub fn ingest_actions<R: Read>(source: R) -> Result<Vec<AttemptedAction>, ReplayError> {
    let mut out = Vec::new();
    for (line, [t, procedure, component]) in records(source, ["time", "procedure", "component"])? {
        let time = time(line, &t)?;
        if !is_symbol(&procedure) {
            return Err(ReplayError::Csv { line, message: format!("bad procedure `{procedure}`") });
        }
        if !known_components().contains(&component) {
            return Err(ReplayError::UnknownComponent { line, name: component });
        }
        out.push(AttemptedAction { time, procedure, component });
    }
    out.sort_by_key(|a| a.time);
    Ok(out)
}

pub fn sensors_to_csv(samples: &[SensorSample]) -> String {
    let mut s = String::from("time,variable,value\n");
    for x in samples {
        s.push_str(&format!("{},{},{}\n", x.time, x.variable, x.value));
    }
    s
}

pub fn actions_to_csv(actions: &[AttemptedAction]) -> String {
    let mut s = String::from("time,procedure,component\n");
    for a in actions {
        s.push_str(&format!("{},{},{}\n", a.time, a.procedure, a.component));
    }
    s
}
