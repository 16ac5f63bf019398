//! Fixture directory layout (all paths relative to the scenario root):
//!
//! ```text
//! sensors.csv  actions.csv  metadata.json  MANIFEST.sha256
//! expected/recommendations.txt  expected/inferred_variables.txt  expected/inferred_actions.txt
//! expected/graphs/<name>.json
//! ```
//!
//! `MANIFEST.sha256` lists every other file with its digest, sorted by path.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{
    compare_outputs, expected_outputs, explain_in_window, synthesize_tmi2, Expected, ScenarioError,
    GRAPH_TARGETS, HORIZON,
};
use crate::engine::GroundAtom;
use crate::npp_kb::{build_kb, KbConfig};
use crate::replay::{actions_to_csv, replay, sensors_to_csv, DEFAULT_STEP};

/// `scenario/tmi2` at the workspace root.
pub fn default_fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenario/tmi2")
}

const METADATA: &str = r#"{
  "scenario": "tmi2",
  "horizon": 8521,
  "step": 60,
  "synthetic": true,
  "note": "Values between the pinned waypoints are invented; only the event times, thresholds and the values quoted with the expected outputs are constrained."
}
"#;

fn atoms_text(header: &str, atoms: impl IntoIterator<Item = GroundAtom>) -> String {
    let mut v: Vec<GroundAtom> = atoms.into_iter().collect();
    v.sort_by_key(|a| (a.time(), a.clone()));
    let mut s = format!("% {header}\n");
    for a in v {
        s.push_str(&a.to_string());
        s.push('\n');
    }
    s
}

/// Every fixture file except the manifest, as `(relative path, contents)`.
fn render(exp: &Expected) -> Result<Vec<(String, String)>, ScenarioError> {
    let (sensors, actions) = synthesize_tmi2(&KbConfig::default())?;
    let mut files = vec![
        ("sensors.csv".to_string(), sensors_to_csv(&sensors)),
        ("actions.csv".to_string(), actions_to_csv(&actions)),
        ("metadata.json".to_string(), METADATA.to_string()),
        (
            "expected/recommendations.txt".to_string(),
            atoms_text(
                "recommendations at each listed instant (exact per instant)",
                exp.recommendations.values().flatten().cloned(),
            ),
        ),
        (
            "expected/inferred_variables.txt".to_string(),
            atoms_text(
                "closed, lack_of_water_supply, steam, stuck_open at each listed instant (exact per instant)",
                exp.inferred_variables.values().flatten().cloned(),
            ),
        ),
        (
            "expected/inferred_actions.txt".to_string(),
            atoms_text("all inferred actions of the replay (exact)", exp.inferred_actions.iter().cloned()),
        ),
    ];
    for t in GRAPH_TARGETS {
        let atom: GroundAtom = t.atom.parse().expect("pinned atom");
        let ex = explain_in_window(&t.profile.config(), &sensors, &actions, t.window_end, &atom)?;
        let g = ex.graphs.get(t.index).ok_or_else(|| {
            ScenarioError::Infeasible(format!("{} has only {} graphs", t.atom, ex.graphs.len()))
        })?;
        files.push((format!("expected/graphs/{}.json", t.name), g.to_json() + "\n"));
    }
    Ok(files)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn manifest(files: &[(String, String)]) -> String {
    let mut v: Vec<_> = files.iter().collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v.iter()
        .map(|(p, c)| format!("{}  {p}\n", sha256_hex(c.as_bytes())))
        .collect()
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ScenarioError + '_ {
    move |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Regenerates the whole fixture directory.
pub fn write_fixtures(dir: &Path) -> Result<(), ScenarioError> {
    let files = render(&expected_outputs())?;
    for (rel, contents) in &files {
        let p = dir.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(io(parent))?;
        }
        std::fs::write(&p, contents).map_err(io(&p))?;
    }
    let p = dir.join("MANIFEST.sha256");
    std::fs::write(&p, manifest(&files)).map_err(io(&p))
}

#[derive(Clone, Debug, Default)]
pub struct FixtureReport {
    pub checked_files: usize,
    pub windows: usize,
    pub failures: Vec<String>,
}

impl FixtureReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the manifest digests, compares every file with a fresh rendering
/// and replays the shipped streams against the pinned sets.
pub fn check_fixtures(dir: &Path) -> Result<FixtureReport, ScenarioError> {
    let mut report = FixtureReport::default();
    let exp = expected_outputs();
    let files = render(&exp)?;
    let mp = dir.join("MANIFEST.sha256");
    let shipped_manifest = std::fs::read_to_string(&mp).map_err(io(&mp))?;
    if shipped_manifest != manifest(&files) {
        report.failures.push("MANIFEST.sha256 differs from the regenerated fixtures".into());
    }
    let mut listed = BTreeSet::new();
    for line in shipped_manifest.lines() {
        let Some((digest, rel)) = line.split_once("  ") else {
            report.failures.push(format!("malformed manifest line `{line}`"));
            continue;
        };
        listed.insert(rel.to_string());
        match std::fs::read(dir.join(rel)) {
            Ok(bytes) if sha256_hex(&bytes) == digest => report.checked_files += 1,
            Ok(_) => report.failures.push(format!("{rel}: digest mismatch")),
            Err(e) => report.failures.push(format!("{rel}: {e}")),
        }
    }
    for (rel, contents) in &files {
        if !listed.contains(rel) {
            report.failures.push(format!("{rel}: not in manifest"));
        }
        match std::fs::read_to_string(dir.join(rel)) {
            Ok(s) if &s == contents => {}
            Ok(_) => report.failures.push(format!("{rel}: differs from a fresh rendering")),
            Err(e) => report.failures.push(format!("{rel}: {e}")),
        }
    }

    let sensors = crate::replay::ingest_sensors(
        std::fs::File::open(dir.join("sensors.csv")).map_err(io(&dir.join("sensors.csv")))?,
    )?;
    let actions = crate::replay::ingest_actions(
        std::fs::File::open(dir.join("actions.csv")).map_err(io(&dir.join("actions.csv")))?,
    )?;
    let outs = replay(&build_kb(&KbConfig::default()), &sensors, &actions, DEFAULT_STEP, HORIZON)?;
    report.windows = outs.len();
    report.failures.extend(compare_outputs(&exp, &outs));
    Ok(report)
}
