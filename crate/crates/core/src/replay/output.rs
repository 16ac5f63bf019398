use std::path::Path;

use serde::{Deserialize, Serialize};

use super::window::DiagnosisOutput;
use super::ReplayError;

/// Index of a session directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub format_version: u32,
    pub step: i64,
    pub horizon: i64,
    pub windows: Vec<i64>,
}

pub fn window_file_stem(window_end: i64) -> String {
    format!("window_{window_end:05}")
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> ReplayError + '_ {
    move |source| ReplayError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Appends one window's `.json` and `.txt` documents to `dir`.
pub fn write_window(dir: &Path, out: &DiagnosisOutput) -> Result<(), ReplayError> {
    let stem = window_file_stem(out.window_end);
    let j = dir.join(format!("{stem}.json"));
    std::fs::write(&j, out.to_json()).map_err(io(&j))?;
    let t = dir.join(format!("{stem}.txt"));
    std::fs::write(&t, out.to_text()).map_err(io(&t))
}

pub fn write_manifest(dir: &Path, m: &SessionManifest) -> Result<(), ReplayError> {
    let p = dir.join("session.json");
    let body = serde_json::to_string_pretty(m).expect("manifest serializes") + "\n";
    std::fs::write(&p, body).map_err(io(&p))
}

/// Writes a full session directory: one document pair per window plus the
/// manifest. Output is a pure function of the arguments.
pub fn write_outputs(
    dir: &Path,
    outputs: &[DiagnosisOutput],
    step: i64,
    horizon: i64,
) -> Result<(), ReplayError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for o in outputs {
        write_window(dir, o)?;
    }
    write_manifest(
        dir,
        &SessionManifest {
            format_version: 1,
            step,
            horizon,
            windows: outputs.iter().map(|o| o.window_end).collect(),
        },
    )
}

/// Reads a session directory written by [`write_outputs`].
pub fn read_outputs(dir: &Path) -> Result<(SessionManifest, Vec<DiagnosisOutput>), ReplayError> {
    let p = dir.join("session.json");
    let text = std::fs::read_to_string(&p).map_err(io(&p))?;
    let m: SessionManifest =
        serde_json::from_str(&text).map_err(|e| ReplayError::Document(e.to_string()))?;
    let mut outs = Vec::with_capacity(m.windows.len());
    for &w in &m.windows {
        let p = dir.join(format!("{}.json", window_file_stem(w)));
        let text = std::fs::read_to_string(&p).map_err(io(&p))?;
        outs.push(serde_json::from_str(&text).map_err(|e| ReplayError::Document(e.to_string()))?);
    }
    Ok((m, outs))
}
