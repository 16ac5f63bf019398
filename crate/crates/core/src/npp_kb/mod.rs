//! Plant knowledge base: components, classification, thresholds, the steam
//! table and the rules for recommendations, non-observed variables and
//! inferred actions.
//!
//! Rule sources ship as `.kb` files under `kb/` and are embedded at build
//! time. Exactly one of the two suppression files is loaded.

mod bindings;
mod config;
mod steam;

use std::path::Path;

pub use bindings::{binding, variable_bindings, VariableBinding};
pub use config::KbConfig;
pub use steam::{saturation_pressure, steam_table};

use thiserror::Error;

use crate::rulelang::{parse_program, ParseError, Program};

pub const NPP_KB: &str = include_str!("../../kb/npp.kb");
pub const SUPPRESSION_INTENDED_KB: &str = include_str!("../../kb/suppression_intended.kb");
pub const SUPPRESSION_LITERAL_KB: &str = include_str!("../../kb/suppression_literal.kb");
pub use steam::STEAM_TABLE_KB;

/// Predicates of the recommendation family.
pub const RECOMMENDATION: &str = "recommendation";
/// Predicates of the inferred-action family.
pub const INFERRED_ACTION: &str = "it_happened";
/// Predicates of the non-observed variable family.
pub const NON_OBSERVED: [&str; 5] = ["closed", "lack_of_water_supply", "leakage", "steam", "stuck_open"];

#[derive(Debug, Error)]
pub enum KbError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("temperature {temp} F is below the steam table (minimum {min} F)")]
    BelowTable { temp: i64, min: i64 },
    #[error("{file}: {source}")]
    Parse {
        file: String,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// The rule files for `cfg`, in load order, as `(file name, source)`.
pub fn kb_sources(cfg: &KbConfig) -> Vec<(&'static str, &'static str)> {
    let suppression = if cfg.literal_suppression {
        ("suppression_literal.kb", SUPPRESSION_LITERAL_KB)
    } else {
        ("suppression_intended.kb", SUPPRESSION_INTENDED_KB)
    };
    vec![
        ("npp.kb", NPP_KB),
        ("steam_table.kb", STEAM_TABLE_KB),
        suppression,
    ]
}

fn parse(file: &str, src: &str) -> Result<Program, KbError> {
    parse_program(src).map_err(|source| KbError::Parse {
        file: file.to_string(),
        source,
    })
}

/// The embedded knowledge base with the parameter facts of `cfg`.
pub fn build_kb(cfg: &KbConfig) -> Program {
    let mut p = Program::default();
    for (file, src) in kb_sources(cfg) {
        p.append(parse(file, src).expect("embedded knowledge base parses"));
    }
    p.append(parse_program(&cfg.facts()).expect("parameter facts parse"));
    p
}

/// Loads every `*.kb` file of `dir` in name order, skipping the suppression
/// file `cfg` does not select, then adds the parameter facts of `cfg`.
pub fn load_kb_dir(dir: &Path, cfg: &KbConfig) -> Result<Program, KbError> {
    let io = |source| KbError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "kb"))
        .collect();
    files.sort();
    let skip = if cfg.literal_suppression {
        "suppression_intended.kb"
    } else {
        "suppression_literal.kb"
    };
    let mut p = Program::default();
    for f in files {
        let name = f.file_name().unwrap_or_default().to_string_lossy().into_owned();
        if name == skip {
            continue;
        }
        let src = std::fs::read_to_string(&f).map_err(|source| KbError::Io {
            path: f.display().to_string(),
            source,
        })?;
        p.append(parse(&name, &src)?);
    }
    p.append(parse_program(&cfg.facts()).expect("parameter facts parse"));
    Ok(p)
}

/// Writes the embedded rule files (both suppression variants) to `dir`.
pub fn write_kb_dir(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, src) in [
        ("npp.kb", NPP_KB),
        ("steam_table.kb", STEAM_TABLE_KB),
        ("suppression_intended.kb", SUPPRESSION_INTENDED_KB),
        ("suppression_literal.kb", SUPPRESSION_LITERAL_KB),
    ] {
        std::fs::write(dir.join(name), src)?;
    }
    Ok(())
}
