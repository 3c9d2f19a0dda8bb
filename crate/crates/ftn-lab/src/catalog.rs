//! Built-in configs and user config directories.

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, LabResult};
use crate::runner;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Builtin(&'static str),
    User(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub name: String,
    pub kind: Option<ExperimentKind>,
    pub description: String,
    pub source: Source,
}

const BUILTIN: [(&str, &str); 7] = [
    ("fig1c-gaussian", include_str!("../configs/fig1c-gaussian.toml")),
    ("fig1c-qpsk", include_str!("../configs/fig1c-qpsk.toml")),
    ("mazo-table", include_str!("../configs/mazo-table.toml")),
    ("fde-vs-td", include_str!("../configs/fde-vs-td.toml")),
    ("coded-waterfall", include_str!("../configs/coded-waterfall.toml")),
    ("fig2-af-slices", include_str!("../configs/fig2-af-slices.toml")),
    ("fig3-two-target", include_str!("../configs/fig3-two-target.toml")),
];

pub fn builtin_text(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

fn describe(text: &str, origin: &str) -> (Option<ExperimentKind>, String) {
    match ExperimentConfig::parse(text, origin, None) {
        Ok(cfg) => (Some(cfg.kind()), cfg.description().unwrap_or("").to_string()),
        Err(e) => (None, format!("invalid: {e}")),
    }
}

/// Built-ins, then `*.toml` files from `user_dir` sorted by name.
pub fn list(user_dir: Option<&Path>) -> LabResult<Vec<Entry>> {
    let mut out: Vec<Entry> = BUILTIN
        .iter()
        .map(|(name, text)| {
            let (kind, description) = describe(text, name);
            Entry {
                name: name.to_string(),
                kind,
                description,
                source: Source::Builtin(text),
            }
        })
        .collect();
    if let Some(dir) = user_dir {
        let rd = std::fs::read_dir(dir).map_err(|e| LabError::io(dir, e))?;
        let mut paths: Vec<PathBuf> = rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| LabError::io(&p, e))?;
            let (kind, description) = describe(&text, &p.display().to_string());
            out.push(Entry {
                name: p.file_stem().unwrap_or_default().to_string_lossy().into_owned(),
                kind,
                description,
                source: Source::User(p),
            });
        }
    }
    Ok(out)
}

/// Resolves a config path, a built-in name or a user-dir entry name.
pub fn resolve(name: &str, user_dir: Option<&Path>) -> LabResult<ExperimentConfig> {
    let path = Path::new(name);
    if path.is_file() {
        return runner::load(path, None);
    }
    if let Some(text) = builtin_text(name) {
        return ExperimentConfig::parse(text, name, None);
    }
    if let Some(dir) = user_dir {
        let candidate = dir.join(format!("{name}.toml"));
        if candidate.is_file() {
            return runner::load(&candidate, None);
        }
    }
    Err(LabError::UnknownConfig(name.to_string()))
}
