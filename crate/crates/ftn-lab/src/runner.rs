//! Config loading, execution and artifact writing.

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{LabError, LabResult};
use crate::experiments;
use crate::table::Table;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub tables: Vec<Table>,
    pub seed: u64,
    pub elapsed_s: f64,
}

#[derive(Serialize)]
struct Meta<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    version: &'static str,
    started_at: String,
    elapsed_s: f64,
}

/// Reads and validates a config file.
pub fn load(path: &Path, expected: Option<ExperimentKind>) -> LabResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    ExperimentConfig::parse(&text, &path.display().to_string(), expected)
}

/// Runs without touching the filesystem.
pub fn run_in_memory(cfg: &ExperimentConfig, seed: u64, threads: Option<usize>) -> LabResult<Vec<Table>> {
    match threads {
        None => experiments::run(cfg, seed),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| LabError::Threads(e.to_string()))?;
            pool.install(|| experiments::run(cfg, seed))
        }
    }
}

/// Runs a config and writes its tables and `meta.json`.
///
/// Command-line seed and output directory take precedence over the config.
pub fn run_config(mut cfg: ExperimentConfig, opts: &RunOptions) -> LabResult<RunReport> {
    if opts.threads == Some(0) {
        return Err(LabError::field("threads", "must be at least 1"));
    }
    cfg.set_overrides(opts.seed, opts.out.clone());
    let seed = cfg.seed().unwrap_or(DEFAULT_SEED);
    let out_dir = cfg
        .out()
        .cloned()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.kind().name()));

    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true);
    let clock = Instant::now();
    log::info!("running {} (seed {seed})", cfg.kind());
    let tables = run_in_memory(&cfg, seed, opts.threads)?;
    let elapsed_s = clock.elapsed().as_secs_f64();

    std::fs::create_dir_all(&out_dir).map_err(|e| LabError::io(&out_dir, e))?;
    let mut files = Vec::with_capacity(tables.len() + 1);
    for t in &tables {
        files.push(t.write_to(&out_dir)?);
    }
    let meta = Meta {
        config: &cfg,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        started_at,
        elapsed_s,
    };
    let meta_path = out_dir.join("meta.json");
    let json = serde_json::to_string_pretty(&meta).expect("config serializes");
    std::fs::write(&meta_path, json + "\n").map_err(|e| LabError::io(&meta_path, e))?;
    files.push(meta_path);
    Ok(RunReport {
        out_dir,
        files,
        tables,
        seed,
        elapsed_s,
    })
}
