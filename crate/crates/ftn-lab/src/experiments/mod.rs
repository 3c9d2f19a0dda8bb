//! Experiment drivers. Each returns its CSV tables in memory; the runner
//! writes them out.

mod ber;
mod capacity;
mod coded;
mod mazo;
mod rates;
mod sensing;
mod spectrum;

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::table::Table;
use ftn_core::util::{db_to_linear, derive_seed};

/// Runs an experiment on the current rayon pool.
pub fn run(cfg: &ExperimentConfig, seed: u64) -> LabResult<Vec<Table>> {
    match cfg {
        ExperimentConfig::Spectrum(c) => spectrum::run(c),
        ExperimentConfig::Capacity(c) => capacity::run(c),
        ExperimentConfig::Rates(c) => rates::run(c, seed),
        ExperimentConfig::Mazo(c) => mazo::run(c),
        ExperimentConfig::BerTd(c) => ber::run_td(c, seed),
        ExperimentConfig::BerFd(c) => ber::run_fd(c, seed),
        ExperimentConfig::Coded(c) => coded::run(c, seed),
        ExperimentConfig::SenseAf(c) => sensing::run_af(c, seed),
        ExperimentConfig::SenseMl(c) => sensing::run_ml(c, seed),
    }
}

/// Noise PSD for a target `Eb/N0` when each unit of `es` carries `bits_per_es` bits.
pub(crate) fn n0_for(ebn0_db: f64, es: f64, bits_per_es: f64) -> f64 {
    es / (bits_per_es * db_to_linear(ebn0_db))
}

/// Seed for a position in the experiment's work tree.
pub(crate) fn seed_at(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &p| derive_seed(s, p))
}

/// Label used in CSV rows for a pulse.
pub(crate) fn pulse_label(p: &crate::config::PulseConfig) -> String {
    match p.kind {
        crate::config::PulseFamily::Rrc => "rrc".into(),
        crate::config::PulseFamily::Sinc => "sinc".into(),
    }
}
