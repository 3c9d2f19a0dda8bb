//! Experiment configuration files (TOML).
//!
//! Every experiment has its own table layout; unknown keys are rejected and
//! numeric ranges are validated before anything runs.

use crate::error::{LabError, LabResult};
use ftn_core::model::Constellation;
use ftn_core::pulse::PulseShape;
use serde::{Deserialize, Deserializer, Serialize};
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Spectrum,
    Capacity,
    Rates,
    Mazo,
    BerTd,
    BerFd,
    Coded,
    SenseAf,
    SenseMl,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::Spectrum,
        ExperimentKind::Capacity,
        ExperimentKind::Rates,
        ExperimentKind::Mazo,
        ExperimentKind::BerTd,
        ExperimentKind::BerFd,
        ExperimentKind::Coded,
        ExperimentKind::SenseAf,
        ExperimentKind::SenseMl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Capacity => "capacity",
            ExperimentKind::Rates => "rates",
            ExperimentKind::Mazo => "mazo",
            ExperimentKind::BerTd => "ber-td",
            ExperimentKind::BerFd => "ber-fd",
            ExperimentKind::Coded => "coded",
            ExperimentKind::SenseAf => "sense-af",
            ExperimentKind::SenseMl => "sense-ml",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LabError::field("experiment", format!("unknown experiment `{s}`")))
    }
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseFamily {
    Rrc,
    Sinc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    #[serde(default = "default_family")]
    pub kind: PulseFamily,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_span")]
    pub span: usize,
    #[serde(default = "default_sps")]
    pub sps: usize,
}

fn default_family() -> PulseFamily {
    PulseFamily::Rrc
}
fn default_beta() -> f64 {
    0.5
}
fn default_span() -> usize {
    16
}
fn default_sps() -> usize {
    20
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            kind: default_family(),
            beta: default_beta(),
            span: default_span(),
            sps: default_sps(),
        }
    }
}

impl PulseConfig {
    pub fn build(&self) -> LabResult<PulseShape> {
        Ok(match self.kind {
            PulseFamily::Rrc => PulseShape::rrc(self.beta, self.span, self.sps)?,
            PulseFamily::Sinc => PulseShape::sinc(self.span, self.sps)?,
        })
    }

    /// Roll-off as reported in CSV rows (0 for sinc).
    pub fn rolloff(&self) -> f64 {
        match self.kind {
            PulseFamily::Rrc => self.beta,
            PulseFamily::Sinc => 0.0,
        }
    }

    fn validate(&self, prefix: &str) -> LabResult<()> {
        if self.kind == PulseFamily::Rrc && !(0.0..=1.0).contains(&self.beta) {
            return Err(LabError::field(format!("{prefix}.beta"), format!("{} is outside [0, 1]", self.beta)));
        }
        if self.span < 2 {
            return Err(LabError::field(format!("{prefix}.span"), "must be at least 2"));
        }
        if self.sps < 2 || self.sps % 2 != 0 {
            return Err(LabError::field(format!("{prefix}.sps"), format!("{} must be even and at least 2", self.sps)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    Bpsk,
    Qpsk,
}

impl From<Modulation> for Constellation {
    fn from(m: Modulation) -> Self {
        match m {
            Modulation::Bpsk => Constellation::Bpsk,
            Modulation::Qpsk => Constellation::Qpsk,
        }
    }
}

fn default_bpsk() -> Modulation {
    Modulation::Bpsk
}
fn default_qpsk() -> Modulation {
    Modulation::Qpsk
}

/// Acceleration factors: a number, a ratio string such as `"2/3"`, or a list of either.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TauList(pub Vec<f64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum TauValue {
    Int(i64),
    Num(f64),
    Text(String),
}

impl TauValue {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            TauValue::Int(v) => Ok(v as f64),
            TauValue::Num(v) => Ok(v),
            TauValue::Text(s) => {
                let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| E::custom(format!("cannot read `{s}` as a number")));
                match s.split_once('/') {
                    Some((p, q)) => Ok(parse(p)? / parse(q)?),
                    None => parse(&s),
                }
            }
        }
    }
}

impl<'de> Deserialize<'de> for TauList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            One(TauValue),
            Many(Vec<TauValue>),
        }
        let values = match OneOrMany::deserialize(d)? {
            OneOrMany::One(v) => vec![v.value()?],
            OneOrMany::Many(vs) => vs.into_iter().map(TauValue::value).collect::<Result<_, _>>()?,
        };
        Ok(TauList(values))
    }
}

fn check_taus(taus: &[f64], field: &str) -> LabResult<()> {
    if taus.is_empty() {
        return Err(LabError::field(field, "needs at least one value"));
    }
    for (i, &t) in taus.iter().enumerate() {
        if !(t > 0.0 && t <= 1.0) {
            return Err(LabError::field(format!("{field}[{i}]"), format!("{t} is outside (0, 1]")));
        }
    }
    Ok(())
}

/// Waveform experiments need `τ·sps` to be a whole number of samples.
fn check_grid(taus: &[f64], pulse: &PulseConfig, field: &str) -> LabResult<()> {
    for (i, &t) in taus.iter().enumerate() {
        let ticks = t * pulse.sps as f64;
        if (ticks - ticks.round()).abs() > 1e-9 || ticks.round() < 1.0 {
            return Err(LabError::field(
                format!("{field}[{i}]"),
                format!("tau·pulse.sps = {ticks:.6} is not a whole number of samples; change pulse.sps"),
            ));
        }
    }
    Ok(())
}

fn check_positive(v: f64, field: &str) -> LabResult<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(LabError::field(field, format!("{v} must be positive")));
    }
    Ok(())
}

fn check_nonempty<T>(v: &[T], field: &str) -> LabResult<()> {
    if v.is_empty() {
        return Err(LabError::field(field, "needs at least one value"));
    }
    Ok(())
}

fn check_min(v: usize, min: usize, field: &str) -> LabResult<()> {
    if v < min {
        return Err(LabError::field(field, format!("{v} is below the minimum {min}")));
    }
    Ok(())
}

fn check_finite(vs: &[f64], field: &str) -> LabResult<()> {
    for (i, v) in vs.iter().enumerate() {
        if !v.is_finite() {
            return Err(LabError::field(format!("{field}[{i}]"), "must be finite"));
        }
    }
    Ok(())
}

macro_rules! experiment_config {
    ($(#[$meta:meta])* $name:ident { $($(#[$fmeta:meta])* $field:ident : $ty:ty),* $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub experiment: Option<ExperimentKind>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub description: Option<String>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub seed: Option<u64>,
            #[serde(default, skip_serializing_if = "Option::is_none")]
            pub out: Option<PathBuf>,
            $($(#[$fmeta])* pub $field: $ty,)*
        }
    };
}

experiment_config!(
    /// Folded spectra on a cell-centered grid, closed form and via the taps.
    SpectrumConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        #[serde(default = "default_points")]
        points: usize,
    }
);

fn default_points() -> usize {
    512
}

experiment_config!(
    /// Gaussian-input capacity curves against Eb/N0.
    CapacityConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        ebn0_db: Vec<f64>,
        #[serde(default = "default_capacity_methods")]
        methods: Vec<String>,
        #[serde(default = "default_grid_points")]
        grid_points: usize,
        #[serde(default = "default_esn0_min")]
        esn0_min_db: f64,
        #[serde(default = "default_esn0_max")]
        esn0_max_db: f64,
        #[serde(default = "default_esn0_step")]
        esn0_step_db: f64,
    }
);

fn default_capacity_methods() -> Vec<String> {
    vec!["gaussian_flat".into(), "gaussian_waterfill".into()]
}
fn default_grid_points() -> usize {
    4096
}
fn default_esn0_min() -> f64 {
    -15.0
}
fn default_esn0_max() -> f64 {
    40.0
}
fn default_esn0_step() -> f64 {
    0.05
}

experiment_config!(
    /// Finite-alphabet information rates by forward-recursion simulation.
    RatesConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        #[serde(default = "default_qpsk")]
        constellation: Modulation,
        esn0_db: Vec<f64>,
        #[serde(default = "default_rate_symbols")]
        n_symbols: usize,
        #[serde(default = "default_rate_trials")]
        trials: usize,
        #[serde(default = "default_budget")]
        state_budget: usize,
    }
);

fn default_rate_symbols() -> usize {
    20_000
}
fn default_rate_trials() -> usize {
    4
}
fn default_budget() -> usize {
    ftn_core::capacity::DEFAULT_STATE_BUDGET
}

experiment_config!(
    /// Minimum-distance scans over τ for several pulses.
    MazoConfig {
        pulses: Vec<PulseConfig>,
        #[serde(default = "default_tau_max")]
        tau_max: f64,
        #[serde(default = "default_tau_min")]
        tau_min: f64,
        #[serde(default = "default_tau_step")]
        tau_step: f64,
        #[serde(default = "default_max_len")]
        max_len: usize,
    }
);

fn default_tau_max() -> f64 {
    1.0
}
fn default_tau_min() -> f64 {
    0.6
}
fn default_tau_step() -> f64 {
    0.005
}
fn default_max_len() -> usize {
    ftn_core::mazo::DEFAULT_MAX_LEN
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdEqualizer {
    Viterbi,
    Bcjr,
    Mbcjr,
}

impl TdEqualizer {
    pub fn name(&self) -> &'static str {
        match self {
            TdEqualizer::Viterbi => "viterbi",
            TdEqualizer::Bcjr => "bcjr",
            TdEqualizer::Mbcjr => "mbcjr",
        }
    }
}

fn default_viterbi() -> TdEqualizer {
    TdEqualizer::Viterbi
}
fn default_m() -> usize {
    16
}
fn default_lookahead() -> usize {
    2
}

experiment_config!(
    /// Uncoded BER with a time-domain trellis equalizer on the matched-filter model.
    BerTdConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        ebn0_db: Vec<f64>,
        #[serde(default = "default_bpsk")]
        constellation: Modulation,
        #[serde(default = "default_frame")]
        n_symbols: usize,
        #[serde(default = "default_frames")]
        frames: usize,
        #[serde(default = "default_viterbi")]
        equalizer: TdEqualizer,
        #[serde(default)]
        memory: Option<usize>,
        #[serde(default = "default_m")]
        m: usize,
        #[serde(default = "default_lookahead")]
        lookahead: usize,
        #[serde(default = "default_budget")]
        state_budget: usize,
    }
);

fn default_frame() -> usize {
    2000
}
fn default_frames() -> usize {
    10
}

experiment_config!(
    /// Uncoded BER with cyclic-prefix frequency-domain MMSE equalization.
    BerFdConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        ebn0_db: Vec<f64>,
        #[serde(default = "default_bpsk")]
        constellation: Modulation,
        #[serde(default = "default_block")]
        n_symbols: usize,
        /// Defaults to the shortest prefix that makes the model circulant.
        #[serde(default)]
        cp_len: Option<usize>,
        #[serde(default = "default_frames")]
        frames: usize,
        /// Also run this time-domain equalizer on prefix-free frames.
        #[serde(default)]
        td_reference: Option<TdEqualizer>,
        #[serde(default)]
        memory: Option<usize>,
        #[serde(default = "default_budget")]
        state_budget: usize,
    }
);

fn default_block() -> usize {
    256
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TurboEqualizer {
    Bcjr,
    Mbcjr,
    Fde,
}

impl TurboEqualizer {
    pub fn name(&self) -> &'static str {
        match self {
            TurboEqualizer::Bcjr => "bcjr",
            TurboEqualizer::Mbcjr => "mbcjr",
            TurboEqualizer::Fde => "fde",
        }
    }
}

fn default_turbo_eq() -> TurboEqualizer {
    TurboEqualizer::Bcjr
}

experiment_config!(
    /// Turbo equalization of a convolutionally coded FTN link.
    CodedConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        ebn0_db: Vec<f64>,
        #[serde(default = "default_bpsk")]
        constellation: Modulation,
        #[serde(default = "default_info_len")]
        info_len: usize,
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_coded_frames")]
        frames: usize,
        #[serde(default = "default_generators")]
        generators: [u32; 2],
        #[serde(default = "default_turbo_eq")]
        equalizer: TurboEqualizer,
        #[serde(default)]
        memory: Option<usize>,
        #[serde(default = "default_m")]
        m: usize,
        #[serde(default = "default_lookahead")]
        lookahead: usize,
        #[serde(default)]
        cp_len: Option<usize>,
        #[serde(default = "default_budget")]
        state_budget: usize,
    }
);

fn default_info_len() -> usize {
    8192
}
fn default_iterations() -> usize {
    10
}
fn default_coded_frames() -> usize {
    4
}
fn default_generators() -> [u32; 2] {
    [0o7, 0o5]
}

experiment_config!(
    /// Monte-Carlo expected squared ambiguity functions.
    SenseAfConfig {
        #[serde(default)]
        pulse: PulseConfig,
        tau: TauList,
        #[serde(default = "default_af_symbols")]
        n_symbols: usize,
        #[serde(default = "default_qpsk")]
        constellation: Modulation,
        #[serde(default = "default_af_trials")]
        trials: usize,
        #[serde(default = "default_delays")]
        delays: Vec<f64>,
        #[serde(default = "default_doppler_min")]
        doppler_min: f64,
        #[serde(default = "default_doppler_max")]
        doppler_max: f64,
        #[serde(default = "default_doppler_points")]
        doppler_points: usize,
        #[serde(default = "default_peak_factor")]
        peak_factor: f64,
    }
);

fn default_af_symbols() -> usize {
    128
}
fn default_af_trials() -> usize {
    500
}
fn default_delays() -> Vec<f64> {
    vec![0.0]
}
fn default_doppler_min() -> f64 {
    -2.2
}
fn default_doppler_max() -> f64 {
    2.2
}
fn default_doppler_points() -> usize {
    441
}
fn default_peak_factor() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub tau: TauList,
    pub n_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub doppler: f64,
    pub amplitude: f64,
}

experiment_config!(
    /// Maximum-likelihood Doppler estimation of one or two point targets.
    SenseMlConfig {
        #[serde(default)]
        pulse: PulseConfig,
        scenarios: Vec<Scenario>,
        #[serde(default = "default_qpsk")]
        constellation: Modulation,
        targets: Vec<TargetConfig>,
        n0: f64,
        #[serde(default = "default_grid_min")]
        grid_min: f64,
        #[serde(default = "default_grid_max")]
        grid_max: f64,
        #[serde(default = "default_grid_points_ml")]
        grid_points: usize,
        #[serde(default = "default_runs")]
        runs: usize,
        /// Hit tolerance; defaults to half a grid cell.
        #[serde(default)]
        tolerance: Option<f64>,
    }
);

fn default_grid_min() -> f64 {
    -1.0
}
fn default_grid_max() -> f64 {
    1.0
}
fn default_grid_points_ml() -> usize {
    201
}
fn default_runs() -> usize {
    100
}

impl SenseMlConfig {
    pub fn grid_step(&self) -> f64 {
        (self.grid_max - self.grid_min) / (self.grid_points - 1) as f64
    }

    pub fn hit_tolerance(&self) -> f64 {
        self.tolerance.unwrap_or(0.5 * self.grid_step())
    }
}

/// A parsed and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentConfig {
    Spectrum(SpectrumConfig),
    Capacity(CapacityConfig),
    Rates(RatesConfig),
    Mazo(MazoConfig),
    BerTd(BerTdConfig),
    BerFd(BerFdConfig),
    Coded(CodedConfig),
    SenseAf(SenseAfConfig),
    SenseMl(SenseMlConfig),
}

macro_rules! each_config {
    ($self:expr, $c:ident => $body:expr) => {
        match $self {
            ExperimentConfig::Spectrum($c) => $body,
            ExperimentConfig::Capacity($c) => $body,
            ExperimentConfig::Rates($c) => $body,
            ExperimentConfig::Mazo($c) => $body,
            ExperimentConfig::BerTd($c) => $body,
            ExperimentConfig::BerFd($c) => $body,
            ExperimentConfig::Coded($c) => $body,
            ExperimentConfig::SenseAf($c) => $body,
            ExperimentConfig::SenseMl($c) => $body,
        }
    };
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentConfig::Spectrum(_) => ExperimentKind::Spectrum,
            ExperimentConfig::Capacity(_) => ExperimentKind::Capacity,
            ExperimentConfig::Rates(_) => ExperimentKind::Rates,
            ExperimentConfig::Mazo(_) => ExperimentKind::Mazo,
            ExperimentConfig::BerTd(_) => ExperimentKind::BerTd,
            ExperimentConfig::BerFd(_) => ExperimentKind::BerFd,
            ExperimentConfig::Coded(_) => ExperimentKind::Coded,
            ExperimentConfig::SenseAf(_) => ExperimentKind::SenseAf,
            ExperimentConfig::SenseMl(_) => ExperimentKind::SenseMl,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        each_config!(self, c => c.seed)
    }

    pub fn out(&self) -> Option<&PathBuf> {
        each_config!(self, c => c.out.as_ref())
    }

    pub fn description(&self) -> Option<&str> {
        each_config!(self, c => c.description.as_deref())
    }

    /// Applies command-line overrides and pins the experiment tag.
    pub fn set_overrides(&mut self, seed: Option<u64>, out: Option<PathBuf>) {
        let kind = self.kind();
        each_config!(self, c => {
            c.experiment = Some(kind);
            if seed.is_some() {
                c.seed = seed;
            }
            if out.is_some() {
                c.out = out;
            }
        })
    }

    /// Parses a config file body. `expected` is the subcommand, if any; the
    /// file's own `experiment` key must agree with it.
    pub fn parse(text: &str, origin: &str, expected: Option<ExperimentKind>) -> LabResult<Self> {
        let parse_err = |e: toml::de::Error| LabError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        };
        let table: toml::Table = toml::from_str(text).map_err(parse_err)?;
        let declared = match table.get("experiment") {
            None => None,
            Some(toml::Value::String(s)) => Some(s.parse::<ExperimentKind>()?),
            Some(_) => return Err(LabError::field("experiment", "must be a string")),
        };
        let kind = match (expected, declared) {
            (Some(e), Some(d)) if e != d => {
                return Err(LabError::field(
                    "experiment",
                    format!("file declares `{d}` but the `{e}` subcommand was used"),
                ))
            }
            (Some(e), _) => e,
            (None, Some(d)) => d,
            (None, None) => return Err(LabError::field("experiment", "missing; name the experiment kind")),
        };
        let cfg = match kind {
            ExperimentKind::Spectrum => ExperimentConfig::Spectrum(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::Capacity => ExperimentConfig::Capacity(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::Rates => ExperimentConfig::Rates(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::Mazo => ExperimentConfig::Mazo(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::BerTd => ExperimentConfig::BerTd(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::BerFd => ExperimentConfig::BerFd(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::Coded => ExperimentConfig::Coded(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::SenseAf => ExperimentConfig::SenseAf(toml::from_str(text).map_err(parse_err)?),
            ExperimentKind::SenseMl => ExperimentConfig::SenseMl(toml::from_str(text).map_err(parse_err)?),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> LabResult<()> {
        match self {
            ExperimentConfig::Spectrum(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                if c.points < 256 || !c.points.is_power_of_two() {
                    return Err(LabError::field("points", format!("{} must be a power of two ≥ 256", c.points)));
                }
            }
            ExperimentConfig::Capacity(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                check_nonempty(&c.ebn0_db, "ebn0_db")?;
                check_finite(&c.ebn0_db, "ebn0_db")?;
                for (i, m) in c.methods.iter().enumerate() {
                    if m != "gaussian_flat" && m != "gaussian_waterfill" {
                        return Err(LabError::field(
                            format!("methods[{i}]"),
                            format!("`{m}` is not one of gaussian_flat, gaussian_waterfill"),
                        ));
                    }
                }
                if c.grid_points < 256 || !c.grid_points.is_power_of_two() {
                    return Err(LabError::field("grid_points", "must be a power of two ≥ 256"));
                }
                check_positive(c.esn0_step_db, "esn0_step_db")?;
                if c.esn0_max_db <= c.esn0_min_db {
                    return Err(LabError::field("esn0_max_db", "must exceed esn0_min_db"));
                }
            }
            ExperimentConfig::Rates(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                check_nonempty(&c.esn0_db, "esn0_db")?;
                check_finite(&c.esn0_db, "esn0_db")?;
                check_min(c.n_symbols, 1, "n_symbols")?;
                check_min(c.trials, 1, "trials")?;
                check_min(c.state_budget, 1, "state_budget")?;
            }
            ExperimentConfig::Mazo(c) => {
                check_nonempty(&c.pulses, "pulses")?;
                for (i, p) in c.pulses.iter().enumerate() {
                    p.validate(&format!("pulses[{i}]"))?;
                }
                check_taus(&[c.tau_max], "tau_max")?;
                check_taus(&[c.tau_min], "tau_min")?;
                if c.tau_min >= c.tau_max {
                    return Err(LabError::field("tau_min", "must be below tau_max"));
                }
                check_positive(c.tau_step, "tau_step")?;
                check_min(c.max_len, 1, "max_len")?;
                if c.max_len > 24 {
                    return Err(LabError::field("max_len", format!("{} exceeds the supported depth 24", c.max_len)));
                }
            }
            ExperimentConfig::BerTd(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                check_grid(&c.tau.0, &c.pulse, "tau")?;
                check_nonempty(&c.ebn0_db, "ebn0_db")?;
                check_finite(&c.ebn0_db, "ebn0_db")?;
                check_min(c.n_symbols, 1, "n_symbols")?;
                check_min(c.frames, 1, "frames")?;
                check_min(c.m, 1, "m")?;
            }
            ExperimentConfig::BerFd(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                check_grid(&c.tau.0, &c.pulse, "tau")?;
                check_nonempty(&c.ebn0_db, "ebn0_db")?;
                check_finite(&c.ebn0_db, "ebn0_db")?;
                check_min(c.n_symbols, 2, "n_symbols")?;
                check_min(c.frames, 1, "frames")?;
                if let Some(cp) = c.cp_len {
                    if cp >= c.n_symbols {
                        return Err(LabError::field("cp_len", format!("{cp} must be below n_symbols")));
                    }
                }
            }
            ExperimentConfig::Coded(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                check_grid(&c.tau.0, &c.pulse, "tau")?;
                check_nonempty(&c.ebn0_db, "ebn0_db")?;
                check_finite(&c.ebn0_db, "ebn0_db")?;
                check_min(c.info_len, 1, "info_len")?;
                check_min(c.iterations, 1, "iterations")?;
                check_min(c.frames, 1, "frames")?;
                check_min(c.m, 1, "m")?;
                ftn_core::coded::ConvCode::new(c.generators[0], c.generators[1])
                    .map_err(|e| LabError::field("generators", e.to_string()))?;
            }
            ExperimentConfig::SenseAf(c) => {
                c.pulse.validate("pulse")?;
                check_taus(&c.tau.0, "tau")?;
                check_grid(&c.tau.0, &c.pulse, "tau")?;
                check_min(c.n_symbols, 1, "n_symbols")?;
                check_min(c.trials, 100, "trials")?;
                check_nonempty(&c.delays, "delays")?;
                check_finite(&c.delays, "delays")?;
                check_min(c.doppler_points, 3, "doppler_points")?;
                if c.doppler_max <= c.doppler_min {
                    return Err(LabError::field("doppler_max", "must exceed doppler_min"));
                }
                check_positive(c.peak_factor, "peak_factor")?;
            }
            ExperimentConfig::SenseMl(c) => {
                c.pulse.validate("pulse")?;
                check_nonempty(&c.scenarios, "scenarios")?;
                for (i, s) in c.scenarios.iter().enumerate() {
                    let field = format!("scenarios[{i}].tau");
                    if s.tau.0.len() != 1 {
                        return Err(LabError::field(field, "takes a single value"));
                    }
                    check_taus(&s.tau.0, &field)?;
                    check_grid(&s.tau.0, &c.pulse, &field)?;
                    check_min(s.n_symbols, 1, &format!("scenarios[{i}].n_symbols"))?;
                }
                if !(1..=2).contains(&c.targets.len()) {
                    return Err(LabError::field("targets", "one or two targets are supported"));
                }
                for (i, t) in c.targets.iter().enumerate() {
                    check_positive(t.amplitude, &format!("targets[{i}].amplitude"))?;
                }
                if !(c.n0 >= 0.0 && c.n0.is_finite()) {
                    return Err(LabError::field("n0", format!("{} must be non-negative", c.n0)));
                }
                check_min(c.grid_points, 3, "grid_points")?;
                if c.grid_max <= c.grid_min {
                    return Err(LabError::field("grid_max", "must exceed grid_min"));
                }
                check_min(c.runs, 1, "runs")?;
                if let Some(t) = c.tolerance {
                    check_positive(t, "tolerance")?;
                }
            }
        }
        Ok(())
    }
}
