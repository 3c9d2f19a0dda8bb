use crate::config::{BerFdConfig, BerTdConfig, TdEqualizer};
use crate::error::LabResult;
use crate::experiments::{n0_for, pulse_label, seed_at};
use crate::table::Table;
use ftn_core::eq_freq::{fde_mmse, FdeSetting};
use ftn_core::eq_time::{bcjr_full, labels_to_bits, mbcjr, viterbi_mlse, TrellisSpec};
use ftn_core::model::{awgn, effective_half_len, fd_frontend, mf_frontend, modulate};
use ftn_core::pulse::PulseShape;
use ftn_core::{Constellation, FtnConfig, Observation, SymbolFrame};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub(crate) struct TdSettings {
    pub equalizer: TdEqualizer,
    pub memory: Option<usize>,
    pub m: usize,
    pub lookahead: usize,
    pub budget: usize,
}

/// Trellis for a matched-filter observation.
pub(crate) fn td_spec(obs: &Observation, c: Constellation, es: f64, s: &TdSettings) -> TrellisSpec {
    let spec = TrellisSpec::ungerboeck(&obs.channel.g, c, es).with_budget(s.budget);
    match s.memory {
        Some(m) => spec.with_memory(m),
        None => spec,
    }
}

/// Hard decisions of a time-domain equalizer.
pub(crate) fn td_decide(obs: &Observation, c: Constellation, es: f64, s: &TdSettings) -> LabResult<Vec<u8>> {
    let spec = td_spec(obs, c, es, s);
    Ok(match s.equalizer {
        TdEqualizer::Viterbi => labels_to_bits(&viterbi_mlse(&spec, obs, None)?, c),
        TdEqualizer::Bcjr => bcjr_full(&spec, obs, None)?.hard_bits(),
        TdEqualizer::Mbcjr => mbcjr(&spec, obs, None, s.m, s.lookahead)?.hard_bits(),
    })
}

fn count_errors(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// One uncoded frame over the matched-filter model; returns (bit errors, bits).
fn td_frame(p: &PulseShape, tau: f64, n: usize, c: Constellation, ebn0: f64, s: &TdSettings, seed: u64) -> LabResult<(usize, usize)> {
    let cfg = FtnConfig::new(p.clone(), tau, n, c, 1.0, 0)?;
    let frame = SymbolFrame::random(&cfg, seed);
    let n0 = n0_for(ebn0, 1.0, c.bits_per_symbol() as f64);
    let w = awgn(&modulate(&cfg, &frame), n0, seed_at(seed, &[1]));
    let obs = mf_frontend(&cfg, &w, n0)?;
    let bits = td_decide(&obs, c, 1.0, s)?;
    Ok((count_errors(&bits, &frame.bits), frame.bits.len()))
}

/// Shortest prefix that makes the matched-filter model circulant.
pub(crate) fn required_cp(p: &PulseShape, tau: f64, n: usize) -> LabResult<usize> {
    let cfg = FtnConfig::new(p.clone(), tau, n, Constellation::Bpsk, 1.0, 0)?;
    Ok(2 * effective_half_len(&cfg.channel()?))
}

fn fd_frame(p: &PulseShape, tau: f64, n: usize, cp: usize, c: Constellation, ebn0: f64, seed: u64) -> LabResult<(usize, usize)> {
    let cfg = FtnConfig::new(p.clone(), tau, n, c, 1.0, cp)?;
    let frame = SymbolFrame::random(&cfg, seed);
    // Prefix energy is charged to the information bits.
    let bits_per_es = c.bits_per_symbol() as f64 * n as f64 / (n + cp) as f64;
    let n0 = n0_for(ebn0, 1.0, bits_per_es);
    let w = awgn(&modulate(&cfg, &frame), n0, seed_at(seed, &[1]));
    let obs = fd_frontend(&cfg, &w, n0)?;
    let setting = FdeSetting::from_observation(&obs, 1.0, cp)?;
    let out = fde_mmse(&obs, &setting, c, 1.0)?;
    let bits: Vec<u8> = out.llr.iter().map(|&l| u8::from(l < 0.0)).collect();
    Ok((count_errors(&bits, &frame.bits), frame.bits.len()))
}

const BER_HEADER: [&str; 13] = [
    "tau",
    "beta",
    "pulse",
    "EbN0_dB",
    "equalizer",
    "memory",
    "n_symbols",
    "cp_len",
    "frames",
    "bits",
    "errors",
    "ber",
    "seed",
];

pub fn run_td(c: &BerTdConfig, seed: u64) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let constellation: Constellation = c.constellation.into();
    let s = TdSettings {
        equalizer: c.equalizer,
        memory: c.memory,
        m: c.m,
        lookahead: c.lookahead,
        budget: c.state_budget,
    };
    let mut memories = Vec::new();
    for &tau in &c.tau.0 {
        let cfg = FtnConfig::new(p.clone(), tau, c.n_symbols.max(2), constellation, 1.0, 0)?;
        let spec = TrellisSpec::ungerboeck(&cfg.channel()?.g, constellation, 1.0);
        let spec = match c.memory {
            Some(m) => spec.with_memory(m),
            None => spec,
        };
        if c.equalizer != TdEqualizer::Mbcjr {
            spec.clone().with_budget(c.state_budget).check_budget()?;
        }
        memories.push(spec.memory);
    }
    let work: Vec<(usize, usize, usize)> = (0..c.tau.0.len())
        .flat_map(|ti| (0..c.ebn0_db.len()).flat_map(move |ei| (0..c.frames).map(move |f| (ti, ei, f))))
        .collect();
    let counts: Vec<(usize, usize)> = work
        .par_iter()
        .map(|&(ti, ei, f)| {
            td_frame(
                &p,
                c.tau.0[ti],
                c.n_symbols,
                constellation,
                c.ebn0_db[ei],
                &s,
                seed_at(seed, &[ti as u64, ei as u64, f as u64]),
            )
        })
        .collect::<LabResult<_>>()?;

    let mut t = Table::new("ber_td.csv", &BER_HEADER);
    for ti in 0..c.tau.0.len() {
        for ei in 0..c.ebn0_db.len() {
            let (errors, bits) = work
                .iter()
                .zip(&counts)
                .filter(|((a, b, _), _)| *a == ti && *b == ei)
                .fold((0, 0), |acc, (_, &(e, n))| (acc.0 + e, acc.1 + n));
            t.push(vec![
                c.tau.0[ti].into(),
                c.pulse.rolloff().into(),
                pulse_label(&c.pulse).into(),
                c.ebn0_db[ei].into(),
                c.equalizer.name().into(),
                memories[ti].into(),
                c.n_symbols.into(),
                0usize.into(),
                c.frames.into(),
                bits.into(),
                errors.into(),
                (errors as f64 / bits as f64).into(),
                seed.into(),
            ]);
        }
    }
    Ok(vec![t])
}

pub fn run_fd(c: &BerFdConfig, seed: u64) -> LabResult<Vec<Table>> {
    let p = c.pulse.build()?;
    let constellation: Constellation = c.constellation.into();
    let cps: Vec<usize> = match c.cp_len {
        Some(cp) => vec![cp; c.tau.0.len()],
        None => c
            .tau
            .0
            .iter()
            .map(|&tau| required_cp(&p, tau, c.n_symbols))
            .collect::<LabResult<_>>()?,
    };
    for (&cp, &tau) in cps.iter().zip(&c.tau.0) {
        if cp >= c.n_symbols {
            return Err(crate::error::LabError::field(
                "n_symbols",
                format!("tau {tau} needs a prefix of {cp} symbols; use a longer block"),
            ));
        }
    }
    let td = c.td_reference.map(|equalizer| TdSettings {
        equalizer,
        memory: c.memory,
        m: 16,
        lookahead: 2,
        budget: c.state_budget,
    });
    let variants = if td.is_some() { 2 } else { 1 };
    let work: Vec<(usize, usize, usize, usize)> = (0..c.tau.0.len())
        .flat_map(|ti| {
            (0..c.ebn0_db.len()).flat_map(move |ei| (0..variants).flat_map(move |v| (0..c.frames).map(move |f| (ti, ei, v, f))))
        })
        .collect();
    let counts: Vec<(usize, usize)> = work
        .par_iter()
        .map(|&(ti, ei, v, f)| {
            let fseed = seed_at(seed, &[ti as u64, ei as u64, f as u64]);
            let (tau, eb) = (c.tau.0[ti], c.ebn0_db[ei]);
            match (v, &td) {
                (1, Some(s)) => td_frame(&p, tau, c.n_symbols, constellation, eb, s, fseed),
                _ => fd_frame(&p, tau, c.n_symbols, cps[ti], constellation, eb, fseed),
            }
        })
        .collect::<LabResult<_>>()?;

    let mut t = Table::new("ber_fd.csv", &BER_HEADER);
    for ti in 0..c.tau.0.len() {
        for ei in 0..c.ebn0_db.len() {
            for v in 0..variants {
                let (errors, bits) = work
                    .iter()
                    .zip(&counts)
                    .filter(|((a, b, w, _), _)| *a == ti && *b == ei && *w == v)
                    .fold((0, 0), |acc, (_, &(e, n))| (acc.0 + e, acc.1 + n));
                let (name, memory, cp) = match (v, &td) {
                    (1, Some(s)) => {
                        let cfg = FtnConfig::new(p.clone(), c.tau.0[ti], c.n_symbols, constellation, 1.0, 0)?;
                        let spec = TrellisSpec::ungerboeck(&cfg.channel()?.g, constellation, 1.0);
                        let mem = s.memory.map_or(spec.memory, |m| spec.with_memory(m).memory);
                        (s.equalizer.name(), Some(mem), 0)
                    }
                    _ => ("fde_mmse", None, cps[ti]),
                };
                t.push(vec![
                    c.tau.0[ti].into(),
                    c.pulse.rolloff().into(),
                    pulse_label(&c.pulse).into(),
                    c.ebn0_db[ei].into(),
                    name.into(),
                    memory.map_or(crate::table::Cell::Text(String::new()), |m| m.into()),
                    c.n_symbols.into(),
                    cp.into(),
                    c.frames.into(),
                    bits.into(),
                    errors.into(),
                    (errors as f64 / bits as f64).into(),
                    seed.into(),
                ]);
            }
        }
    }
    Ok(vec![t])
}
