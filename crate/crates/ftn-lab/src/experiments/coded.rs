use crate::config::{CodedConfig, TurboEqualizer};
use crate::error::{LabError, LabResult};
use crate::experiments::ber::required_cp;
use crate::experiments::{n0_for, pulse_label, seed_at};
use crate::table::Table;
use ftn_core::coded::{coded_throughput, turbo_equalize, ConvCode, Equalizer, EqualizerKind, TurboConfig};
use ftn_core::eq_freq::FdeSetting;
use ftn_core::eq_time::TrellisSpec;
use ftn_core::model::{awgn, fd_frontend, mf_frontend, modulate};
use ftn_core::pulse::PulseShape;
use ftn_core::util::{median, rng_from_seed};
use ftn_core::{Constellation, FtnConfig, SymbolFrame};
use rand::Rng;
use rayon::prelude::*;

struct Link<'a> {
    c: &'a CodedConfig,
    pulse: PulseShape,
    code: ConvCode,
    constellation: Constellation,
}

impl Link<'_> {
    fn n_symbols(&self) -> usize {
        self.code.coded_len(self.c.info_len) / self.constellation.bits_per_symbol()
    }

    /// Per-iteration BER trace of one coded frame.
    fn frame(&self, tau: f64, cp: usize, ebn0: f64, seed: u64) -> LabResult<Vec<f64>> {
        let c = self.c;
        let turbo = TurboConfig::new(self.code.clone(), seed_at(seed, &[0]), c.iterations, c.info_len)?;
        let mut rng = rng_from_seed(seed_at(seed, &[1]));
        let info: Vec<u8> = (0..c.info_len).map(|_| rng.gen_range(0..2u8)).collect();
        let tx = turbo.transmit_bits(&info);
        let n = self.n_symbols();
        let cfg = FtnConfig::new(self.pulse.clone(), tau, n, self.constellation, 1.0, cp)?;
        let frame = SymbolFrame::from_bits(self.constellation, 1.0, tx, cp);
        // Eb is per information bit; prefix symbols carry none.
        let n0 = n0_for(ebn0, 1.0, c.info_len as f64 / (n + cp) as f64);
        let w = awgn(&modulate(&cfg, &frame), n0, seed_at(seed, &[2]));
        let (obs, eq) = match c.equalizer {
            TurboEqualizer::Fde => {
                let obs = fd_frontend(&cfg, &w, n0)?;
                let setting = FdeSetting::from_observation(&obs, 1.0, cp)?;
                let eq = Equalizer::Fde {
                    setting,
                    constellation: self.constellation,
                    es: 1.0,
                };
                (obs, eq)
            }
            kind => {
                let obs = mf_frontend(&cfg, &w, n0)?;
                let mut spec = TrellisSpec::ungerboeck(&obs.channel.g, self.constellation, 1.0).with_budget(c.state_budget);
                if let Some(m) = c.memory {
                    spec = spec.with_memory(m);
                }
                let kind = match kind {
                    TurboEqualizer::Mbcjr => EqualizerKind::Mbcjr {
                        m: c.m,
                        lookahead: c.lookahead,
                    },
                    _ => EqualizerKind::Bcjr,
                };
                (obs, Equalizer::Trellis { spec, kind })
            }
        };
        Ok(turbo_equalize(&obs, &eq, &turbo, Some(&info))?.ber_trace)
    }
}

pub fn run(c: &CodedConfig, seed: u64) -> LabResult<Vec<Table>> {
    let link = Link {
        c,
        pulse: c.pulse.build()?,
        code: ConvCode::new(c.generators[0], c.generators[1])?,
        constellation: c.constellation.into(),
    };
    if link.code.coded_len(c.info_len) % link.constellation.bits_per_symbol() != 0 {
        return Err(LabError::field("info_len", "coded length does not fill whole symbols"));
    }
    let n = link.n_symbols();
    let mut cps = Vec::with_capacity(c.tau.0.len());
    for &tau in &c.tau.0 {
        let cp = match (c.equalizer, c.cp_len) {
            (TurboEqualizer::Fde, Some(cp)) => cp,
            (TurboEqualizer::Fde, None) => required_cp(&link.pulse, tau, n)?,
            _ => 0,
        };
        if cp >= n {
            return Err(LabError::field("cp_len", format!("prefix {cp} is not shorter than the block ({n} symbols)")));
        }
        if c.equalizer != TurboEqualizer::Fde {
            let cfg = FtnConfig::new(link.pulse.clone(), tau, n, link.constellation, 1.0, 0)?;
            let mut spec = TrellisSpec::ungerboeck(&cfg.channel()?.g, link.constellation, 1.0).with_budget(c.state_budget);
            if let Some(m) = c.memory {
                spec = spec.with_memory(m);
            }
            if c.equalizer == TurboEqualizer::Bcjr {
                spec.check_budget()?;
            }
        }
        cps.push(cp);
    }

    let work: Vec<(usize, usize, usize)> = (0..c.tau.0.len())
        .flat_map(|ti| (0..c.ebn0_db.len()).flat_map(move |ei| (0..c.frames).map(move |f| (ti, ei, f))))
        .collect();
    let traces: Vec<Vec<f64>> = work
        .par_iter()
        .map(|&(ti, ei, f)| {
            link.frame(
                c.tau.0[ti],
                cps[ti],
                c.ebn0_db[ei],
                seed_at(seed, &[ti as u64, ei as u64, f as u64]),
            )
        })
        .collect::<LabResult<_>>()?;

    let mut t = Table::new(
        "coded.csv",
        &[
            "tau",
            "beta",
            "pulse",
            "EbN0_dB",
            "equalizer",
            "iteration",
            "ber",
            "ber_median",
            "fer",
            "frames",
            "info_len",
            "cp_len",
            "throughput",
            "seed",
        ],
    );
    for ti in 0..c.tau.0.len() {
        let tau = c.tau.0[ti];
        let throughput = coded_throughput(
            c.info_len as f64 / link.code.coded_len(c.info_len) as f64,
            link.constellation.bits_per_symbol(),
            tau,
            c.pulse.rolloff(),
            n,
            cps[ti],
        );
        for ei in 0..c.ebn0_db.len() {
            let rows: Vec<&Vec<f64>> = work
                .iter()
                .zip(&traces)
                .filter(|((a, b, _), _)| *a == ti && *b == ei)
                .map(|(_, tr)| tr)
                .collect();
            for it in 0..c.iterations {
                let bers: Vec<f64> = rows.iter().map(|tr| tr[it]).collect();
                let mean = bers.iter().sum::<f64>() / bers.len() as f64;
                let fer = bers.iter().filter(|&&b| b > 0.0).count() as f64 / bers.len() as f64;
                t.push(vec![
                    tau.into(),
                    c.pulse.rolloff().into(),
                    pulse_label(&c.pulse).into(),
                    c.ebn0_db[ei].into(),
                    c.equalizer.name().into(),
                    (it + 1).into(),
                    mean.into(),
                    median(&bers).into(),
                    fer.into(),
                    c.frames.into(),
                    c.info_len.into(),
                    cps[ti].into(),
                    throughput.into(),
                    seed.into(),
                ]);
            }
        }
    }
    Ok(vec![t])
}
